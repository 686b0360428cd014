#include "demsr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace demsr {

namespace {

std::atomic<int> g_threads{0};  // 0 = not set yet, resolve lazily

int resolve_threads() {
    int t = g_threads.load(std::memory_order_relaxed);
    if (t > 0) return t;
    unsigned hw = std::thread::hardware_concurrency();
    t = hw == 0 ? 1 : static_cast<int>(hw);
    g_threads.store(t, std::memory_order_relaxed);
    return t;
}

// Persistent pool; workers pick up one contiguous chunk each per job.
class Pool {
  public:
    static Pool& instance() {
        static Pool pool;
        return pool;
    }

    void run(int nworkers, std::size_t n,
             const std::function<void(std::size_t, std::size_t)>& fn) {
        {
            std::lock_guard lock(job_mutex_);
            ensure_workers(nworkers - 1);
            fn_ = &fn;
            total_ = n;
            nchunks_ = nworkers;
            next_chunk_.store(0, std::memory_order_relaxed);
            pending_ = static_cast<int>(workers_.size());
            ++generation_;
            cv_start_.notify_all();
        }

        work();  // calling thread participates as chunk consumer

        std::unique_lock lock(job_mutex_);
        cv_done_.wait(lock, [&] { return pending_ == 0; });
        fn_ = nullptr;
    }

  private:
    Pool() = default;
    ~Pool() {
        {
            std::lock_guard lock(job_mutex_);
            stop_ = true;
            ++generation_;
            cv_start_.notify_all();
        }
        for (auto& t : workers_) t.join();
    }

    void ensure_workers(int n) {
        while (static_cast<int>(workers_.size()) < n) {
            workers_.emplace_back([this, gen = generation_] { worker_loop(gen); });
        }
    }

    void worker_loop(std::uint64_t seen) {
        std::unique_lock lock(job_mutex_);
        for (;;) {
            cv_start_.wait(lock, [&] { return generation_ != seen || stop_; });
            if (stop_) return;
            seen = generation_;
            lock.unlock();
            work();
            lock.lock();
            if (--pending_ == 0) cv_done_.notify_all();
        }
    }

    void work() {
        const std::size_t chunk = (total_ + nchunks_ - 1) / nchunks_;
        for (;;) {
            std::size_t c = next_chunk_.fetch_add(1, std::memory_order_relaxed);
            std::size_t begin = c * chunk;
            if (begin >= total_) break;
            (*fn_)(begin, std::min(begin + chunk, total_));
        }
    }

    std::mutex job_mutex_;
    std::condition_variable cv_start_, cv_done_;
    std::vector<std::thread> workers_;
    const std::function<void(std::size_t, std::size_t)>* fn_ = nullptr;
    std::size_t total_ = 0, nchunks_ = 1;
    std::atomic<std::size_t> next_chunk_{0};
    std::uint64_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

}  // namespace

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

int threads() { return resolve_threads(); }

void parallel_for_chunks(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    int t = resolve_threads();
    if (t <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    Pool::instance().run(std::min<std::size_t>(t, n), n, fn);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    parallel_for_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

}  // namespace demsr
