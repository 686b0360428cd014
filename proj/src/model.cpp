#include "demsr/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "demsr/error.hpp"

namespace demsr::msm {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model payload I/O assumes a little-endian host");

constexpr const char* kMagic = "MSMDEM";

int keep_channels(int s) { return kWidth / s; }

void check_split_divisor(int s) {
    if (s < 2 || kWidth % s != 0) {
        throw ValueError("split divisor must be >= 2 and divide " + std::to_string(kWidth) +
                         ", got " + std::to_string(s));
    }
}

struct ParamSpec {
    std::string name;
    nn::TensorShape shape;
    int fan_in;  // 0 for biases
};

void conv_specs(std::vector<ParamSpec>& out, const std::string& prefix, int cin, int cout,
                int k) {
    out.push_back({prefix + ".weight", {cout, cin, k, k}, cin * k * k});
    out.push_back({prefix + ".bias", {cout, 1, 1, 1}, 0});
}

void tconv_specs(std::vector<ParamSpec>& out, const std::string& prefix, int cin, int cout) {
    out.push_back({prefix + ".weight", {cin, cout, 4, 4}, cin * 4 * 4});
    out.push_back({prefix + ".bias", {cout, 1, 1, 1}, 0});
}

/// Parameter catalogue for an (n_scales, s) model, in persistence order.
std::vector<ParamSpec> model_specs(int n_scales, int s) {
    std::vector<ParamSpec> specs;
    const int keep = keep_channels(s);
    const int pass = kWidth - keep;
    for (int i = 0; i < n_scales; ++i) {
        const std::string sn = "subnet" + std::to_string(i);
        conv_specs(specs, sn + ".conv_a", 1, kWidth, 3);
        conv_specs(specs, sn + ".conv_b", kWidth, kWidth, 3);
        for (const char* idb : {".idb1", ".idb2"}) {
            const std::string ip = sn + idb;
            conv_specs(specs, ip + ".conv1", kWidth, kWidth, 3);
            conv_specs(specs, ip + ".conv2", kWidth, kWidth, 3);
            conv_specs(specs, ip + ".conv3", kWidth, kWidth, 3);
            conv_specs(specs, ip + ".conv4", pass, kWidth, 3);
            conv_specs(specs, ip + ".conv5", kWidth, kWidth, 3);
            conv_specs(specs, ip + ".conv6", kWidth, kWidth, 3);
            conv_specs(specs, ip + ".bottleneck", keep + kWidth, kWidth, 1);
        }
        tconv_specs(specs, sn + ".out_proj", kWidth, 1);
    }
    return specs;
}

MsmModel build_model(int n_scales, int split_divisor, double input_cell_size,
                     const std::function<Tensor(const ParamSpec&)>& init) {
    if (n_scales < 1) throw ValueError("model needs at least one scale");
    check_split_divisor(split_divisor);
    MsmModel m;
    m.manifest.n_scales = n_scales;
    m.manifest.split_divisor = split_divisor;
    m.manifest.input_cell_size = input_cell_size;
    m.subnets.resize(n_scales);

    auto specs = model_specs(n_scales, split_divisor);
    std::size_t next = 0;
    auto take = [&](Parameter& p) {
        const ParamSpec& spec = specs[next++];
        p = Parameter(spec.name, init(spec));
    };
    auto take_conv = [&](ConvParams& c) {
        take(c.weight);
        take(c.bias);
    };
    for (SubnetParams& sn : m.subnets) {
        take_conv(sn.conv_a);
        take_conv(sn.conv_b);
        for (IdbParams* idb : {&sn.idb1, &sn.idb2}) {
            idb->split_divisor = split_divisor;
            take_conv(idb->conv1);
            take_conv(idb->conv2);
            take_conv(idb->conv3);
            take_conv(idb->conv4);
            take_conv(idb->conv5);
            take_conv(idb->conv6);
            take_conv(idb->bottleneck);
        }
        take_conv(sn.out_proj);
    }
    return m;
}

}  // namespace

std::vector<Parameter*> MsmModel::parameters() {
    std::vector<Parameter*> out;
    auto add_conv = [&](ConvParams& c) {
        out.push_back(&c.weight);
        out.push_back(&c.bias);
    };
    for (SubnetParams& sn : subnets) {
        add_conv(sn.conv_a);
        add_conv(sn.conv_b);
        for (IdbParams* idb : {&sn.idb1, &sn.idb2}) {
            add_conv(idb->conv1);
            add_conv(idb->conv2);
            add_conv(idb->conv3);
            add_conv(idb->conv4);
            add_conv(idb->conv5);
            add_conv(idb->conv6);
            add_conv(idb->bottleneck);
        }
        add_conv(sn.out_proj);
    }
    return out;
}

std::vector<const Parameter*> MsmModel::parameters() const {
    auto mut = const_cast<MsmModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

double MsmModel::stage_cell_size(int stage) const {
    return manifest.input_cell_size / std::pow(2.0, stage);
}

MsmModel make_model(int n_scales, int split_divisor, double input_cell_size, Rng& rng) {
    return build_model(n_scales, split_divisor, input_cell_size, [&](const ParamSpec& spec) {
        if (spec.fan_in == 0) return Tensor(spec.shape);  // biases start at zero
        return nn::he_init(spec.shape, spec.fan_in, rng);
    });
}

MsmModel make_zero_model(int n_scales, int split_divisor, double input_cell_size) {
    return build_model(n_scales, split_divisor, input_cell_size,
                       [](const ParamSpec& spec) { return Tensor(spec.shape); });
}

Tensor idb_forward(const Tensor& x, const IdbParams& p) {
    using namespace nn;
    Tensor h = relu(conv2d(x, p.conv1.weight.value, p.conv1.bias.value));
    h = relu(conv2d(h, p.conv2.weight.value, p.conv2.bias.value));
    h = relu(conv2d(h, p.conv3.weight.value, p.conv3.bias.value));
    auto [keep, pass] = split_channels(h, p.split_divisor);
    Tensor d = relu(conv2d(pass, p.conv4.weight.value, p.conv4.bias.value));
    d = relu(conv2d(d, p.conv5.weight.value, p.conv5.bias.value));
    d = relu(conv2d(d, p.conv6.weight.value, p.conv6.bias.value));
    Tensor cat = concat_channels(keep, d);
    return conv2d(cat, p.bottleneck.weight.value, p.bottleneck.bias.value);
}

Tensor subnet_forward(const Tensor& x, const SubnetParams& p) {
    using namespace nn;
    Tensor h = relu(conv2d(x, p.conv_a.weight.value, p.conv_a.bias.value));
    h = relu(conv2d(h, p.conv_b.weight.value, p.conv_b.bias.value));
    h = idb_forward(h, p.idb1);
    h = idb_forward(h, p.idb2);
    Tensor residual = transposed_conv2d(h, p.out_proj.weight.value, p.out_proj.bias.value);
    return add(upsample2x_nn(x), residual);
}

std::vector<Tensor> msm_forward(const Tensor& x, const MsmModel& m, int first_stage,
                                int n_stages) {
    const int total = static_cast<int>(m.subnets.size());
    if (n_stages < 0) n_stages = total - first_stage;
    if (first_stage < 0 || n_stages < 1 || first_stage + n_stages > total) {
        throw ValueError("invalid stage window [" + std::to_string(first_stage) + ", " +
                         std::to_string(first_stage + n_stages) + ") for a " +
                         std::to_string(total) + "-stage model");
    }
    if (x.shape.c != 1) throw ShapeError("msm_forward expects a 1-channel input");
    std::vector<Tensor> outputs;
    outputs.reserve(n_stages);
    Tensor cur = x;
    for (int i = 0; i < n_stages; ++i) {
        cur = subnet_forward(cur, m.subnets[first_stage + i]);
        outputs.push_back(cur);
    }
    return outputs;
}

Tape::Id idb_forward(Tape& t, Tape::Id x, IdbParams& p) {
    auto conv = [&](Tape::Id in, ConvParams& c) {
        return t.conv2d(in, t.param(c.weight), t.param(c.bias));
    };
    Tape::Id h = t.relu(conv(x, p.conv1));
    h = t.relu(conv(h, p.conv2));
    h = t.relu(conv(h, p.conv3));
    auto [keep, pass] = t.split_channels(h, p.split_divisor);
    Tape::Id d = t.relu(conv(pass, p.conv4));
    d = t.relu(conv(d, p.conv5));
    d = t.relu(conv(d, p.conv6));
    Tape::Id cat = t.concat_channels(keep, d);
    return conv(cat, p.bottleneck);
}

Tape::Id subnet_forward(Tape& t, Tape::Id x, SubnetParams& p) {
    auto conv = [&](Tape::Id in, ConvParams& c) {
        return t.conv2d(in, t.param(c.weight), t.param(c.bias));
    };
    Tape::Id h = t.relu(conv(x, p.conv_a));
    h = t.relu(conv(h, p.conv_b));
    h = idb_forward(t, h, p.idb1);
    h = idb_forward(t, h, p.idb2);
    Tape::Id residual =
        t.transposed_conv2d(h, t.param(p.out_proj.weight), t.param(p.out_proj.bias));
    return t.add(t.upsample2x_nn(x), residual);
}

std::vector<Tape::Id> msm_forward(Tape& t, Tape::Id x, MsmModel& m) {
    if (m.subnets.empty()) throw ValueError("model has no stages");
    std::vector<Tape::Id> outputs;
    outputs.reserve(m.subnets.size());
    Tape::Id cur = x;
    for (SubnetParams& sn : m.subnets) {
        cur = subnet_forward(t, cur, sn);
        outputs.push_back(cur);
    }
    return outputs;
}

double multiscale_loss(std::span<const Tensor> recons, std::span<const Tensor> truths) {
    if (recons.size() != truths.size()) {
        throw ShapeError("multiscale_loss: " + std::to_string(recons.size()) +
                         " reconstructions vs " + std::to_string(truths.size()) + " truths");
    }
    if (recons.empty()) throw ValueError("multiscale_loss: empty scale list");
    double total = 0.0;
    for (std::size_t i = 0; i < recons.size(); ++i) {
        total += nn::mean_abs_error(recons[i], truths[i]);
    }
    return total;
}

Tape::Id multiscale_loss(Tape& t, std::span<const Tape::Id> recons, std::vector<Tensor> truths) {
    if (recons.size() != truths.size()) {
        throw ShapeError("multiscale_loss: scale count mismatch");
    }
    if (recons.empty()) throw ValueError("multiscale_loss: empty scale list");
    Tape::Id total = t.l1_loss(recons[0], std::move(truths[0]));
    for (std::size_t i = 1; i < recons.size(); ++i) {
        total = t.add(total, t.l1_loss(recons[i], std::move(truths[i])));
    }
    return total;
}

void save_model(const MsmModel& m, std::ostream& out) {
    nlohmann::json manifest;
    manifest["n"] = m.manifest.n_scales;
    manifest["s"] = m.manifest.split_divisor;
    manifest["cell_size"] = m.manifest.input_cell_size;
    manifest["training"] = m.manifest.training;
    nlohmann::json params = nlohmann::json::array();
    auto ptrs = m.parameters();
    for (const Parameter* p : ptrs) {
        params.push_back({{"name", p->name},
                          {"shape", {p->value.shape.n, p->value.shape.c, p->value.shape.h,
                                     p->value.shape.w}}});
    }
    manifest["params"] = std::move(params);

    out << kMagic << ' ' << kModelFormatVersion << '\n';
    out << manifest.dump() << '\n';
    for (const Parameter* p : ptrs) {
        out.write(reinterpret_cast<const char*>(p->value.v.data()),
                  static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
    }
}

void save_model_file(const MsmModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_model(m, out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

MsmModel load_model(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw IoError("model file: missing header line");
    std::istringstream hs(header);
    std::string magic;
    int version = -1;
    hs >> magic >> version;
    if (magic != kMagic) throw ParseError("model file: bad magic '" + magic + "'");
    if (version != kModelFormatVersion) {
        throw IoError("model file: unsupported format version " + std::to_string(version) +
                      " (expected " + std::to_string(kModelFormatVersion) + ")");
    }

    std::string manifest_line;
    if (!std::getline(in, manifest_line)) throw IoError("model file: missing manifest line");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: manifest is not valid JSON: ") + e.what());
    }

    int n_scales, s;
    double cell_size;
    std::string training;
    try {
        n_scales = manifest.at("n").get<int>();
        s = manifest.at("s").get<int>();
        cell_size = manifest.at("cell_size").get<double>();
        training = manifest.value("training", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: manifest field error: ") + e.what());
    }

    MsmModel m = make_zero_model(n_scales, s, cell_size);
    m.manifest.training = training;

    // The manifest's parameter list must match the architecture exactly.
    auto ptrs = m.parameters();
    const auto& plist = manifest.at("params");
    if (plist.size() != ptrs.size()) {
        throw ShapeError("model file: manifest lists " + std::to_string(plist.size()) +
                         " parameters, architecture has " + std::to_string(ptrs.size()));
    }
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        const auto& entry = plist[i];
        const std::string name = entry.at("name").get<std::string>();
        const auto sh = entry.at("shape");
        nn::TensorShape shape{sh.at(0).get<int>(), sh.at(1).get<int>(), sh.at(2).get<int>(),
                              sh.at(3).get<int>()};
        if (name != ptrs[i]->name || !(shape == ptrs[i]->value.shape)) {
            throw ShapeError("model file: parameter " + std::to_string(i) + " is " + name + " " +
                             shape.str() + ", expected " + ptrs[i]->name + " " +
                             ptrs[i]->value.shape.str());
        }
    }
    for (Parameter* p : ptrs) {
        const std::streamsize bytes =
            static_cast<std::streamsize>(p->value.v.size() * sizeof(double));
        in.read(reinterpret_cast<char*>(p->value.v.data()), bytes);
        if (in.gcount() != bytes) {
            throw IoError("model file: truncated payload while reading " + p->name);
        }
    }
    char extra;
    if (in.read(&extra, 1); in.gcount() != 0) {
        throw IoError("model file: trailing bytes after parameter payload");
    }
    return m;
}

MsmModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_model(in);
}

}  // namespace demsr::msm
