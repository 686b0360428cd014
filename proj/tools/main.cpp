#include "demsr/cli.hpp"

int main(int argc, char** argv) { return demsr::cli::run(argc, argv); }
