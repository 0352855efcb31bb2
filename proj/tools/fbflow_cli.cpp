#include "fbflow/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Certify, integrate and verify forward-backward and gradient flows"};
    std::string command;
    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool quiet = false;
    app.add_option("command", command, "certify | simulate | verify | sweep | list")
        ->required()
        ->check(CLI::IsMember({"certify", "simulate", "verify", "sweep", "list"}));
    app.add_option("--config", config, "JSON experiment config");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "seed for random initial points and audits");
    app.add_flag("--quiet", quiet, "suppress progress output");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fbflow::kExitMalformed;
    }

    fbflow::RunOptions opts;
    opts.out_dir = out_dir;
    opts.quiet = quiet;
    if (*seed_opt) opts.seed = seed;
    std::optional<std::filesystem::path> cfg;
    if (!config.empty()) cfg = config;
    return fbflow::execute(command, cfg, opts, std::cout, std::cerr);
}
