#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "starea/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"stochastic area and winding experiments"};
    std::string experiment, config_path, out;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::vector<std::string> overrides;
    bool list = false;
    app.add_option("--experiment,-e", experiment, "experiment name");
    app.add_option("--config,-c", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    app.add_option("--out,-o", out, "output directory");
    app.add_option("--threads,-j", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--override", overrides, "key=value, repeatable")->take_all();
    app.add_flag("--list", list, "list experiments and their defaults");
    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (auto& name : starea::detail::experiment_names())
            std::cout << name << " " << starea::detail::experiment_defaults(name).dump() << "\n";
        return 0;
    }
    try {
        nlohmann::ordered_json doc = nlohmann::ordered_json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path, std::ios::binary);
            std::stringstream ss;
            ss << f.rdbuf();
            doc = starea::parse_document(ss.str());
        }
        if (!experiment.empty()) doc["experiment"] = experiment;
        if (*seed_opt) doc["master_seed"] = seed;
        if (!out.empty()) doc["output_dir"] = out;
        if (threads) doc["threads"] = threads;
        for (auto& kv : overrides) starea::apply_override(doc, kv);
        auto spec = starea::detail::resolve_spec(doc);
        auto rep = starea::run_experiment(spec);
        for (auto& c : rep.checks)
            std::printf("%-4s %s: %.6g %s %.6g\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                        c.threshold);
        for (auto& e : rep.errors) std::printf("FAIL numeric error: %s\n", e.c_str());
        std::printf("%s in %.1f s, artifacts in %s\n", rep.passed() ? "passed" : "failed", rep.wall_time,
                    rep.directory.string().c_str());
        return rep.passed() ? 0 : 1;
    } catch (const starea::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
