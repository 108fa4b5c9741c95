// dimerlab: config-driven experiment runner.
//
// Usage:  dimerlab <subcommand> [--config FILE] [--set section.key=value]...
//                  [--strict]
//
// Subcommands select the experiment kind; every other parameter comes from
// the config file, with --set overrides applied on top.  Exit code is 0 only
// if the run produced no errors and no censored outputs; --strict also turns
// warnings into failures.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <dimerlab/experiment.hpp>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dimer growth and equilibrium experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool strict = false;
    app.add_option("--config", config_path, "configuration file (INI-style sections)")
        ->configurable(false);
    app.add_option("--set", overrides, "override, section.key=value (repeatable)");
    app.add_flag("--strict", strict, "treat warnings as failures");

    // subcommand name -> experiment kind
    const std::vector<std::pair<std::string, std::string>> kinds{
        {"growth", "velocity"},        {"fluctuations", "fluctuations"},
        {"gibbs", "gibbs"},            {"mobility", "mobility"},
        {"mixing", "mixing"},
    };
    for (const auto& [name, kind] : kinds)
        app.add_subcommand(name, "run a " + kind + " experiment")->fallthrough();
    CLI::App* pde = app.add_subcommand("pde", "continuum PDE experiments");
    pde->require_subcommand(1);
    pde->fallthrough();
    for (const char* sub : {"hj", "parabolic", "spde", "hessian", "bump"})
        pde->add_subcommand(sub, std::string("pde_") + sub + " experiment")->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        dimerlab::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = dimerlab::ExperimentConfig::parse(read_file(config_path));
        for (const auto& o : overrides) cfg.set(o);

        std::string kind;
        for (const auto& [name, k] : kinds)
            if (app.get_subcommand(name)->parsed()) kind = k;
        if (pde->parsed())
            for (const char* sub : {"hj", "parabolic", "spde", "hessian", "bump"})
                if (pde->get_subcommand(sub)->parsed()) kind = std::string("pde_") + sub;
        cfg.set("experiment.kind=" + kind);

        const dimerlab::RunManifest manifest = dimerlab::run_experiment(cfg);

        for (const auto& w : manifest.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        for (const auto& o : manifest.outputs)
            std::printf("%s%s  fnv1a:%016llx\n", o.name.c_str(), o.censored ? "  [CENSORED]" : "",
                        static_cast<unsigned long long>(o.checksum));
        if (manifest.censored()) {
            std::fprintf(stderr, "error: run produced censored outputs\n");
            return 1;
        }
        if (strict && !manifest.warnings.empty()) {
            std::fprintf(stderr, "error: warnings present under --strict\n");
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
