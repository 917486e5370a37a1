#include "logdiff/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Overrides
{
    std::string config;
    std::string out;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> workers;
    bool dump = false;
};

void add_common(CLI::App* sub, Overrides& o)
{
    sub->add_option("--config", o.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides [output] directory)");
    sub->add_option("--paths", o.paths, "number of noise paths (overrides [noise] n_paths)");
    sub->add_option("--workers", o.workers, "worker threads (overrides [output] workers)");
    sub->add_flag("--dump-trajectories", o.dump, "write per-path trajectory and diagnostics CSVs");
}

} // namespace

int main(int argc, char** argv)
{
    using namespace logdiff;

    CLI::App app{"Simulator and verifier for stochastic logarithmic diffusion on an interval"};
    app.set_version_flag("--version", std::string("logdiff ") + LOGDIFF_VERSION + " (config schema " +
                                          std::to_string(kConfigSchemaVersion) + ")");
    app.require_subcommand(1);

    Overrides o;
    using Command = int (*)(const ExperimentConfig&, std::ostream&);
    const std::pair<const char*, Command> table[] = {
        {"simulate", cmd_simulate},
        {"sweep-eps", cmd_sweep_eps},
        {"verify", cmd_verify},
        {"noise-check", cmd_noise_check},
    };
    const char* help[] = {
        "run an ensemble and write a per-path summary",
        "compare trajectories across a decreasing epsilon list",
        "run the configured numerical checks",
        "check the noise trace conditions and regularity",
    };
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(table); ++i) {
        subs.push_back(app.add_subcommand(table[i].first, help[i]));
        add_common(subs.back(), o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(kExitConfigError);
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(o.config);
        if (!o.out.empty())
            cfg.directory = o.out;
        if (o.paths)
            cfg.n_paths = *o.paths;
        if (o.workers)
            cfg.workers = *o.workers;
        if (o.dump)
            cfg.dump_trajectories = true;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed())
            return table[i].second(cfg, std::cerr);
    return kExitConfigError;
}
