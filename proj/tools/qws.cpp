#include <string>

#include <CLI11.hpp>

#include "qws/cli.hpp"
#include "qws/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qws: work statistics of the linearly dragged quantum oscillator"};
    app.set_version_flag("--version", qws::kVersion);
    app.require_subcommand(1);

    qws::RunConfig cfg;
    std::string config_path;
    std::string dist_definition;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value configuration file");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--format", cfg.format, "output format: csv or json");
        sub->add_option("--seed", cfg.seed, "master seed for Monte Carlo");
        sub->add_option("--eta-min", cfg.eta_min, "smallest eta value");
        sub->add_option("--eta-max", cfg.eta_max, "largest eta value");
        sub->add_option("--eta-count", cfg.eta_count, "number of eta grid points");
        sub->add_option("--dim", cfg.dim, "Fock dimension (0 = auto)");
        sub->add_option("--steps", cfg.steps, "propagator slice count");
        sub->add_option("--samples", cfg.samples, "Monte Carlo sample count");
        sub->add_option("--mass", cfg.protocol.mass, "particle mass");
        sub->add_option("--omega", cfg.protocol.omega, "trap frequency");
        sub->add_option("--drag-speed", cfg.protocol.drag_speed, "well drag speed");
        sub->add_option("--tau-prime", cfg.protocol.pre_time, "pre-evolution duration");
        sub->add_option("--tau", cfg.protocol.duration, "work-stage duration");
        sub->add_option("--beta", cfg.protocol.beta, "inverse temperature");
        sub->add_option("--hbar", cfg.protocol.hbar, "Planck constant");
    };

    CLI::App* cf = app.add_subcommand("cf", "characteristic functions, all definitions");
    CLI::App* dist = app.add_subcommand("dist", "work quasi-distributions");
    dist->add_option("--definition", dist_definition, "TPM, FCS or MH (default: all)");
    CLI::App* fig1 = app.add_subcommand("fig1", "classical curve and hbar-expansion series");
    CLI::App* scan = app.add_subcommand("scan-hbar", "hbar-expansion coefficient table");
    CLI::App* jarz = app.add_subcommand("jarzynski", "generalized Jarzynski checks");
    CLI::App* classical = app.add_subcommand("classical", "closed-form vs Monte Carlo classical CF");
    CLI::App* measure = app.add_subcommand("measure", "projective-measurement dephasing study");
    for (CLI::App* sub : {cf, dist, fig1, scan, jarz, classical, measure})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

    // file first, then explicit flags override it
    if (!config_path.empty()) {
        try {
            qws::RunConfig file_cfg;
            file_cfg.load_file(config_path);
            const qws::RunConfig flag_values = cfg;
            cfg = file_cfg;
            CLI::App* sub = app.get_subcommands().front();
            const auto overridden = [&](const std::string& name) {
                return sub->count(name) > 0;
            };
            if (overridden("--out")) cfg.out_dir = flag_values.out_dir;
            if (overridden("--format")) cfg.format = flag_values.format;
            if (overridden("--seed")) cfg.seed = flag_values.seed;
            if (overridden("--eta-min")) cfg.eta_min = flag_values.eta_min;
            if (overridden("--eta-max")) cfg.eta_max = flag_values.eta_max;
            if (overridden("--eta-count")) cfg.eta_count = flag_values.eta_count;
            if (overridden("--dim")) cfg.dim = flag_values.dim;
            if (overridden("--steps")) cfg.steps = flag_values.steps;
            if (overridden("--samples")) cfg.samples = flag_values.samples;
            if (overridden("--mass")) cfg.protocol.mass = flag_values.protocol.mass;
            if (overridden("--omega")) cfg.protocol.omega = flag_values.protocol.omega;
            if (overridden("--drag-speed"))
                cfg.protocol.drag_speed = flag_values.protocol.drag_speed;
            if (overridden("--tau-prime"))
                cfg.protocol.pre_time = flag_values.protocol.pre_time;
            if (overridden("--tau")) cfg.protocol.duration = flag_values.protocol.duration;
            if (overridden("--beta")) cfg.protocol.beta = flag_values.protocol.beta;
            if (overridden("--hbar")) cfg.protocol.hbar = flag_values.protocol.hbar;
        } catch (const qws::ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }

    return qws::run_command(app.get_subcommands().front()->get_name(), dist_definition,
                            cfg);
}
