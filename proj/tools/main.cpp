#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "nphmm/density_estimation.hpp"
#include "nphmm/harness.hpp"
#include "nphmm/io.hpp"
#include "nphmm/model.hpp"
#include "nphmm/moments.hpp"
#include "nphmm/separation.hpp"
#include "nphmm/simulate.hpp"
#include "nphmm/wavelet.hpp"

namespace {

using namespace nphmm;

// Model/experiment options shared by every subcommand. Each flag becomes a
// config override; a --config file supplies the base entries.
struct ConfigCli {
    std::string config_path;
    std::vector<KeyValueLine> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key-value experiment config file");
        add_kv(cmd, "--p", "p", "transition probability out of state 0");
        add_kv(cmd, "--q", "q", "transition probability out of state 1");
        add_kv(cmd, "--D", "D", "dyadic grid resolution exponent");
        add_kv(cmd, "--f0", "f0",
               "state-0 density: uniform | step <a> | besov <s> <c> | file <path>");
        add_kv(cmd, "--f1", "f1", "state-1 density; also offset-step <a> (f0 plus a step)");
        add_kv(cmd, "--model-file", "model_file", "model record file (overrides p/q/f0/f1)");
        add_kv(cmd, "--n", "n", "path lengths, comma or space separated");
        add_kv(cmd, "--reps", "reps", "Monte Carlo replications per n");
        add_kv(cmd, "--seed", "seed", "master seed (or one row's seed to reproduce it)");
        add_kv(cmd, "--estimator", "estimator", "q | smooth | rough | direction");
        add_kv(cmd, "--M", "M", "direction index-set depth");
        add_kv(cmd, "--J", "J", "coefficient tree start level");
        add_kv(cmd, "--tau", "tau", "direction clamp height (<=0: derived)");
        add_kv(cmd, "--gamma", "gamma", "threshold constant (<=0: default shape)");
        add_kv(cmd, "--gamma-scale", "gamma_scale", "multiplier on the default threshold");
        add_kv(cmd, "--t-check", "t_check", "final clamp height (<=0: model sup bound)");
        add_kv(cmd, "--s0", "s0", "smoothness index reported for f0");
        add_kv(cmd, "--s1", "s1", "smoothness index reported for f1");
        add_kv(cmd, "--direction", "direction", "oracle | split3n | file:<path>");
        add_kv(cmd, "--out", "out", "output path (default: stdout)");
        add_kv(cmd, "--threads", "threads", "worker threads for sweeps");
        add_kv(cmd, "--timing", "timing", "on | off: record wall_time per replication");
    }

    ExperimentConfig resolve() const {
        if (config_path.empty()) return load_config({}, overrides);
        return load_config_file(config_path, overrides);
    }

  private:
    void add_kv(CLI::App* cmd, const std::string& flag, std::string key,
                const std::string& desc) {
        cmd->add_option_function<std::string>(
            flag,
            [this, key = std::move(key)](const std::string& v) {
                overrides.push_back({key, v, 0});
            },
            desc);
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

// One replication's path and direction, matching the sweep's conventions so a
// row's seed reproduces the row.
struct SingleRun {
    SamplePath path;
    GridFunction direction;
    std::vector<std::string> flags;
};

SingleRun resolve_single(const ExperimentConfig& cfg) {
    const std::size_t n = cfg.n_values.front();
    const double tau = cfg.tau > 0.0 ? cfg.tau : default_tau(cfg.model);
    SingleRun run;
    switch (cfg.direction) {
        case DirectionSource::oracle: {
            run.path = sample_path(cfg.model, n, cfg.seed);
            const ReparamPoint rp = reparametrize(cfg.model);
            if (rp.contrast_defined) {
                run.direction = rp.contrast;
            } else {
                run.direction =
                    GridFunction(rp.mix.level, std::vector<double>(rp.mix.cells(), 0.0));
                run.flags.push_back("contrast_undefined");
            }
            break;
        }
        case DirectionSource::file:
            run.path = sample_path(cfg.model, n, cfg.seed);
            run.direction = read_grid_file(cfg.direction_file);
            break;
        case DirectionSource::split3n: {
            auto [train, estimate] = split_3n(cfg.model, n, cfg.seed);
            const SeparatingDirection sd =
                psi_tilde_from_path(train, cfg.max_mother_level, tau, cfg.start_level);
            if (sd.degenerate) run.flags.push_back("direction_degenerate");
            if (sd.clamp_active) run.flags.push_back("direction_clamped");
            run.direction = sd.grid;
            run.path = std::move(estimate);
            break;
        }
    }
    return run;
}

std::string flags_string(const std::vector<std::string>& flags) {
    if (flags.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i) out += '|';
        out += flags[i];
    }
    return out;
}

int run_simulate(const ExperimentConfig& cfg) {
    const std::size_t n = cfg.n_values.front();
    const SamplePath path = sample_path(cfg.model, n, cfg.seed);
    std::ofstream file;
    if (!cfg.out.empty()) file = open_out(cfg.out);
    std::ostream& os = cfg.out.empty() ? std::cout : file;
    os << "t,x,y\n";
    for (std::size_t t = 0; t < path.size(); ++t)
        os << t << ',' << static_cast<int>(path.hidden[t]) << ','
           << format_double(path.observed[t]) << "\n";
    return 0;
}

int run_direction(const ExperimentConfig& cfg) {
    const std::size_t n = cfg.n_values.front();
    const double tau = cfg.tau > 0.0 ? cfg.tau : default_tau(cfg.model);
    auto [train, estimate] = split_3n(cfg.model, n, cfg.seed);
    (void)estimate;
    const SeparatingDirection sd =
        psi_tilde_from_path(train, cfg.max_mother_level, tau, cfg.start_level);

    std::ostream& report = cfg.out.empty() ? std::cerr : std::cout;
    report << "n " << n << "\n";
    report << "seed " << cfg.seed << "\n";
    report << "M " << cfg.max_mother_level << "\n";
    report << "tau " << format_double(tau) << "\n";
    report << "leading_eigenvalue " << format_double(sd.leading_eigenvalue) << "\n";
    report << "degenerate " << (sd.degenerate ? 1 : 0) << "\n";
    report << "clamp_active " << (sd.clamp_active ? 1 : 0) << "\n";

    const ReparamPoint rp = reparametrize(cfg.model);
    if (rp.contrast_defined) {
        report << "alignment " << format_double(std::fabs(l2_inner(sd.grid, rp.contrast)))
               << "\n";
        const int depth = cfg.model.f0.level - 1;
        const double radius = std::max(besov_norm(analyze(cfg.model.f0, depth), cfg.s0),
                                       besov_norm(analyze(cfg.model.f1, depth), cfg.s1));
        const bool enough = direction_level_sufficient(
            cfg.max_mother_level, std::min(cfg.s0, cfg.s1), rp.separation, radius);
        report << "depth_sufficient " << (enough ? 1 : 0) << "\n";
    } else {
        report << "alignment nan\n";
    }

    if (cfg.out.empty()) {
        write_grid_record(std::cout, sd.grid);
    } else {
        write_grid_file(cfg.out, sd.grid);
    }
    return 0;
}

int run_estimate_q(const ExperimentConfig& cfg) {
    SingleRun run = resolve_single(cfg);
    const MomentTriple m = moment_triple(run.path, run.direction);
    const QEstimate qe = q_estimate(m);
    if (qe.m1_zero) run.flags.push_back("m1_zero");
    if (qe.v_zero) run.flags.push_back("v_zero");
    const std::array<double, 4> q_true = transition_matrix(cfg.model.p, cfg.model.q);

    std::ofstream file;
    if (!cfg.out.empty()) file = open_out(cfg.out);
    std::ostream& os = cfg.out.empty() ? std::cout : file;
    os << "n " << run.path.size() << "\n";
    os << "seed " << cfg.seed << "\n";
    os << "skew_hat " << format_double(qe.skew_hat) << "\n";
    os << "persistence_hat " << format_double(qe.persistence_hat) << "\n";
    os << "m1 " << format_double(qe.m1) << "\n";
    os << "m2 " << format_double(qe.m2) << "\n";
    os << "m3 " << format_double(qe.m3) << "\n";
    os << "q";
    for (double v : qe.q) os << ' ' << format_double(v);
    os << "\n";
    os << "q_raw";
    for (double v : qe.q_raw) os << ' ' << format_double(v);
    os << "\n";
    os << "loss_raw " << format_double(frobenius_loss_min_perm(qe.q_raw, q_true)) << "\n";
    os << "loss_clamped " << format_double(frobenius_loss_min_perm(qe.q, q_true)) << "\n";
    os << "flags " << flags_string(run.flags) << "\n";
    return 0;
}

int run_estimate_densities(const ExperimentConfig& cfg) {
    SingleRun run = resolve_single(cfg);
    const double tau = cfg.tau > 0.0 ? cfg.tau : default_tau(cfg.model);
    const double gamma =
        cfg.gamma > 0.0 ? cfg.gamma : default_gamma(cfg.model, cfg.gamma_scale);
    const double t_check = cfg.t_check > 0.0 ? cfg.t_check : default_t_check(cfg.model);
    const bool rough = cfg.estimator == SweepEstimator::rough;

    const auto pair = rough ? rough_estimate(run.path, run.direction, gamma, tau, t_check,
                                             cfg.start_level)
                            : smooth_estimate(run.path, run.direction, gamma, tau, t_check,
                                              cfg.start_level);

    const BlockLayout layout = block_layout(run.path.size(), tau, cfg.start_level);
    const CoefficientEstimates ce = coefficient_estimates(run.path, run.direction, layout);
    if (ce.m1_zero) run.flags.push_back("m1_zero");
    if (ce.m2_nonpos) run.flags.push_back("m2_nonpos");
    if (ce.skew_extreme) run.flags.push_back("skew_extreme");

    const PairLoss fin = l2_loss_min_perm(pair.first.truncated, pair.second.truncated,
                                          cfg.model.f0, cfg.model.f1);
    std::size_t kept = 0;
    for (const auto& d : pair.first.trace)
        kept += static_cast<std::size_t>(d.primary_kept || (d.has_secondary && d.secondary_kept));

    std::ostream& report = cfg.out.empty() ? std::cerr : std::cout;
    report << "estimator " << (rough ? "rough" : "smooth") << "\n";
    report << "n " << run.path.size() << "\n";
    report << "seed " << cfg.seed << "\n";
    report << "gamma " << format_double(gamma) << "\n";
    report << "tau " << format_double(tau) << "\n";
    report << "t_check " << format_double(t_check) << "\n";
    report << "coarse_level " << layout.coarse_level << "\n";
    report << "top_level " << layout.top_level << "\n";
    report << "blocks_kept " << kept << "\n";
    report << "blocks_total " << pair.first.trace.size() << "\n";
    report << "loss_f0 " << format_double(fin.loss_f0) << "\n";
    report << "loss_f1 " << format_double(fin.loss_f1) << "\n";
    report << "swapped " << (fin.swapped ? 1 : 0) << "\n";
    report << "flags " << flags_string(run.flags) << "\n";

    if (cfg.out.empty()) {
        // one order-free key-value record; grid records can't share a stream
        auto emit = [](const char* prefix, const GridFunction& g) {
            std::cout << prefix << "_D " << g.level << "\n" << prefix << "_values";
            for (double v : g.values) std::cout << ' ' << format_double(v);
            std::cout << "\n";
        };
        emit("plus", pair.first.truncated);
        emit("minus", pair.second.truncated);
    } else {
        write_grid_file(cfg.out + ".plus", pair.first.truncated);
        write_grid_file(cfg.out + ".minus", pair.second.truncated);
    }
    return 0;
}

int run_sweep_cmd(const ExperimentConfig& cfg) {
    const std::vector<RiskRecord> records = run_sweep(cfg);
    if (cfg.out.empty()) {
        write_csv(std::cout, cfg, records);
    } else {
        std::ofstream os = open_out(cfg.out);
        write_csv(os, cfg, records);
    }
    return 0;
}

int run_fit_rate(const std::string& in, const std::string& estimator,
                 const std::string& column) {
    if (column != "raw" && column != "final")
        throw std::invalid_argument("--column must be raw or final");
    const RateFit fit = fit_rate_csv(in, estimator, column == "raw");
    std::cout << "estimator " << estimator << "\n";
    std::cout << "column " << column << "\n";
    std::cout << "points " << fit.points << "\n";
    std::cout << "slope " << format_double(fit.slope) << "\n";
    std::cout << "stderr_slope " << format_double(fit.stderr_slope) << "\n";
    std::cout << "intercept " << format_double(fit.intercept) << "\n";
    return 0;
}

int run_oracle_check(const ExperimentConfig& cfg, int max_cube_level, double m3_corruption) {
    OracleCheckOptions options;
    options.max_cube_level = max_cube_level;
    options.m3_corruption = m3_corruption;
    const OracleReport report = oracle_check(cfg.model, options);
    print_report(std::cout, report);
    return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-state nonparametric HMM estimation toolkit"};
    app.require_subcommand(1);

    ConfigCli sim_cli, dir_cli, q_cli, dens_cli, sweep_cli, oracle_cli;

    CLI::App* sim = app.add_subcommand("simulate", "sample a stationary path, CSV t,x,y");
    sim_cli.attach(sim);
    CLI::App* dir = app.add_subcommand(
        "direction", "estimate the separating direction from a training segment");
    dir_cli.attach(dir);
    CLI::App* estq =
        app.add_subcommand("estimate-q", "transition matrix from grouped moments");
    q_cli.attach(estq);
    CLI::App* dens = app.add_subcommand("estimate-densities",
                                        "block-thresholded emission density estimates");
    dens_cli.attach(dens);
    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo risk sweep, CSV out");
    sweep_cli.attach(sweep);

    CLI::App* fit = app.add_subcommand("fit-rate", "OLS rate fit over a sweep CSV");
    std::string fit_in, fit_estimator, fit_column = "raw";
    fit->add_option("--in", fit_in, "sweep CSV path")->required();
    fit->add_option("--estimator", fit_estimator, "estimator prefix to pool (e.g. smooth:)")
        ->required();
    fit->add_option("--column", fit_column, "raw | final (default raw)");

    CLI::App* oracle = app.add_subcommand(
        "oracle-check", "closed-form vs quadrature self-checks for the configured model");
    oracle_cli.attach(oracle);
    int max_cube_level = 8;
    double m3_corruption = 0.0;
    oracle->add_option("--max-cube-level", max_cube_level,
                       "full triple-quadrature resolution limit");
    oracle->add_option("--m3-corruption", m3_corruption,
                       "negative-control offset on the closed-form third moment");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return run_simulate(sim_cli.resolve());
        if (*dir) return run_direction(dir_cli.resolve());
        if (*estq) return run_estimate_q(q_cli.resolve());
        if (*dens) return run_estimate_densities(dens_cli.resolve());
        if (*sweep) return run_sweep_cmd(sweep_cli.resolve());
        if (*fit) return run_fit_rate(fit_in, fit_estimator, fit_column);
        if (*oracle) return run_oracle_check(oracle_cli.resolve(), max_cube_level, m3_corruption);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
