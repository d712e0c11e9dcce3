#include "nphmm/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nphmm/moments.hpp"
#include "nphmm/rng.hpp"
#include "nphmm/separation.hpp"
#include "nphmm/simulate.hpp"

namespace nphmm {

// ---- model zoo ------------------------------------------------------------

GridFunction half_split(int level) {
    if (level < 1) throw std::invalid_argument("half_split: need level >= 1");
    GridFunction out(level, std::vector<double>(cell_count(level), 1.0));
    for (std::size_t i = out.cells() / 2; i < out.cells(); ++i) out.values[i] = -1.0;
    return out;
}

DensityGrid step_density(int level, double amplitude) {
    if (!(std::fabs(amplitude) <= 1.0))
        throw std::invalid_argument("step_density: |amplitude| must be <= 1");
    DensityGrid out = uniform_density(level);
    const GridFunction h = half_split(level);
    for (std::size_t i = 0; i < out.cells(); ++i) out.values[i] += amplitude * h.values[i];
    require_density(out);
    return out;
}

DensityGrid rough_density(int level, double s, double amplitude) {
    CoeffTree tree = zero_tree(0, level - 1);
    tree.father[0] = 1.0;
    for (int j = 0; j < level; ++j) {
        const double mag = amplitude * std::pow(2.0, -j * (s + 0.5));
        auto& lv = tree.mother[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < lv.size(); ++k)
            lv[k] = (k % 2 == 0) ? mag : -mag;
    }
    DensityGrid out = synthesize(tree, level);
    require_density(out);
    return out;
}

// ---- defaults ---------------------------------------------------------------

double default_gamma(const ModelParams& theta, double scale) {
    const double sup = std::max(sup_norm(theta.f0), sup_norm(theta.f1));
    const double gap = spectral_gap(theta);
    return scale * std::sqrt(sup) * std::max(std::sqrt(sup / gap), 1.0 / gap);
}

double default_tau(const ModelParams& theta) {
    const ReparamPoint rp = reparametrize(theta);
    return rp.contrast_defined ? std::max(1.0, sup_norm(rp.contrast)) : 1.0;
}

double default_t_check(const ModelParams& theta) {
    return std::max(sup_norm(theta.f0), sup_norm(theta.f1));
}

// ---- config ------------------------------------------------------------------

namespace {

DensityGrid density_from_descriptor(const std::string& desc, int level,
                                    const DensityGrid* f0_for_offset) {
    const auto tokens = split_ws(desc);
    if (tokens.empty()) throw std::invalid_argument("empty density descriptor");
    const std::string& kind = tokens[0];
    auto want = [&](std::size_t n) {
        if (tokens.size() != n + 1)
            throw std::invalid_argument("density descriptor '" + kind + "' takes " +
                                        std::to_string(n) + " argument(s): got '" + desc +
                                        "'");
    };
    auto num = [&](std::size_t i) {
        std::size_t used = 0;
        const double v = std::stod(tokens[i], &used);
        if (used != tokens[i].size())
            throw std::invalid_argument("bad number in density descriptor: '" + desc + "'");
        return v;
    };
    if (kind == "uniform") {
        want(0);
        return uniform_density(level);
    }
    if (kind == "step") {
        want(1);
        return step_density(level, num(1));
    }
    if (kind == "besov") {
        want(2);
        return rough_density(level, num(1), num(2));
    }
    if (kind == "offset-step") {
        want(1);
        if (f0_for_offset == nullptr)
            throw std::invalid_argument("offset-step is only valid for f1 (offsets f0)");
        DensityGrid out = *f0_for_offset;
        const GridFunction h = half_split(level);
        const double a = num(1);
        for (std::size_t i = 0; i < out.cells(); ++i) out.values[i] += a * h.values[i];
        require_density(out);
        return out;
    }
    if (kind == "file") {
        want(1);
        GridFunction g = read_grid_file(tokens[1]);
        require_density(g);
        return g;
    }
    throw std::invalid_argument("unknown density descriptor '" + kind + "'");
}

const std::set<std::string> kConfigKeys = {
    "p",   "q",     "D",        "f0",    "f1",          "model_file", "n",
    "reps", "seed",  "estimator", "M",     "J",           "tau",        "gamma",
    "gamma_scale",   "t_check",  "s0",    "s1",          "direction",  "out",
    "threads",       "timing"};

}  // namespace

ExperimentConfig load_config(const std::vector<KeyValueLine>& file_entries,
                             const std::vector<KeyValueLine>& overrides) {
    for (const auto& kv : file_entries) {
        if (!kConfigKeys.count(kv.key))
            throw std::invalid_argument("unknown config key '" + kv.key + "' at line " +
                                        std::to_string(kv.line));
    }
    // later entries win; overrides come last
    std::vector<KeyValueLine> merged = file_entries;
    merged.insert(merged.end(), overrides.begin(), overrides.end());
    auto last_of = [&merged](const std::string& key) -> const KeyValueLine* {
        const KeyValueLine* found = nullptr;
        for (const auto& kv : merged)
            if (kv.key == key) found = &kv;
        return found;
    };

    ExperimentConfig cfg;
    int level = 10;
    if (const auto* kv = last_of("D")) {
        const long long d = parse_int_field(*kv);
        if (d < 1 || d > 20) throw std::invalid_argument("config D out of range [1,20]");
        level = static_cast<int>(d);
    }

    if (const auto* kv = last_of("model_file")) {
        cfg.model = read_model_file(kv->value);
        cfg.f0_desc = "file " + kv->value;
        cfg.f1_desc = cfg.f0_desc;
    } else {
        cfg.model.p = 0.5;
        cfg.model.q = 0.5;
        std::string f0_desc = "uniform", f1_desc = "uniform";
        if (const auto* kv = last_of("f0")) f0_desc = kv->value;
        if (const auto* kv = last_of("f1")) f1_desc = kv->value;
        cfg.model.f0 = density_from_descriptor(f0_desc, level, nullptr);
        cfg.model.f1 = density_from_descriptor(f1_desc, level, &cfg.model.f0);
        cfg.f0_desc = f0_desc;
        cfg.f1_desc = f1_desc;
    }
    if (const auto* kv = last_of("p")) cfg.model.p = parse_double_field(*kv);
    if (const auto* kv = last_of("q")) cfg.model.q = parse_double_field(*kv);
    validate_model(cfg.model);

    if (const auto* kv = last_of("n")) {
        cfg.n_values.clear();
        std::string list = kv->value;
        std::replace(list.begin(), list.end(), ',', ' ');
        for (const auto& tok : split_ws(list)) {
            const long long v = std::stoll(tok);
            if (v < 4) throw std::invalid_argument("config n values must be >= 4");
            cfg.n_values.push_back(static_cast<std::size_t>(v));
        }
    }
    if (cfg.n_values.empty()) cfg.n_values = {1024};
    if (!std::is_sorted(cfg.n_values.begin(), cfg.n_values.end()))
        throw std::invalid_argument("config n values must be sorted ascending");

    if (const auto* kv = last_of("reps")) {
        const long long r = parse_int_field(*kv);
        if (r < 1) throw std::invalid_argument("config reps must be >= 1");
        cfg.reps = static_cast<int>(r);
    }
    if (const auto* kv = last_of("seed")) cfg.seed = parse_u64_field(*kv);
    if (const auto* kv = last_of("estimator")) {
        if (kv->value == "q") cfg.estimator = SweepEstimator::q;
        else if (kv->value == "smooth") cfg.estimator = SweepEstimator::smooth;
        else if (kv->value == "rough") cfg.estimator = SweepEstimator::rough;
        else if (kv->value == "direction") cfg.estimator = SweepEstimator::direction;
        else
            throw std::invalid_argument("config estimator must be one of "
                                        "q|smooth|rough|direction, got '" + kv->value + "'");
    }
    if (const auto* kv = last_of("M")) cfg.max_mother_level = static_cast<int>(parse_int_field(*kv));
    if (const auto* kv = last_of("J")) cfg.start_level = static_cast<int>(parse_int_field(*kv));
    if (const auto* kv = last_of("tau")) cfg.tau = parse_double_field(*kv);
    if (const auto* kv = last_of("gamma")) cfg.gamma = parse_double_field(*kv);
    if (const auto* kv = last_of("gamma_scale")) cfg.gamma_scale = parse_double_field(*kv);
    if (const auto* kv = last_of("t_check")) cfg.t_check = parse_double_field(*kv);
    if (const auto* kv = last_of("s0")) cfg.s0 = parse_double_field(*kv);
    if (const auto* kv = last_of("s1")) cfg.s1 = parse_double_field(*kv);
    if (const auto* kv = last_of("direction")) {
        if (kv->value == "oracle") cfg.direction = DirectionSource::oracle;
        else if (kv->value == "split3n") cfg.direction = DirectionSource::split3n;
        else if (kv->value.rfind("file:", 0) == 0) {
            cfg.direction = DirectionSource::file;
            cfg.direction_file = kv->value.substr(5);
        } else
            throw std::invalid_argument(
                "config direction must be oracle|split3n|file:<path>, got '" + kv->value +
                "'");
    }
    if (const auto* kv = last_of("out")) cfg.out = kv->value;
    if (const auto* kv = last_of("threads")) {
        const long long t = parse_int_field(*kv);
        if (t < 1 || t > 256) throw std::invalid_argument("config threads out of range");
        cfg.threads = static_cast<int>(t);
    }
    if (const auto* kv = last_of("timing")) {
        if (kv->value == "on") cfg.timing = true;
        else if (kv->value == "off") cfg.timing = false;
        else throw std::invalid_argument("config timing must be on|off");
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path,
                                  const std::vector<KeyValueLine>& overrides) {
    return load_config(parse_key_value_file(path), overrides);
}

// ---- sweep --------------------------------------------------------------------

namespace {

std::string join_flags(const std::vector<std::string>& flags) {
    if (flags.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i) out += '|';
        out += flags[i];
    }
    return out;
}

struct ResolvedSweep {
    double tau = 1.0;
    double gamma = 1.0;
    double t_check = 1.0;
    ReparamPoint rp;
    std::array<double, 4> q_true{};
    GridFunction file_direction;
};

ResolvedSweep resolve(const ExperimentConfig& cfg) {
    ResolvedSweep rs;
    rs.rp = reparametrize(cfg.model);
    rs.q_true = transition_matrix(cfg.model.p, cfg.model.q);
    rs.tau = cfg.tau > 0.0 ? cfg.tau : default_tau(cfg.model);
    rs.gamma = cfg.gamma > 0.0 ? cfg.gamma : default_gamma(cfg.model, cfg.gamma_scale);
    rs.t_check = cfg.t_check > 0.0 ? cfg.t_check : default_t_check(cfg.model);
    if (cfg.direction == DirectionSource::file)
        rs.file_direction = read_grid_file(cfg.direction_file);
    return rs;
}

}  // namespace

std::vector<RiskRecord> run_sweep(const ExperimentConfig& config) {
    const ResolvedSweep rs = resolve(config);
    const std::size_t tasks = config.n_values.size() * static_cast<std::size_t>(config.reps);
    std::vector<std::vector<RiskRecord>> slots(tasks);

    const double delta = std::min(config.model.p, config.model.q);
    const double eps = std::fabs(rs.rp.persistence);
    const double zeta = rs.rp.separation;

    auto run_task = [&](std::size_t task) {
        const std::size_t n_idx = task / static_cast<std::size_t>(config.reps);
        const int rep = static_cast<int>(task % static_cast<std::size_t>(config.reps));
        const std::size_t n = config.n_values[n_idx];
        const std::uint64_t rep_seed = CounterRng::derive_stream(config.seed, task);

        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::string> flags;
        SamplePath path;
        GridFunction direction;
        bool direction_ok = true;

        switch (config.direction) {
            case DirectionSource::oracle:
                path = sample_path(config.model, n, rep_seed);
                if (rs.rp.contrast_defined) {
                    direction = rs.rp.contrast;
                } else {
                    direction = GridFunction(rs.rp.mix.level,
                                             std::vector<double>(rs.rp.mix.cells(), 0.0));
                    direction_ok = false;
                    flags.push_back("contrast_undefined");
                }
                break;
            case DirectionSource::file:
                path = sample_path(config.model, n, rep_seed);
                direction = rs.file_direction;
                break;
            case DirectionSource::split3n: {
                auto [train, estimate] = split_3n(config.model, n, rep_seed);
                const SeparatingDirection sd = psi_tilde_from_path(
                    train, config.max_mother_level, rs.tau, config.start_level);
                if (sd.degenerate) flags.push_back("direction_degenerate");
                if (sd.clamp_active) flags.push_back("direction_clamped");
                direction = sd.grid;
                path = std::move(estimate);
                break;
            }
        }

        std::vector<RiskRecord> rows;
        auto base_record = [&](std::string estimator) {
            RiskRecord r;
            r.n = n;
            r.delta = delta;
            r.eps = eps;
            r.zeta = zeta;
            r.rep = rep;
            r.seed = rep_seed;
            r.estimator = std::move(estimator);
            return r;
        };

        switch (config.estimator) {
            case SweepEstimator::q: {
                const MomentTriple m = moment_triple(path, direction);
                const QEstimate qe = q_estimate(m);
                if (qe.m1_zero) flags.push_back("m1_zero");
                if (qe.v_zero) flags.push_back("v_zero");
                RiskRecord r = base_record("q");
                r.loss_raw = frobenius_loss_min_perm(qe.q_raw, rs.q_true);
                r.loss_final = frobenius_loss_min_perm(qe.q, rs.q_true);
                r.flags = join_flags(flags);
                rows.push_back(std::move(r));
                break;
            }
            case SweepEstimator::smooth:
            case SweepEstimator::rough: {
                const bool smooth = config.estimator == SweepEstimator::smooth;
                const auto pair =
                    smooth ? smooth_estimate(path, direction, rs.gamma, rs.tau, rs.t_check,
                                             config.start_level)
                           : rough_estimate(path, direction, rs.gamma, rs.tau, rs.t_check,
                                            config.start_level);
                const BlockLayout layout =
                    block_layout(path.size(), rs.tau, config.start_level);
                const CoefficientEstimates ce =
                    coefficient_estimates(path, direction, layout);
                if (ce.m1_zero) flags.push_back("m1_zero");
                if (ce.m2_nonpos) flags.push_back("m2_nonpos");
                if (ce.skew_extreme) flags.push_back("skew_extreme");

                const PairLoss raw = l2_loss_min_perm(pair.first.raw, pair.second.raw,
                                                      config.model.f0, config.model.f1);
                const PairLoss fin =
                    l2_loss_min_perm(pair.first.truncated, pair.second.truncated,
                                     config.model.f0, config.model.f1);
                if (fin.swapped) flags.push_back("labels_swapped");
                const std::string kind = smooth ? "smooth" : "rough";
                RiskRecord r0 = base_record(kind + ":f0");
                r0.loss_raw = raw.loss_f0;
                r0.loss_final = fin.loss_f0;
                r0.flags = join_flags(flags);
                RiskRecord r1 = base_record(kind + ":f1");
                r1.loss_raw = raw.loss_f1;
                r1.loss_final = fin.loss_f1;
                r1.flags = r0.flags;
                rows.push_back(std::move(r0));
                rows.push_back(std::move(r1));
                break;
            }
            case SweepEstimator::direction: {
                double dot = 0.0;
                if (rs.rp.contrast_defined && direction_ok)
                    dot = l2_inner(direction, rs.rp.contrast);
                else
                    flags.push_back("contrast_undefined");
                RiskRecord r = base_record("direction");
                r.loss_raw = 1.0 - std::fabs(dot);
                r.loss_final = r.loss_raw;
                r.flags = join_flags(flags);
                rows.push_back(std::move(r));
                break;
            }
        }

        if (config.timing) {
            const auto t1 = std::chrono::steady_clock::now();
            const double secs = std::chrono::duration<double>(t1 - t0).count();
            for (auto& r : rows) r.wall_time = secs;
        }
        slots[task] = std::move(rows);
    };

    const int threads = std::max(1, config.threads);
    if (threads == 1) {
        for (std::size_t t = 0; t < tasks; ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&]() {
                for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1))
                    run_task(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<RiskRecord> records;
    for (auto& rows : slots)
        for (auto& r : rows) records.push_back(std::move(r));
    return records;
}

// ---- CSV ------------------------------------------------------------------------

void write_csv(std::ostream& os, const ExperimentConfig& config,
               const std::vector<RiskRecord>& records) {
    const ResolvedSweep rs = resolve(config);
    os << "# p " << format_double(config.model.p) << "\n";
    os << "# q " << format_double(config.model.q) << "\n";
    os << "# D " << config.model.f0.level << "\n";
    os << "# f0 " << config.f0_desc << "\n";
    os << "# f1 " << config.f1_desc << "\n";
    os << "# n";
    for (std::size_t n : config.n_values) os << ' ' << n;
    os << "\n";
    os << "# reps " << config.reps << "\n";
    os << "# seed " << config.seed << "\n";
    os << "# estimator "
       << (config.estimator == SweepEstimator::q          ? "q"
           : config.estimator == SweepEstimator::smooth   ? "smooth"
           : config.estimator == SweepEstimator::rough    ? "rough"
                                                          : "direction")
       << "\n";
    os << "# direction "
       << (config.direction == DirectionSource::oracle    ? std::string("oracle")
           : config.direction == DirectionSource::split3n ? std::string("split3n")
                                                          : "file:" + config.direction_file)
       << "\n";
    os << "# M " << config.max_mother_level << "\n";
    os << "# J " << config.start_level << "\n";
    os << "# tau " << format_double(rs.tau) << "\n";
    os << "# gamma " << format_double(rs.gamma) << "\n";
    os << "# t_check " << format_double(rs.t_check) << "\n";
    os << "# timing " << (config.timing ? "on" : "off") << "\n";
    os << "n,delta,eps,zeta,rep,seed,estimator,loss_raw,loss_clamped_or_truncated,"
          "degeneracy_flags,wall_time\n";
    for (const auto& r : records) {
        os << r.n << ',' << format_double(r.delta) << ',' << format_double(r.eps) << ','
           << format_double(r.zeta) << ',' << r.rep << ',' << r.seed << ',' << r.estimator
           << ',' << format_double(r.loss_raw) << ',' << format_double(r.loss_final) << ','
           << r.flags << ',' << format_double(r.wall_time) << "\n";
    }
}

std::string csv_string(const ExperimentConfig& config,
                       const std::vector<RiskRecord>& records) {
    std::ostringstream os;
    write_csv(os, config, records);
    return os.str();
}

std::vector<RiskRecord> read_csv(std::istream& is) {
    std::vector<RiskRecord> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // mandatory header row
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 11)
            throw std::invalid_argument("CSV row with " + std::to_string(fields.size()) +
                                        " fields (expected 11): " + line);
        RiskRecord r;
        r.n = static_cast<std::size_t>(std::stoull(fields[0]));
        r.delta = std::stod(fields[1]);
        r.eps = std::stod(fields[2]);
        r.zeta = std::stod(fields[3]);
        r.rep = std::stoi(fields[4]);
        r.seed = std::stoull(fields[5]);
        r.estimator = fields[6];
        r.loss_raw = std::stod(fields[7]);
        r.loss_final = std::stod(fields[8]);
        r.flags = fields[9];
        r.wall_time = std::stod(fields[10]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RiskRecord> read_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_csv(is);
}

// ---- rate fitting -----------------------------------------------------------------

RateFit fit_rate(const std::vector<RiskRecord>& records, const std::string& estimator_prefix,
                 bool use_raw) {
    std::map<std::size_t, std::pair<double, std::size_t>> sums;
    for (const auto& r : records) {
        if (r.estimator.rfind(estimator_prefix, 0) != 0) continue;
        auto& [sum, count] = sums[r.n];
        sum += use_raw ? r.loss_raw : r.loss_final;
        ++count;
    }
    if (sums.size() < 2)
        throw std::invalid_argument("fit_rate: need at least 2 distinct n values matching '" +
                                    estimator_prefix + "'");
    std::vector<double> xs, ys;
    for (const auto& [n, sc] : sums) {
        const double mean = sc.first / static_cast<double>(sc.second);
        if (!(mean > 0.0))
            throw std::invalid_argument("fit_rate: nonpositive mean loss at n=" +
                                        std::to_string(n));
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(mean));
    }

    const auto k = static_cast<double>(xs.size());
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= k;
    ybar /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    RateFit fit;
    fit.points = static_cast<int>(xs.size());
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    if (xs.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double resid = ys[i] - fit.intercept - fit.slope * xs[i];
            rss += resid * resid;
        }
        fit.stderr_slope = std::sqrt(rss / (k - 2.0) / sxx);
    }
    return fit;
}

RateFit fit_rate_csv(const std::string& path, const std::string& estimator_prefix,
                     bool use_raw) {
    return fit_rate(read_csv_file(path), estimator_prefix, use_raw);
}

// ---- oracle self-checks --------------------------------------------------------------

namespace {

GridFunction pseudo_random_direction(int level) {
    CounterRng rng(0x5eedULL, 42);
    GridFunction g(level, std::vector<double>(cell_count(level), 0.0));
    for (double& v : g.values) v = 2.0 * rng.next_unit() - 1.0;
    const double norm = l2_norm(g);
    for (double& v : g.values) v /= norm;
    return g;
}

}  // namespace

OracleReport oracle_check(const ModelParams& theta, const OracleCheckOptions& options) {
    OracleReport report;
    auto add = [&report](const std::string& name, double deviation, double tolerance,
                         const std::string& note = "") {
        report.checks.push_back({name, deviation, tolerance, deviation <= tolerance, note});
    };

    validate_model(theta);
    const ReparamPoint rp = reparametrize(theta);
    if (!rp.contrast_defined)
        report.notes.push_back("degenerate model: identical emissions, contrast undefined");

    const int level = theta.f0.level;
    const bool cube_ok = level <= options.max_cube_level;
    if (!cube_ok)
        report.notes.push_back(
            "cube-resolution checks reduced to pair moments (resolution above limit)");

    // candidate directions
    std::vector<std::pair<std::string, GridFunction>> directions;
    if (rp.contrast_defined) directions.emplace_back("contrast", rp.contrast);
    directions.emplace_back("constant", uniform_density(level));
    directions.emplace_back("half_split", half_split(level));
    directions.emplace_back("pseudo_random", pseudo_random_direction(level));

    for (const auto& [name, dir] : directions) {
        MomentTriple closed = moment_oracle(theta, dir);
        closed.m3 += options.m3_corruption;
        if (cube_ok) {
            const MomentTriple quad = moment_oracle_quadrature(theta, dir);
            const double dev =
                std::max({std::fabs(closed.m1 - quad.m1), std::fabs(closed.m2 - quad.m2),
                          std::fabs(closed.m3 - quad.m3)});
            add("moment_two_route:" + name, dev, 1e-10);
        } else {
            // pair-moment route stays quadratic in the cell count
            const JointDensity3 jd(theta, &dir);
            const std::size_t cells = dir.cells();
            const double w = 1.0 / static_cast<double>(cells);
            long double e1 = 0.0L, e2 = 0.0L;
            for (std::size_t i = 0; i < cells; ++i) e1 += dir.values[i] * jd.cell1(i);
            e1 *= w;
            for (std::size_t i = 0; i < cells; ++i) {
                long double row = 0.0L;
                for (std::size_t j = 0; j < cells; ++j)
                    row += dir.values[j] * jd.cell2(i, j);
                e2 += dir.values[i] * row;
            }
            e2 *= w * w;
            const double m1_quad =
                static_cast<double>(e2) - static_cast<double>(e1) * static_cast<double>(e1);
            add("moment_pair_route:" + name, std::fabs(closed.m1 - m1_quad), 1e-10);
        }

        if (rp.contrast_defined && std::fabs(closed.overlap) > 1e-12) {
            const PhiEstimate phi = phi_hat(closed);
            const double sign = closed.overlap < 0.0 ? -1.0 : 1.0;
            const double dev = std::max(std::fabs(phi.skew_hat - sign * rp.skew),
                                        std::fabs(phi.persistence_hat - rp.persistence));
            add("phi_plugin:" + name, dev, 1e-12);

            const QEstimate qe = q_hat(phi.skew_hat, phi.persistence_hat);
            const std::array<double, 4> q_true = transition_matrix(theta.p, theta.q);
            double qdev = 0.0;
            for (int i = 0; i < 4; ++i)
                qdev = std::max(qdev, std::fabs(qe.q_raw[static_cast<std::size_t>(i)] -
                                                (sign > 0 ? q_true[static_cast<std::size_t>(i)]
                                                          : q_true[static_cast<std::size_t>(
                                                                3 - i)])));
            add("q_plugin:" + name, qdev, 1e-12);
        }
    }

    // inversion round trip
    {
        const ModelParams back = invert_reparam(rp);
        double dev = std::max(std::fabs(back.p - theta.p), std::fabs(back.q - theta.q));
        for (std::size_t i = 0; i < theta.f0.cells(); ++i) {
            dev = std::max(dev, std::fabs(back.f0.values[i] - theta.f0.values[i]));
            dev = std::max(dev, std::fabs(back.f1.values[i] - theta.f1.values[i]));
        }
        add("inversion_round_trip", dev, 1e-12);
    }

    // density plug-in: population coefficients reproduce the labeled densities
    if (rp.contrast_defined) {
        const BlockLayout layout = block_layout(4096, 1.0, 0);
        const int tree_max = std::max(layout.top_level, level - 1);
        const BlockLayout deep{0, layout.coarse_level, tree_max, layout.block_size, true};
        const CoefficientEstimates ce =
            population_coefficient_estimates(theta, rp.contrast, deep, 4096);
        const CoeffTree plus = [&] {
            CoeffTree t = ce.mix_hat;
            for (std::size_t i = 0; i < t.father.size(); ++i)
                t.father[i] += 0.5 * ce.omega_plus * ce.pair_hat.father[i];
            for (std::size_t j = 0; j < t.mother.size(); ++j)
                for (std::size_t k = 0; k < t.mother[j].size(); ++k)
                    t.mother[j][k] += 0.5 * ce.omega_plus * ce.pair_hat.mother[j][k];
            return t;
        }();
        const GridFunction rec = synthesize(plus, std::max(level, tree_max + 1));
        const GridFunction truth = refine(theta.f0, rec.level);  // overlap > 0 here
        double dev = 0.0;
        for (std::size_t i = 0; i < rec.cells(); ++i)
            dev = std::max(dev, std::fabs(rec.values[i] - truth.values[i]));
        add("density_plugin_plus_label", dev, 1e-12);
    } else {
        report.notes.push_back("density plug-in skipped: contrast undefined");
    }

    // joint density tabulation
    {
        const JointDensity3 jd(theta);
        if (cube_ok) {
            const auto v = jd.validate();
            add("joint_density_min_cell", std::max(0.0, -v.min_cell), 1e-12);
            add("joint_density_mass", std::fabs(v.mass - 1.0), 1e-10);
        } else {
            long double mass2 = 0.0L;
            const std::size_t cells = theta.f0.cells();
            for (std::size_t i = 0; i < cells; ++i)
                for (std::size_t j = 0; j < cells; ++j) mass2 += jd.cell2(i, j);
            mass2 /= static_cast<long double>(cells) * static_cast<long double>(cells);
            add("pair_density_mass", std::fabs(static_cast<double>(mass2) - 1.0), 1e-10);
        }
    }

    report.all_pass = true;
    for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
    return report;
}

void print_report(std::ostream& os, const OracleReport& report) {
    for (const auto& c : report.checks) {
        os << (c.pass ? "PASS" : "FAIL") << "  " << c.name
           << "  deviation=" << format_double(c.deviation)
           << "  tolerance=" << format_double(c.tolerance);
        if (!c.note.empty()) os << "  (" << c.note << ")";
        os << "\n";
    }
    for (const auto& n : report.notes) os << "note: " << n << "\n";
    os << (report.all_pass ? "ALL CHECKS PASSED" : "CHECKS FAILED") << "\n";
}

}  // namespace nphmm
