#include "nphmm/density_estimation.hpp"

#include <algorithm>
#include <cmath>

namespace nphmm {

namespace {

// coefficientwise ca*a + cb*b over identical tree shapes
CoeffTree tree_combine(double ca, const CoeffTree& a, double cb, const CoeffTree& b) {
    CoeffTree out = a;
    for (std::size_t i = 0; i < out.father.size(); ++i)
        out.father[i] = ca * a.father[i] + cb * b.father[i];
    for (std::size_t j = 0; j < out.mother.size(); ++j)
        for (std::size_t k = 0; k < out.mother[j].size(); ++k)
            out.mother[j][k] = ca * a.mother[j][k] + cb * b.mother[j][k];
    return out;
}

double block_norm(const CoeffTree& tree, int level, int block, int block_size) {
    const auto& lv = tree.mother[static_cast<std::size_t>(level - tree.start_level)];
    double sq = 0.0;
    for (int t = 0; t < block_size; ++t) {
        const double v = lv[static_cast<std::size_t>(block * block_size + t)];
        sq += v * v;
    }
    return std::sqrt(sq);
}

void zero_block(CoeffTree& tree, int level, int block, int block_size) {
    auto& lv = tree.mother[static_cast<std::size_t>(level - tree.start_level)];
    for (int t = 0; t < block_size; ++t)
        lv[static_cast<std::size_t>(block * block_size + t)] = 0.0;
}

void copy_block(CoeffTree& dst, const CoeffTree& src, int level, int block, int block_size,
                double factor) {
    auto& d = dst.mother[static_cast<std::size_t>(level - dst.start_level)];
    const auto& s = src.mother[static_cast<std::size_t>(level - src.start_level)];
    for (int t = 0; t < block_size; ++t) {
        const std::size_t i = static_cast<std::size_t>(block * block_size + t);
        d[i] += factor * s[i];
    }
}

BlockLayout checked_layout(std::size_t n, double tau, int start_level) {
    const BlockLayout layout = block_layout(n, tau, start_level);
    if (!layout.valid)
        throw InvalidLayoutError(
            "block layout invalid: retained level range is empty for this n and tau");
    return layout;
}

DensityEstimate finalize_estimate(EstimatorKind kind, DensityLabel label, CoeffTree tree,
                                  double t_check, std::vector<BlockDecision> trace) {
    DensityEstimate out;
    out.kind = kind;
    out.label = label;
    out.t_check = t_check;
    out.trace = std::move(trace);
    out.raw = synthesize(tree, std::max(tree.start_level, tree.max_level + 1));
    out.truncated = out.raw;
    for (double& v : out.truncated.values) v = std::clamp(v, 0.0, t_check);
    return out;
}

}  // namespace

namespace {

// everything downstream of the moment triple, shared by the empirical and
// population constructors
void fill_scalar_estimates(CoefficientEstimates& ce, std::size_t n) {
    const PhiEstimate phi = phi_hat(ce.moments);
    ce.skew_hat = phi.skew_hat;
    ce.m1_zero = ce.moments.m1 == 0.0;
    ce.m2_nonpos = ce.moments.m2 <= 0.0;
    ce.skew_extreme = std::fabs(phi.skew_hat) == 1.0;

    ce.g_hat = ce.moments.m2 > 0.0 ? std::sqrt(phi.v_hat) / ce.moments.m2 : 0.0;
    ce.omega_plus = 0.0;
    ce.omega_minus = 0.0;
    if (!ce.m1_zero) {
        ce.omega_plus = ce.g_hat * (1.0 - ce.skew_hat) / ce.moments.m1;
        ce.omega_minus = -ce.g_hat * (1.0 + ce.skew_hat) / ce.moments.m1;
    }

    const double root =
        std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
    const double ratio = ce.m1_zero ? 0.0 : ce.g_hat / std::fabs(ce.moments.m1);
    ce.block_threshold_scale = ce.m1_zero ? 0.0 : root * std::max(1.0, ratio);
    const double spread =
        ce.skew_extreme ? 0.0 : 1.0 / (1.0 - ce.skew_hat * ce.skew_hat);
    ce.shared_threshold_scale = root * std::max({1.0, ratio, spread});
}

}  // namespace

CoefficientEstimates coefficient_estimates(const SamplePath& path,
                                           const GridFunction& direction,
                                           const BlockLayout& layout) {
    const std::size_t n = path.size();
    if (n < 3)
        throw std::invalid_argument("coefficient_estimates: need at least 3 observations");

    const int start = layout.start_level;
    const int tree_max = std::max(layout.top_level, start - 1);
    const int resolution = std::max(tree_max + 1, start);
    const std::size_t cells = cell_count(resolution);
    const double cells_d = static_cast<double>(cells);

    std::vector<std::size_t> cell_of(n);
    std::vector<double> proj(n);
    for (std::size_t t = 0; t < n; ++t) {
        cell_of[t] = std::min(static_cast<std::size_t>(path.observed[t] * cells_d),
                              cells - 1);
        proj[t] = evaluate(direction, path.observed[t]);
    }

    // occupancy density of the observations
    GridFunction occupancy(resolution, std::vector<double>(cells, 0.0));
    for (std::size_t t = 0; t < n; ++t) occupancy.values[cell_of[t]] += 1.0;
    for (double& v : occupancy.values) v *= cells_d / static_cast<double>(n);

    // lag-one cross density: next-observation cells weighted by the projected
    // value of the current observation
    GridFunction crossed(resolution, std::vector<double>(cells, 0.0));
    for (std::size_t t = 0; t + 1 < n; ++t) crossed.values[cell_of[t + 1]] += proj[t];
    for (double& v : crossed.values) v *= cells_d / static_cast<double>(n - 1);

    double proj_mean = 0.0;
    for (double v : proj) proj_mean += v;
    proj_mean /= static_cast<double>(n);

    CoefficientEstimates ce;
    ce.mix_hat = analyze(occupancy, tree_max, start);
    const CoeffTree crossed_tree = analyze(crossed, tree_max, start);
    ce.pair_hat = tree_combine(1.0, crossed_tree, -proj_mean, ce.mix_hat);

    ce.moments = moment_triple(path, direction);
    fill_scalar_estimates(ce, n);
    return ce;
}

CoefficientEstimates population_coefficient_estimates(const ModelParams& theta,
                                                      const GridFunction& direction,
                                                      const BlockLayout& layout,
                                                      std::size_t n) {
    const ReparamPoint rp = reparametrize(theta);
    const int start = layout.start_level;
    const int tree_max = std::max(layout.top_level, start - 1);
    const int resolution = std::max({tree_max + 1, start, rp.mix.level});

    CoefficientEstimates ce;
    ce.moments = moment_oracle(theta, direction);
    ce.mix_hat = analyze(refine(rp.mix, resolution), tree_max, start);
    // centered lag-one cross moments of the population: weight * overlap
    // times the contrast function
    GridFunction pair_fn(resolution, std::vector<double>(cell_count(resolution), 0.0));
    if (rp.contrast_defined)
        pair_fn = refine(scale(contrast_weight(rp) * ce.moments.overlap, rp.contrast),
                         resolution);
    ce.pair_hat = analyze(pair_fn, tree_max, start);
    fill_scalar_estimates(ce, n);
    return ce;
}

std::pair<std::vector<double>, std::vector<double>> father_coefficients(
    const CoefficientEstimates& ce) {
    std::vector<double> plus(ce.mix_hat.father.size());
    std::vector<double> minus(ce.mix_hat.father.size());
    for (std::size_t k = 0; k < plus.size(); ++k) {
        plus[k] = ce.mix_hat.father[k] + 0.5 * ce.omega_plus * ce.pair_hat.father[k];
        minus[k] = ce.mix_hat.father[k] + 0.5 * ce.omega_minus * ce.pair_hat.father[k];
    }
    return {std::move(plus), std::move(minus)};
}

std::pair<DensityEstimate, DensityEstimate> smooth_estimate(const SamplePath& path,
                                                            const GridFunction& direction,
                                                            double gamma, double tau,
                                                            double t_check,
                                                            int start_level) {
    if (!(gamma > 0.0)) throw std::invalid_argument("smooth_estimate: need gamma > 0");
    const BlockLayout layout = checked_layout(path.size(), tau, start_level);
    const CoefficientEstimates ce = coefficient_estimates(path, direction, layout);
    const double threshold = gamma * ce.block_threshold_scale;

    auto build = [&](DensityLabel label, double omega) {
        CoeffTree tree = tree_combine(1.0, ce.mix_hat, 0.5 * omega, ce.pair_hat);
        std::vector<BlockDecision> trace;
        for (int j = layout.coarse_level; j <= layout.top_level; ++j) {
            const int blocks = static_cast<int>(layout.blocks_at(j));
            for (int l = 0; l < blocks; ++l) {
                BlockDecision d;
                d.level = j;
                d.block = l;
                d.primary_norm = block_norm(tree, j, l, layout.block_size);
                d.primary_threshold = threshold;
                d.primary_kept = d.primary_norm > threshold;
                if (!d.primary_kept) zero_block(tree, j, l, layout.block_size);
                trace.push_back(d);
            }
        }
        return finalize_estimate(EstimatorKind::smooth, label, std::move(tree), t_check,
                                 std::move(trace));
    };
    return {build(DensityLabel::plus, ce.omega_plus),
            build(DensityLabel::minus, ce.omega_minus)};
}

std::pair<DensityEstimate, DensityEstimate> rough_estimate(const SamplePath& path,
                                                           const GridFunction& direction,
                                                           double gamma, double tau,
                                                           double t_check,
                                                           int start_level) {
    if (!(gamma > 0.0)) throw std::invalid_argument("rough_estimate: need gamma > 0");
    const std::size_t n = path.size();
    const BlockLayout layout = checked_layout(n, tau, start_level);
    const CoefficientEstimates ce = coefficient_estimates(path, direction, layout);

    const double root = std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
    const double mix_threshold = gamma * root;
    const double shared_threshold = gamma * ce.shared_threshold_scale;
    const double skew = ce.skew_hat;
    const double m1 = ce.moments.m1;

    auto build = [&](DensityLabel label) {
        const bool plus = label == DensityLabel::plus;
        const double omega = plus ? ce.omega_plus : ce.omega_minus;
        const double denom = plus ? 1.0 + skew : 1.0 - skew;
        const bool denom_ok = denom != 0.0;
        const double alpha_factor = denom_ok ? 2.0 / denom : 0.0;
        const double mix_term = denom_ok ? (plus ? (1.0 - skew) / (1.0 + skew)
                                                 : (1.0 + skew) / (1.0 - skew))
                                         : 0.0;
        const double pair_term =
            m1 != 0.0 ? ce.g_hat * (plus ? (1.0 - skew) : (1.0 + skew)) / (2.0 * m1) : 0.0;
        // beta = -(mix_term * mix_hat) +- pair correction; the plus label
        // subtracts the pair term inside the bracket, the minus label adds it
        const double beta_mix = -mix_term;
        const double beta_pair = plus ? pair_term : -pair_term;

        const CoeffTree through = tree_combine(1.0, ce.mix_hat, 0.5 * omega, ce.pair_hat);
        const CoeffTree beta = tree_combine(beta_mix, ce.mix_hat, beta_pair, ce.pair_hat);

        CoeffTree out = zero_tree(ce.mix_hat.start_level, ce.mix_hat.max_level);
        out.father = through.father;
        for (int j = out.start_level; j < layout.coarse_level; ++j) {
            out.mother[static_cast<std::size_t>(j - out.start_level)] =
                through.mother[static_cast<std::size_t>(j - out.start_level)];
        }

        std::vector<BlockDecision> trace;
        for (int j = layout.coarse_level; j <= layout.top_level; ++j) {
            const int blocks = static_cast<int>(layout.blocks_at(j));
            for (int l = 0; l < blocks; ++l) {
                BlockDecision d;
                d.level = j;
                d.block = l;
                d.primary_norm = block_norm(ce.mix_hat, j, l, layout.block_size);
                d.primary_threshold = mix_threshold;
                d.primary_kept = d.primary_norm > mix_threshold;
                if (d.primary_kept)
                    copy_block(out, ce.mix_hat, j, l, layout.block_size, alpha_factor);
                d.has_secondary = true;
                d.secondary_norm = block_norm(beta, j, l, layout.block_size);
                d.secondary_threshold = shared_threshold;
                d.secondary_kept = d.secondary_norm > shared_threshold;
                if (d.secondary_kept) copy_block(out, beta, j, l, layout.block_size, 1.0);
                trace.push_back(d);
            }
        }
        return finalize_estimate(EstimatorKind::rough, label, std::move(out), t_check,
                                 std::move(trace));
    };
    return {build(DensityLabel::plus), build(DensityLabel::minus)};
}

PairLoss l2_loss_min_perm(const GridFunction& est_plus, const GridFunction& est_minus,
                          const GridFunction& f0_true, const GridFunction& f1_true) {
    auto sq_dist = [](const GridFunction& a, const GridFunction& b) {
        const GridFunction diff = combine(1.0, a, -1.0, b);
        return l2_inner(diff, diff);
    };
    const double keep0 = sq_dist(est_plus, f0_true);
    const double keep1 = sq_dist(est_minus, f1_true);
    const double swap0 = sq_dist(est_minus, f0_true);
    const double swap1 = sq_dist(est_plus, f1_true);

    PairLoss out;
    if (keep0 + keep1 <= swap0 + swap1) {
        out.loss_f0 = keep0;
        out.loss_f1 = keep1;
        out.swapped = false;
    } else {
        out.loss_f0 = swap0;
        out.loss_f1 = swap1;
        out.swapped = true;
    }
    return out;
}

}  // namespace nphmm
