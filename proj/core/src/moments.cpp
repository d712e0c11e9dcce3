#include "nphmm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nphmm {

double empirical_moment(const SamplePath& path,
                        const std::function<double(std::span<const double>)>& h, int s) {
    if (s < 1 || s > 3) throw std::invalid_argument("empirical_moment: s must be 1, 2, or 3");
    const std::size_t n = path.size();
    if (n < static_cast<std::size_t>(s))
        throw std::invalid_argument("empirical_moment: path shorter than window");
    const std::size_t windows = n - static_cast<std::size_t>(s) + 1;
    double acc = 0.0;
    std::span<const double> all(path.observed);
    for (std::size_t i = 0; i < windows; ++i)
        acc += h(all.subspan(i, static_cast<std::size_t>(s)));
    return acc / static_cast<double>(windows);
}

MomentTriple moment_triple(std::span<const double> observed, const GridFunction& direction) {
    const std::size_t n = observed.size();
    if (n < 3) throw std::invalid_argument("moment_triple: need at least 3 observations");

    std::vector<double> proj(n);
    for (std::size_t i = 0; i < n; ++i) proj[i] = evaluate(direction, observed[i]);

    double s1 = 0.0;
    for (double v : proj) s1 += v;
    const double p1 = s1 / static_cast<double>(n);

    double s2 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) s2 += proj[i] * proj[i + 1];
    const double pair_mean = s2 / static_cast<double>(n - 1);

    double s3_gap = 0.0, s3_all = 0.0;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        s3_gap += proj[i] * proj[i + 2];
        s3_all += proj[i] * proj[i + 1] * proj[i + 2];
    }
    const double gap_mean = s3_gap / static_cast<double>(n - 2);
    const double triple_mean = s3_all / static_cast<double>(n - 2);

    MomentTriple out;
    out.direction = direction;
    out.m1 = pair_mean - p1 * p1;
    out.m2 = gap_mean - p1 * p1;
    out.m3 = -triple_mean + p1 * p1 * p1 + (2.0 * out.m1 + out.m2) * p1;
    return out;
}

MomentTriple moment_triple(const SamplePath& path, const GridFunction& direction) {
    return moment_triple(std::span<const double>(path.observed), direction);
}

MomentTriple moment_oracle(const ModelParams& theta, const GridFunction& direction) {
    const ReparamPoint rp = reparametrize(theta);
    MomentTriple out;
    out.direction = direction;
    out.population = true;
    if (!rp.contrast_defined) return out;  // zero moments on the frontier
    const double overlap = l2_inner(rp.contrast, direction);
    const double r = contrast_weight(rp);
    out.overlap = overlap;
    out.m1 = r * overlap * overlap;
    out.m2 = r * rp.persistence * overlap * overlap;
    out.m3 = r * rp.skew * rp.persistence * rp.separation * overlap * overlap * overlap;
    return out;
}

MomentTriple moment_oracle_quadrature(const ModelParams& theta, const GridFunction& direction) {
    const JointDensity3 jd(theta, &direction);
    const int lvl = jd.level();
    const GridFunction dir = refine(direction, lvl);
    const std::size_t cells = dir.cells();
    const double w = 1.0 / static_cast<double>(cells);

    // first and second order from the tabulated marginals
    long double e1 = 0.0L;
    for (std::size_t i = 0; i < cells; ++i) e1 += dir.values[i] * jd.cell1(i);
    e1 *= w;

    long double e2 = 0.0L;
    for (std::size_t i = 0; i < cells; ++i) {
        long double row = 0.0L;
        for (std::size_t j = 0; j < cells; ++j) row += dir.values[j] * jd.cell2(i, j);
        e2 += dir.values[i] * row;
    }
    e2 *= w * w;

    // third order by streaming the full cube
    long double e_gap = 0.0L, e_triple = 0.0L;
    for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t j = 0; j < cells; ++j) {
            long double row_gap = 0.0L, row_triple = 0.0L;
            for (std::size_t k = 0; k < cells; ++k) {
                const double c = jd.cell3(i, j, k);
                row_gap += dir.values[k] * c;
                row_triple += dir.values[j] * dir.values[k] * c;
            }
            e_gap += dir.values[i] * row_gap;
            e_triple += dir.values[i] * row_triple;
        }
    }
    e_gap *= w * w * w;
    e_triple *= w * w * w;

    MomentTriple out;
    out.direction = direction;
    out.population = true;
    const ReparamPoint rp = reparametrize(theta);
    out.overlap = rp.contrast_defined ? l2_inner(rp.contrast, direction) : 0.0;
    const double p1 = static_cast<double>(e1);
    out.m1 = static_cast<double>(e2) - p1 * p1;
    out.m2 = static_cast<double>(e_gap) - p1 * p1;
    out.m3 = -static_cast<double>(e_triple) + p1 * p1 * p1 + (2.0 * out.m1 + out.m2) * p1;
    return out;
}

PhiEstimate phi_hat(const MomentTriple& m) {
    PhiEstimate out;
    const double m2_plus = std::max(m.m2, 0.0);
    out.v_hat = 4.0 * m.m1 * m.m1 * m2_plus + m.m3 * m.m3;
    if (out.v_hat > 0.0) {
        out.skew_hat = m.m3 / std::sqrt(out.v_hat);
    } else {
        out.skew_hat = 0.0;
        out.v_zero = true;
    }
    if (m.m1 != 0.0) {
        out.persistence_hat = std::clamp(m.m2 / m.m1, -1.0, 1.0);
    } else {
        out.persistence_hat = 0.0;
        out.m1_zero = true;
    }
    return out;
}

QEstimate q_hat(double skew_hat, double persistence_hat) {
    QEstimate out;
    out.skew_hat = skew_hat;
    out.persistence_hat = persistence_hat;
    const double p = 0.5 * (1.0 - skew_hat) * (1.0 - persistence_hat);
    const double q = 0.5 * (1.0 + skew_hat) * (1.0 - persistence_hat);
    out.q_raw = {1.0 - p, p, q, 1.0 - q};
    const double pc = std::clamp(p, 0.0, 1.0);
    const double qc = std::clamp(q, 0.0, 1.0);
    out.q = {1.0 - pc, pc, qc, 1.0 - qc};
    return out;
}

QEstimate q_estimate(const MomentTriple& m) {
    const PhiEstimate phi = phi_hat(m);
    QEstimate out = q_hat(phi.skew_hat, phi.persistence_hat);
    out.m1 = m.m1;
    out.m2 = m.m2;
    out.m3 = m.m3;
    out.v_hat = phi.v_hat;
    out.m1_zero = phi.m1_zero;
    out.v_zero = phi.v_zero;
    return out;
}

double frobenius_loss_min_perm(const std::array<double, 4>& q_est,
                               const std::array<double, 4>& q_true) {
    auto sq = [](double x) { return x * x; };
    const double keep = sq(q_est[0] - q_true[0]) + sq(q_est[1] - q_true[1]) +
                        sq(q_est[2] - q_true[2]) + sq(q_est[3] - q_true[3]);
    // relabeling both states maps entry (i,j) to (1-i, 1-j)
    const double swap = sq(q_est[3] - q_true[0]) + sq(q_est[2] - q_true[1]) +
                        sq(q_est[1] - q_true[2]) + sq(q_est[0] - q_true[3]);
    return std::min(keep, swap);
}

}  // namespace nphmm
