#include "nphmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nphmm/wavelet.hpp"

namespace nphmm {

namespace {
constexpr double kDegenerateSeparation = 1e-14;
}

void validate_model(const ModelParams& theta) {
    if (!(theta.p > 0.0 && theta.p < 1.0))
        throw std::invalid_argument("model: p outside (0,1)");
    if (!(theta.q > 0.0 && theta.q < 1.0))
        throw std::invalid_argument("model: q outside (0,1)");
    if (theta.f0.level != theta.f1.level)
        throw std::invalid_argument("model: emission grids differ in resolution");
    require_density(theta.f0);
    require_density(theta.f1);
}

ReparamPoint reparametrize(const ModelParams& theta) {
    validate_model(theta);
    ReparamPoint out;
    const double psum = theta.p + theta.q;
    out.skew = (theta.q - theta.p) / psum;
    out.persistence = 1.0 - psum;
    GridFunction diff = combine(1.0, theta.f0, -1.0, theta.f1);
    out.separation = l2_norm(diff);
    out.mix = combine(theta.q / psum, theta.f0, theta.p / psum, theta.f1);
    if (out.separation >= kDegenerateSeparation) {
        out.contrast = scale(1.0 / out.separation, diff);
        out.contrast_defined = true;
    } else {
        out.separation = out.separation < 0.0 ? 0.0 : out.separation;
        out.contrast = GridFunction(theta.f0.level,
                                    std::vector<double>(theta.f0.cells(), 0.0));
        out.contrast_defined = false;
    }
    return out;
}

ModelParams invert_reparam(const ReparamPoint& point) {
    if (!(std::fabs(point.skew) < 1.0))
        throw std::invalid_argument("invert_reparam: |skew| must be < 1");
    if (!(std::fabs(point.persistence) < 1.0))
        throw std::invalid_argument("invert_reparam: |persistence| must be < 1");

    ModelParams out;
    out.p = 0.5 * (1.0 - point.persistence) * (1.0 - point.skew);
    out.q = 0.5 * (1.0 - point.persistence) * (1.0 + point.skew);

    const bool use_contrast = point.contrast_defined && point.separation > 0.0;
    const double half_sep = 0.5 * point.separation;
    GridFunction zero(point.mix.level, std::vector<double>(point.mix.cells(), 0.0));
    const GridFunction& c = use_contrast ? point.contrast : zero;
    out.f0 = combine(1.0, point.mix, half_sep * (1.0 - point.skew), c);
    out.f1 = combine(1.0, point.mix, -half_sep * (1.0 + point.skew), c);

    for (GridFunction* f : {&out.f0, &out.f1}) {
        for (double& v : f->values) {
            if (v < -1e-10)
                throw std::invalid_argument(
                    "invert_reparam: reconstructed density negative beyond tolerance");
            if (v < 0.0) v = 0.0;
        }
    }
    return out;
}

std::pair<double, double> stationary_distribution(double p, double q) {
    const double s = p + q;
    if (!(s > 0.0))
        throw std::invalid_argument("stationary_distribution: p + q must be positive");
    return {q / s, p / s};
}

std::pair<double, double> stationary_distribution(const ModelParams& theta) {
    return stationary_distribution(theta.p, theta.q);
}

double spectral_gap(double p, double q) { return 1.0 - std::fabs(1.0 - p - q); }

double spectral_gap(const ModelParams& theta) { return spectral_gap(theta.p, theta.q); }

double contrast_weight(double skew, double persistence, double separation) {
    return 0.25 * (1.0 - skew * skew) * persistence * separation * separation;
}

double contrast_weight(const ReparamPoint& point) {
    return contrast_weight(point.skew, point.persistence, point.separation);
}

std::array<double, 4> transition_matrix(double p, double q) {
    return {1.0 - p, p, q, 1.0 - q};
}

JointDensity3::JointDensity3(const ModelParams& theta, const GridFunction* direction) {
    ReparamPoint rp = reparametrize(theta);
    mix_ = std::move(rp.mix);
    contrast_ = std::move(rp.contrast);
    degenerate_ = !rp.contrast_defined;
    if (degenerate_) {
        r_ = 0.0;
        skew_term_ = 0.0;
        triple_term_ = 0.0;
    } else {
        r_ = contrast_weight(rp);
        skew_term_ = rp.persistence * r_;
        triple_term_ = -rp.skew * rp.persistence * rp.separation * r_;
    }
    if (direction != nullptr) {
        direction_ = *direction;
        has_direction_ = true;
    }
}

double JointDensity3::cell3(std::size_t i, std::size_t j, std::size_t k) const {
    const double ai = mix_.values[i], aj = mix_.values[j], ak = mix_.values[k];
    if (degenerate_) return ai * aj * ak;
    const double bi = contrast_.values[i], bj = contrast_.values[j], bk = contrast_.values[k];
    return ai * aj * ak + r_ * (bi * bj * ak + ai * bj * bk) + skew_term_ * bi * aj * bk +
           triple_term_ * bi * bj * bk;
}

double JointDensity3::cell2(std::size_t i, std::size_t j) const {
    const double base = mix_.values[i] * mix_.values[j];
    if (degenerate_) return base;
    return base + r_ * contrast_.values[i] * contrast_.values[j];
}

double JointDensity3::cell1(std::size_t i) const { return mix_.values[i]; }

JointDensity3::Validation JointDensity3::validate() const {
    const std::size_t n = mix_.cells();
    const double cell_measure = 1.0 / static_cast<double>(n);
    Validation v;
    v.min_cell = cell3(0, 0, 0);
    long double mass = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            long double row = 0.0L;
            for (std::size_t k = 0; k < n; ++k) {
                const double c = cell3(i, j, k);
                row += c;
                if (c < v.min_cell) v.min_cell = c;
            }
            mass += row * cell_measure;
        }
    }
    mass *= cell_measure * cell_measure;
    v.mass = static_cast<double>(mass);
    v.cells_nonnegative = v.min_cell >= -1e-12;
    v.unit_mass = std::fabs(v.mass - 1.0) <= 1e-10;
    return v;
}

JointDensity3 joint_density_3(const ModelParams& theta, const GridFunction* direction) {
    return JointDensity3(theta, direction);
}

const MembershipReport::Item& MembershipReport::find(const std::string& name) const {
    for (const auto& item : items)
        if (item.name == name) return item;
    throw std::out_of_range("membership item not found: " + name);
}

MembershipReport class_membership(const ModelParams& theta, const ClassSpec& spec) {
    validate_model(theta);
    ReparamPoint rp = reparametrize(theta);
    MembershipReport report;
    auto add = [&report](std::string name, double margin) {
        report.items.push_back({std::move(name), margin >= 0.0, margin});
    };
    add("p_lower", theta.p - spec.delta);
    add("q_lower", theta.q - spec.delta);
    add("persistence_lower", std::fabs(rp.persistence) - spec.epsilon);
    add("separation_lower", rp.separation - spec.zeta);
    add("gap_lower", spectral_gap(theta) - spec.gamma_star);
    add("f0_sup", spec.sup_bound - sup_norm(theta.f0));
    add("f1_sup", spec.sup_bound - sup_norm(theta.f1));
    add("f0_smoothness",
        spec.besov_radius - besov_norm(analyze(theta.f0, theta.f0.level - 1), spec.s0));
    add("f1_smoothness",
        spec.besov_radius - besov_norm(analyze(theta.f1, theta.f1.level - 1), spec.s1));
    report.all_pass = true;
    for (const auto& item : report.items) report.all_pass = report.all_pass && item.pass;
    return report;
}

RhoResult rho_pseudo_distance(const ReparamPoint& a, const ReparamPoint& b) {
    const double ra = contrast_weight(a);
    const double rb = contrast_weight(b);
    RhoResult out;
    double value = std::fabs(ra - rb);
    value = std::max(value, std::fabs(a.persistence * ra - b.persistence * rb));

    if (a.contrast_defined && b.contrast_defined) {
        const double inner = l2_inner(a.contrast, b.contrast);
        const double sign = inner < 0.0 ? -1.0 : 1.0;
        value = std::max(
            value, std::fabs(a.skew * a.persistence * a.separation * ra -
                             sign * b.skew * b.persistence * b.separation * rb));
        GridFunction diff = combine(1.0, a.contrast, -sign, b.contrast);
        value = std::max(value, std::max(std::fabs(ra), std::fabs(rb)) * l2_norm(diff));
    } else {
        out.contrast_terms_dropped = true;
    }
    value = std::max(value, l2_norm(combine(1.0, a.mix, -1.0, b.mix)));
    out.value = value;
    return out;
}

}  // namespace nphmm
