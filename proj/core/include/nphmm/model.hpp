#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "nphmm/grid.hpp"

namespace nphmm {

// Two-state hidden chain with emission densities on the dyadic grid.
// Hidden transition matrix rows: state 0 -> (1-p, p), state 1 -> (q, 1-q).
struct ModelParams {
    double p = 0.5;
    double q = 0.5;
    DensityGrid f0;
    DensityGrid f1;
};

// throws std::invalid_argument on broken invariants (p,q in (0,1), matching
// resolutions, valid densities)
void validate_model(const ModelParams& theta);

// Mixture-and-contrast coordinates of the model:
//   skew      = (q - p) / (p + q)            in [-1, 1]
//   persistence = 1 - p - q                  in (-1, 1)
//   separation  = ||f0 - f1||_L2             >= 0
//   mix       = (q f0 + p f1) / (p + q)      the stationary emission density
//   contrast  = (f0 - f1) / separation       unit L2 norm, undefined when
//                                            separation = 0
struct ReparamPoint {
    double skew = 0.0;
    double persistence = 0.0;
    double separation = 0.0;
    DensityGrid mix;
    GridFunction contrast;
    bool contrast_defined = false;
};

ReparamPoint reparametrize(const ModelParams& theta);

// Inverse map. Requires |skew| < 1 and |persistence| < 1; throws
// std::invalid_argument when the reconstructed densities dip below -1e-10
// (inconsistent coordinates). Values in [-1e-10, 0) are clipped to 0 and the
// densities renormalized within the same tolerance budget.
ModelParams invert_reparam(const ReparamPoint& point);

std::pair<double, double> stationary_distribution(double p, double q);
std::pair<double, double> stationary_distribution(const ModelParams& theta);

// 1 - |1 - p - q|
double spectral_gap(double p, double q);
double spectral_gap(const ModelParams& theta);

// quarter * (1 - skew^2) * persistence * separation^2; the rank-one weight of
// the lag-one covariance operator
double contrast_weight(double skew, double persistence, double separation);
double contrast_weight(const ReparamPoint& point);

// row-major 2x2 transition matrix {1-p, p, q, 1-q}
std::array<double, 4> transition_matrix(double p, double q);

// Tabulated joint density of three consecutive observations. Cells are
// evaluated lazily from the rank-structured form; marginals are closed-form.
class JointDensity3 {
  public:
    JointDensity3(const ModelParams& theta, const GridFunction* direction = nullptr);

    int level() const { return mix_.level; }
    bool degenerate() const { return degenerate_; }

    double cell3(std::size_t i, std::size_t j, std::size_t k) const;
    double cell2(std::size_t i, std::size_t j) const;  // lag-one pair density
    double cell1(std::size_t i) const;                 // stationary emission

    const DensityGrid& marginal1() const { return mix_; }
    const GridFunction& contrast() const { return contrast_; }
    double weight() const { return r_; }

    // direction passed at construction (empty grid if none)
    const GridFunction& direction() const { return direction_; }
    bool has_direction() const { return has_direction_; }

    struct Validation {
        double min_cell = 0.0;
        double mass = 0.0;
        bool cells_nonnegative = false;  // min_cell >= -1e-12
        bool unit_mass = false;          // |mass - 1| <= 1e-10
    };
    // streams all 8^D cells; cost grows accordingly
    Validation validate() const;

  private:
    DensityGrid mix_;
    GridFunction contrast_;  // all-zero when degenerate
    double r_ = 0.0;
    double skew_term_ = 0.0;    // persistence * r
    double triple_term_ = 0.0;  // -skew * persistence * separation * r
    bool degenerate_ = true;
    GridFunction direction_;
    bool has_direction_ = false;
};

JointDensity3 joint_density_3(const ModelParams& theta, const GridFunction* direction = nullptr);

// Parameter-class constraints checked at membership time.
struct ClassSpec {
    double delta = 0.05;      // lower bound on p and q
    double epsilon = 0.05;    // lower bound on |1 - p - q|
    double zeta = 0.05;       // lower bound on ||f0 - f1||
    double s0 = 0.5;          // smoothness index for f0
    double s1 = 0.5;          // smoothness index for f1
    double besov_radius = 10.0;
    double gamma_star = 0.1;  // lower bound on the spectral gap
    double sup_bound = 10.0;  // sup-norm bound on both densities
};

struct MembershipReport {
    struct Item {
        std::string name;
        bool pass = false;
        double margin = 0.0;  // >= 0 means satisfied
    };
    std::vector<Item> items;
    bool all_pass = false;

    const Item& find(const std::string& name) const;
};

MembershipReport class_membership(const ModelParams& theta, const ClassSpec& spec);

// Scale-free comparison of two models through their grouped moment
// coordinates; zero for relabeled copies of the same model.
struct RhoResult {
    double value = 0.0;
    bool contrast_terms_dropped = false;  // either side degenerate
};

RhoResult rho_pseudo_distance(const ReparamPoint& a, const ReparamPoint& b);

}  // namespace nphmm
