#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "nphmm/moments.hpp"
#include "nphmm/simulate.hpp"
#include "nphmm/wavelet.hpp"

namespace nphmm {

// thrown when an estimator is asked to run on a BlockLayout whose retained
// level range is empty (small n / large tau)
struct InvalidLayoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All coefficient-level statistics shared by the two density estimators.
struct CoefficientEstimates {
    CoeffTree mix_hat;     // empirical mean of each basis function
    CoeffTree pair_hat;    // centered lag-one cross moments against the direction
    double g_hat = 0.0;    // sqrt(v_hat)/m2 when m2 > 0, else 0
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    double block_threshold_scale = 0.0;   // noise scale for the direct estimator
    double shared_threshold_scale = 0.0;  // noise scale for the shared-strength part
    double skew_hat = 0.0;
    MomentTriple moments;
    bool m1_zero = false;
    bool m2_nonpos = false;
    bool skew_extreme = false;  // |skew_hat| = 1
};

// Estimates every coefficient up to layout.top_level from one path. The
// direction is the (estimated or oracle) contrast the moments project on.
CoefficientEstimates coefficient_estimates(const SamplePath& path,
                                           const GridFunction& direction,
                                           const BlockLayout& layout);

// father coefficients of the two labeled density estimates:
// mix_hat + (omega/2) * pair_hat, one per label
std::pair<std::vector<double>, std::vector<double>> father_coefficients(
    const CoefficientEstimates& ce);

// Population counterpart used by oracles and exactness tests: trees from the
// model's exact mixture/contrast functions, moments from moment_oracle, and
// the same derived scalars as the empirical version. n only enters the
// threshold scales.
CoefficientEstimates population_coefficient_estimates(const ModelParams& theta,
                                                      const GridFunction& direction,
                                                      const BlockLayout& layout,
                                                      std::size_t n);

struct BlockDecision {
    int level = 0;
    int block = 0;
    double primary_norm = 0.0;
    double primary_threshold = 0.0;
    bool primary_kept = false;
    // second rule (the shared-strength estimator applies two per block)
    bool has_secondary = false;
    double secondary_norm = 0.0;
    double secondary_threshold = 0.0;
    bool secondary_kept = false;
};

enum class EstimatorKind { smooth, rough };
enum class DensityLabel { plus, minus };

struct DensityEstimate {
    EstimatorKind kind = EstimatorKind::smooth;
    DensityLabel label = DensityLabel::plus;
    GridFunction raw;        // synthesis before the final clamp
    GridFunction truncated;  // clamped to [0, t_check]
    double t_check = 0.0;
    std::vector<BlockDecision> trace;
};

// Block-thresholded estimator aimed at smooth targets: coefficients below the
// coarse level pass through, blocked levels are kept only when their norm
// clears Gamma times the estimated noise scale, finer levels are dropped.
// Returns the plus- and minus-labeled estimates.
std::pair<DensityEstimate, DensityEstimate> smooth_estimate(const SamplePath& path,
                                                            const GridFunction& direction,
                                                            double gamma, double tau,
                                                            double t_check,
                                                            int start_level = 0);

// Shared-strength estimator aimed at one rough target: blocked levels carry
// two additive parts, one proportional to the mixture coefficients and one
// carrying the contrast correction, each thresholded by its own rule.
std::pair<DensityEstimate, DensityEstimate> rough_estimate(const SamplePath& path,
                                                           const GridFunction& direction,
                                                           double gamma, double tau,
                                                           double t_check,
                                                           int start_level = 0);

struct PairLoss {
    double loss_f0 = 0.0;  // squared L2 against f0_true under the best pairing
    double loss_f1 = 0.0;
    bool swapped = false;  // best pairing maps the plus label to f1
};

// Joint label assignment minimizing the total squared L2 error.
PairLoss l2_loss_min_perm(const GridFunction& est_plus, const GridFunction& est_minus,
                          const GridFunction& f0_true, const GridFunction& f1_true);

}  // namespace nphmm
