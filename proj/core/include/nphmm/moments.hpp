#pragma once

#include <array>
#include <functional>
#include <span>

#include "nphmm/model.hpp"
#include "nphmm/simulate.hpp"

namespace nphmm {

// Grouped second/third-order moments of the observations projected on a
// candidate direction. The population version also records the overlap
// between the candidate and the true contrast direction.
struct MomentTriple {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    GridFunction direction;  // candidate direction the triple was computed with
    double overlap = 0.0;    // <contrast, direction>; populated by oracles only
    bool population = false;
};

// sliding-window empirical mean of h over windows of s consecutive
// observations, s in {1,2,3}; throws when the path is shorter than s
double empirical_moment(const SamplePath& path,
                        const std::function<double(std::span<const double>)>& h, int s);

// moment statistics of a path against a direction (empirical counterpart of
// moment_oracle)
MomentTriple moment_triple(const SamplePath& path, const GridFunction& direction);
MomentTriple moment_triple(std::span<const double> observed, const GridFunction& direction);

// closed-form population moments
MomentTriple moment_oracle(const ModelParams& theta, const GridFunction& direction);

// Same quantities by direct quadrature of the tabulated joint densities;
// an independent route kept separate so the two can cross-check each other.
MomentTriple moment_oracle_quadrature(const ModelParams& theta, const GridFunction& direction);

struct PhiEstimate {
    double skew_hat = 0.0;         // in [-1, 1]
    double persistence_hat = 0.0;  // clamped to [-1, 1]
    double v_hat = 0.0;            // 4 m1^2 max(m2,0) + m3^2
    bool m1_zero = false;          // persistence denominator vanished
    bool v_zero = false;           // skew denominator vanished
};

PhiEstimate phi_hat(const MomentTriple& m);

struct QEstimate {
    double skew_hat = 0.0;
    double persistence_hat = 0.0;
    std::array<double, 4> q = {};      // clamped row-stochastic {q00,q01,q10,q11}
    std::array<double, 4> q_raw = {};  // direct formula values, not clamped
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, v_hat = 0.0;
    bool m1_zero = false;
    bool v_zero = false;
};

// transition matrix from the two shape parameters:
// off-diagonals (1 -+ skew)(1 - persistence)/2, diagonals by complement
QEstimate q_hat(double skew_hat, double persistence_hat);

// full pipeline with diagnostics carried through
QEstimate q_estimate(const MomentTriple& m);

// squared Frobenius distance minimized over the two state labelings
double frobenius_loss_min_perm(const std::array<double, 4>& q_est,
                               const std::array<double, 4>& q_true);

}  // namespace nphmm
