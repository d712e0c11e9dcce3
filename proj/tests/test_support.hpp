#pragma once

#include <cmath>
#include <vector>

#include "nphmm/grid.hpp"
#include "nphmm/harness.hpp"
#include "nphmm/model.hpp"
#include "nphmm/rng.hpp"

namespace test_support {

// reference two-state model used across the suites: p=0.2, q=0.3,
// f0 uniform, f1 = 1 + 0.5 * half_split
inline nphmm::ModelParams theta_star(int level) {
    nphmm::ModelParams theta;
    theta.p = 0.2;
    theta.q = 0.3;
    theta.f0 = nphmm::uniform_density(level);
    theta.f1 = nphmm::step_density(level, 0.5);
    return theta;
}

inline nphmm::DensityGrid random_density(nphmm::CounterRng& rng, int level) {
    std::vector<double> v(nphmm::cell_count(level));
    double sum = 0.0;
    for (double& x : v) {
        x = 0.2 + rng.next_unit();
        sum += x;
    }
    const double mean = sum / static_cast<double>(v.size());
    for (double& x : v) x /= mean;
    return nphmm::DensityGrid(level, std::move(v));
}

// p, q in [0.05, 0.45] so the chain is aperiodic with persistence >= 0.1;
// the two densities are independent draws, distinct with probability one
inline nphmm::ModelParams random_model(nphmm::CounterRng& rng, int level) {
    nphmm::ModelParams theta;
    theta.p = 0.05 + 0.40 * rng.next_unit();
    theta.q = 0.05 + 0.40 * rng.next_unit();
    theta.f0 = random_density(rng, level);
    theta.f1 = random_density(rng, level);
    return theta;
}

inline nphmm::GridFunction random_unit_direction(nphmm::CounterRng& rng, int level) {
    std::vector<double> v(nphmm::cell_count(level));
    for (double& x : v) x = 2.0 * rng.next_unit() - 1.0;
    nphmm::GridFunction g(level, std::move(v));
    const double norm = nphmm::l2_norm(g);
    for (double& x : g.values) x /= norm;
    return g;
}

}  // namespace test_support
