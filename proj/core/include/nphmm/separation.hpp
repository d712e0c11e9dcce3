#pragma once

#include <cstddef>
#include <vector>

#include "nphmm/model.hpp"
#include "nphmm/simulate.hpp"
#include "nphmm/wavelet.hpp"

namespace nphmm {

// Symmetrized lag-one covariance of the basis coefficients over the index set
// holding all fathers plus mother levels start_level..max_mother_level.
struct GramMatrix {
    int start_level = 0;
    int max_mother_level = 0;
    std::size_t dim = 0;
    std::vector<double> entries;  // row-major, symmetric

    double at(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }
    double& at(std::size_t r, std::size_t c) { return entries[r * dim + c]; }
};

GramMatrix empirical_gram(const SamplePath& path, int max_mother_level, int start_level = 0);

// population counterpart: rank <= 1, weight * coeff outer product
GramMatrix gram_oracle(const ModelParams& theta, int max_mother_level, int start_level = 0);

struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;
    bool degenerate = false;  // zero matrix
};

// Eigenpair of the largest-|value| eigenvalue of a symmetric matrix, by
// cyclic Jacobi rotations. The vector is unit Euclidean with its
// largest-magnitude entry positive (ties broken toward the lowest index).
EigenPair leading_eigenvector(const GramMatrix& gram);

// Full symmetric eigensolver used by leading_eigenvector; eigenvalues are
// unordered, eigenvectors[i] matches eigenvalues[i].
struct EigenDecomposition {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};
EigenDecomposition jacobi_eigen(const std::vector<double>& symmetric, std::size_t dim);

struct SeparatingDirection {
    GridFunction grid;  // unit L2 norm
    double tau = 1.0;
    double leading_eigenvalue = 0.0;
    bool degenerate = false;
    bool clamp_active = false;  // truncation modified at least one cell
};

// leading eigenvector -> synthesis over the index set -> clamp to [-tau,tau]
// -> renormalize to unit L2
SeparatingDirection direction_from_gram(const GramMatrix& gram, double tau);

SeparatingDirection psi_tilde_from_path(const SamplePath& train, int max_mother_level,
                                        double tau, int start_level = 0);

// coefficient vector over the index set <-> tree helpers
std::vector<double> tree_to_flat(const CoeffTree& c);
CoeffTree flat_to_tree(const std::vector<double>& flat, int start_level, int max_mother_level);

// whether the index-set depth resolves a separation zeta for densities in a
// smoothness ball: 2^(-M s) <= zeta sqrt(2^(2s) - 1) / (4 radius)
bool direction_level_sufficient(int max_mother_level, double s_star, double zeta,
                                double radius);

}  // namespace nphmm
