#pragma once

#include <cstddef>
#include <vector>

#include "nphmm/grid.hpp"

namespace nphmm {

enum class WaveletBasis { haar, daubechies4 };

struct WaveletIndex {
    enum class Kind { father, mother };
    Kind kind;
    int level;     // father entries live at the tree's start level
    int position;  // in [0, 2^level)
};

// Orthonormal coefficient tree over the periodized basis on [0,1):
// 2^start_level father coefficients plus one mother vector of length 2^j for
// each level j in [start_level, max_level]. max_level == start_level-1 means
// a father-only tree.
struct CoeffTree {
    int start_level = 0;
    int max_level = -1;
    std::vector<double> father;
    std::vector<std::vector<double>> mother;  // mother[j - start_level]

    double& mother_at(int level, int position);
    double mother_at(int level, int position) const;
    std::size_t coefficient_count() const;
};

CoeffTree zero_tree(int start_level, int max_level);

// Exact transform of a piecewise-constant input. Requires
// max_level <= f.level - 1 and start_level <= f.level.
CoeffTree analyze(const GridFunction& f, int max_level, int start_level = 0,
                  WaveletBasis basis = WaveletBasis::haar);

// Reconstruction at the given resolution (missing finer levels are taken as
// zero, so a truncated tree yields the corresponding projection). Requires
// out_level >= max(start_level, max_level + 1).
GridFunction synthesize(const CoeffTree& c, int out_level,
                        WaveletBasis basis = WaveletBasis::haar);

// natural resolution: max(start_level, max_level + 1)
GridFunction synthesize(const CoeffTree& c, WaveletBasis basis = WaveletBasis::haar);

// drops mother levels above keep_max_level (>= start_level - 1)
CoeffTree truncate_tree(const CoeffTree& c, int keep_max_level);

// sqrt( sum(father^2) + sup_j 2^(2js) sum_k mother_j[k]^2 )
double besov_norm(const CoeffTree& c, double s);

double tree_l2_norm(const CoeffTree& c);

// Level/block bookkeeping for block thresholding. Levels in
// [coarse_level, top_level] are partitioned into contiguous blocks of
// block_size = 2^coarse_level coefficients each.
struct BlockLayout {
    int start_level = 0;   // tree start level the layout was derived for
    int coarse_level = 0;  // smallest blocked level
    int top_level = -1;    // largest retained level
    int block_size = 1;    // 2^coarse_level
    bool valid = false;    // requires top_level > coarse_level

    std::size_t blocks_at(int level) const;  // 2^level / block_size
};

// coarse_level = min{ j >= start_level : 2^j >= ln n },
// top_level    = max{ j : 2^j <= n / (ln(n) tau^2) }  (-1 when none).
// Requires n >= 4 and tau >= 1.
BlockLayout block_layout(std::size_t n, double tau, int start_level = 0);

// Euclidean norms of each block's coefficients, for levels
// [coarse_level, min(top_level, c.max_level)]; result[i][l] is block l of
// level coarse_level + i.
std::vector<std::vector<double>> block_norms(const CoeffTree& c, const BlockLayout& layout);

// flat enumeration of father indices then mother levels start_level..max_level
std::vector<WaveletIndex> index_set(int start_level, int max_level);

// basis vector for one index, as a grid function at resolution out_level
GridFunction basis_vector(const WaveletIndex& idx, int start_level, int out_level,
                          WaveletBasis basis = WaveletBasis::haar);

}  // namespace nphmm
