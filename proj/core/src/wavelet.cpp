#include "nphmm/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nphmm {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Daubechies-4 low-pass filter; high-pass is g[m] = (-1)^m h[3-m].
constexpr double kD4[4] = {
    (1.0 + kSqrt3) / (4.0 * 1.4142135623730950488),
    (3.0 + kSqrt3) / (4.0 * 1.4142135623730950488),
    (3.0 - kSqrt3) / (4.0 * 1.4142135623730950488),
    (1.0 - kSqrt3) / (4.0 * 1.4142135623730950488),
};

// one periodized analysis step: fine scaling coefficients -> (coarse, detail)
void analysis_step(const std::vector<double>& fine, std::vector<double>& coarse,
                   std::vector<double>& detail, WaveletBasis basis) {
    const std::size_t half = fine.size() / 2;
    coarse.resize(half);
    detail.resize(half);
    if (basis == WaveletBasis::haar) {
        for (std::size_t k = 0; k < half; ++k) {
            coarse[k] = (fine[2 * k] + fine[2 * k + 1]) * kInvSqrt2;
            detail[k] = (fine[2 * k] - fine[2 * k + 1]) * kInvSqrt2;
        }
        return;
    }
    const std::size_t mask = fine.size() - 1;  // fine.size() is a power of two
    for (std::size_t k = 0; k < half; ++k) {
        double s = 0.0, d = 0.0;
        for (int m = 0; m < 4; ++m) {
            const double v = fine[(2 * k + static_cast<std::size_t>(m)) & mask];
            s += kD4[m] * v;
            d += (m % 2 == 0 ? kD4[3 - m] : -kD4[3 - m]) * v;
        }
        coarse[k] = s;
        detail[k] = d;
    }
}

// inverse of analysis_step
std::vector<double> synthesis_step(const std::vector<double>& coarse,
                                   const std::vector<double>& detail, WaveletBasis basis) {
    const std::size_t half = coarse.size();
    std::vector<double> fine(2 * half, 0.0);
    if (basis == WaveletBasis::haar) {
        for (std::size_t k = 0; k < half; ++k) {
            fine[2 * k] = (coarse[k] + detail[k]) * kInvSqrt2;
            fine[2 * k + 1] = (coarse[k] - detail[k]) * kInvSqrt2;
        }
        return fine;
    }
    const std::size_t mask = fine.size() - 1;
    for (std::size_t k = 0; k < half; ++k) {
        for (int m = 0; m < 4; ++m) {
            const std::size_t i = (2 * k + static_cast<std::size_t>(m)) & mask;
            const double g = (m % 2 == 0 ? kD4[3 - m] : -kD4[3 - m]);
            fine[i] += kD4[m] * coarse[k] + g * detail[k];
        }
    }
    return fine;
}

}  // namespace

double& CoeffTree::mother_at(int level, int position) {
    return mother.at(static_cast<std::size_t>(level - start_level))
        .at(static_cast<std::size_t>(position));
}

double CoeffTree::mother_at(int level, int position) const {
    return mother.at(static_cast<std::size_t>(level - start_level))
        .at(static_cast<std::size_t>(position));
}

std::size_t CoeffTree::coefficient_count() const {
    std::size_t n = father.size();
    for (const auto& lv : mother) n += lv.size();
    return n;
}

CoeffTree zero_tree(int start_level, int max_level) {
    if (start_level < 0 || max_level < start_level - 1)
        throw std::invalid_argument("bad tree levels");
    CoeffTree c;
    c.start_level = start_level;
    c.max_level = max_level;
    c.father.assign(cell_count(start_level), 0.0);
    for (int j = start_level; j <= max_level; ++j)
        c.mother.emplace_back(cell_count(j), 0.0);
    return c;
}

CoeffTree analyze(const GridFunction& f, int max_level, int start_level, WaveletBasis basis) {
    if (max_level > f.level - 1)
        throw std::invalid_argument("analyze: max_level exceeds input resolution - 1");
    if (start_level < 0 || start_level > f.level || max_level < start_level - 1)
        throw std::invalid_argument("analyze: bad level range");

    // grid values -> finest scaling coefficients
    std::vector<double> s = f.values;
    const double scl = std::pow(2.0, -0.5 * f.level);
    for (double& v : s) v *= scl;

    CoeffTree c;
    c.start_level = start_level;
    c.max_level = max_level;
    c.mother.assign(static_cast<std::size_t>(max_level - start_level + 1), {});
    std::vector<double> coarse, detail;
    for (int j = f.level - 1; j >= start_level; --j) {
        analysis_step(s, coarse, detail, basis);
        if (j <= max_level) c.mother[static_cast<std::size_t>(j - start_level)] = detail;
        s = coarse;
    }
    c.father = std::move(s);
    return c;
}

GridFunction synthesize(const CoeffTree& c, int out_level, WaveletBasis basis) {
    const int natural = std::max(c.start_level, c.max_level + 1);
    if (out_level < natural)
        throw std::invalid_argument("synthesize: out_level below tree resolution");

    std::vector<double> s = c.father;
    const std::vector<double> zeros_none;
    for (int j = c.start_level; j < out_level; ++j) {
        if (j <= c.max_level) {
            s = synthesis_step(s, c.mother[static_cast<std::size_t>(j - c.start_level)], basis);
        } else {
            std::vector<double> zeros(s.size(), 0.0);
            s = synthesis_step(s, zeros, basis);
        }
    }
    const double scl = std::pow(2.0, 0.5 * out_level);
    for (double& v : s) v *= scl;
    GridFunction out;
    out.level = out_level;
    out.values = std::move(s);
    return out;
}

GridFunction synthesize(const CoeffTree& c, WaveletBasis basis) {
    return synthesize(c, std::max(c.start_level, c.max_level + 1), basis);
}

CoeffTree truncate_tree(const CoeffTree& c, int keep_max_level) {
    if (keep_max_level < c.start_level - 1)
        throw std::invalid_argument("truncate_tree: level below start");
    CoeffTree out;
    out.start_level = c.start_level;
    out.max_level = std::min(c.max_level, keep_max_level);
    out.father = c.father;
    out.mother.assign(c.mother.begin(),
                      c.mother.begin() + (out.max_level - out.start_level + 1));
    return out;
}

double besov_norm(const CoeffTree& c, double s) {
    double father_sq = 0.0;
    for (double v : c.father) father_sq += v * v;
    double worst = 0.0;
    for (int j = c.start_level; j <= c.max_level; ++j) {
        double lvl = 0.0;
        for (double v : c.mother[static_cast<std::size_t>(j - c.start_level)]) lvl += v * v;
        worst = std::max(worst, std::pow(2.0, 2.0 * s * j) * lvl);
    }
    return std::sqrt(father_sq + worst);
}

double tree_l2_norm(const CoeffTree& c) {
    double sq = 0.0;
    for (double v : c.father) sq += v * v;
    for (const auto& lv : c.mother)
        for (double v : lv) sq += v * v;
    return std::sqrt(sq);
}

std::size_t BlockLayout::blocks_at(int level) const {
    return cell_count(level) / static_cast<std::size_t>(block_size);
}

BlockLayout block_layout(std::size_t n, double tau, int start_level) {
    if (n < 4) throw std::invalid_argument("block_layout: need n >= 4");
    if (!(tau >= 1.0)) throw std::invalid_argument("block_layout: need tau >= 1");
    if (start_level < 0) throw std::invalid_argument("block_layout: bad start level");

    const double logn = std::log(static_cast<double>(n));
    BlockLayout out;
    out.start_level = start_level;
    int j = start_level;
    while (static_cast<double>(std::size_t{1} << j) < logn) ++j;
    out.coarse_level = j;
    out.block_size = static_cast<int>(std::size_t{1} << j);

    const double budget = static_cast<double>(n) / (logn * tau * tau);
    int top = -1;
    for (int cand = 0; cand < 62; ++cand) {
        if (static_cast<double>(std::size_t{1} << cand) <= budget)
            top = cand;
        else
            break;
    }
    out.top_level = top;
    out.valid = top > out.coarse_level;
    return out;
}

std::vector<std::vector<double>> block_norms(const CoeffTree& c, const BlockLayout& layout) {
    std::vector<std::vector<double>> out;
    const int hi = std::min(layout.top_level, c.max_level);
    for (int j = layout.coarse_level; j <= hi; ++j) {
        const auto& lv = c.mother[static_cast<std::size_t>(j - c.start_level)];
        const std::size_t nb = layout.blocks_at(j);
        std::vector<double> norms(nb, 0.0);
        for (std::size_t l = 0; l < nb; ++l) {
            double sq = 0.0;
            for (int t = 0; t < layout.block_size; ++t) {
                const double v = lv[l * static_cast<std::size_t>(layout.block_size) +
                                    static_cast<std::size_t>(t)];
                sq += v * v;
            }
            norms[l] = std::sqrt(sq);
        }
        out.push_back(std::move(norms));
    }
    return out;
}

std::vector<WaveletIndex> index_set(int start_level, int max_level) {
    std::vector<WaveletIndex> out;
    for (std::size_t k = 0; k < cell_count(start_level); ++k)
        out.push_back({WaveletIndex::Kind::father, start_level, static_cast<int>(k)});
    for (int j = start_level; j <= max_level; ++j)
        for (std::size_t k = 0; k < cell_count(j); ++k)
            out.push_back({WaveletIndex::Kind::mother, j, static_cast<int>(k)});
    return out;
}

GridFunction basis_vector(const WaveletIndex& idx, int start_level, int out_level,
                          WaveletBasis basis) {
    const int max_level =
        idx.kind == WaveletIndex::Kind::father ? start_level - 1 : idx.level;
    CoeffTree c = zero_tree(start_level, max_level);
    if (idx.kind == WaveletIndex::Kind::father)
        c.father.at(static_cast<std::size_t>(idx.position)) = 1.0;
    else
        c.mother_at(idx.level, idx.position) = 1.0;
    return synthesize(c, out_level, basis);
}

}  // namespace nphmm
