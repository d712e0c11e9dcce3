#include <doctest.h>

#include <cmath>
#include <vector>

#include "nphmm/grid.hpp"
#include "nphmm/harness.hpp"
#include "nphmm/rng.hpp"
#include "nphmm/wavelet.hpp"
#include "test_support.hpp"

using namespace nphmm;
using test_support::random_unit_direction;

namespace {

// Explicit periodized Haar functions, built without the cascade so the
// transform has an independent cross-check.
GridFunction explicit_haar_mother(int j, int k, int out_level) {
    GridFunction g(out_level, std::vector<double>(cell_count(out_level), 0.0));
    const std::size_t span = cell_count(out_level - j);
    const std::size_t start = static_cast<std::size_t>(k) * span;
    const double height = std::pow(2.0, j / 2.0);
    for (std::size_t i = 0; i < span / 2; ++i) {
        g.values[start + i] = height;
        g.values[start + span / 2 + i] = -height;
    }
    return g;
}

GridFunction random_grid(CounterRng& rng, int level) {
    std::vector<double> v(cell_count(level));
    for (double& x : v) x = 4.0 * rng.next_unit() - 2.0;
    return GridFunction(level, std::move(v));
}

double tree_sq_sum(const CoeffTree& c) {
    double s = 0.0;
    for (double v : c.father) s += v * v;
    for (const auto& lv : c.mother)
        for (double v : lv) s += v * v;
    return s;
}

}  // namespace

TEST_SUITE("wavelet") {

TEST_CASE("analysis agrees with direct inner products against explicit functions") {
    CounterRng rng(21, 0);
    const int D = 5;
    const GridFunction f = random_grid(rng, D);
    const CoeffTree c = analyze(f, D - 1);
    CHECK(c.father[0] == doctest::Approx(integral(f)).epsilon(1e-13));
    for (int j = 0; j < D; ++j)
        for (int k = 0; k < (1 << j); ++k) {
            const double direct = l2_inner(f, explicit_haar_mother(j, k, D));
            CHECK(c.mother_at(j, k) == doctest::Approx(direct).epsilon(1e-12));
        }
}

TEST_CASE("basis vectors reproduce the explicit Haar functions") {
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < (1 << j); ++k) {
            const GridFunction b =
                basis_vector({WaveletIndex::Kind::mother, j, k}, 0, 4);
            const GridFunction e = explicit_haar_mother(j, k, 4);
            for (std::size_t i = 0; i < b.cells(); ++i)
                CHECK(b.values[i] == doctest::Approx(e.values[i]).epsilon(1e-13));
        }
    const GridFunction father = basis_vector({WaveletIndex::Kind::father, 0, 0}, 0, 4);
    for (double v : father.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("round trip and Parseval hold for both bases") {
    CounterRng rng(22, 0);
    for (WaveletBasis basis : {WaveletBasis::haar, WaveletBasis::daubechies4}) {
        const int D = 6;
        const GridFunction f = random_grid(rng, D);
        const CoeffTree c = analyze(f, D - 1, 0, basis);
        const GridFunction back = synthesize(c, D, basis);
        for (std::size_t i = 0; i < f.cells(); ++i)
            CHECK(back.values[i] == doctest::Approx(f.values[i]).epsilon(1e-11));
        CHECK(tree_sq_sum(c) == doctest::Approx(l2_norm(f) * l2_norm(f)).epsilon(1e-12));
    }
}

TEST_CASE("daubechies4 basis vectors are orthonormal") {
    std::vector<GridFunction> basis;
    for (const WaveletIndex& idx : index_set(0, 2))
        basis.push_back(basis_vector(idx, 0, 6, WaveletBasis::daubechies4));
    for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = a; b < basis.size(); ++b) {
            const double expect = a == b ? 1.0 : 0.0;
            CHECK(l2_inner(basis[a], basis[b]) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("daubechies4 collapses to Haar on a two-cell grid") {
    const GridFunction f(1, {1.7, -0.3});
    const CoeffTree haar = analyze(f, 0, 0, WaveletBasis::haar);
    const CoeffTree d4 = analyze(f, 0, 0, WaveletBasis::daubechies4);
    CHECK(d4.father[0] == doctest::Approx(haar.father[0]).epsilon(1e-14));
    CHECK(d4.mother_at(0, 0) == doctest::Approx(haar.mother_at(0, 0)).epsilon(1e-14));
}

TEST_CASE("synthesis of a truncated tree is the orthogonal projection") {
    CounterRng rng(23, 0);
    const int D = 6;
    const GridFunction f = random_grid(rng, D);
    const CoeffTree full = analyze(f, D - 1);
    double prev_err = -1.0;
    for (int j = -1; j < D; ++j) {
        const GridFunction proj = synthesize(truncate_tree(full, j), D);
        const GridFunction direct = synthesize(analyze(f, j), D);
        for (std::size_t i = 0; i < f.cells(); ++i)
            CHECK(proj.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-11));
        const GridFunction diff = combine(1.0, f, -1.0, proj);
        const double err = l2_norm(diff);
        if (prev_err >= 0.0) CHECK(err <= prev_err + 1e-12);
        prev_err = err;
    }
    CHECK(prev_err == doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("coefficient-norm smoothness functional") {
    // 1 + 0.5 h: father 1, one level-0 mother 0.5
    const CoeffTree c = analyze(step_density(5, 0.5), 4);
    CHECK(besov_norm(c, 0.5) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-13));
    // scaling the function scales the norm
    const CoeffTree c2 = analyze(scale(2.0, step_density(5, 0.5)), 4);
    CHECK(besov_norm(c2, 0.5) == doctest::Approx(2.0 * std::sqrt(1.25)).epsilon(1e-13));
    // the synthetic rough density has equal mass on every level: sqrt(1 + c^2)
    const CoeffTree cr = analyze(rough_density(8, 0.7, 0.3), 7);
    CHECK(besov_norm(cr, 0.7) == doctest::Approx(std::sqrt(1.09)).epsilon(1e-12));
    CHECK(besov_norm(cr, 0.9) > besov_norm(cr, 0.7));
}

TEST_CASE("block layout formulas") {
    const BlockLayout a = block_layout(1024, 1.0, 0);
    CHECK(a.coarse_level == 3);
    CHECK(a.block_size == 8);
    CHECK(a.top_level == 7);
    CHECK(a.valid);
    CHECK(a.blocks_at(3) == 1);
    CHECK(a.blocks_at(7) == 16);

    const BlockLayout b = block_layout(16384, 1.0, 0);
    CHECK(b.coarse_level == 4);
    CHECK(b.top_level == 10);
    CHECK(b.valid);

    CHECK_FALSE(block_layout(4, 1.0, 0).valid);
    CHECK_FALSE(block_layout(1024, 4.0, 0).valid);  // tau pushes top down to coarse

    const BlockLayout c = block_layout(1024, 1.0, 4);
    CHECK(c.start_level == 4);
    CHECK(c.coarse_level == 4);  // coarse never sits below the start level

    CHECK_THROWS_AS(block_layout(2, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(block_layout(1024, 0.5, 0), std::invalid_argument);
}

TEST_CASE("block norms partition each level's energy") {
    CounterRng rng(24, 0);
    const GridFunction f = random_grid(rng, 8);
    const CoeffTree c = analyze(f, 7);
    const BlockLayout layout = block_layout(1024, 1.0, 0);
    const auto norms = block_norms(c, layout);
    REQUIRE(norms.size() == static_cast<std::size_t>(layout.top_level - layout.coarse_level + 1));
    for (int j = layout.coarse_level; j <= layout.top_level; ++j) {
        const auto& level_norms = norms[static_cast<std::size_t>(j - layout.coarse_level)];
        REQUIRE(level_norms.size() == layout.blocks_at(j));
        double from_blocks = 0.0;
        for (double nb : level_norms) from_blocks += nb * nb;
        double direct = 0.0;
        for (int k = 0; k < (1 << j); ++k) direct += c.mother_at(j, k) * c.mother_at(j, k);
        CHECK(from_blocks == doctest::Approx(direct).epsilon(1e-12));
        // block l covers the contiguous positions [l*N, (l+1)*N)
        const int N = layout.block_size;
        double first_block = 0.0;
        for (int k = 0; k < N && k < (1 << j); ++k)
            first_block += c.mother_at(j, k) * c.mother_at(j, k);
        CHECK(level_norms[0] == doctest::Approx(std::sqrt(first_block)).epsilon(1e-12));
    }
}

TEST_CASE("index set enumeration") {
    const auto idx = index_set(0, 2);
    REQUIRE(idx.size() == 8);  // 1 father + 1 + 2 + 4 mothers
    CHECK(idx[0].kind == WaveletIndex::Kind::father);
    CHECK(idx[1].kind == WaveletIndex::Kind::mother);
    CHECK(idx[1].level == 0);
    CHECK(idx.back().level == 2);
    CHECK(idx.back().position == 3);

    const auto deep = index_set(2, 4);
    CHECK(deep.size() == 4 + 4 + 8 + 16);
}

TEST_CASE("trees reject out-of-range access and bad shapes") {
    CoeffTree c = zero_tree(0, 2);
    CHECK(c.coefficient_count() == 8);
    CHECK_THROWS_AS(analyze(uniform_density(3), 3), std::invalid_argument);
    CHECK_THROWS_AS(synthesize(zero_tree(0, 4), 3), std::invalid_argument);
}

}  // TEST_SUITE
