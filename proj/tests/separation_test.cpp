#include <doctest.h>

#include <cmath>
#include <vector>

#include "nphmm/grid.hpp"
#include "nphmm/model.hpp"
#include "nphmm/rng.hpp"
#include "nphmm/separation.hpp"
#include "nphmm/simulate.hpp"
#include "nphmm/wavelet.hpp"
#include "test_support.hpp"

using namespace nphmm;
using test_support::random_model;
using test_support::theta_star;

namespace {

// Slow reference route: evaluate every basis function at every observation.
// The production code goes through a cell histogram instead.
GramMatrix gram_by_pointwise_evaluation(const SamplePath& path, int max_mother_level,
                                        int start_level) {
    const auto idx = index_set(start_level, max_mother_level);
    const int out_level = max_mother_level + 1;
    std::vector<GridFunction> basis;
    for (const auto& ix : idx) basis.push_back(basis_vector(ix, start_level, out_level));

    const std::size_t dim = idx.size();
    const std::size_t n = path.size();
    std::vector<std::vector<double>> proj(dim, std::vector<double>(n));
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t t = 0; t < n; ++t) proj[a][t] = evaluate(basis[a], path.observed[t]);

    GramMatrix g;
    g.start_level = start_level;
    g.max_mother_level = max_mother_level;
    g.dim = dim;
    g.entries.assign(dim * dim, 0.0);
    std::vector<double> p1(dim, 0.0);
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t t = 0; t < n; ++t) p1[a] += proj[a][t];
        p1[a] /= static_cast<double>(n);
    }
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b) {
            double pab = 0.0, pba = 0.0;
            for (std::size_t t = 0; t + 1 < n; ++t) {
                pab += proj[a][t] * proj[b][t + 1];
                pba += proj[b][t] * proj[a][t + 1];
            }
            pab /= static_cast<double>(n - 1);
            pba /= static_cast<double>(n - 1);
            g.at(a, b) = 0.5 * (pab + pba) - p1[a] * p1[b];
        }
    return g;
}

}  // namespace

TEST_SUITE("separation") {

TEST_CASE("population gram of the reference model at depth zero") {
    const ModelParams theta = theta_star(5);
    const GramMatrix g = gram_oracle(theta, 0);
    REQUIRE(g.dim == 2);  // one father, one level-0 mother
    CHECK(g.at(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g.at(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g.at(1, 1) == doctest::Approx(0.03).epsilon(1e-13));

    const EigenPair lead = leading_eigenvector(g);
    CHECK(lead.value == doctest::Approx(0.03).epsilon(1e-13));
    CHECK(lead.vector[0] == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(lead.vector[1] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK_FALSE(lead.degenerate);
}

TEST_CASE("empirical gram equals the pointwise-evaluation route") {
    const ModelParams theta = theta_star(6);
    const SamplePath path = sample_path(theta, 400, 808, 0);
    for (int M : {0, 2}) {
        const GramMatrix fast = empirical_gram(path, M);
        const GramMatrix slow = gram_by_pointwise_evaluation(path, M, 0);
        REQUIRE(fast.dim == slow.dim);
        for (std::size_t a = 0; a < fast.dim; ++a)
            for (std::size_t b = 0; b < fast.dim; ++b)
                CHECK(fast.at(a, b) == doctest::Approx(slow.at(a, b)).epsilon(1e-11));
    }
}

TEST_CASE("empirical gram is exactly symmetric") {
    const SamplePath path = sample_path(theta_star(6), 300, 11, 0);
    const GramMatrix g = empirical_gram(path, 3);
    for (std::size_t a = 0; a < g.dim; ++a)
        for (std::size_t b = 0; b < g.dim; ++b) CHECK(g.at(a, b) == g.at(b, a));
}

TEST_CASE("jacobi solves a diagonal matrix trivially") {
    const std::vector<double> m = {3.0, 0.0, 0.0, -5.0};
    const EigenDecomposition eig = jacobi_eigen(m, 2);
    REQUIRE(eig.values.size() == 2);
    const bool order_a = std::fabs(eig.values[0] - 3.0) < 1e-14;
    const double v0 = order_a ? eig.values[0] : eig.values[1];
    const double v1 = order_a ? eig.values[1] : eig.values[0];
    CHECK(v0 == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(v1 == doctest::Approx(-5.0).epsilon(1e-14));

    GramMatrix g;
    g.dim = 2;
    g.entries = m;
    const EigenPair lead = leading_eigenvector(g);  // largest magnitude wins
    CHECK(lead.value == doctest::Approx(-5.0).epsilon(1e-14));
    CHECK(std::fabs(lead.vector[1]) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lead.vector[1] > 0.0);  // sign fixed by the largest-magnitude entry
}

TEST_CASE("jacobi reproduces spectra of rotated diagonal matrices") {
    CounterRng rng(515, 0);
    const std::size_t dim = 24;
    std::vector<double> diag(dim);
    for (auto& d : diag) d = 4.0 * rng.next_unit() - 2.0;

    // apply random plane rotations: A = R D R^T stays symmetric with known spectrum
    std::vector<double> a(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] = diag[i];
    for (int rot = 0; rot < 200; ++rot) {
        const std::size_t p = rng.next_u64() % dim;
        std::size_t q = rng.next_u64() % dim;
        if (p == q) q = (q + 1) % dim;
        const double angle = 6.283185307179586 * rng.next_unit();
        const double c = std::cos(angle), s = std::sin(angle);
        for (std::size_t k = 0; k < dim; ++k) {  // rows
            const double ap = a[p * dim + k], aq = a[q * dim + k];
            a[p * dim + k] = c * ap - s * aq;
            a[q * dim + k] = s * ap + c * aq;
        }
        for (std::size_t k = 0; k < dim; ++k) {  // columns
            const double ap = a[k * dim + p], aq = a[k * dim + q];
            a[k * dim + p] = c * ap - s * aq;
            a[k * dim + q] = s * ap + c * aq;
        }
    }

    const EigenDecomposition eig = jacobi_eigen(a, dim);
    std::vector<double> got = eig.values, want = diag;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (std::size_t i = 0; i < dim; ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-11));

    // residuals and orthonormality
    double fro = 0.0;
    for (double v : a) fro += v * v;
    fro = std::sqrt(fro);
    for (std::size_t i = 0; i < dim; ++i) {
        double resid = 0.0;
        for (std::size_t r = 0; r < dim; ++r) {
            double av = 0.0;
            for (std::size_t c2 = 0; c2 < dim; ++c2) av += a[r * dim + c2] * eig.vectors[i][c2];
            const double diff = av - eig.values[i] * eig.vectors[i][r];
            resid += diff * diff;
        }
        CHECK(std::sqrt(resid) <= 1e-10 * fro);
        for (std::size_t j = i; j < dim; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += eig.vectors[i][k] * eig.vectors[j][k];
            CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-11));
        }
    }
}

TEST_CASE("population gram is rank one with the contrast as leading direction") {
    CounterRng rng(616, 0);
    for (int trial = 0; trial < 8; ++trial) {
        const ModelParams theta = random_model(rng, 5);
        const ReparamPoint rp = reparametrize(theta);
        const GramMatrix g = gram_oracle(theta, 3);
        const double r = contrast_weight(rp);
        const CoeffTree ct = analyze(rp.contrast, 3);
        const std::vector<double> c = tree_to_flat(ct);
        double c_norm_sq = 0.0;
        for (double v : c) c_norm_sq += v * v;

        const EigenDecomposition eig = jacobi_eigen(g.entries, g.dim);
        std::size_t lead = 0;
        for (std::size_t i = 1; i < eig.values.size(); ++i)
            if (std::fabs(eig.values[i]) > std::fabs(eig.values[lead])) lead = i;
        CHECK(eig.values[lead] == doctest::Approx(r * c_norm_sq).epsilon(1e-11));
        for (std::size_t i = 0; i < eig.values.size(); ++i)
            if (i != lead) CHECK(std::fabs(eig.values[i]) <= 1e-12 * std::fabs(eig.values[lead]) + 1e-15);

        // leading vector matches +-c/||c||
        double dot = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) dot += eig.vectors[lead][k] * c[k];
        CHECK(std::fabs(dot) == doctest::Approx(std::sqrt(c_norm_sq)).epsilon(1e-11));
    }
}

TEST_CASE("population direction recovers the contrast exactly when representable") {
    const ModelParams theta = theta_star(6);  // contrast is a level-0 step
    const ReparamPoint rp = reparametrize(theta);
    // tau = 1 sits exactly on the contrast's sup, where a one-ulp synthesis
    // wobble may brush the clamp; the recovery itself must still be exact
    for (double tau : {1.0, 2.0}) {
        const SeparatingDirection sd = direction_from_gram(gram_oracle(theta, 3), tau);
        CHECK_FALSE(sd.degenerate);
        if (tau > 1.0) CHECK_FALSE(sd.clamp_active);
        CHECK(l2_norm(sd.grid) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::fabs(l2_inner(sd.grid, rp.contrast)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("clamping activates on spiky directions and keeps unit norm") {
    // rank-one gram whose eigenvector synthesizes above the clamp height
    GramMatrix g;
    g.start_level = 0;
    g.max_mother_level = 0;
    g.dim = 2;
    const double c[2] = {1.0, 0.9};
    g.entries = {c[0] * c[0], c[0] * c[1], c[1] * c[0], c[1] * c[1]};
    const SeparatingDirection sd = direction_from_gram(g, 1.0);
    CHECK(sd.clamp_active);
    CHECK(l2_norm(sd.grid) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("zero gram degrades to the flagged fallback direction") {
    GramMatrix g;
    g.start_level = 0;
    g.max_mother_level = 1;
    g.dim = 4;
    g.entries.assign(16, 0.0);
    const SeparatingDirection sd = direction_from_gram(g, 2.0);
    CHECK(sd.degenerate);
    CHECK(l2_norm(sd.grid) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("estimated direction aligns better as the path grows") {
    const ModelParams theta = theta_star(6);
    const ReparamPoint rp = reparametrize(theta);
    const int reps = 10;
    auto mean_alignment = [&](std::size_t n) {
        double total = 0.0;
        int successes = 0;
        for (int rep = 0; rep < reps; ++rep) {
            const auto [train, rest] = split_3n(theta, n, 90210, static_cast<std::uint64_t>(rep));
            (void)rest;
            const SeparatingDirection sd = psi_tilde_from_path(train, 3, 4.0);
            const double align = std::fabs(l2_inner(sd.grid, rp.contrast));
            total += align;
            successes += align >= 7.0 / 8.0 ? 1 : 0;
        }
        return std::pair<double, int>(total / reps, successes);
    };
    const auto [mean_small, hits_small] = mean_alignment(1 << 12);
    const auto [mean_large, hits_large] = mean_alignment(1 << 16);
    CHECK(mean_large > mean_small);
    CHECK(hits_large >= 9);
    CHECK(hits_large >= hits_small);
}

TEST_CASE("independent observations produce a near-zero gram") {
    ModelParams theta = theta_star(6);
    theta.p = 0.3;
    theta.q = 0.7;  // persistence 0: the chain forgets instantly
    const SamplePath path = sample_path(theta, 1 << 14, 454, 0);
    const GramMatrix g = empirical_gram(path, 3);
    double max_entry = 0.0;
    for (double v : g.entries) max_entry = std::max(max_entry, std::fabs(v));
    CHECK(max_entry < 0.05);
}

TEST_CASE("flat coefficient vectors round trip through trees") {
    CounterRng rng(717, 0);
    std::vector<double> flat(1 + 1 + 2 + 4 + 8);
    for (auto& v : flat) v = rng.next_unit() - 0.5;
    const CoeffTree tree = flat_to_tree(flat, 0, 3);
    CHECK(tree.start_level == 0);
    CHECK(tree.max_level == 3);
    CHECK(tree_to_flat(tree) == flat);
}

TEST_CASE("index-set depth sufficiency bound") {
    const double radius = std::sqrt(1.25);
    CHECK_FALSE(direction_level_sufficient(6, 0.5, 0.5, radius));
    CHECK(direction_level_sufficient(7, 0.5, 0.5, radius));
    // looser separation needs more depth
    CHECK_FALSE(direction_level_sufficient(7, 0.5, 0.25, radius));
}

}  // TEST_SUITE
