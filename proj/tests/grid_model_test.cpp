#include <doctest.h>

#include <cmath>
#include <vector>

#include "nphmm/grid.hpp"
#include "nphmm/harness.hpp"
#include "nphmm/model.hpp"
#include "nphmm/rng.hpp"
#include "test_support.hpp"

using namespace nphmm;
using test_support::random_model;
using test_support::theta_star;

namespace {

// Independent route to the three-observation joint density: explicit sum over
// the 8 hidden paths. The production code never forms this sum.
double brute_force_cell3(const ModelParams& theta, std::size_t i, std::size_t j,
                         std::size_t k) {
    const auto [pi0, pi1] = stationary_distribution(theta);
    const double pi[2] = {pi0, pi1};
    const double Q[2][2] = {{1.0 - theta.p, theta.p}, {theta.q, 1.0 - theta.q}};
    const DensityGrid* f[2] = {&theta.f0, &theta.f1};
    double total = 0.0;
    for (int x0 = 0; x0 < 2; ++x0)
        for (int x1 = 0; x1 < 2; ++x1)
            for (int x2 = 0; x2 < 2; ++x2)
                total += pi[x0] * Q[x0][x1] * Q[x1][x2] * f[x0]->values[i] *
                         f[x1]->values[j] * f[x2]->values[k];
    return total;
}

}  // namespace

TEST_SUITE("grid_model") {

TEST_CASE("grid basics: cells, lookup, integral") {
    CHECK(cell_count(0) == 1);
    CHECK(cell_count(3) == 8);
    GridFunction f(2, {1.0, 2.0, 3.0, 4.0});
    CHECK(cell_index(f, 0.0) == 0);
    CHECK(cell_index(f, 0.25) == 1);
    CHECK(cell_index(f, 0.999999) == 3);
    CHECK_THROWS_AS(cell_index(f, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(cell_index(f, -0.1), std::invalid_argument);
    CHECK(evaluate(f, 0.6) == 3.0);
    CHECK(integral(f) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(sup_norm(f) == 4.0);
    CHECK(inf_value(f) == 1.0);
}

TEST_CASE("inner products are exact and resolution-agnostic") {
    GridFunction a(1, {1.0, 3.0});
    GridFunction b(2, {2.0, 4.0, 1.0, 1.0});
    // refine a to level 2: {1,1,3,3}; <a,b> = (2+4+3+3)/4 = 3
    CHECK(l2_inner(a, b) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(l2_inner(b, a) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(l2_norm(a) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    const GridFunction fine = refine(a, 3);
    CHECK(fine.cells() == 8);
    CHECK(l2_inner(fine, b) == doctest::Approx(3.0).epsilon(1e-15));
    const GridFunction c = combine(2.0, a, -1.0, b);
    CHECK(c.level == 2);
    CHECK(c.values == std::vector<double>{0.0, -2.0, 5.0, 5.0});
}

TEST_CASE("density validation") {
    CHECK(is_valid_density(uniform_density(4)));
    CHECK_FALSE(is_valid_density(GridFunction(1, {1.5, 0.6})));   // mass 1.05
    CHECK_FALSE(is_valid_density(GridFunction(1, {2.1, -0.1})));  // negative cell
    CHECK_NOTHROW(require_density(step_density(3, 0.5)));
}

TEST_CASE("reparametrization of the reference model") {
    const ModelParams theta = theta_star(4);
    const ReparamPoint rp = reparametrize(theta);
    CHECK(rp.skew == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(rp.persistence == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rp.separation == doctest::Approx(0.5).epsilon(1e-14));
    REQUIRE(rp.contrast_defined);
    // mix = 1 + 0.2 h, contrast = -h
    const GridFunction h = half_split(4);
    for (std::size_t i = 0; i < rp.mix.cells(); ++i) {
        CHECK(rp.mix.values[i] == doctest::Approx(1.0 + 0.2 * h.values[i]).epsilon(1e-14));
        CHECK(rp.contrast.values[i] == doctest::Approx(-h.values[i]).epsilon(1e-14));
    }
    CHECK(l2_norm(rp.contrast) == doctest::Approx(1.0).epsilon(1e-14));

    const auto [pi0, pi1] = stationary_distribution(theta);
    CHECK(pi0 == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(pi1 == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(spectral_gap(theta) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(contrast_weight(rp) == doctest::Approx(0.03).epsilon(1e-13));
    CHECK(contrast_weight(0.0, 0.5, 1.0) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("inversion round trip on random models") {
    CounterRng rng(404, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const ModelParams theta = random_model(rng, 5);
        const ModelParams back = invert_reparam(reparametrize(theta));
        CHECK(back.p == doctest::Approx(theta.p).epsilon(1e-13));
        CHECK(back.q == doctest::Approx(theta.q).epsilon(1e-13));
        for (std::size_t i = 0; i < theta.f0.cells(); ++i) {
            CHECK(back.f0.values[i] == doctest::Approx(theta.f0.values[i]).epsilon(1e-12));
            CHECK(back.f1.values[i] == doctest::Approx(theta.f1.values[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("inversion rejects inconsistent coordinates") {
    ReparamPoint rp = reparametrize(theta_star(3));
    rp.separation = 10.0;  // would push f1 far below zero
    CHECK_THROWS_AS(invert_reparam(rp), std::invalid_argument);
}

TEST_CASE("joint density matches the hidden-path sum") {
    CounterRng rng(7070, 0);
    for (int trial = 0; trial < 4; ++trial) {
        const ModelParams theta = trial == 0 ? theta_star(3) : random_model(rng, 3);
        const JointDensity3 jd(theta);
        const std::size_t cells = theta.f0.cells();
        for (std::size_t i = 0; i < cells; ++i)
            for (std::size_t j = 0; j < cells; ++j)
                for (std::size_t k = 0; k < cells; ++k)
                    CHECK(jd.cell3(i, j, k) ==
                          doctest::Approx(brute_force_cell3(theta, i, j, k)).epsilon(1e-12));
    }
}

TEST_CASE("joint density marginalizes consistently") {
    CounterRng rng(7171, 0);
    const ModelParams theta = random_model(rng, 3);
    const JointDensity3 jd(theta);
    const std::size_t cells = theta.f0.cells();
    const double w = 1.0 / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t j = 0; j < cells; ++j) {
            double sum3 = 0.0;
            for (std::size_t k = 0; k < cells; ++k) sum3 += jd.cell3(i, j, k) * w;
            CHECK(sum3 == doctest::Approx(jd.cell2(i, j)).epsilon(1e-12));
        }
        double sum2 = 0.0;
        for (std::size_t j = 0; j < cells; ++j) sum2 += jd.cell2(i, j) * w;
        CHECK(sum2 == doctest::Approx(jd.cell1(i)).epsilon(1e-12));
    }
    const auto v = jd.validate();
    CHECK(v.cells_nonnegative);
    CHECK(v.unit_mass);
}

TEST_CASE("class membership of the reference model") {
    ClassSpec spec;
    spec.delta = 0.1;
    spec.epsilon = 0.3;
    spec.zeta = 0.3;
    spec.s0 = 0.5;
    spec.s1 = 0.5;
    spec.besov_radius = 2.0;
    spec.gamma_star = 0.4;
    spec.sup_bound = 2.0;
    const MembershipReport report = class_membership(theta_star(5), spec);
    CHECK(report.all_pass);
    for (const auto& item : report.items) {
        INFO(item.name);
        CHECK(item.pass);
        CHECK(item.margin >= 0.0);
    }
    // f1 = 1 + 0.5 h has coefficient norm sqrt(1.25) at s = 0.5
    CHECK(report.find("f1_smoothness").margin ==
          doctest::Approx(2.0 - std::sqrt(1.25)).epsilon(1e-12));

    ClassSpec strict = spec;
    strict.delta = 0.25;  // p = 0.2 fails
    const MembershipReport bad = class_membership(theta_star(5), strict);
    CHECK_FALSE(bad.all_pass);
    CHECK_FALSE(bad.find("p_lower").pass);
    CHECK(bad.find("p_lower").margin < 0.0);
}

TEST_CASE("contrast weight respects the generic envelope") {
    CounterRng rng(909, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const ModelParams theta = random_model(rng, 4);
        const ReparamPoint rp = reparametrize(theta);
        const double r = contrast_weight(rp);
        const double delta = std::min(theta.p, theta.q);
        const double eps = std::fabs(rp.persistence);
        const double zeta = rp.separation;
        CHECK(std::fabs(r) >= delta * eps * zeta * zeta / 4.0 - 1e-15);
        CHECK(std::fabs(r) <= zeta * zeta / 4.0 + 1e-15);
        const double sup = std::max(sup_norm(theta.f0), sup_norm(theta.f1));
        CHECK(zeta <= std::sqrt(2.0 * sup) + 1e-15);
    }
}

TEST_CASE("rho pseudo-distance vanishes exactly on relabeled copies") {
    const ModelParams theta = theta_star(4);
    ModelParams relabeled;
    relabeled.p = theta.q;
    relabeled.q = theta.p;
    relabeled.f0 = theta.f1;
    relabeled.f1 = theta.f0;
    const ReparamPoint a = reparametrize(theta);
    const ReparamPoint b = reparametrize(relabeled);
    const RhoResult same = rho_pseudo_distance(a, b);
    CHECK(same.value == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_FALSE(same.contrast_terms_dropped);
    CHECK(rho_pseudo_distance(a, a).value == 0.0);

    CounterRng rng(11, 0);
    const ReparamPoint c = reparametrize(random_model(rng, 4));
    CHECK(rho_pseudo_distance(a, c).value > 0.01);

    ModelParams flat = theta;
    flat.f1 = flat.f0;
    const RhoResult degen = rho_pseudo_distance(a, reparametrize(flat));
    CHECK(degen.contrast_terms_dropped);
}

TEST_CASE("model validation rejects broken inputs") {
    ModelParams theta = theta_star(3);
    theta.p = 0.0;
    CHECK_THROWS_AS(validate_model(theta), std::invalid_argument);
    theta = theta_star(3);
    theta.q = 1.0;
    CHECK_THROWS_AS(validate_model(theta), std::invalid_argument);
    theta = theta_star(3);
    theta.f1 = DensityGrid(2, {1.0, 1.0, 1.0, 1.0});  // resolution mismatch
    CHECK_THROWS_AS(validate_model(theta), std::invalid_argument);
}

}  // TEST_SUITE
