#include <catch_amalgamated.hpp>

#include "pmmf/regularizer.hpp"
#include "support/test_oracles.hpp"

using namespace pmmf;

TEST_CASE("fairness values match the closed forms") {
    // Toy exposures e=[2,4] with gamma=[6,6]: min(2/6, 4/6) = 1/3.
    REQUIRE(fairness_value(Regularizer::MMF, {2.0, 4.0}, {6.0, 6.0}) ==
            Catch::Approx(1.0 / 3.0));
    // e = gamma gives exactly 1.
    REQUIRE(fairness_value(Regularizer::MMF, {6.0, 6.0}, {6.0, 6.0}) == 1.0);
    // PF at zero exposure is log(1) summed.
    REQUIRE(fairness_value(Regularizer::PF, {0.0, 0.0}, {6.0, 6.0}) == 0.0);
    REQUIRE(fairness_value(Regularizer::PF, {6.0}, {6.0}) ==
            Catch::Approx(std::log(2.0)));
    REQUIRE_THROWS_AS(fairness_value(Regularizer::MMF, {1.0}, {1.0, 2.0}),
                      std::invalid_argument);
}

TEST_CASE("mmf fairness is scale-invariant and capped at one") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const int P = oracles::uniform_int(rng, 1, 8);
        Vec e(P), gamma(P);
        for (int p = 0; p < P; ++p) {
            gamma[p] = oracles::uniform(rng, 0.2, 5.0);
            e[p] = oracles::uniform(rng, 0.0, gamma[p]);
        }
        const double base = fairness_value(Regularizer::MMF, e, gamma);
        REQUIRE(base <= 1.0 + 1e-12);

        const double c = oracles::uniform(rng, 0.1, 10.0);
        Vec e2 = e, g2 = gamma;
        for (int p = 0; p < P; ++p) {
            e2[p] *= c;
            g2[p] *= c;
        }
        REQUIRE(fairness_value(Regularizer::MMF, e2, g2) ==
                Catch::Approx(base).margin(1e-12));
    }
    // equality exactly when e matches gamma on the binding providers
    REQUIRE(fairness_value(Regularizer::MMF, {2.0, 3.0}, {2.0, 3.0}) == 1.0);
}

TEST_CASE("dual feasibility reduces the subset family to one sum") {
    // gamma=[2,1,1], mu=[-0.3, 0.5, -0.5], lambda=1:
    // sum of negative parts = -0.6 - 0.5 = -1.1 < -1, so infeasible; the
    // witnessing subset is the pair of negative coordinates.
    REQUIRE_FALSE(is_dual_feasible({-0.3, 0.5, -0.5}, {2.0, 1.0, 1.0}, 1.0));
    REQUIRE_FALSE(oracles::dual_feasible_by_subsets({-0.3, 0.5, -0.5},
                                                    {2.0, 1.0, 1.0}, 1.0));

    // non-negative mu is always feasible
    REQUIRE(is_dual_feasible({0.0, 2.0, 0.7}, {1.0, 5.0, 2.0}, 0.0));
    // lambda = 0 with any strictly negative coordinate fails
    REQUIRE_FALSE(is_dual_feasible({0.0, -1e-9}, {1.0, 1.0}, 0.0));
}

TEST_CASE("dual feasibility agrees exactly with subset enumeration") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 500; ++trial) {
        const int P = oracles::uniform_int(rng, 1, 10);
        Vec mu(P), gamma(P);
        for (int p = 0; p < P; ++p) {
            gamma[p] = oracles::uniform(rng, 0.1, 4.0);
            mu[p] = oracles::uniform(rng, -1.0, 1.0);
        }
        const double lambda = oracles::uniform(rng, 0.0, 2.0);
        REQUIRE(is_dual_feasible(mu, gamma, lambda) ==
                oracles::dual_feasible_by_subsets(mu, gamma, lambda));
    }
}

TEST_CASE("conjugate closed form matches its definition") {
    // mu = 0: max over e <= gamma of min(e/gamma) is 1, attained at the cap.
    REQUIRE(mmf_conjugate_value({0.0, 0.0}, {3.0, 5.0}, 2.0) == 1.0);

    // gamma=[1,1], mu=[0.5,-0.2], lambda=1: 0.3/1 + 1 = 1.3, and the grid
    // maximization of the defining objective agrees.
    const double closed = mmf_conjugate_value({0.5, -0.2}, {1.0, 1.0}, 1.0);
    REQUIRE(closed == Catch::Approx(1.3));
    const double grid =
        oracles::mmf_conjugate_by_grid({0.5, -0.2}, {1.0, 1.0}, 1.0, 51);
    REQUIRE(grid <= closed + 1e-9);
    REQUIRE(grid == Catch::Approx(closed).margin(1e-6));

    // infeasible mu has an infinite conjugate
    REQUIRE_THROWS_AS(
        mmf_conjugate_value({-0.3, 0.5, -0.5}, {2.0, 1.0, 1.0}, 1.0),
        std::domain_error);
    // lambda = 0 is rejected by the 1/lambda term
    REQUIRE_THROWS_AS(mmf_conjugate_value({0.0}, {1.0}, 0.0),
                      std::invalid_argument);
}

TEST_CASE("conjugate upper-bounds the grid and is tight at the cap") {
    std::mt19937_64 rng(303);
    int checked = 0;
    while (checked < 1000) {
        const int P = oracles::uniform_int(rng, 1, 3);
        Vec mu(P), gamma(P);
        for (int p = 0; p < P; ++p) {
            gamma[p] = oracles::uniform(rng, 0.2, 3.0);
            mu[p] = oracles::uniform(rng, -1.0, 1.0);
        }
        const double lambda = oracles::uniform(rng, 0.2, 3.0);
        if (!is_dual_feasible(mu, gamma, lambda)) continue;
        ++checked;
        const double closed = mmf_conjugate_value(mu, gamma, lambda);
        const double grid =
            oracles::mmf_conjugate_by_grid(mu, gamma, lambda, 51);
        REQUIRE(grid <= closed + 1e-9);
        const double at_cap = oracles::mmf_conjugate_at_cap(mu, gamma, lambda);
        REQUIRE(std::abs(at_cap - closed) <= 1e-9);
    }
}

TEST_CASE("conjugate argmax exposure is the cap clamped at zero") {
    REQUIRE(conjugate_argmax_exposure({0.0, 0.0}, {6.0, 6.0}, 1.0) ==
            Vec{6.0, 6.0});
    REQUIRE(conjugate_argmax_exposure({0.0, 0.0}, {3.0, -1.0}, 1.0) ==
            Vec{3.0, 0.0});
    REQUIRE(conjugate_argmax_exposure({0.0, 0.0}, {0.0, 0.0}, 1.0) ==
            Vec{0.0, 0.0});
}

TEST_CASE("pf gradient matches finite differences") {
    REQUIRE(pf_fairness_gradient({0.0}, {2.0}) == Vec{0.5});
    // at e = gamma = 2 the derivative of log(1+e/gamma) is 1/(gamma+e) = 0.25
    const Vec grad = pf_fairness_gradient({2.0}, {2.0});
    REQUIRE(grad[0] == Catch::Approx(0.25));
    const double h = 1e-6;
    const double fd = (fairness_value(Regularizer::PF, {2.0 + h}, {2.0}) -
                       fairness_value(Regularizer::PF, {2.0 - h}, {2.0})) /
                      (2.0 * h);
    REQUIRE(grad[0] == Catch::Approx(fd).margin(1e-8));
    REQUIRE_THROWS_AS(pf_fairness_gradient({1.0}, {1.0, 2.0}),
                      std::invalid_argument);
}
