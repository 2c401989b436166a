#include <catch_amalgamated.hpp>

#include "pmmf/dual_engine.hpp"
#include "support/test_oracles.hpp"

using namespace pmmf;

TEST_CASE("subgradient is the conjugate exposure minus the granted delta") {
    Decision d;
    d.selected = {0, 1, 2};
    d.exposure_delta = {3, 0};
    REQUIRE(subgradient(d, {6.0, 6.0}) == Vec{3.0, 6.0});

    Decision matched;
    matched.exposure_delta = {2, 1};
    REQUIRE(subgradient(matched, {2.0, 1.0}) == Vec{0.0, 0.0});

    Decision bad;
    bad.exposure_delta = {1};
    REQUIRE_THROWS_AS(subgradient(bad, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("momentum blend weighs the fresh gradient by alpha") {
    REQUIRE(momentum_blend({2.0, 0.0}, {0.0, 2.0}, 1.0) == Vec{2.0, 0.0});
    REQUIRE(momentum_blend({2.0, 0.0}, {0.0, 2.0}, 0.5) == Vec{1.0, 1.0});
    REQUIRE_THROWS_AS(momentum_blend({1.0}, {1.0}, 0.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(momentum_blend({1.0}, {1.0}, 1.5),
                      std::invalid_argument);
}

TEST_CASE("prox step has the weighted closed form") {
    REQUIRE(prox_step({0.4, -0.2}, {0.0, 0.0}, 1.0, {1.0, 1.0}) ==
            Vec{0.4, -0.2});
    REQUIRE(prox_step({0.0}, {2.0}, 1.0, {1.0}) == Vec{-1.0});
    REQUIRE(prox_step({0.0}, {2.0}, 1.0, {2.0}) == Vec{-0.25});
}

TEST_CASE("prox step minimizes the descent objective") {
    // <g, mu> + step * ||mu - mu_t||^2_{gamma^2} scanned on a fine grid
    // around the reported minimizer, in up to four dimensions.
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        const int P = oracles::uniform_int(rng, 1, 4);
        Vec mu(P), g(P), gamma(P);
        for (int p = 0; p < P; ++p) {
            mu[p] = oracles::uniform(rng, -1.0, 1.0);
            g[p] = oracles::uniform(rng, -2.0, 2.0);
            gamma[p] = oracles::uniform(rng, 0.3, 3.0);
        }
        const double step = oracles::uniform(rng, 0.2, 2.0);
        const Vec out = prox_step(mu, g, step, gamma);

        auto objective = [&](const Vec& cand) {
            double value = 0.0;
            for (int p = 0; p < P; ++p) {
                const double d = cand[p] - mu[p];
                value += g[p] * cand[p] + step * gamma[p] * gamma[p] * d * d;
            }
            return value;
        };
        const double at_out = objective(out);
        for (int probe = 0; probe < 200; ++probe) {
            Vec cand = out;
            for (int p = 0; p < P; ++p)
                cand[p] += oracles::uniform(rng, -0.5, 0.5);
            REQUIRE(at_out <= objective(cand) + 1e-6);
        }
    }
}

TEST_CASE("projection matches the worked two-provider cases") {
    ProjectionWorkspace ws;

    // feasible input is returned unchanged
    const Vec feasible{-0.2, 0.4};
    REQUIRE(project_onto_D(feasible, {1.0, 1.0}, 1.0, ws) == feasible);

    // lambda=1, gamma=[1,1], mu=[-0.8,-0.6]: water level 0.2
    const Vec a = project_onto_D({-0.8, -0.6}, {1.0, 1.0}, 1.0, ws);
    REQUIRE(a[0] == Catch::Approx(-0.6).margin(1e-12));
    REQUIRE(a[1] == Catch::Approx(-0.4).margin(1e-12));

    // lambda=1, gamma=[1,1], mu=[-5,3]: only the negative coordinate moves
    const Vec b = project_onto_D({-5.0, 3.0}, {1.0, 1.0}, 1.0, ws);
    REQUIRE(b[0] == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(b[1] == 3.0);

    // lambda=0 clamps negatives
    const Vec c = project_onto_D({-5.0, 3.0}, {2.0, 1.0}, 0.0, ws);
    REQUIRE(c == Vec{0.0, 3.0});
}

TEST_CASE("projection agrees with the active-set oracle") {
    std::mt19937_64 rng(505);
    ProjectionWorkspace ws;
    for (int trial = 0; trial < 1000; ++trial) {
        const int P = oracles::uniform_int(rng, 1, 6);
        Vec mu(P), gamma(P);
        for (int p = 0; p < P; ++p) {
            gamma[p] = oracles::uniform(rng, 0.2, 4.0);
            mu[p] = oracles::uniform(rng, -2.0, 1.0);
        }
        const double lambda = oracles::uniform(rng, 0.0, 1.5);
        const Vec fast = project_onto_D(mu, gamma, lambda, ws);
        const Vec slow = oracles::project_by_active_set(mu, gamma, lambda);

        double neg_sum = 0.0;
        for (int p = 0; p < P; ++p) neg_sum += std::min(gamma[p] * fast[p], 0.0);
        REQUIRE(neg_sum >= -lambda - 1e-9);
        const double fast_dist =
            oracles::weighted_distance_sq(fast, mu, gamma);
        const double slow_dist =
            oracles::weighted_distance_sq(slow, mu, gamma);
        REQUIRE(fast_dist <= slow_dist + 1e-8);
        for (int p = 0; p < P; ++p) {
            REQUIRE(fast[p] == Catch::Approx(slow[p]).margin(1e-6));
            if (mu[p] >= 0.0) REQUIRE(fast[p] == mu[p]);
        }

        // idempotence
        const Vec twice = project_onto_D(fast, gamma, lambda, ws);
        for (int p = 0; p < P; ++p)
            REQUIRE(twice[p] == Catch::Approx(fast[p]).margin(1e-12));
    }
}

TEST_CASE("dual update composes the four stages") {
    // Hand-composed single step on toy numbers: gamma=[6,6], lambda=1,
    // mu=0, g_prev=0, alpha=0.5, step=1. The decision grants [3,0] while
    // the remaining resources are [6,6]:
    //   conjugate exposure  e = [6,6]
    //   raw gradient        g~ = [3,6]
    //   blended gradient    g = [1.5,3]
    //   prox                mu' = [-1.5/72, -3/72]
    // and mu' is already feasible, so projection returns it unchanged.
    DualState dual = DualState::fresh(2, 1.0, 0.5);
    ExposureState ex;
    ex.exposures = {0.0, 0.0};
    ex.remaining = {6.0, 6.0};
    Decision d;
    d.selected = {0, 1, 2};
    d.exposure_delta = {3, 0};
    ProjectionWorkspace ws;
    const DualState next = dual_update(dual, d, ex, {6.0, 6.0}, 1.0, ws);
    REQUIRE(next.raw_grad == Vec{3.0, 6.0});
    REQUIRE(next.momentum_grad == Vec{1.5, 3.0});
    REQUIRE(next.mu[0] == Catch::Approx(-1.5 / 72.0));
    REQUIRE(next.mu[1] == Catch::Approx(-3.0 / 72.0));
    REQUIRE(is_dual_feasible(next.mu, {6.0, 6.0}, 1.0));

    // zero raw gradient at the start is a fixed point
    DualState fixed = DualState::fresh(2, 1.0, 1.0);
    ExposureState drained;
    drained.exposures = {6.0, 6.0};
    drained.remaining = {0.0, 0.0};
    Decision none;
    none.exposure_delta = {0, 0};
    const DualState still = dual_update(fixed, none, drained, {6.0, 6.0}, 1.0,
                                        ws);
    REQUIRE(still.mu == Vec{0.0, 0.0});
}

TEST_CASE("alpha one reproduces the momentum-free recursion") {
    std::mt19937_64 rng(606);
    ProjectionWorkspace ws;
    const Vec gamma{2.0, 3.0, 1.0};
    DualState with_momentum = DualState::fresh(3, 0.7, 1.0);
    Vec plain_mu{0.0, 0.0, 0.0};
    for (int t = 0; t < 25; ++t) {
        ExposureState ex;
        ex.exposures = {0.0, 0.0, 0.0};
        ex.remaining = {oracles::uniform(rng, -1.0, 3.0),
                        oracles::uniform(rng, -1.0, 3.0),
                        oracles::uniform(rng, -1.0, 3.0)};
        Decision d;
        d.exposure_delta = {oracles::uniform_int(rng, 0, 2),
                            oracles::uniform_int(rng, 0, 2),
                            oracles::uniform_int(rng, 0, 2)};
        with_momentum = dual_update(with_momentum, d, ex, gamma, 1.0, ws);

        // independent recursion without any momentum state
        const Vec conj = conjugate_argmax_exposure(plain_mu, ex.remaining, 1.0);
        const Vec raw = subgradient(d, conj);
        plain_mu = project_onto_D(prox_step(plain_mu, raw, 0.7, gamma), gamma,
                                  1.0, ws);
        for (int p = 0; p < 3; ++p)
            REQUIRE(with_momentum.mu[p] ==
                    Catch::Approx(plain_mu[p]).margin(1e-12));
    }
}
