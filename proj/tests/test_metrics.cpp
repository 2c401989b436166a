#include <catch_amalgamated.hpp>

#include "pmmf/metrics.hpp"
#include "support/builders.hpp"
#include "support/test_oracles.hpp"

using namespace pmmf;

namespace {

HorizonTrace trace_of_lists(const Instance& inst, const ArrivalStream& arrivals,
                            const std::vector<std::vector<int>>& lists) {
    HorizonTrace trace;
    ExposureState ex = ExposureState::fresh(inst.weights);
    for (std::size_t t = 0; t < lists.size(); ++t) {
        Decision d;
        d.selected = lists[t];
        d.exposure_delta.assign(
            static_cast<std::size_t>(inst.catalog.provider_count), 0);
        double utility = 0.0;
        for (int item : lists[t]) {
            d.exposure_delta[static_cast<std::size_t>(
                inst.catalog.provider_of[static_cast<std::size_t>(item)])] +=
                1;
            utility += inst.scores.at(arrivals[t], item);
        }
        trace.per_step_utility.push_back(utility);
        ex.apply(d);
        trace.decisions.push_back(std::move(d));
    }
    trace.exposures_final = ex.exposures;
    return trace;
}

}  // namespace

TEST_CASE("ndcg is one for identical lists and handles the reversed pair") {
    const Instance inst = builders::make_instance(
        {0, 1}, 2, {{1.0, 0.5}}, 2, 1, 0.0, {3.0, 3.0}, {0});
    const ArrivalStream arrivals{0};
    const auto originals = original_topk_lists(inst, arrivals);
    REQUIRE(originals == std::vector<std::vector<int>>{{0, 1}});

    // identity
    const HorizonTrace same = trace_of_lists(inst, arrivals, {{0, 1}});
    REQUIRE(ndcg_at_k(originals, same, inst.scores, arrivals, 2) == 1.0);
    REQUIRE(ndcg_paper_form(originals, same, inst.scores, arrivals, 2) == 1.0);

    // reversed pair: DCGs computed against an independent routine
    const HorizonTrace reversed = trace_of_lists(inst, arrivals, {{1, 0}});
    const double got = ndcg_at_k(originals, reversed, inst.scores, arrivals, 2);
    const double expected = oracles::dcg_reference({0.5, 1.0}) /
                            oracles::dcg_reference({1.0, 0.5});
    REQUIRE(got == Catch::Approx(expected).margin(1e-12));
    REQUIRE(got == Catch::Approx(0.8597).margin(5e-4));
    REQUIRE(ndcg_paper_form(originals, reversed, inst.scores, arrivals, 2) ==
            Catch::Approx(1.0 / expected).margin(1e-12));
}

TEST_CASE("ndcg flags degenerate score patterns") {
    PreferenceScores zero(1, 2);
    zero.set(0, 0, 0.0);
    zero.set(0, 1, 0.0);
    const Catalog c = Catalog::build({0, 1}, 2);
    const HorizonConfig horizon{1, 1, 0.0};
    Instance inst = build_instance(
        c, zero, horizon, ProviderWeights::from_gamma({1.0, 1.0}, horizon),
        {0});
    HorizonTrace trace;
    Decision d;
    d.selected = {1};
    d.exposure_delta = {0, 1};
    trace.decisions.push_back(d);
    trace.per_step_utility.push_back(0.0);
    trace.exposures_final = {0.0, 1.0};
    // all-zero original scores: the reference DCG is zero
    REQUIRE_THROWS_AS(ndcg_at_k({{0}}, trace, inst.scores, {0}, 1),
                      std::domain_error);

    // zero-score reranked list against a positive original floors at 0
    PreferenceScores mixed(1, 2);
    mixed.set(0, 0, 1.0);
    mixed.set(0, 1, 0.0);
    Instance inst2 = build_instance(
        c, mixed, horizon, ProviderWeights::from_gamma({1.0, 1.0}, horizon),
        {0});
    REQUIRE(ndcg_at_k({{0}}, trace, inst2.scores, {0}, 1) == 0.0);
}

TEST_CASE("ndcg is invariant to score rescaling at the argmax level") {
    std::mt19937_64 rng(1414);
    std::vector<std::vector<double>> scores(2, std::vector<double>(5));
    for (auto& row : scores)
        for (double& s : row) s = 0.1 + 0.8 * oracles::uniform01(rng);
    const ArrivalStream arrivals{0, 1, 0};
    const Instance inst = builders::make_instance(
        {0, 0, 1, 1, 1}, 2, scores, 2, 3, 1.0, {7.0, 7.0}, arrivals);
    const HorizonTrace trace =
        run_minregularizer(inst, arrivals, 0.2);
    const auto originals = original_topk_lists(inst, arrivals);
    const double base =
        ndcg_at_k(originals, trace, inst.scores, arrivals, 2);

    std::vector<std::vector<double>> scaled = scores;
    for (auto& row : scaled)
        for (double& s : row) s *= 0.5;
    const Instance inst2 = builders::make_instance(
        {0, 0, 1, 1, 1}, 2, scaled, 2, 3, 1.0, {7.0, 7.0}, arrivals);
    REQUIRE(ndcg_at_k(originals, trace, inst2.scores, arrivals, 2) ==
            Catch::Approx(base).margin(1e-12));
}

TEST_CASE("mmf and the traded-off objective read off the trace") {
    const Instance inst = builders::make_instance(
        {0, 0, 0, 1, 1, 1}, 2,
        {{0.5, 0.5, 0.5, 0.5, 0.5, 0.4}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.4}}, 3,
        2, 1.0, {6.0, 6.0}, {0, 1});
    HorizonTrace trace;
    trace.per_step_utility = {2.0, 2.0};
    trace.exposures_final = {2.0, 4.0};
    REQUIRE(mmf_at_k(trace, inst.weights.gamma) == Catch::Approx(1.0 / 3.0));
    REQUIRE(w_lambda_at_k(trace, inst.weights.gamma, 1.0) ==
            Catch::Approx(2.0 + 1.0 / 3.0));
    REQUIRE(w_lambda_at_k(trace, inst.weights.gamma, 0.0) == 2.0);

    // never-exposed provider zeroes the metric; e = gamma saturates it
    HorizonTrace starved = trace;
    starved.exposures_final = {0.0, 6.0};
    REQUIRE(mmf_at_k(starved, inst.weights.gamma) == 0.0);
    HorizonTrace saturated = trace;
    saturated.exposures_final = {6.0, 6.0};
    REQUIRE(mmf_at_k(saturated, inst.weights.gamma) == 1.0);

    // shifting lambda shifts w by exactly the fairness value
    const double w1 = w_lambda_at_k(trace, inst.weights.gamma, 1.0);
    const double w3 = w_lambda_at_k(trace, inst.weights.gamma, 3.0);
    REQUIRE(w3 - w1 ==
            Catch::Approx(2.0 * mmf_at_k(trace, inst.weights.gamma)));
}

TEST_CASE("lorenz points and gini match the worked examples") {
    // equal exposures: the diagonal, gini 0
    const LorenzCurve diag = lorenz_and_gini({2.0, 2.0, 2.0});
    REQUIRE(diag.gini == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(diag.points.front().provider_fraction == 0.0);
    REQUIRE(diag.points.front().exposure_share == 0.0);
    REQUIRE(diag.points.back().provider_fraction == 1.0);
    REQUIRE(diag.points.back().exposure_share == 1.0);

    // one-hot with n=4: gini = 1 - 1/n = 0.75
    REQUIRE(lorenz_and_gini({0.0, 0.0, 0.0, 1.0}).gini ==
            Catch::Approx(0.75).margin(1e-12));

    // [2,4]: points (0,0),(1/2,1/3),(1,1), gini 1/6
    const LorenzCurve curve = lorenz_and_gini({2.0, 4.0});
    REQUIRE(curve.points.size() == 3);
    REQUIRE(curve.points[1].provider_fraction == Catch::Approx(0.5));
    REQUIRE(curve.points[1].exposure_share == Catch::Approx(1.0 / 3.0));
    REQUIRE(curve.gini == Catch::Approx(1.0 / 6.0).margin(1e-12));

    REQUIRE_THROWS_AS(lorenz_and_gini({0.0, 0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(lorenz_and_gini({-1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("lorenz curve is monotone and gini is permutation invariant") {
    std::mt19937_64 rng(1515);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = oracles::uniform_int(rng, 1, 9);
        Vec e(static_cast<std::size_t>(n));
        for (double& x : e) x = oracles::uniform(rng, 0.0, 10.0);
        e[static_cast<std::size_t>(oracles::uniform_int(rng, 0, n - 1))] +=
            0.5;  // ensure not all zero
        const LorenzCurve curve = lorenz_and_gini(e);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            REQUIRE(curve.points[i].provider_fraction >=
                    curve.points[i - 1].provider_fraction);
            REQUIRE(curve.points[i].exposure_share >=
                    curve.points[i - 1].exposure_share - 1e-12);
        }
        REQUIRE(curve.gini >= -1e-12);
        REQUIRE(curve.gini <= 1.0);

        Vec shuffled = e;
        for (int i = n - 1; i > 0; --i)
            std::swap(shuffled[static_cast<std::size_t>(i)],
                      shuffled[static_cast<std::size_t>(
                          oracles::uniform_int(rng, 0, i))]);
        REQUIRE(lorenz_and_gini(shuffled).gini ==
                Catch::Approx(curve.gini).margin(1e-12));

        // gini is consistent with the trapezoid area under the curve
        double area = 0.0;
        for (std::size_t i = 1; i < curve.points.size(); ++i)
            area += (curve.points[i].exposure_share +
                     curve.points[i - 1].exposure_share) /
                    2.0 *
                    (curve.points[i].provider_fraction -
                     curve.points[i - 1].provider_fraction);
        REQUIRE(curve.gini == Catch::Approx(1.0 - 2.0 * area).margin(1e-9));
    }
}

TEST_CASE("bottom share reads the cumulative exposure of the lowest block") {
    // exposures [1,1,2,4,8]: bottom 60% = three smallest = 4 of 16
    REQUIRE(bottom_share({8.0, 1.0, 2.0, 1.0, 4.0}, 0.6) ==
            Catch::Approx(0.25));
    REQUIRE(bottom_share({1.0, 1.0}, 1.0) == Catch::Approx(1.0));
}

TEST_CASE("make_report assembles the full per-horizon record") {
    std::mt19937_64 rng(1616);
    std::vector<std::vector<double>> scores(3, std::vector<double>(6));
    for (auto& row : scores)
        for (double& s : row) s = oracles::uniform01(rng);
    const ArrivalStream arrivals{0, 2, 1, 0};
    const Instance inst = builders::make_instance(
        {0, 0, 1, 1, 2, 2}, 3, scores, 2, 4, 1.0, {4.0, 4.0, 4.0}, arrivals);
    const HorizonTrace greedy = run_greedy(inst, arrivals);
    const RunReport report = make_report(inst, arrivals, greedy);
    REQUIRE(report.ndcg_at_k == 1.0);  // greedy is the reference ranking
    REQUIRE(report.ndcg_paper_form == 1.0);
    REQUIRE(report.mmf_at_k ==
            Catch::Approx(mmf_at_k(greedy, inst.weights.gamma)));
    REQUIRE(report.w_lambda_at_k ==
            Catch::Approx(w_lambda_at_k(greedy, inst.weights.gamma, 1.0)));
    REQUIRE_FALSE(report.regret.has_value());
}
