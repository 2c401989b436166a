#pragma once

// Evaluation metrics over finished horizon traces: position-discounted
// ranking quality against the score-ordered list, realized max-min fairness,
// the traded-off objective, and exposure-distribution summaries.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "pmmf/core.hpp"
#include "pmmf/policies.hpp"
#include "pmmf/regularizer.hpp"

namespace pmmf {

struct LorenzPoint {
    double provider_fraction;
    double exposure_share;
};

struct LorenzCurve {
    std::vector<LorenzPoint> points;  // (0,0) .. (1,1), provider granularity
    double gini = 0.0;
};

struct RunReport {
    double ndcg_at_k = 0.0;       // reranked DCG / original DCG, in (0,1]
    double ndcg_paper_form = 0.0; // original DCG / reranked DCG
    double mmf_at_k = 0.0;
    double w_lambda_at_k = 0.0;
    LorenzCurve lorenz;
    std::optional<double> regret;
    int overshoot_count = 0;
};

// Original (pre-re-ranking) top-K lists, one per arrival: plain top-K by raw
// score, ties by item index.
inline std::vector<std::vector<int>> original_topk_lists(
    const Instance& inst, const ArrivalStream& arrivals) {
    std::vector<std::vector<int>> lists;
    lists.reserve(arrivals.size());
    const Vec zero_penalty(static_cast<std::size_t>(inst.catalog.provider_count),
                           0.0);
    const std::vector<std::uint8_t> no_mask(
        static_cast<std::size_t>(inst.catalog.provider_count), 0);
    Vec row;
    for (int user : arrivals) {
        inst.scores.fill_row(user, row);
        lists.push_back(select_topk_dual(row, zero_penalty, no_mask,
                                         inst.horizon.K, 1, inst.catalog)
                            .selected);
    }
    return lists;
}

namespace detail {

// Position-discounted score sum with base-2 log discounts.
inline double dcg(const PreferenceScores& scores, int user,
                  const std::vector<int>& list) {
    double sum = 0.0;
    for (std::size_t rank = 0; rank < list.size(); ++rank)
        sum += scores.at(user, list[rank]) /
               std::log2(static_cast<double>(rank) + 2.0);
    return sum;
}

struct NdcgPair {
    double reranked_over_original;
    double original_over_reranked;
};

inline NdcgPair ndcg_both_forms(
    const std::vector<std::vector<int>>& original_lists,
    const HorizonTrace& reranked, const PreferenceScores& scores,
    const ArrivalStream& arrivals, int K) {
    require(original_lists.size() == reranked.decisions.size(),
            "ndcg: step count mismatch between original and reranked lists");
    require(arrivals.size() == reranked.decisions.size(),
            "ndcg: arrivals length mismatch");
    double sum = 0.0;
    double sum_paper = 0.0;
    for (std::size_t t = 0; t < original_lists.size(); ++t) {
        require(static_cast<int>(original_lists[t].size()) == K,
                "ndcg: original list is not length K");
        require(static_cast<int>(reranked.decisions[t].selected.size()) == K,
                "ndcg: reranked list is not length K");
        const int user = arrivals[t];
        const double original = dcg(scores, user, original_lists[t]);
        const double rr = dcg(scores, user, reranked.decisions[t].selected);
        if (original <= 0.0)
            throw std::domain_error(
                "ndcg: original list has zero DCG (all-zero scores)");
        sum += rr / original;
        // A reranked list made of zero-score items floors the ratio at 0 and
        // leaves the reciprocal form unbounded for this step.
        sum_paper += rr > 0.0
                         ? original / rr
                         : std::numeric_limits<double>::infinity();
    }
    const double steps = static_cast<double>(original_lists.size());
    return {sum / steps, sum_paper / steps};
}

}  // namespace detail

// Horizon mean of DCG(reranked)/DCG(original) per step; 1.0 when re-ranking
// leaves the lists unchanged, and <= 1 otherwise since the score-ordered
// list maximizes the discounted sum.
inline double ndcg_at_k(const std::vector<std::vector<int>>& original_lists,
                        const HorizonTrace& reranked,
                        const PreferenceScores& scores,
                        const ArrivalStream& arrivals, int K) {
    return detail::ndcg_both_forms(original_lists, reranked, scores, arrivals, K)
        .reranked_over_original;
}

// The reciprocal orientation, horizon mean of DCG(original)/DCG(reranked).
inline double ndcg_paper_form(
    const std::vector<std::vector<int>>& original_lists,
    const HorizonTrace& reranked, const PreferenceScores& scores,
    const ArrivalStream& arrivals, int K) {
    return detail::ndcg_both_forms(original_lists, reranked, scores, arrivals, K)
        .original_over_reranked;
}

inline double mmf_at_k(const HorizonTrace& trace, const Vec& gamma) {
    return fairness_value(Regularizer::MMF, trace.exposures_final, gamma);
}

inline double w_lambda_at_k(const HorizonTrace& trace, const Vec& gamma,
                            double lambda) {
    require(!trace.per_step_utility.empty(), "w_lambda_at_k: empty trace");
    const double mean_utility =
        std::accumulate(trace.per_step_utility.begin(),
                        trace.per_step_utility.end(), 0.0) /
        static_cast<double>(trace.per_step_utility.size());
    return mean_utility + lambda * mmf_at_k(trace, gamma);
}

// Lorenz curve at provider granularity (exposures sorted ascending) and the
// Gini coefficient from the trapezoid area under it.
inline LorenzCurve lorenz_and_gini(const Vec& exposures) {
    require(!exposures.empty(), "lorenz_and_gini: empty exposure vector");
    double total = 0.0;
    for (double e : exposures) {
        require(e >= 0.0, "lorenz_and_gini: exposures must be >= 0");
        total += e;
    }
    require(total > 0.0, "lorenz_and_gini: all exposures are zero");

    Vec sorted = exposures;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    LorenzCurve curve;
    curve.points.reserve(n + 1);
    curve.points.push_back({0.0, 0.0});
    double cumulative = 0.0;
    double area = 0.0;
    double prev_share = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cumulative += sorted[i];
        const double share = cumulative / total;
        curve.points.push_back(
            {static_cast<double>(i + 1) / static_cast<double>(n), share});
        area += (prev_share + share) / (2.0 * static_cast<double>(n));
        prev_share = share;
    }
    curve.gini = 1.0 - 2.0 * area;
    return curve;
}

// Cumulative exposure share of the bottom fraction of providers, read off
// the Lorenz curve (fraction snapped down to provider granularity).
inline double bottom_share(const Vec& exposures, double fraction) {
    require(fraction >= 0.0 && fraction <= 1.0,
            "bottom_share: fraction must be in [0,1]");
    const LorenzCurve curve = lorenz_and_gini(exposures);
    const std::size_t n = exposures.size();
    const std::size_t count =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) +
                                            1e-9));
    return curve.points[count].exposure_share;
}

inline RunReport make_report(const Instance& inst, const ArrivalStream& arrivals,
                             const HorizonTrace& trace,
                             std::optional<double> regret = std::nullopt) {
    RunReport report;
    const auto originals = original_topk_lists(inst, arrivals);
    const auto pair = detail::ndcg_both_forms(originals, trace, inst.scores,
                                              arrivals, inst.horizon.K);
    report.ndcg_at_k = pair.reranked_over_original;
    report.ndcg_paper_form = pair.original_over_reranked;
    report.mmf_at_k = mmf_at_k(trace, inst.weights.gamma);
    report.w_lambda_at_k =
        w_lambda_at_k(trace, inst.weights.gamma, inst.horizon.lambda);
    report.lorenz = lorenz_and_gini(trace.exposures_final);
    report.regret = regret;
    report.overshoot_count = trace.overshoot_count;
    return report;
}

}  // namespace pmmf
