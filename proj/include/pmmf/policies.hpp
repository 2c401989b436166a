#pragma once

// Online re-ranking policies, each run over one horizon of T arrivals:
// the dual-descent policy with momentum, plain greedy, the k-neighbor and
// min-regularizer heuristics, and the momentum-free dual-descent variant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "pmmf/core.hpp"
#include "pmmf/dual_engine.hpp"
#include "pmmf/regularizer.hpp"

namespace pmmf {

struct Policy {
    enum class Kind { PMMF, Greedy, KNeighbor, MinRegularizer, DualNoMomentum };
    Kind kind = Kind::Greedy;
    double alpha = 0.4;             // momentum coefficient (PMMF)
    double step_coefficient = 1e-3; // step_size = step_coefficient / sqrt(T)
    double lambda_penalty = 1.0;    // exposure-gap penalty (MinRegularizer)

    void validate() const {
        switch (kind) {
        case Kind::PMMF:
            require(alpha > 0.0 && alpha <= 1.0,
                    "policy: alpha must be in (0,1]");
            [[fallthrough]];
        case Kind::DualNoMomentum:
            require(step_coefficient > 0.0,
                    "policy: step_coefficient must be > 0");
            break;
        case Kind::MinRegularizer:
            require(lambda_penalty >= 0.0,
                    "policy: lambda_penalty must be >= 0");
            break;
        default:
            break;
        }
    }
};

inline std::string policy_name(const Policy& p) {
    switch (p.kind) {
    case Policy::Kind::PMMF: return "pmmf";
    case Policy::Kind::Greedy: return "greedy";
    case Policy::Kind::KNeighbor: return "kneighbor";
    case Policy::Kind::MinRegularizer: return "min_regularizer";
    case Policy::Kind::DualNoMomentum: return "dual_no_momentum";
    }
    return "unknown";
}

// When fewer than K items belong to unmasked providers, Fill completes the
// list from masked providers by adjusted score (counting the event as
// overshoot); Strict raises instead.
enum class FillMode { Fill, Strict };

// Full trajectory of one horizon run.
struct HorizonTrace {
    std::vector<Decision> decisions;
    Vec exposures_final;
    std::vector<double> per_step_utility;  // sum of raw scores per step
    int overshoot_count = 0;
};

namespace detail {

// (adjusted score desc, item index asc) total order; exact comparisons.
struct RankedItem {
    double adjusted;
    int item;
    bool operator<(const RankedItem& other) const {
        if (adjusted != other.adjusted) return adjusted > other.adjusted;
        return item < other.item;
    }
};

// Keeps the best K under RankedItem's order with a bounded max-of-worst heap.
class TopK {
public:
    explicit TopK(int k) : k_(static_cast<std::size_t>(k)) { heap_.reserve(k_); }

    void offer(double adjusted, int item) {
        RankedItem entry{adjusted, item};
        if (heap_.size() < k_) {
            heap_.push_back(entry);
            std::push_heap(heap_.begin(), heap_.end());
            return;
        }
        if (entry < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = entry;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    std::size_t size() const { return heap_.size(); }

    // Drains best-first.
    std::vector<RankedItem> sorted() {
        std::vector<RankedItem> out = std::move(heap_);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::size_t k_;
    std::vector<RankedItem> heap_;  // worst of the kept K at front
};

}  // namespace detail

// Selects the K items maximizing scores_row[i]/T - dual_penalty[provider(i)],
// skipping masked providers; ties broken by ascending item index. The
// returned list is ordered best-first on the adjusted score.
inline Decision select_topk_dual(const Vec& scores_row, const Vec& dual_penalty,
                                 const std::vector<std::uint8_t>& mask,
                                 int K, int T, const Catalog& catalog,
                                 FillMode fill = FillMode::Fill) {
    require(static_cast<int>(scores_row.size()) == catalog.item_count,
            "select_topk_dual: score row length mismatch");
    require(static_cast<int>(dual_penalty.size()) == catalog.provider_count,
            "select_topk_dual: penalty length mismatch");
    require(static_cast<int>(mask.size()) == catalog.provider_count,
            "select_topk_dual: mask length mismatch");
    require(K >= 1 && K <= catalog.item_count,
            "select_topk_dual: K out of range");
    require(T >= 1, "select_topk_dual: T must be >= 1");

    detail::TopK open(K);
    detail::TopK excluded(K);
    const double inv_t = 1.0 / static_cast<double>(T);
    for (int i = 0; i < catalog.item_count; ++i) {
        const int p = catalog.provider_of[static_cast<std::size_t>(i)];
        const double adjusted =
            scores_row[static_cast<std::size_t>(i)] * inv_t -
            dual_penalty[static_cast<std::size_t>(p)];
        if (mask[static_cast<std::size_t>(p)])
            excluded.offer(adjusted, i);
        else
            open.offer(adjusted, i);
    }

    std::vector<detail::RankedItem> picked = open.sorted();
    if (static_cast<int>(picked.size()) < K) {
        if (fill == FillMode::Strict)
            throw std::runtime_error(
                "select_topk_dual: only " + std::to_string(picked.size()) +
                " of " + std::to_string(K) +
                " slots available from unmasked providers (strict mode)");
        std::vector<detail::RankedItem> extra = excluded.sorted();
        const std::size_t need = static_cast<std::size_t>(K) - picked.size();
        require(extra.size() >= need,
                "select_topk_dual: not enough items to fill the list");
        picked.insert(picked.end(), extra.begin(),
                      extra.begin() + static_cast<std::ptrdiff_t>(need));
        // The emitted list stays ordered by adjusted score overall.
        std::sort(picked.begin(), picked.end());
    }

    Decision d;
    d.selected.reserve(static_cast<std::size_t>(K));
    d.exposure_delta.assign(static_cast<std::size_t>(catalog.provider_count), 0);
    for (const auto& entry : picked) {
        d.selected.push_back(entry.item);
        d.exposure_delta[static_cast<std::size_t>(
            catalog.provider_of[static_cast<std::size_t>(entry.item)])] += 1;
    }
    return d;
}

namespace detail {

inline double decision_utility(const Instance& inst, int user,
                               const Decision& d) {
    double sum = 0.0;
    for (int item : d.selected) sum += inst.scores.at(user, item);
    return sum;
}

// Providers that gained exposure in this step and ended up beyond their cap
// (covers both fill-mode grants to exhausted providers and a single step
// crossing the cap from above).
inline int overshoot_events(const ExposureState& pre, const Decision& d) {
    int events = 0;
    for (std::size_t p = 0; p < pre.remaining.size(); ++p)
        if (d.exposure_delta[p] > 0 &&
            pre.remaining[p] - d.exposure_delta[p] < 0.0)
            ++events;
    return events;
}

inline void check_horizon(const Instance& inst, const ArrivalStream& arrivals) {
    require(static_cast<int>(arrivals.size()) == inst.horizon.T,
            "policy run: arrivals length must equal the horizon length T");
}

}  // namespace detail

// Plain top-K by raw preference score; keeps exposure bookkeeping for the
// metrics but applies no mask and no dual prices.
inline HorizonTrace run_greedy(const Instance& inst,
                               const ArrivalStream& arrivals) {
    detail::check_horizon(inst, arrivals);
    const int T = inst.horizon.T;
    HorizonTrace trace;
    trace.decisions.reserve(static_cast<std::size_t>(T));
    trace.per_step_utility.reserve(static_cast<std::size_t>(T));
    ExposureState ex = ExposureState::fresh(inst.weights);
    const Vec zero_penalty(static_cast<std::size_t>(inst.catalog.provider_count),
                           0.0);
    const std::vector<std::uint8_t> no_mask(
        static_cast<std::size_t>(inst.catalog.provider_count), 0);
    Vec row;
    for (int t = 0; t < T; ++t) {
        inst.scores.fill_row(arrivals[static_cast<std::size_t>(t)], row);
        Decision d = select_topk_dual(row, zero_penalty, no_mask,
                                      inst.horizon.K, 1, inst.catalog);
        trace.overshoot_count += detail::overshoot_events(ex, d);
        trace.per_step_utility.push_back(detail::decision_utility(
            inst, arrivals[static_cast<std::size_t>(t)], d));
        ex.apply(d);
        trace.decisions.push_back(std::move(d));
    }
    trace.exposures_final = ex.exposures;
    return trace;
}

struct PmmfParams {
    double alpha = 0.4;
    double step_coefficient = 1e-3;
};

// The dual-descent online loop. Per step: mask exhausted providers, rank by
// score/T minus the provider price, grant exposures, then advance the dual
// state (conjugate argmax at the pre-step remaining resources, subgradient,
// momentum blend, prox step, projection onto D). lambda = 0 switches the
// regularizer off entirely and the run degenerates to greedy.
inline HorizonTrace run_pmmf(const Instance& inst, const ArrivalStream& arrivals,
                             const PmmfParams& params,
                             FillMode fill = FillMode::Fill) {
    detail::check_horizon(inst, arrivals);
    require(params.alpha > 0.0 && params.alpha <= 1.0,
            "run_pmmf: alpha must be in (0,1]");
    require(params.step_coefficient > 0.0,
            "run_pmmf: step_coefficient must be > 0");
    if (inst.horizon.lambda == 0.0) return run_greedy(inst, arrivals);

    const int T = inst.horizon.T;
    const int P = inst.catalog.provider_count;
    HorizonTrace trace;
    trace.decisions.reserve(static_cast<std::size_t>(T));
    trace.per_step_utility.reserve(static_cast<std::size_t>(T));
    ExposureState ex = ExposureState::fresh(inst.weights);
    DualState dual = DualState::fresh(
        P, params.step_coefficient / std::sqrt(static_cast<double>(T)),
        params.alpha);
    ProjectionWorkspace ws;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(P), 0);
    Vec row;
    for (int t = 0; t < T; ++t) {
        const int user = arrivals[static_cast<std::size_t>(t)];
        inst.scores.fill_row(user, row);
        for (int p = 0; p < P; ++p)
            mask[static_cast<std::size_t>(p)] =
                ex.remaining[static_cast<std::size_t>(p)] <= 0.0 ? 1 : 0;
        Decision d = select_topk_dual(row, dual.mu, mask, inst.horizon.K, T,
                                      inst.catalog, fill);
        trace.overshoot_count += detail::overshoot_events(ex, d);
        dual = dual_update(dual, d, ex, inst.weights.gamma,
                           inst.horizon.lambda, ws);
        trace.per_step_utility.push_back(
            detail::decision_utility(inst, user, d));
        ex.apply(d);
        trace.decisions.push_back(std::move(d));
    }
    trace.exposures_final = ex.exposures;
    return trace;
}

// Restricts each step's candidates to the items of the K providers with the
// least cumulative exposure (ties by provider index), extended provider by
// provider whenever those own fewer than K items, then ranks by raw score.
inline HorizonTrace run_kneighbor(const Instance& inst,
                                  const ArrivalStream& arrivals) {
    detail::check_horizon(inst, arrivals);
    const int T = inst.horizon.T;
    const int P = inst.catalog.provider_count;
    const int K = inst.horizon.K;
    HorizonTrace trace;
    trace.decisions.reserve(static_cast<std::size_t>(T));
    trace.per_step_utility.reserve(static_cast<std::size_t>(T));
    ExposureState ex = ExposureState::fresh(inst.weights);
    const Vec zero_penalty(static_cast<std::size_t>(P), 0.0);
    std::vector<int> order(static_cast<std::size_t>(P));
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(P), 0);
    Vec row;
    for (int t = 0; t < T; ++t) {
        const int user = arrivals[static_cast<std::size_t>(t)];
        inst.scores.fill_row(user, row);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double ea = ex.exposures[static_cast<std::size_t>(a)];
            const double eb = ex.exposures[static_cast<std::size_t>(b)];
            if (ea != eb) return ea < eb;
            return a < b;
        });
        std::fill(mask.begin(), mask.end(), 1);
        int allowed = 0;
        int candidate_items = 0;
        while (allowed < P &&
               (allowed < std::min(K, P) || candidate_items < K)) {
            const int p = order[static_cast<std::size_t>(allowed)];
            mask[static_cast<std::size_t>(p)] = 0;
            candidate_items += static_cast<int>(
                inst.catalog.items_of[static_cast<std::size_t>(p)].size());
            ++allowed;
        }
        Decision d = select_topk_dual(row, zero_penalty, mask, K, 1,
                                      inst.catalog, FillMode::Strict);
        trace.overshoot_count += detail::overshoot_events(ex, d);
        trace.per_step_utility.push_back(
            detail::decision_utility(inst, user, d));
        ex.apply(d);
        trace.decisions.push_back(std::move(d));
    }
    trace.exposures_final = ex.exposures;
    return trace;
}

// Penalizes each item by lambda_penalty times the gap between its provider's
// pre-step exposure and the worst-off provider's, masking exhausted
// providers.
inline HorizonTrace run_minregularizer(const Instance& inst,
                                       const ArrivalStream& arrivals,
                                       double lambda_penalty,
                                       FillMode fill = FillMode::Fill) {
    detail::check_horizon(inst, arrivals);
    require(lambda_penalty >= 0.0,
            "run_minregularizer: lambda_penalty must be >= 0");
    const int T = inst.horizon.T;
    const int P = inst.catalog.provider_count;
    HorizonTrace trace;
    trace.decisions.reserve(static_cast<std::size_t>(T));
    trace.per_step_utility.reserve(static_cast<std::size_t>(T));
    ExposureState ex = ExposureState::fresh(inst.weights);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(P), 0);
    Vec penalty(static_cast<std::size_t>(P), 0.0);
    Vec row;
    for (int t = 0; t < T; ++t) {
        const int user = arrivals[static_cast<std::size_t>(t)];
        inst.scores.fill_row(user, row);
        const double floor =
            *std::min_element(ex.exposures.begin(), ex.exposures.end());
        for (int p = 0; p < P; ++p) {
            penalty[static_cast<std::size_t>(p)] =
                lambda_penalty *
                (ex.exposures[static_cast<std::size_t>(p)] - floor);
            mask[static_cast<std::size_t>(p)] =
                ex.remaining[static_cast<std::size_t>(p)] <= 0.0 ? 1 : 0;
        }
        Decision d = select_topk_dual(row, penalty, mask, inst.horizon.K, 1,
                                      inst.catalog, fill);
        trace.overshoot_count += detail::overshoot_events(ex, d);
        trace.per_step_utility.push_back(
            detail::decision_utility(inst, user, d));
        ex.apply(d);
        trace.decisions.push_back(std::move(d));
    }
    trace.exposures_final = ex.exposures;
    return trace;
}

inline HorizonTrace run_policy(const Instance& inst,
                               const ArrivalStream& arrivals,
                               const Policy& policy,
                               FillMode fill = FillMode::Fill) {
    policy.validate();
    switch (policy.kind) {
    case Policy::Kind::PMMF:
        return run_pmmf(inst, arrivals,
                        PmmfParams{policy.alpha, policy.step_coefficient},
                        fill);
    case Policy::Kind::Greedy:
        return run_greedy(inst, arrivals);
    case Policy::Kind::KNeighbor:
        return run_kneighbor(inst, arrivals);
    case Policy::Kind::MinRegularizer:
        return run_minregularizer(inst, arrivals, policy.lambda_penalty, fill);
    case Policy::Kind::DualNoMomentum:
        return run_pmmf(inst, arrivals,
                        PmmfParams{1.0, policy.step_coefficient}, fill);
    }
    throw std::logic_error("run_policy: unhandled policy kind");
}

}  // namespace pmmf
