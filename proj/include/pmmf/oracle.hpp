#pragma once

// Exact offline solver for tiny instances: enumerates every sequence of
// per-step K-subsets, discards trajectories breaking the exposure caps, and
// returns the hindsight optimum. Doubles as the ground truth for regret
// measurement and for the offline fairness simulations.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "pmmf/core.hpp"
#include "pmmf/policies.hpp"
#include "pmmf/regularizer.hpp"

namespace pmmf {

struct OracleBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    double w_opt = 0.0;
    std::vector<Decision> best_decisions;
    Vec best_exposures;
    std::uint64_t enumerated = 0;  // complete trajectories evaluated
};

namespace detail {

// All K-subsets of {0..item_count-1} in lexicographic order, with their
// per-provider exposure increments.
struct SubsetTable {
    std::vector<std::vector<int>> items;
    std::vector<std::vector<int>> delta;

    static SubsetTable build(const Catalog& catalog, int K) {
        SubsetTable table;
        std::vector<int> combo(static_cast<std::size_t>(K));
        for (int i = 0; i < K; ++i) combo[static_cast<std::size_t>(i)] = i;
        const int n = catalog.item_count;
        while (true) {
            std::vector<int> d(static_cast<std::size_t>(catalog.provider_count),
                               0);
            for (int item : combo)
                d[static_cast<std::size_t>(
                    catalog.provider_of[static_cast<std::size_t>(item)])] += 1;
            table.items.push_back(combo);
            table.delta.push_back(std::move(d));
            int pos = K - 1;
            while (pos >= 0 && combo[static_cast<std::size_t>(pos)] ==
                                   n - K + pos)
                --pos;
            if (pos < 0) break;
            ++combo[static_cast<std::size_t>(pos)];
            for (int j = pos + 1; j < K; ++j)
                combo[static_cast<std::size_t>(j)] =
                    combo[static_cast<std::size_t>(j - 1)] + 1;
        }
        return table;
    }
};

inline double log_trajectory_count(int subset_count, int T) {
    return static_cast<double>(T) * std::log(static_cast<double>(subset_count));
}

}  // namespace detail

// Exhaustive depth-first maximization of (1/T) sum_t g(x_t) + lambda * r(e)
// over all cap-feasible trajectories. Ties keep the lexicographically
// smallest decision sequence (the enumeration order).
inline OracleResult solve_offline(const Instance& inst,
                                  const ArrivalStream& arrivals,
                                  Regularizer reg,
                                  std::uint64_t budget = 10'000'000) {
    require(static_cast<int>(arrivals.size()) == inst.horizon.T,
            "solve_offline: arrivals length must equal the horizon length T");
    const int T = inst.horizon.T;
    const int K = inst.horizon.K;
    const int P = inst.catalog.provider_count;
    const double lambda = inst.horizon.lambda;
    const Vec& gamma = inst.weights.gamma;

    detail::SubsetTable table = detail::SubsetTable::build(inst.catalog, K);
    const int n_subsets = static_cast<int>(table.items.size());
    if (detail::log_trajectory_count(n_subsets, T) >
        std::log(static_cast<double>(budget)) + 1e-9) {
        const double needed =
            std::pow(static_cast<double>(n_subsets), static_cast<double>(T));
        throw OracleBudgetError(
            "solve_offline: instance requires about " + std::to_string(needed) +
            " trajectory evaluations, budget is " + std::to_string(budget));
    }

    // Per-step utility of each subset for the arriving user.
    std::vector<Vec> step_utility(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const int user = arrivals[static_cast<std::size_t>(t)];
        Vec& util = step_utility[static_cast<std::size_t>(t)];
        util.resize(static_cast<std::size_t>(n_subsets));
        for (int s = 0; s < n_subsets; ++s) {
            double sum = 0.0;
            for (int item : table.items[static_cast<std::size_t>(s)])
                sum += inst.scores.at(user, item);
            util[static_cast<std::size_t>(s)] = sum;
        }
    }

    OracleResult result;
    bool found = false;
    std::vector<int> exposures(static_cast<std::size_t>(P), 0);
    std::vector<int> choice(static_cast<std::size_t>(T), 0);
    std::vector<int> best_choice;

    auto dfs = [&](auto&& self, int t, double utility_sum) -> void {
        if (t == T) {
            ++result.enumerated;
            Vec e(gamma.size());
            for (std::size_t p = 0; p < e.size(); ++p)
                e[p] = static_cast<double>(exposures[p]);
            double objective = utility_sum / T;
            if (lambda > 0.0)
                objective += lambda * fairness_value(reg, e, gamma);
            if (!found || objective > result.w_opt) {
                found = true;
                result.w_opt = objective;
                best_choice = choice;
            }
            return;
        }
        for (int s = 0; s < n_subsets; ++s) {
            const std::vector<int>& delta =
                table.delta[static_cast<std::size_t>(s)];
            bool feasible = true;
            for (int p = 0; p < P; ++p) {
                exposures[static_cast<std::size_t>(p)] +=
                    delta[static_cast<std::size_t>(p)];
                if (exposures[static_cast<std::size_t>(p)] >
                    gamma[static_cast<std::size_t>(p)])
                    feasible = false;
            }
            if (feasible) {
                choice[static_cast<std::size_t>(t)] = s;
                self(self, t + 1,
                     utility_sum +
                         step_utility[static_cast<std::size_t>(t)]
                                     [static_cast<std::size_t>(s)]);
            }
            for (int p = 0; p < P; ++p)
                exposures[static_cast<std::size_t>(p)] -=
                    delta[static_cast<std::size_t>(p)];
        }
    };
    dfs(dfs, 0, 0.0);

    if (!found)
        throw std::runtime_error(
            "solve_offline: no trajectory satisfies the exposure caps");

    result.best_exposures.assign(static_cast<std::size_t>(P), 0.0);
    result.best_decisions.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const int s = best_choice[static_cast<std::size_t>(t)];
        const int user = arrivals[static_cast<std::size_t>(t)];
        Decision d;
        d.selected = table.items[static_cast<std::size_t>(s)];
        // Best-first within the step, by raw score then item index.
        std::sort(d.selected.begin(), d.selected.end(), [&](int a, int b) {
            const double sa = inst.scores.at(user, a);
            const double sb = inst.scores.at(user, b);
            if (sa != sb) return sa > sb;
            return a < b;
        });
        d.exposure_delta = table.delta[static_cast<std::size_t>(s)];
        for (int p = 0; p < P; ++p)
            result.best_exposures[static_cast<std::size_t>(p)] +=
                d.exposure_delta[static_cast<std::size_t>(p)];
        result.best_decisions.push_back(std::move(d));
    }
    return result;
}

// Rebuilds a trace from a fixed decision sequence (used to replay the
// oracle's plan through the online bookkeeping).
inline HorizonTrace replay_decisions(const Instance& inst,
                                     const ArrivalStream& arrivals,
                                     const std::vector<Decision>& decisions) {
    require(static_cast<int>(arrivals.size()) == inst.horizon.T,
            "replay_decisions: arrivals length must equal T");
    require(decisions.size() == arrivals.size(),
            "replay_decisions: decision count must equal T");
    HorizonTrace trace;
    ExposureState ex = ExposureState::fresh(inst.weights);
    for (int t = 0; t < inst.horizon.T; ++t) {
        const Decision& d = decisions[static_cast<std::size_t>(t)];
        d.validate(inst.horizon.K, inst.catalog);
        trace.overshoot_count += detail::overshoot_events(ex, d);
        trace.per_step_utility.push_back(detail::decision_utility(
            inst, arrivals[static_cast<std::size_t>(t)], d));
        ex.apply(d);
        trace.decisions.push_back(d);
    }
    trace.exposures_final = ex.exposures;
    return trace;
}

// Online objective W of a finished trace: mean per-step utility plus
// lambda times the realized max-min fairness.
inline double online_objective(const Instance& inst, const HorizonTrace& trace) {
    double mean_utility = 0.0;
    for (double u : trace.per_step_utility) mean_utility += u;
    mean_utility /= static_cast<double>(trace.per_step_utility.size());
    return mean_utility +
           inst.horizon.lambda * fairness_value(Regularizer::MMF,
                                                trace.exposures_final,
                                                inst.weights.gamma);
}

// Hindsight regret W_OPT - W of one horizon trace.
inline double empirical_regret(const Instance& inst,
                               const ArrivalStream& arrivals,
                               const HorizonTrace& trace, Regularizer reg,
                               std::uint64_t budget = 10'000'000) {
    const OracleResult oracle = solve_offline(inst, arrivals, reg, budget);
    return oracle.w_opt - online_objective(inst, trace);
}

}  // namespace pmmf
