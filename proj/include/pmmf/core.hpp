#pragma once

// Core domain types for provider-fair online re-ranking: the item/provider
// catalog, preference scores, horizon configuration, provider weights, and
// the per-horizon exposure and dual state carried by the online policies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmmf {

using Vec = std::vector<double>;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Item -> provider assignment plus the derived inverse map. Every item
// belongs to exactly one provider and every provider owns at least one item.
struct Catalog {
    int item_count = 0;
    int provider_count = 0;
    std::vector<int> provider_of;            // item index -> provider index
    std::vector<std::vector<int>> items_of;  // provider index -> owned items

    static Catalog build(std::vector<int> provider_of, int provider_count) {
        Catalog c;
        c.item_count = static_cast<int>(provider_of.size());
        c.provider_count = provider_count;
        c.provider_of = std::move(provider_of);
        require(c.item_count >= 1, "catalog: needs at least one item");
        require(provider_count >= 1, "catalog: needs at least one provider");
        require(provider_count <= c.item_count,
                "catalog: more providers than items");
        c.items_of.assign(provider_count, {});
        for (int i = 0; i < c.item_count; ++i) {
            const int p = c.provider_of[i];
            require(p >= 0 && p < provider_count,
                    "catalog: item " + std::to_string(i) +
                        " maps to invalid provider " + std::to_string(p));
            c.items_of[p].push_back(i);
        }
        for (int p = 0; p < provider_count; ++p) {
            require(!c.items_of[p].empty(), "catalog: provider " +
                                                std::to_string(p) +
                                                " owns no items");
        }
        return c;
    }
};

// Dense user x item score table. Absent pairs are an error on lookup, never
// an implicit zero.
class PreferenceScores {
public:
    PreferenceScores() = default;
    PreferenceScores(int user_count, int item_count)
        : users_(user_count), items_(item_count),
          values_(static_cast<std::size_t>(user_count) * item_count, 0.0),
          present_(static_cast<std::size_t>(user_count) * item_count, 0) {
        require(user_count >= 1, "scores: user_count must be positive");
        require(item_count >= 1, "scores: item_count must be positive");
    }

    int user_count() const { return users_; }
    int item_count() const { return items_; }

    void set(int user, int item, double score) {
        check_range(user, item);
        require(score >= 0.0 && score <= 1.0,
                "scores: score " + std::to_string(score) + " for (" +
                    std::to_string(user) + "," + std::to_string(item) +
                    ") outside [0,1]");
        values_[idx(user, item)] = score;
        present_[idx(user, item)] = 1;
    }

    bool has(int user, int item) const {
        check_range(user, item);
        return present_[idx(user, item)] != 0;
    }

    double at(int user, int item) const {
        check_range(user, item);
        if (!present_[idx(user, item)])
            throw std::out_of_range("scores: no score stored for (" +
                                    std::to_string(user) + "," +
                                    std::to_string(item) + ")");
        return values_[idx(user, item)];
    }

    // Materializes the full score row of one user; the online policies rank
    // every item, so a gap in the row is an error here.
    void fill_row(int user, Vec& out) const {
        check_range(user, 0);
        out.resize(static_cast<std::size_t>(items_));
        const std::size_t base = idx(user, 0);
        for (int i = 0; i < items_; ++i) {
            if (!present_[base + i])
                throw std::out_of_range("scores: no score stored for (" +
                                        std::to_string(user) + "," +
                                        std::to_string(i) + ")");
            out[static_cast<std::size_t>(i)] = values_[base + i];
        }
    }

    Vec full_row(int user) const {
        Vec row;
        fill_row(user, row);
        return row;
    }

    std::size_t stored_count() const {
        return static_cast<std::size_t>(
            std::count(present_.begin(), present_.end(), std::uint8_t{1}));
    }

private:
    std::size_t idx(int user, int item) const {
        return static_cast<std::size_t>(user) * items_ + item;
    }
    void check_range(int user, int item) const {
        if (user < 0 || user >= users_ || item < 0 || item >= items_)
            throw std::out_of_range("scores: index (" + std::to_string(user) +
                                    "," + std::to_string(item) +
                                    ") out of range");
    }

    int users_ = 0;
    int items_ = 0;
    Vec values_;
    std::vector<std::uint8_t> present_;
};

// Ranking size K, horizon length T, and the utility/fairness trade-off.
struct HorizonConfig {
    int K = 10;
    int T = 256;
    double lambda = 1.0;

    void validate() const {
        require(K >= 1, "horizon: K must be >= 1");
        require(T >= 1, "horizon: T must be >= 1");
        require(lambda >= 0.0, "horizon: lambda must be >= 0");
    }
};

// Per-provider resource caps. richness_factor is the eta of the weight
// formula gamma_p = K*T*eta*|I_p|/|I| (distinct from the dual step size,
// which the paper also calls eta).
struct ProviderWeights {
    Vec gamma;
    double richness_factor = 0.0;

    static ProviderWeights from_gamma(Vec gamma, const HorizonConfig& horizon) {
        horizon.validate();
        require(!gamma.empty(), "weights: gamma must be non-empty");
        double sum = 0.0;
        for (double g : gamma) {
            require(g > 0.0, "weights: all gamma entries must be > 0");
            sum += g;
        }
        ProviderWeights w;
        w.richness_factor =
            sum / (static_cast<double>(horizon.K) * horizon.T);
        require(w.richness_factor > 1.0,
                "weights: sum(gamma) must strictly exceed K*T");
        w.gamma = std::move(gamma);
        return w;
    }

    void validate(int provider_count) const {
        require(static_cast<int>(gamma.size()) == provider_count,
                "weights: gamma length does not match provider count");
        for (double g : gamma)
            require(g > 0.0, "weights: all gamma entries must be > 0");
        require(richness_factor > 1.0, "weights: richness factor must be > 1");
    }
};

// gamma_p = K*T*eta*|I_p|/|I| with eta = 1 + 1/|P|.
inline ProviderWeights default_weights(const Catalog& catalog,
                                       const HorizonConfig& horizon) {
    horizon.validate();
    const double eta = 1.0 + 1.0 / catalog.provider_count;
    Vec gamma(static_cast<std::size_t>(catalog.provider_count));
    const double scale =
        static_cast<double>(horizon.K) * horizon.T * eta / catalog.item_count;
    for (int p = 0; p < catalog.provider_count; ++p)
        gamma[static_cast<std::size_t>(p)] =
            scale * static_cast<double>(catalog.items_of[p].size());
    ProviderWeights w;
    w.gamma = std::move(gamma);
    w.richness_factor = eta;
    return w;
}

// Equal caps gamma_p = K*T for every provider (the even-weight setting used
// by the offline simulations). Caps this loose can never be violated, since
// a provider receives at most K exposures per step.
inline ProviderWeights uniform_kt_weights(int provider_count,
                                          const HorizonConfig& horizon) {
    horizon.validate();
    require(provider_count >= 1, "weights: provider_count must be >= 1");
    ProviderWeights w;
    w.gamma.assign(static_cast<std::size_t>(provider_count),
                   static_cast<double>(horizon.K) * horizon.T);
    w.richness_factor = static_cast<double>(provider_count);
    return w;
}

// One step's outcome: the re-ranked list (best first) and the per-provider
// exposure increment it induces.
struct Decision {
    std::vector<int> selected;        // K distinct item indices, best first
    std::vector<int> exposure_delta;  // per provider, sums to K

    void validate(int K, const Catalog& catalog) const {
        require(static_cast<int>(selected.size()) == K,
                "decision: selected list must have exactly K items");
        require(static_cast<int>(exposure_delta.size()) ==
                    catalog.provider_count,
                "decision: exposure_delta length mismatch");
        std::vector<int> seen(static_cast<std::size_t>(catalog.item_count), 0);
        std::vector<int> delta(static_cast<std::size_t>(catalog.provider_count),
                               0);
        for (int item : selected) {
            require(item >= 0 && item < catalog.item_count,
                    "decision: item index out of range");
            require(seen[static_cast<std::size_t>(item)] == 0,
                    "decision: duplicate item in selected list");
            seen[static_cast<std::size_t>(item)] = 1;
            delta[static_cast<std::size_t>(catalog.provider_of[item])] += 1;
        }
        require(delta == exposure_delta,
                "decision: exposure_delta inconsistent with selected items");
    }
};

// Cumulative exposures e and remaining resources beta = gamma - e.
// The pair is updated jointly so that exposures + remaining == gamma holds
// exactly in floating point (both sides move by the same integers).
struct ExposureState {
    Vec exposures;
    Vec remaining;

    static ExposureState fresh(const ProviderWeights& weights) {
        ExposureState s;
        s.exposures.assign(weights.gamma.size(), 0.0);
        s.remaining = weights.gamma;
        return s;
    }

    void apply(const Decision& decision) {
        require(decision.exposure_delta.size() == exposures.size(),
                "exposure: delta length mismatch");
        for (std::size_t p = 0; p < exposures.size(); ++p) {
            exposures[p] += decision.exposure_delta[p];
            remaining[p] -= decision.exposure_delta[p];
        }
    }
};

// Dual-side state of the online loop: prices mu, the momentum-blended
// gradient, the last raw subgradient, and the update hyperparameters.
struct DualState {
    Vec mu;
    Vec momentum_grad;
    Vec raw_grad;
    double step_size = 0.0;
    double alpha = 1.0;

    static DualState fresh(int provider_count, double step_size, double alpha) {
        require(provider_count >= 1, "dual: provider_count must be >= 1");
        require(step_size > 0.0, "dual: step_size must be > 0");
        require(alpha > 0.0 && alpha <= 1.0, "dual: alpha must be in (0,1]");
        DualState d;
        d.mu.assign(static_cast<std::size_t>(provider_count), 0.0);
        d.momentum_grad.assign(static_cast<std::size_t>(provider_count), 0.0);
        d.raw_grad.assign(static_cast<std::size_t>(provider_count), 0.0);
        d.step_size = step_size;
        d.alpha = alpha;
        return d;
    }
};

// Chronological user arrivals, dense user indices.
using ArrivalStream = std::vector<int>;

// Immutable problem bundle. Safe to share across concurrently running
// horizons once built.
struct Instance {
    Catalog catalog;
    PreferenceScores scores;
    HorizonConfig horizon;
    ProviderWeights weights;
    ArrivalStream arrivals;
};

inline Instance build_instance(Catalog catalog, PreferenceScores scores,
                               HorizonConfig horizon, ProviderWeights weights,
                               ArrivalStream arrivals) {
    horizon.validate();
    require(catalog.item_count >= 1 && catalog.provider_count >= 1,
            "instance: catalog is empty");
    for (int p = 0; p < catalog.provider_count; ++p)
        require(!catalog.items_of[p].empty(),
                "instance: provider " + std::to_string(p) + " owns no items");
    require(scores.item_count() == catalog.item_count,
            "instance: score table item dimension mismatch");
    require(horizon.K <= catalog.item_count,
            "instance: K exceeds the number of items");
    weights.validate(catalog.provider_count);
    require(!arrivals.empty(), "instance: arrivals must be non-empty");
    require(static_cast<int>(arrivals.size()) >= horizon.T,
            "instance: arrivals shorter than one horizon");
    for (int u : arrivals)
        require(u >= 0 && u < scores.user_count(),
                "instance: arrival user index out of range");
    Instance inst;
    inst.catalog = std::move(catalog);
    inst.scores = std::move(scores);
    inst.horizon = horizon;
    inst.weights = std::move(weights);
    inst.arrivals = std::move(arrivals);
    return inst;
}

}  // namespace pmmf
