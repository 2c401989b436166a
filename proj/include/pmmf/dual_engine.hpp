#pragma once

// One dual iteration of the online loop: subgradient assembly, momentum
// blend, the proximal step under the gamma^2-weighted norm, and the exact
// projection onto the dual feasible region D.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmmf/core.hpp"
#include "pmmf/regularizer.hpp"

namespace pmmf {

// Scratch buffers for the projection. Reusable across calls within one
// horizon run; not shareable across concurrent runs.
struct ProjectionWorkspace {
    Vec v;                   // substituted coordinates v_p = gamma_p * mu_p
    std::vector<int> order;  // indices of negative coordinates, sorted
};

// g~_t = -A^T x_t + e_t, the subgradient of the dual objective.
inline Vec subgradient(const Decision& decision, const Vec& conj_exposure) {
    require(decision.exposure_delta.size() == conj_exposure.size(),
            "subgradient: dimension mismatch");
    Vec g(conj_exposure.size());
    for (std::size_t p = 0; p < g.size(); ++p)
        g[p] = conj_exposure[p] - decision.exposure_delta[p];
    return g;
}

// g_t = alpha * g~_t + (1 - alpha) * g_{t-1}; alpha = 1 disables momentum.
inline Vec momentum_blend(const Vec& raw, const Vec& previous, double alpha) {
    require(raw.size() == previous.size(), "momentum_blend: dimension mismatch");
    require(alpha > 0.0 && alpha <= 1.0, "momentum_blend: alpha must be in (0,1]");
    Vec g(raw.size());
    for (std::size_t p = 0; p < g.size(); ++p)
        g[p] = alpha * raw[p] + (1.0 - alpha) * previous[p];
    return g;
}

// Unconstrained minimizer of <g, mu'> + step_size * ||mu' - mu||^2_{gamma^2}:
// mu'_p = mu_p - g_p / (2 * step_size * gamma_p^2). Projection is applied
// separately; the split is exact because both use the same weighted norm.
inline Vec prox_step(const Vec& mu, const Vec& grad, double step_size,
                     const Vec& gamma) {
    require(mu.size() == grad.size() && mu.size() == gamma.size(),
            "prox_step: dimension mismatch");
    require(step_size > 0.0, "prox_step: step_size must be > 0");
    Vec out(mu.size());
    for (std::size_t p = 0; p < mu.size(); ++p) {
        require(gamma[p] > 0.0, "prox_step: gamma must be > 0");
        out[p] = mu[p] - grad[p] / (2.0 * step_size * gamma[p] * gamma[p]);
    }
    return out;
}

// Projection onto D in the gamma^2-weighted norm. Substituting
// v_p = gamma_p * mu_p turns the norm Euclidean and the region into
// {v : sum_p min(v_p, 0) >= -lambda}; the projection raises all strictly
// negative coordinates by a common water level (coordinates reaching zero
// exit the active set) until the constraint holds with equality, and never
// touches non-negative coordinates.
inline Vec project_onto_D(const Vec& mu, const Vec& gamma, double lambda,
                          ProjectionWorkspace& ws) {
    require(mu.size() == gamma.size(), "project_onto_D: dimension mismatch");
    require(lambda >= 0.0, "project_onto_D: lambda must be >= 0");
    const std::size_t n = mu.size();

    ws.v.resize(n);
    double neg_sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        require(gamma[p] > 0.0, "project_onto_D: gamma must be > 0");
        ws.v[p] = gamma[p] * mu[p];
        neg_sum += std::min(ws.v[p], 0.0);
    }
    if (neg_sum >= -lambda) return mu;  // already in D

    Vec out = mu;
    if (lambda == 0.0) {
        // D degenerates to {mu >= 0}: clamp the negative coordinates.
        for (std::size_t p = 0; p < n; ++p)
            if (out[p] < 0.0) out[p] = 0.0;
        return out;
    }

    ws.order.clear();
    for (std::size_t p = 0; p < n; ++p)
        if (ws.v[p] < 0.0) ws.order.push_back(static_cast<int>(p));
    // Ascending v, ties by coordinate index for determinism.
    std::sort(ws.order.begin(), ws.order.end(), [&](int a, int b) {
        if (ws.v[a] != ws.v[b]) return ws.v[a] < ws.v[b];
        return a < b;
    });

    // With water level theta, the coordinates still negative are a prefix of
    // the sorted order. For a prefix of size j with sum S_j the level solving
    // the constraint with equality is theta = (-lambda - S_j) / j; the prefix
    // is consistent when v_(j) + theta < 0 <= v_(j+1) + theta.
    const int m = static_cast<int>(ws.order.size());
    double prefix = 0.0;
    std::vector<double> prefix_sums(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        prefix += ws.v[ws.order[static_cast<std::size_t>(j)]];
        prefix_sums[static_cast<std::size_t>(j)] = prefix;
    }
    double theta = 0.0;
    int active = m;
    for (int j = m; j >= 1; --j) {
        const double candidate =
            (-lambda - prefix_sums[static_cast<std::size_t>(j - 1)]) / j;
        if (candidate < 0.0) continue;  // prefix already feasible on its own
        const double vj = ws.v[ws.order[static_cast<std::size_t>(j - 1)]];
        const double vnext =
            (j < m) ? ws.v[ws.order[static_cast<std::size_t>(j)]] : 0.0;
        if (vj + candidate < 0.0 && vnext + candidate >= 0.0) {
            theta = candidate;
            active = j;
            break;
        }
    }

    auto apply_level = [&](double level) {
        for (int idx : ws.order) {
            const double raised = ws.v[static_cast<std::size_t>(idx)] + level;
            out[static_cast<std::size_t>(idx)] =
                std::min(raised, 0.0) / gamma[static_cast<std::size_t>(idx)];
        }
    };
    apply_level(theta);

    // Absorb floating-point residue by nudging theta upward until the
    // feasibility sum (recomputed in mu space, as downstream checks see it)
    // clears -lambda.
    const int max_rounds = static_cast<int>(n) + 4;
    for (int round = 0; round < max_rounds; ++round) {
        double sum = 0.0;
        int still_negative = 0;
        for (std::size_t p = 0; p < n; ++p) {
            const double vp = gamma[p] * out[p];
            if (vp < 0.0) {
                sum += vp;
                ++still_negative;
            }
        }
        if (sum >= -lambda || still_negative == 0) break;
        theta += (-lambda - sum) / still_negative +
                 std::ldexp(std::abs(lambda), -50);
        apply_level(theta);
    }
    return out;
}

// Lines 9-14 of the online loop: conjugate argmax at the pre-step remaining
// resources, subgradient, momentum blend, prox step, projection.
inline DualState dual_update(const DualState& dual, const Decision& decision,
                             const ExposureState& exposure, const Vec& gamma,
                             double lambda, ProjectionWorkspace& ws) {
    const Vec conj = conjugate_argmax_exposure(dual.mu, exposure.remaining,
                                               lambda);
    DualState next;
    next.raw_grad = subgradient(decision, conj);
    next.momentum_grad =
        momentum_blend(next.raw_grad, dual.momentum_grad, dual.alpha);
    const Vec unprojected =
        prox_step(dual.mu, next.momentum_grad, dual.step_size, gamma);
    next.mu = project_onto_D(unprojected, gamma, lambda, ws);
    next.step_size = dual.step_size;
    next.alpha = dual.alpha;
    return next;
}

}  // namespace pmmf
