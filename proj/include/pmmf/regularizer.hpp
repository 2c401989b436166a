#pragma once

// Fairness regularizers over provider exposures and the dual-side machinery
// of the max-min form: the feasible region D of dual prices and the closed
// form of the conjugate r*(-mu) on it.

#include <cmath>
#include <stdexcept>
#include <string>

#include "pmmf/core.hpp"

namespace pmmf {

enum class Regularizer { MMF, PF };

inline const char* regularizer_name(Regularizer reg) {
    return reg == Regularizer::MMF ? "mmf" : "pf";
}

// MMF: min_p e_p/gamma_p.  PF: sum_p log(1 + e_p/gamma_p), natural log.
inline double fairness_value(Regularizer reg, const Vec& exposures,
                             const Vec& gamma) {
    require(exposures.size() == gamma.size(),
            "fairness_value: dimension mismatch");
    require(!gamma.empty(), "fairness_value: empty vectors");
    if (reg == Regularizer::MMF) {
        double worst = exposures[0] / gamma[0];
        for (std::size_t p = 1; p < gamma.size(); ++p)
            worst = std::min(worst, exposures[p] / gamma[p]);
        return worst;
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < gamma.size(); ++p)
        sum += std::log1p(exposures[p] / gamma[p]);
    return sum;
}

// Membership test for D = {mu : sum_{p in S} gamma_p mu_p >= -lambda for
// every subset S}. The binding subset is the set of negative coordinates,
// so the exponential family reduces to one linear-time sum.
inline bool is_dual_feasible(const Vec& mu, const Vec& gamma, double lambda) {
    require(mu.size() == gamma.size(), "is_dual_feasible: dimension mismatch");
    require(lambda >= 0.0, "is_dual_feasible: lambda must be >= 0");
    double worst_sum = 0.0;
    for (std::size_t p = 0; p < mu.size(); ++p)
        worst_sum += std::min(gamma[p] * mu[p], 0.0);
    return worst_sum >= -lambda;
}

// Closed form of r*(-mu) = max_{e <= gamma} [r(e) + mu^T e / lambda] for the
// MMF regularizer: gamma^T mu / lambda + 1, finite exactly on D.
inline double mmf_conjugate_value(const Vec& mu, const Vec& gamma,
                                  double lambda) {
    require(lambda > 0.0, "mmf_conjugate_value: lambda must be > 0");
    if (!is_dual_feasible(mu, gamma, lambda))
        throw std::domain_error(
            "mmf_conjugate_value: mu outside the dual feasible region "
            "(conjugate is +inf)");
    double dot = 0.0;
    for (std::size_t p = 0; p < mu.size(); ++p) dot += gamma[p] * mu[p];
    return dot / lambda + 1.0;
}

// Exposure vector attaining the conjugate under the cap e <= cap: the online
// loop uses the current remaining resources as the cap and takes the
// maximizer at the cap, clamped below at zero once a cap has gone negative.
inline Vec conjugate_argmax_exposure(const Vec& mu, const Vec& cap,
                                     double lambda) {
    require(mu.size() == cap.size(),
            "conjugate_argmax_exposure: dimension mismatch");
    require(lambda > 0.0, "conjugate_argmax_exposure: lambda must be > 0");
    Vec e(cap.size());
    for (std::size_t p = 0; p < cap.size(); ++p) e[p] = std::max(cap[p], 0.0);
    return e;
}

// Gradient of the PF regularizer, 1/(gamma_p + e_p) componentwise.
inline Vec pf_fairness_gradient(const Vec& exposures, const Vec& gamma) {
    require(exposures.size() == gamma.size(),
            "pf_fairness_gradient: dimension mismatch");
    Vec grad(gamma.size());
    for (std::size_t p = 0; p < gamma.size(); ++p) {
        require(exposures[p] >= 0.0,
                "pf_fairness_gradient: exposures must be >= 0");
        grad[p] = 1.0 / (gamma[p] + exposures[p]);
    }
    return grad;
}

}  // namespace pmmf
