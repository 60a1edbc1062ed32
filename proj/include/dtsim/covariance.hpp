#pragma once

// Closed-form DT-SIM covariance, the simple Brownian motion oracle, and the
// Markov / scale-invariance residual checks.

#include <algorithm>
#include <cmath>
#include <utility>

#include "dtsim/core.hpp"

namespace dtsim {

/// tau = k T + v with v in 0..T-1 (floor division, also for tau < 0).
struct LagDecomposition {
    long k;
    long v;
};

constexpr LagDecomposition decompose_lag(long tau, int T) {
    return {floor_div(tau, T), floor_mod(tau, T)};
}

// =============================================================================
// Simple Brownian motion
// =============================================================================

/**
 * Index n of the annulus A_n = [lambda^{n-1}, lambda^n) holding t >= 1.
 * log_lambda t is snapped to the nearest integer when within 1e-9, so powers
 * of lambda computed in floating point land in the annulus they start.
 */
template <typename Scalar>
long annulus_index(Scalar t, Scalar lambda) {
    using std::abs;
    using std::floor;
    using std::log;
    using std::round;
    if (!(t >= 1)) throw DomainError("simple Brownian motion starts at t = 1");
    Scalar x = log(t) / log(lambda);
    if (abs(x - round(x)) < Scalar(1e-9)) x = round(x);
    return static_cast<long>(floor(x)) + 1;
}

/// Cov(X(t), X(s)) = lambda^{(n+m)(H-1/2)} min(t, s), t in A_n, s in A_m.
template <typename Scalar>
Scalar simple_bm_cov(Scalar t, Scalar s, Scalar H, Scalar lambda) {
    using std::min;
    using std::pow;
    if (!(lambda > 1)) throw DomainError("lambda must be > 1");
    const long n = annulus_index(t, lambda);
    const long m = annulus_index(s, lambda);
    return pow(lambda, Scalar(n + m) * (H - Scalar(0.5))) * min(t, s);
}

// =============================================================================
// DT-SIM closed form
// =============================================================================

namespace detail {

// prefactor * R_n(tau) for n >= 0 and tau >= 0, with the prefactor given as
// its natural logarithm so the whole product stays in log space when the
// chain is positive.
template <typename Scalar>
Scalar dtsim_cov_nonneg(const HChain<Scalar>& chain, long n, long tau,
                        Scalar log_prefactor) {
    using std::exp;
    using std::log;
    const auto& p = chain.params;
    const int T = p.T;
    const auto [k, v] = decompose_lag(tau, T);
    const long period = floor_div(n, T);
    const Scalar r0 = chain.seed.r0[floor_mod(n, T)];
    // R_n(0) extended by R_{n+T}(0) = alpha^{2TH} R_n(0).
    const Scalar log_var_ext = Scalar(2 * T * period) * p.H * log(p.alpha);
    if (chain.positive) {
        // h~(v+n-1)/h~(n-1) is the product h(n) ... h(n+v-1).
        const Scalar log_ratio = Scalar(k) * log(chain.htilde_period) +
                                 log_h_product(chain, n, v);
        return exp(log_prefactor + log_ratio + log(r0) + log_var_ext);
    }
    const Scalar ratio = h_product(chain, n, tau);
    return exp(log_prefactor + log_var_ext) * r0 * ratio;
}

template <typename Scalar>
Scalar dtsim_cov_scaled(const HChain<Scalar>& chain, long n, long tau,
                        Scalar log_prefactor) {
    using std::log;
    if (n < 0) throw DomainError("base index n must be nonnegative");
    if (tau >= 0) return dtsim_cov_nonneg(chain, n, tau, log_prefactor);
    // R_n(-kT+v) = alpha^{-2kTH} R_{n+v}((k-1)T + T - v)
    const int T = chain.T();
    const long k = -floor_div(tau, T);
    const long v = tau + k * T;
    const Scalar shrink =
        -Scalar(2 * k * T) * chain.params.H * log(chain.params.alpha);
    return dtsim_cov_nonneg(chain, n + v, (k - 1) * T + T - v,
                            log_prefactor + shrink);
}

} // namespace detail

/**
 * R_n(tau) = E[X(alpha^{n+tau}) X(alpha^n)] for any n >= 0 and integer tau.
 *
 * For tau = kT + v >= 0: h~(alpha^{T-1})^k h~(alpha^{v+n-1}) / h~(alpha^{n-1})
 * times the extended variance R_n(0). Negative lags go through the reflection
 * R_n(-kT+v) = alpha^{-2kTH} R_{n+v}((k-1)T + T - v).
 */
template <typename Scalar>
Scalar dtsim_cov(const HChain<Scalar>& chain, long n, long tau) {
    return detail::dtsim_cov_scaled(chain, n, tau, Scalar(0));
}

/// E[X(alpha^a) X(alpha^b)] on grid indices a, b >= 0.
template <typename Scalar>
Scalar dtsim_grid_cov(const HChain<Scalar>& chain, long a, long b) {
    return dtsim_cov(chain, std::min(a, b), std::abs(b - a));
}

/// Same covariance over real times; both times must lie on the alpha^k grid.
template <typename Scalar>
Scalar dtsim_cov_at(const HChain<Scalar>& chain, Scalar t, Scalar s) {
    const long a = grid_index(t, chain.params.alpha);
    const long b = grid_index(s, chain.params.alpha);
    if (a < 0 || b < 0) throw GridError("grid starts at alpha^0 = 1");
    return dtsim_grid_cov(chain, a, b);
}

/// Stationary-side counterpart R_n(tau) alpha^{-(2n+tau)H}; T-periodic in n.
template <typename Scalar>
Scalar pc_counterpart_cov(const HChain<Scalar>& chain, long n, long tau) {
    using std::log;
    const Scalar log_pre =
        -Scalar(2 * n + tau) * chain.params.H * log(chain.params.alpha);
    return detail::dtsim_cov_scaled(chain, n, tau, log_pre);
}

// =============================================================================
// Structural checks
// =============================================================================

/**
 * R(t1,t3) R(t2,t2) - R(t1,t2) R(t2,t3) for t1 <= t2 <= t3. Vanishes for
 * every triple iff R(s,t) = G(min) K(max), the wide-sense Markov condition.
 */
template <typename Cov, typename Point>
auto markov_triangle_residual(Cov&& cov, Point t1, Point t2, Point t3) {
    if (!(t1 <= t2 && t2 <= t3))
        throw DomainError("triangle residual needs t1 <= t2 <= t3");
    return cov(t1, t3) * cov(t2, t2) - cov(t1, t2) * cov(t2, t3);
}

/// The residual divided by the larger of its two products.
template <typename Cov, typename Point>
auto relative_triangle_residual(Cov&& cov, Point t1, Point t2, Point t3) {
    using std::abs;
    using std::max;
    const auto lhs = cov(t1, t3) * cov(t2, t2);
    const auto rhs = cov(t1, t2) * cov(t2, t3);
    const auto scale = max(abs(lhs), abs(rhs));
    const auto res = markov_triangle_residual(cov, t1, t2, t3);
    return scale > 0 ? abs(res) / scale : abs(res);
}

/// cov(l t, l s) - l^{2H} cov(t, s) with l = alpha^T.
template <typename Cov, typename Scalar>
Scalar dsi_cov_check(Cov&& cov, const DsiParams<Scalar>& params, Scalar t,
                     Scalar s) {
    using std::pow;
    const Scalar l = params.scale();
    return cov(l * t, l * s) - pow(l, 2 * params.H) * cov(t, s);
}

} // namespace dtsim
