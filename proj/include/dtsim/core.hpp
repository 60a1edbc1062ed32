#pragma once

// Parameters, geometric grids and the lag-one ratio chain h / h~ that every
// closed-form covariance and spectrum in this library is built from.

#include <cmath>
#include <string>
#include <type_traits>

#include <Eigen/Core>

#include "dtsim/errors.hpp"

namespace dtsim {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Floor division; the remainder of `floor_mod` is always in [0, b).
constexpr long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr long floor_mod(long a, long b) { return a - floor_div(a, b) * b; }

// =============================================================================
// Parameters and grids
// =============================================================================

/**
 * Self-similarity index H, grid base alpha and samples per scale T.
 *
 * The scale l = alpha^T is always recomputed from alpha and T.
 */
template <typename Scalar = double>
struct DsiParams {
    Scalar H;
    Scalar alpha;
    int T;

    Scalar scale() const {
        using std::pow;
        return pow(alpha, T);
    }
    /// H' = H - 1/2, the amplitude exponent of simple Brownian motion.
    Scalar h_prime() const { return H - Scalar(0.5); }
};

template <typename Scalar>
DsiParams<Scalar> make_params(Scalar H, std::type_identity_t<Scalar> alpha,
                              int T) {
    using std::isfinite;
    if (!(H > 0) || !isfinite(H))
        throw DomainError("H must be a finite positive number");
    if (!(alpha > 1) || !isfinite(alpha))
        throw DomainError("alpha must be > 1 (rescale time when l < 1)");
    if (T < 1) throw DomainError("T must be a positive integer");
    return DsiParams<Scalar>{H, alpha, T};
}

template <typename Scalar = double>
struct GeometricGrid {
    int k_max;
    Vec<Scalar> times; ///< alpha^0, ..., alpha^k_max
};

template <typename Scalar>
GeometricGrid<Scalar> make_grid(const DsiParams<Scalar>& params, int k_max) {
    using std::pow;
    if (k_max < 0) throw DomainError("k_max must be nonnegative");
    GeometricGrid<Scalar> grid{k_max, Vec<Scalar>(k_max + 1)};
    for (int k = 0; k <= k_max; ++k) grid.times[k] = pow(params.alpha, k);
    return grid;
}

/// Grid index n with alpha^n == t to within `rel_tol`, or GridError.
template <typename Scalar>
long grid_index(Scalar t, Scalar alpha, Scalar rel_tol = Scalar(1e-9)) {
    using std::abs;
    using std::log;
    using std::pow;
    using std::round;
    if (!(t > 0)) throw GridError("grid points must be positive");
    const Scalar x = log(t) / log(alpha);
    const Scalar n = round(x);
    const Scalar snapped = pow(alpha, n);
    if (abs(snapped - t) > rel_tol * abs(t))
        throw GridError("point is not an integer power of alpha");
    return static_cast<long>(n);
}

// =============================================================================
// Covariance seed
// =============================================================================

/// The 2T numbers R_j(0), R_j(1), j = 0..T-1, that fix a DT-SIM covariance.
template <typename Scalar = double>
struct CovarianceSeed {
    Vec<Scalar> r0; ///< variance at alpha^j
    Vec<Scalar> r1; ///< Cov(X(alpha^{j+1}), X(alpha^j))

    int size() const { return static_cast<int>(r0.size()); }
};

/**
 * Throws DomainError unless r0 > 0 and every lag-one covariance obeys
 * Cauchy-Schwarz. For j = T-1 the right neighbour is alpha^T, whose variance
 * is alpha^{2TH} R_0(0).
 */
template <typename Scalar>
void validate_seed(const DsiParams<Scalar>& params,
                   const CovarianceSeed<Scalar>& seed) {
    using std::abs;
    using std::isfinite;
    using std::pow;
    const int T = params.T;
    if (seed.r0.size() != T || seed.r1.size() != T)
        throw DomainError("covariance seed must hold exactly T rows");
    for (int j = 0; j < T; ++j) {
        if (!(seed.r0[j] > 0) || !isfinite(seed.r0[j]))
            throw DomainError("seed variances r0 must be positive, row " +
                              std::to_string(j));
        if (!isfinite(seed.r1[j]))
            throw DomainError("seed covariance r1 must be finite, row " +
                              std::to_string(j));
    }
    const Scalar extension = pow(params.alpha, 2 * T * params.H);
    for (int j = 0; j < T; ++j) {
        const Scalar next = j + 1 < T ? seed.r0[j + 1] : seed.r0[0] * extension;
        const Scalar bound = seed.r0[j] * next;
        if (seed.r1[j] * seed.r1[j] > bound * (1 + Scalar(1e-12)))
            throw DomainError("seed row " + std::to_string(j) +
                              " violates |r1| <= sqrt(r0 * r0_next)");
    }
}

// =============================================================================
// Ratio chain
// =============================================================================

/**
 * h(alpha^j) = R_j(1) / R_j(0) and its running products
 * h~(alpha^j) = h(alpha^0) ... h(alpha^j), with h~(alpha^{-1}) = 1.
 */
template <typename Scalar = double>
struct HChain {
    DsiParams<Scalar> params;
    CovarianceSeed<Scalar> seed;
    Vec<Scalar> h;
    Vec<Scalar> htilde_base; ///< h~(alpha^j), j = 0..T-1
    Scalar htilde_period;    ///< h~(alpha^{T-1})
    bool positive;           ///< every h > 0: products are taken in log space
    Vec<Scalar> log_h;       ///< log h, filled when `positive`

    int T() const { return params.T; }
};

template <typename Scalar>
HChain<Scalar> make_chain(const DsiParams<Scalar>& params,
                          const CovarianceSeed<Scalar>& seed) {
    using std::exp;
    using std::log;
    validate_seed(params, seed);
    const int T = params.T;
    HChain<Scalar> chain{params, seed, seed.r1.cwiseQuotient(seed.r0),
                         Vec<Scalar>(T), Scalar(1), true, Vec<Scalar>()};
    chain.positive = (chain.h.array() > 0).all();
    if (chain.positive) {
        chain.log_h = chain.h.array().log();
        Scalar acc = 0;
        for (int j = 0; j < T; ++j) {
            acc += chain.log_h[j];
            chain.htilde_base[j] = exp(acc);
        }
    } else {
        Scalar acc = 1;
        for (int j = 0; j < T; ++j) {
            acc *= chain.h[j];
            chain.htilde_base[j] = acc;
        }
    }
    chain.htilde_period = chain.htilde_base[T - 1];
    return chain;
}

/// h(alpha^j) with the periodic extension h(alpha^{j+T}) = h(alpha^j).
template <typename Scalar>
Scalar h_ratio(const HChain<Scalar>& chain, long j) {
    return chain.h[floor_mod(j, chain.T())];
}

namespace detail {

// log |h(alpha^first) ... h(alpha^{first+count-1})|; positive chains only.
template <typename Scalar>
Scalar log_h_product(const HChain<Scalar>& chain, long first, long count) {
    const int T = chain.T();
    const long full = count / T;
    Scalar acc = 0;
    if (full > 0) acc += Scalar(full) * chain.log_h.sum();
    for (long i = first + full * T; i < first + count; ++i)
        acc += chain.log_h[floor_mod(i, T)];
    return acc;
}

} // namespace detail

/// h(alpha^first) * ... * h(alpha^{first+count-1}); 1 when count == 0.
template <typename Scalar>
Scalar h_product(const HChain<Scalar>& chain, long first, long count) {
    using std::exp;
    using std::pow;
    if (count < 0) throw DomainError("h_product needs a nonnegative count");
    if (chain.positive) return exp(detail::log_h_product(chain, first, count));
    const int T = chain.T();
    const long full = count / T;
    Scalar acc = full > 0 ? pow(chain.htilde_period, full) : Scalar(1);
    for (long i = first + full * T; i < first + count; ++i)
        acc *= chain.h[floor_mod(i, T)];
    return acc;
}

/**
 * h~(alpha^r) for r >= -1. With r + 1 = kT + n, n in 0..T-1, this is
 * h~(alpha^{T-1})^k * h~(alpha^{n-1}).
 */
template <typename Scalar>
Scalar h_tilde(const HChain<Scalar>& chain, long r) {
    using std::exp;
    using std::log;
    using std::pow;
    if (r < -1) throw DomainError("h_tilde is defined for r >= -1");
    const int T = chain.T();
    const long k = floor_div(r + 1, T);
    const long n = floor_mod(r + 1, T);
    if (chain.positive) {
        Scalar acc = Scalar(k) * log(chain.htilde_period);
        if (n > 0) acc += log(chain.htilde_base[n - 1]);
        return exp(acc);
    }
    const Scalar base = n == 0 ? Scalar(1) : chain.htilde_base[n - 1];
    return pow(chain.htilde_period, k) * base;
}

/// rho = alpha^{-HT} h~(alpha^{T-1}); spectral series converge iff |rho| < 1.
template <typename Scalar>
Scalar convergence_ratio(const HChain<Scalar>& chain) {
    using std::pow;
    const auto& p = chain.params;
    return pow(p.alpha, -p.H * p.T) * chain.htilde_period;
}

/**
 * Seed of simple Brownian motion sampled at alpha^k: R_j(0) = alpha^{2TH'+j},
 * R_j(1) = R_j(0) inside a scale annulus and alpha^{3TH'+j} across the
 * boundary at j = T-1.
 */
template <typename Scalar>
CovarianceSeed<Scalar> simple_bm_seed(const DsiParams<Scalar>& params) {
    using std::pow;
    const int T = params.T;
    const Scalar hp = params.h_prime();
    CovarianceSeed<Scalar> seed{Vec<Scalar>(T), Vec<Scalar>(T)};
    for (int j = 0; j < T; ++j) {
        seed.r0[j] = pow(params.alpha, 2 * T * hp + j);
        seed.r1[j] = j + 1 < T ? seed.r0[j] : pow(params.alpha, 3 * T * hp + j);
    }
    return seed;
}

template <typename Scalar>
HChain<Scalar> simple_bm_chain(const DsiParams<Scalar>& params) {
    return make_chain(params, simple_bm_seed(params));
}

} // namespace dtsim
