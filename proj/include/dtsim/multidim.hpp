#pragma once

// T-dimensional self-similar Markov embedding W^k(l^n) = X(alpha^{nT+k}) and
// its covariance matrices Q(l^n, l^tau).

#include <cmath>

#include "dtsim/core.hpp"
#include "dtsim/covariance.hpp"

namespace dtsim {

/// Row k holds W^k(l^0), W^k(l^1), ...
template <typename Scalar = double>
struct Embedding {
    DsiParams<Scalar> params;
    Mat<Scalar> components;

    Eigen::Index steps() const { return components.cols(); }
};

/// Pure re-indexing of a path sampled at alpha^0, alpha^1, ...; a trailing
/// partial scale is dropped. IndexError when not even one scale is covered.
template <typename Scalar, typename Derived>
Embedding<Scalar> build_embedding(const Eigen::MatrixBase<Derived>& x,
                                  const DsiParams<Scalar>& params) {
    const int T = params.T;
    const Eigen::Index steps = x.size() / T;
    if (steps < 1)
        throw IndexError("embedding needs the samples alpha^0..alpha^{T-1}");
    Embedding<Scalar> e{params, Mat<Scalar>(T, steps)};
    for (Eigen::Index n = 0; n < steps; ++n)
        for (int k = 0; k < T; ++k) e.components(k, n) = x(n * T + k);
    return e;
}

/**
 * Factors of the embedding covariance: C[j][k] = u_j / u_k with
 * u_j = h~(alpha^{j-1}), R = diag(R_j(0)), scale_base = h~(alpha^{T-1}).
 */
template <typename Scalar = double>
struct QCov {
    Mat<Scalar> C;
    Vec<Scalar> R;
    Scalar scale_base;
    DsiParams<Scalar> params;
};

template <typename Scalar>
QCov<Scalar> make_qcov(const HChain<Scalar>& chain) {
    const int T = chain.T();
    Vec<Scalar> u(T);
    for (int j = 0; j < T; ++j) {
        u[j] = h_tilde(chain, j - 1);
        if (u[j] == 0)
            throw DomainError("a zero lag-one covariance inside the first "
                              "scale leaves C_H undefined");
    }
    Mat<Scalar> C = u * u.cwiseInverse().transpose();
    C.diagonal().setOnes();
    return {std::move(C), chain.seed.r0, chain.htilde_period, chain.params};
}

/// alpha^{2nHT} C R h~(alpha^{T-1})^tau, the factored form, tau >= 0.
template <typename Scalar>
Mat<Scalar> q_cov_factored(const QCov<Scalar>& q, long n, long tau) {
    using std::pow;
    if (tau < 0) throw DomainError("factored form is stated for tau >= 0");
    const auto& p = q.params;
    const Scalar factor =
        pow(p.alpha, Scalar(2 * n * p.T) * p.H) * pow(q.scale_base, tau);
    return factor * (q.C * q.R.asDiagonal());
}

/**
 * Q(l^n, l^tau) = E[W(l^{n+tau}) W(l^n)^T].
 *
 * The factored form holds for every entry with tau T + j - k >= 0; at tau = 0
 * the entries above the diagonal are the transposed ones. Negative tau uses
 * Q(l^n, l^{-s}) = l^{-2sH} Q(l^n, l^s)^T.
 */
template <typename Scalar>
Mat<Scalar> q_cov(const QCov<Scalar>& q, long n, long tau) {
    using std::pow;
    if (tau < 0) {
        const Scalar l = q.params.scale();
        return pow(l, -2 * Scalar(-tau) * q.params.H) *
               q_cov(q, n, -tau).transpose();
    }
    Mat<Scalar> Q = q_cov_factored(q, n, tau);
    if (tau == 0) {
        const Mat<Scalar> lower = Q.transpose();
        Q.template triangularView<Eigen::StrictlyUpper>() = lower;
    }
    return Q;
}

template <typename Scalar>
Mat<Scalar> q_cov(const HChain<Scalar>& chain, long n, long tau) {
    return q_cov(make_qcov(chain), n, tau);
}

/// Entrywise route: alpha^{2nHT} R_k(tau T + j - k) through dtsim_cov.
template <typename Scalar>
Mat<Scalar> q_cov_from_lags(const HChain<Scalar>& chain, long n, long tau) {
    using std::pow;
    const auto& p = chain.params;
    const int T = p.T;
    const Scalar factor = pow(p.alpha, Scalar(2 * n * T) * p.H);
    Mat<Scalar> Q(T, T);
    for (int j = 0; j < T; ++j)
        for (int k = 0; k < T; ++k)
            Q(j, k) = factor * dtsim_cov(chain, k, tau * T + j - k);
    return Q;
}

/// Gamma_k(l^n, l^tau) = alpha^{2nHT} h~(alpha^{T-1})^tau R_k(0), tau >= 0.
template <typename Scalar>
Scalar gamma_k(const HChain<Scalar>& chain, int k, long n, long tau) {
    using std::pow;
    const auto& p = chain.params;
    if (k < 0 || k >= p.T) throw DomainError("component index out of range");
    if (tau < 0) throw DomainError("gamma_k is stated for tau >= 0");
    return pow(p.alpha, Scalar(2 * n * p.T) * p.H) *
           pow(chain.htilde_period, tau) * chain.seed.r0[k];
}

} // namespace dtsim
