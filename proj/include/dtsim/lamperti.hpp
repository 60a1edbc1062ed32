#pragma once

// Shift and renormalized dilation operators and the base-alpha Lamperti pair,
// acting pointwise on sampled functions.

#include <algorithm>
#include <cmath>
#include <optional>

#include "dtsim/core.hpp"

namespace dtsim {

/// Values of a function at strictly increasing sample points.
template <typename Scalar = double>
struct SampledFunction {
    Vec<Scalar> domain;
    Vec<Scalar> values;

    Eigen::Index size() const { return domain.size(); }
};

template <typename Scalar>
SampledFunction<Scalar> make_sampled(Vec<Scalar> domain, Vec<Scalar> values) {
    if (domain.size() != values.size())
        throw DomainError("domain and values differ in length");
    for (Eigen::Index i = 1; i < domain.size(); ++i)
        if (!(domain[i] > domain[i - 1]))
            throw DomainError("sample points must be strictly increasing");
    return {std::move(domain), std::move(values)};
}

/// Value at the sample point within `rel_tol` of t, if any.
template <typename Scalar>
std::optional<Scalar> evaluate(const SampledFunction<Scalar>& f, Scalar t,
                               Scalar rel_tol = Scalar(1e-9)) {
    using std::abs;
    using std::max;
    const auto* first = f.domain.data();
    const auto* last = first + f.domain.size();
    const auto* it = std::lower_bound(first, last, t);
    for (const auto* p : {it - 1, it}) {
        if (p < first || p >= last) continue;
        if (abs(*p - t) <= rel_tol * max(Scalar(1), abs(t)))
            return f.values[p - first];
    }
    return std::nullopt;
}

/// (S_tau f)(t) = f(t + tau): same values, sample points moved by -tau.
template <typename Scalar>
SampledFunction<Scalar> shift(const SampledFunction<Scalar>& f, Scalar tau) {
    return {(f.domain.array() - tau).matrix(), f.values};
}

/// (D_{H,lambda} f)(t) = lambda^{-H} f(lambda t).
template <typename Scalar>
SampledFunction<Scalar> dilate(const SampledFunction<Scalar>& f, Scalar H,
                               Scalar lambda) {
    using std::pow;
    if (!(lambda > 0)) throw DomainError("dilation factor must be positive");
    if (f.size() > 0 && !(f.domain.minCoeff() > 0))
        throw DomainError("dilation acts on functions of positive time");
    return {f.domain / lambda, f.values * pow(lambda, -H)};
}

/// (L_{H,alpha} y)(t) = t^H y(log_alpha t); sample n maps to alpha^n.
template <typename Scalar>
SampledFunction<Scalar> lamperti_forward(const SampledFunction<Scalar>& y,
                                         Scalar H, Scalar alpha) {
    using std::isfinite;
    using std::pow;
    if (!(alpha > 1)) throw DomainError("alpha must be > 1");
    SampledFunction<Scalar> x{Vec<Scalar>(y.size()), Vec<Scalar>(y.size())};
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const Scalar t = pow(alpha, y.domain[i]);
        if (!(t > 0) || !isfinite(t))
            throw DomainError("alpha^t leaves the positive floating range");
        x.domain[i] = t;
        x.values[i] = pow(t, H) * y.values[i];
    }
    return x;
}

/**
 * (L^{-1}_{H,alpha} x)(n) = alpha^{-nH} x(alpha^n). Every sample point must be
 * an integer power of alpha to 1e-9 relative; the result sits on the integers.
 */
template <typename Scalar>
SampledFunction<Scalar> lamperti_inverse(const SampledFunction<Scalar>& x,
                                         Scalar H, Scalar alpha) {
    using std::pow;
    if (!(alpha > 1)) throw DomainError("alpha must be > 1");
    SampledFunction<Scalar> y{Vec<Scalar>(x.size()), Vec<Scalar>(x.size())};
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        long n = 0;
        try {
            n = grid_index(x.domain[i], alpha);
        } catch (const GridError&) {
            throw DomainError("inverse Lamperti transform needs samples at "
                              "integer powers of alpha");
        }
        y.domain[i] = Scalar(n);
        y.values[i] = pow(alpha, -Scalar(n) * H) * x.values[i];
    }
    return y;
}

/**
 * Max |L^{-1} D_{H,k} L y - S_{log_alpha k} y| over y's samples. k must be an
 * integer power of alpha so both sides stay on the sample grid.
 */
template <typename Scalar>
Scalar verify_commutation(const SampledFunction<Scalar>& y, Scalar H,
                          Scalar alpha, Scalar k) {
    using std::abs;
    using std::max;
    if (!(k > 0)) throw GridError("dilation factor must be positive");
    const long m = grid_index(k, alpha); // GridError when k is off the grid
    const auto lhs = lamperti_inverse(dilate(lamperti_forward(y, H, alpha), H, k),
                                      H, alpha);
    const auto rhs = shift(y, Scalar(m));
    Scalar worst = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (abs(lhs.domain[i] - rhs.domain[i]) > Scalar(1e-9))
            throw GridError("transformed samples left the shifted grid");
        worst = max(worst, abs(lhs.values[i] - rhs.values[i]));
    }
    return worst;
}

} // namespace dtsim
