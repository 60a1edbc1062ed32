#pragma once

// Spectral side: the periodically correlated (Gladyshev) pipeline
// R_n(tau) -> B_k(tau) -> f_k -> f_jk, truncated spectral series of the
// T-dimensional embedding, and its closed forms.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dtsim/core.hpp"
#include "dtsim/covariance.hpp"
#include "dtsim/multidim.hpp"

namespace dtsim {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using CMat = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;

/// Maps any angle into [0, 2 pi).
template <typename Scalar>
Scalar wrap_angle(Scalar omega) {
    using std::floor;
    Scalar w = omega - two_pi<Scalar> * floor(omega / two_pi<Scalar>);
    if (w >= two_pi<Scalar>) w = 0;
    return w;
}

// =============================================================================
// Frequency grids and truncation
// =============================================================================

/// omega_m = 2 pi m / n_omega, m = 0..n_omega-1 (half-open on 2 pi).
template <typename Scalar = double>
struct FrequencyGrid {
    int n_omega;
    Vec<Scalar> omegas;
};

template <typename Scalar = double>
FrequencyGrid<Scalar> make_frequency_grid(int n_omega = 256) {
    if (n_omega < 1) throw DomainError("frequency grid needs n_omega >= 1");
    FrequencyGrid<Scalar> g{n_omega, Vec<Scalar>(n_omega)};
    for (int m = 0; m < n_omega; ++m)
        g.omegas[m] = two_pi<Scalar> * Scalar(m) / Scalar(n_omega);
    return g;
}

template <typename Scalar>
void require_convergent(Scalar rho) {
    using std::abs;
    if (!(abs(rho) < 1))
        throw ConvergenceError("spectral series diverge: |rho| = " +
                               std::to_string(static_cast<double>(abs(rho))) +
                               " >= 1");
}

/// Smallest S >= 1 with |rho|^S <= tol.
template <typename Scalar>
long auto_truncation(Scalar rho, Scalar tol = Scalar(1e-12)) {
    using std::abs;
    using std::ceil;
    using std::log;
    require_convergent(rho);
    if (rho == 0) return 1;
    const long s = static_cast<long>(ceil(log(tol) / log(abs(rho))));
    return s < 1 ? 1 : s;
}

/// A truncated series value with a bound on the neglected tail.
template <typename Scalar>
struct SeriesValue {
    Complex<Scalar> value;
    Scalar tail_bound;
};

// =============================================================================
// Periodically correlated pipeline
// =============================================================================

/// B_k(tau) = (1/T) sum_n R_n(tau) e^{-2 pi i k n / T}, given R_n(tau) for
/// one period n = 0..T-1.
template <typename Scalar, typename Derived>
Complex<Scalar> bk_from_pc_cov(const Eigen::MatrixBase<Derived>& r_period,
                               long k) {
    using std::polar;
    const long T = r_period.size();
    Complex<Scalar> acc = 0;
    for (long n = 0; n < T; ++n)
        acc += Scalar(r_period(n)) *
               polar(Scalar(1), -two_pi<Scalar> * Scalar(floor_mod(k * n, T)) /
                                    Scalar(T));
    return acc / Scalar(T);
}

/**
 * B_k(tau) for k = 0..T-1 and |tau| <= max_lag. Carries the decay ratio rho
 * and M = max |R_n(v)| over n, v in 0..T-1, which bound the lag tails through
 * |R_n(kT+v)| = |rho|^k |R_n(v)|.
 */
template <typename Scalar = double>
struct BkTable {
    int T;
    long max_lag;
    Scalar rho;
    Scalar tail_scale;
    CMat<Scalar> values; ///< T x (2 max_lag + 1), column tau + max_lag

    Complex<Scalar> operator()(long k, long tau) const {
        if (tau < -max_lag || tau > max_lag)
            throw IndexError("lag outside the B_k table");
        return values(floor_mod(k, T), tau + max_lag);
    }
};

/// Table from any PC covariance `pc_cov(n, tau)` with period T.
template <typename Scalar, typename PcCov>
BkTable<Scalar> make_bk_table(PcCov&& pc_cov, int T, long max_lag, Scalar rho) {
    using std::abs;
    using std::max;
    if (max_lag < 0) throw DomainError("max_lag must be nonnegative");
    BkTable<Scalar> table{T, max_lag, rho, 0, CMat<Scalar>(T, 2 * max_lag + 1)};
    Vec<Scalar> r(T);
    for (long tau = -max_lag; tau <= max_lag; ++tau) {
        for (int n = 0; n < T; ++n) r[n] = pc_cov(n, tau);
        for (int k = 0; k < T; ++k)
            table.values(k, tau + max_lag) = bk_from_pc_cov<Scalar>(r, k);
    }
    for (int n = 0; n < T; ++n)
        for (int v = 0; v < T; ++v)
            table.tail_scale = max(table.tail_scale, abs(Scalar(pc_cov(n, v))));
    return table;
}

template <typename Scalar>
BkTable<Scalar> make_bk_table(const HChain<Scalar>& chain, long max_lag) {
    return make_bk_table<Scalar>(
        [&](long n, long tau) { return pc_counterpart_cov(chain, n, tau); },
        chain.T(), max_lag, convergence_ratio(chain));
}

/// R_n(tau) = sum_k B_k(tau) e^{2 pi i k n / T}.
template <typename Scalar>
Complex<Scalar> reconstruct_pc_cov(const BkTable<Scalar>& b, long n, long tau) {
    using std::polar;
    Complex<Scalar> acc = 0;
    for (int k = 0; k < b.T; ++k)
        acc += b(k, tau) *
               polar(Scalar(1), two_pi<Scalar> * Scalar(floor_mod(k * n, b.T)) /
                                    Scalar(b.T));
    return acc;
}

/// R_n(tau) = alpha^{(2n+tau)H} sum_k B_k(tau) e^{2 pi i k n / T}.
template <typename Scalar>
Scalar dsi_cov_from_spectra(const HChain<Scalar>& chain, long n, long tau,
                            const BkTable<Scalar>& b) {
    using std::pow;
    const auto& p = chain.params;
    return pow(p.alpha, Scalar(2 * n + tau) * p.H) *
           reconstruct_pc_cov(b, n, tau).real();
}

/**
 * f_k(omega) ~ (1/2pi) sum_{|tau| <= S} B_k(tau) e^{-i tau omega}, with k taken
 * mod T and omega mod 2 pi.
 */
template <typename Scalar>
SeriesValue<Scalar> fk_from_bk(const BkTable<Scalar>& b, long k, Scalar omega,
                               long S) {
    using std::abs;
    using std::polar;
    using std::pow;
    require_convergent(b.rho);
    if (S < 0 || S > b.max_lag)
        throw IndexError("truncation exceeds the B_k table");
    const Scalar w = wrap_angle(omega);
    Complex<Scalar> acc = b(k, 0);
    for (long tau = 1; tau <= S; ++tau)
        acc += b(k, tau) * polar(Scalar(1), -Scalar(tau) * w) +
               b(k, -tau) * polar(Scalar(1), Scalar(tau) * w);
    const Scalar q = abs(b.rho);
    const Scalar tail = 2 * Scalar(b.T) * b.tail_scale *
                        pow(q, Scalar(floor_div(S + 1, b.T))) /
                        ((1 - q) * two_pi<Scalar>);
    return {acc / two_pi<Scalar>, tail};
}

/// f_jk(omega) = (1/T) f_{k-j}((omega - 2 pi j) / T) for a per-index spectral
/// function `fk(index, angle)`; index reduced mod T, angle into [0, 2 pi).
template <typename Scalar, typename Fk>
Complex<Scalar> fjk(Fk&& fk, int T, long j, long k, Scalar omega) {
    const Scalar arg = wrap_angle((omega - two_pi<Scalar> * Scalar(j)) / Scalar(T));
    return Complex<Scalar>(fk(floor_mod(k - j, T), arg)) / Scalar(T);
}

/// The T x T matrix [f_jk(omega)] from a B_k table truncated at S.
template <typename Scalar>
CMat<Scalar> pc_spectral_matrix(const BkTable<Scalar>& b, Scalar omega, long S) {
    CMat<Scalar> f(b.T, b.T);
    const auto fk = [&](long k, Scalar w) { return fk_from_bk(b, k, w, S).value; };
    for (int j = 0; j < b.T; ++j)
        for (int k = 0; k < b.T; ++k) f(j, k) = fjk<Scalar>(fk, b.T, j, k, omega);
    return f;
}

// =============================================================================
// Spectral density of the T-dimensional embedding
// =============================================================================

/**
 * d(omega) = (1/2pi) [ sum_{s=0}^{S} l^{-Hs} e^{-i omega s T} Q(l^s)
 *                    + sum_{s=1}^{S} l^{Hs} e^{i omega s T} Q(l^{-s}) ],
 * every entry with the same two-sided geometric tail bound.
 */
template <typename Scalar>
CMat<Scalar> spectral_sum_matrix(const HChain<Scalar>& chain, Scalar omega,
                                 long S, Scalar* tail_bound = nullptr) {
    using std::abs;
    using std::polar;
    using std::pow;
    const Scalar rho = convergence_ratio(chain);
    require_convergent(rho);
    if (S < 0) throw DomainError("truncation must be nonnegative");
    const auto q = make_qcov(chain);
    const auto& p = chain.params;
    const Scalar l = p.scale();
    const int T = p.T;

    CMat<Scalar> d = q_cov(q, 0, 0).template cast<Complex<Scalar>>();
    for (long s = 1; s <= S; ++s) {
        const Scalar decay = pow(l, -p.H * Scalar(s));
        const Complex<Scalar> z = polar(decay, -omega * Scalar(s * T));
        const Complex<Scalar> z_up = polar(pow(l, p.H * Scalar(s)),
                                           omega * Scalar(s * T));
        d += z * q_cov(q, 0, s).template cast<Complex<Scalar>>() +
             z_up * q_cov(q, 0, -s).template cast<Complex<Scalar>>();
    }
    d /= two_pi<Scalar>;
    if (tail_bound) {
        const Scalar a = (q.C * q.R.asDiagonal()).cwiseAbs().maxCoeff();
        const Scalar r = abs(rho);
        *tail_bound = 2 * pow(r, Scalar(S + 1)) * a / ((1 - r) * two_pi<Scalar>);
    }
    return d;
}

template <typename Scalar>
SeriesValue<Scalar> spectral_sum(const HChain<Scalar>& chain, int j, int r,
                                 Scalar omega, long S) {
    Scalar bound = 0;
    const auto d = spectral_sum_matrix(chain, omega, S, &bound);
    return {d(j, r), bound};
}

/**
 * Pieces of the closed-form d_jr(omega) (each still to be divided by 2 pi):
 *   first         = a_jr / (1 - z rho)
 *   second_ratio  = -a_rj / (1 - z / rho)
 *   second_series = a_rj conj(z) rho / (1 - conj(z) rho)
 *   lag_zero      = Q_jr(l^0) - a_jr
 * with z = e^{-i omega T}, a_jr = C_jr R_r(0). The two forms of the second
 * term are algebraically identical. `lag_zero` is nonzero only above the
 * diagonal, where Q(l^0) is the transpose of C R.
 */
template <typename Scalar>
struct ClosedFormTerms {
    Complex<Scalar> first;
    Complex<Scalar> second_ratio;
    Complex<Scalar> second_series;
    Scalar lag_zero;
};

template <typename Scalar>
ClosedFormTerms<Scalar> closed_form_terms(const HChain<Scalar>& chain, int j,
                                          int r, Scalar omega) {
    using std::abs;
    using std::conj;
    using std::polar;
    const int T = chain.T();
    if (j < 0 || j >= T || r < 0 || r >= T)
        throw DomainError("spectral matrix index out of range");
    const Scalar rho = convergence_ratio(chain);
    require_convergent(rho);
    const auto q = make_qcov(chain);
    const Scalar a_jr = q.C(j, r) * q.R[r];
    const Scalar a_rj = q.C(r, j) * q.R[j];
    const Complex<Scalar> z = polar(Scalar(1), -omega * Scalar(T));

    constexpr Scalar pole_tol = Scalar(1e-14);
    const Complex<Scalar> den1 = Scalar(1) - z * rho;
    if (abs(den1) < pole_tol) throw PoleError("1 - e^{-i omega T} rho vanishes");
    ClosedFormTerms<Scalar> t{a_jr / den1, 0, 0, j < r ? a_rj - a_jr : Scalar(0)};
    if (rho != 0) {
        const Complex<Scalar> den2 = Scalar(1) - z / rho;
        if (abs(den2) < pole_tol)
            throw PoleError("1 - e^{-i omega T} / rho vanishes");
        t.second_ratio = -a_rj / den2;
    }
    const Complex<Scalar> w = conj(z) * rho;
    t.second_series = a_rj * w / (Scalar(1) - w);
    return t;
}

/// Two-term closed form taking Q(l^0) = C R for every entry; Hermitian only
/// when C_jr R_r(0) = C_rj R_j(0).
template <typename Scalar>
Complex<Scalar> spectral_two_term(const HChain<Scalar>& chain, int j, int r,
                                  Scalar omega) {
    const auto t = closed_form_terms(chain, j, r, omega);
    return (t.first + t.second_ratio) / two_pi<Scalar>;
}

/// Closed-form spectral density d_jr(omega) of the embedding.
template <typename Scalar>
Complex<Scalar> spectral_closed(const HChain<Scalar>& chain, int j, int r,
                                Scalar omega) {
    const auto t = closed_form_terms(chain, j, r, omega);
    return (t.first + t.second_ratio + t.lag_zero) / two_pi<Scalar>;
}

/// d_kk(omega) = R_k(0) (1 - rho^2) / (2 pi (1 - 2 cos(omega T) rho + rho^2)).
template <typename Scalar>
Scalar spectral_diag(const HChain<Scalar>& chain, int k, Scalar omega) {
    using std::cos;
    const Scalar rho = convergence_ratio(chain);
    require_convergent(rho);
    if (k < 0 || k >= chain.T()) throw DomainError("component index out of range");
    const Scalar num = chain.seed.r0[k] * (1 - rho * rho);
    const Scalar den = 1 - 2 * cos(omega * Scalar(chain.T())) * rho + rho * rho;
    return num / (two_pi<Scalar> * den);
}

/// Simple Brownian motion, two-term form:
/// (alpha^{2TH'}/2pi) [alpha^r / (1 - z alpha^{-T/2}) - alpha^j / (1 - z alpha^{T/2})].
template <typename Scalar>
Complex<Scalar> simple_bm_spectral_two_term(const DsiParams<Scalar>& p, int j,
                                            int r, Scalar omega) {
    using std::polar;
    using std::pow;
    const Complex<Scalar> z = polar(Scalar(1), -omega * Scalar(p.T));
    const Scalar amp = pow(p.alpha, 2 * Scalar(p.T) * p.h_prime());
    const Scalar half = pow(p.alpha, Scalar(p.T) / 2);
    return amp / two_pi<Scalar> *
           (pow(p.alpha, Scalar(r)) / (Scalar(1) - z / half) -
            pow(p.alpha, Scalar(j)) / (Scalar(1) - z * half));
}

/// Simple Brownian motion spectral density, lag-zero term symmetric.
template <typename Scalar>
Complex<Scalar> simple_bm_spectral(const DsiParams<Scalar>& p, int j, int r,
                                   Scalar omega) {
    using std::pow;
    auto d = simple_bm_spectral_two_term(p, j, r, omega);
    if (j < r) {
        const Scalar amp = pow(p.alpha, 2 * Scalar(p.T) * p.h_prime());
        d += amp * (pow(p.alpha, Scalar(j)) - pow(p.alpha, Scalar(r))) /
             two_pi<Scalar>;
    }
    return d;
}

// =============================================================================
// Spectral matrices over a grid
// =============================================================================

enum class SpectralMethod { closed, sum, example, diag };

template <typename Scalar = double>
struct SpectralMatrix {
    FrequencyGrid<Scalar> grid;
    std::vector<CMat<Scalar>> entries; ///< one T x T matrix per omega
};

/// `S` < 0 selects auto_truncation for the `sum` method.
template <typename Scalar>
SpectralMatrix<Scalar> spectral_matrix(const HChain<Scalar>& chain,
                                       const FrequencyGrid<Scalar>& grid,
                                       SpectralMethod method, long S = -1) {
    const int T = chain.T();
    if (method == SpectralMethod::sum && S < 0)
        S = auto_truncation(convergence_ratio(chain));
    SpectralMatrix<Scalar> out{grid, {}};
    out.entries.reserve(grid.n_omega);
    for (int m = 0; m < grid.n_omega; ++m) {
        const Scalar w = grid.omegas[m];
        CMat<Scalar> d = CMat<Scalar>::Zero(T, T);
        switch (method) {
        case SpectralMethod::sum:
            d = spectral_sum_matrix(chain, w, S);
            break;
        case SpectralMethod::diag:
            for (int k = 0; k < T; ++k) d(k, k) = spectral_diag(chain, k, w);
            break;
        case SpectralMethod::closed:
            for (int j = 0; j < T; ++j)
                for (int r = 0; r < T; ++r) d(j, r) = spectral_closed(chain, j, r, w);
            break;
        case SpectralMethod::example:
            for (int j = 0; j < T; ++j)
                for (int r = 0; r < T; ++r)
                    d(j, r) = simple_bm_spectral(chain.params, j, r, w);
            break;
        }
        out.entries.push_back(std::move(d));
    }
    return out;
}

/// max_omega max_{j,r} |d_jr - conj(d_rj)|.
template <typename Scalar>
Scalar max_hermitian_defect(const SpectralMatrix<Scalar>& s) {
    Scalar worst = 0;
    for (const auto& d : s.entries)
        worst = std::max(worst, (d - d.adjoint()).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace dtsim
