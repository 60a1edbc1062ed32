// Spectral density tests: embedding closed forms, truncated series, and the
// periodically correlated B_k -> f_k -> f_jk pipeline
#include <cmath>
#include <gtest/gtest.h>
#include <numbers>

#include "dtsim/spectral.hpp"
#include "test_util.hpp"

using namespace dtsim;
using dtsim::testing::for_lattice;
using dtsim::testing::random_seed;

namespace {

constexpr double kPi = std::numbers::pi;

double hand_value() {
    // (2 / 2pi) (1 / (1 - 2^{-1/2}) - 1 / (1 - 2^{1/2}))
    const double s = std::sqrt(2.0);
    return (2.0 / (2 * kPi)) * (1.0 / (1.0 - 1.0 / s) - 1.0 / (1.0 - s));
}

} // namespace

// =============================================================================
// Hand values
// =============================================================================

TEST(SpectralValues, HandValueThreeRoutes) {
    const auto p = make_params(1.0, 2.0, 1);
    const auto chain = simple_bm_chain(p);
    EXPECT_NEAR(hand_value(), 1.8552, 5e-5);
    EXPECT_NEAR(simple_bm_spectral(p, 0, 0, 0.0).real(), hand_value(), 1e-13);
    EXPECT_NEAR(spectral_closed(chain, 0, 0, 0.0).real(), hand_value(), 1e-13);
    EXPECT_NEAR(spectral_diag(chain, 0, 0.0), hand_value(), 1e-13);
    // Diagonal form: 2 (1 - 1/2) / (2 pi (1 - 2 * 2^{-1/2} + 1/2))
    EXPECT_NEAR(hand_value(), 1.0 / (2 * kPi * (1.5 - std::sqrt(2.0))), 1e-13);
}

TEST(SpectralValues, DiagonalAtHalfPeriod) {
    const auto p = make_params(0.75, 2.0, 2);
    const auto chain = simple_bm_chain(p);
    const double rho = 0.5;
    for (int k = 0; k < 2; ++k)
        EXPECT_NEAR(spectral_diag(chain, k, kPi / 2),
                    chain.seed.r0[k] * (1 - rho) / (2 * kPi * (1 + rho)), 1e-14);
}

TEST(SpectralValues, SingleTermSeries) {
    const auto p = make_params(0.6, 1.5, 3);
    const auto chain = make_chain(p, random_seed(p, 2, false));
    const auto q = make_qcov(chain);
    for (int j = 0; j < 3; ++j)
        for (int r = 0; r <= j; ++r)
            EXPECT_NEAR(std::abs(spectral_sum(chain, j, r, 0.4, 0).value -
                                 q.C(j, r) * q.R[r] / (2 * kPi)),
                        0.0, 1e-15);
}

TEST(SpectralValues, DiagonalRealAtZero) {
    for_lattice([](const DsiParams<double>& p) {
        const auto chain = simple_bm_chain(p);
        for (int k = 0; k < p.T; ++k) {
            EXPECT_LE(std::abs(spectral_sum(chain, k, k, 0.0, 30).value.imag()), 1e-12);
            EXPECT_LE(std::abs(spectral_closed(chain, k, k, 1.3).imag()), 1e-12);
        }
    });
}

// =============================================================================
// Structure
// =============================================================================

TEST(SpectralStructure, Hermitian) {
    const auto grid = make_frequency_grid<double>(64);
    for (std::uint64_t s = 0; s < 3; ++s)
        for_lattice([&](const DsiParams<double>& p) {
            const auto chain = make_chain(p, random_seed(p, s));
            if (std::abs(convergence_ratio(chain)) >= 1) return;
            EXPECT_LE(max_hermitian_defect(spectral_matrix(chain, grid, SpectralMethod::closed)),
                      1e-12);
            EXPECT_LE(max_hermitian_defect(spectral_matrix(chain, grid, SpectralMethod::sum)),
                      1e-12);
        });
}

TEST(SpectralStructure, SeriesMatchesClosed) {
    const auto grid = make_frequency_grid<double>(64);
    for (std::uint64_t s = 0; s < 3; ++s)
        for_lattice([&](const DsiParams<double>& p) {
            const auto chain = s == 0 ? simple_bm_chain(p) : make_chain(p, random_seed(p, s));
            const double rho = convergence_ratio(chain);
            if (std::abs(rho) >= 1) return;
            const long S = auto_truncation(rho);
            for (double w : grid.omegas) {
                double bound = 0;
                const auto sum = spectral_sum_matrix(chain, w, S, &bound);
                for (int j = 0; j < p.T; ++j)
                    for (int r = 0; r < p.T; ++r)
                        EXPECT_LE(std::abs(sum(j, r) - spectral_closed(chain, j, r, w)),
                                  std::max(1e-9, 2 * bound));
            }
        });
}

TEST(SpectralStructure, DiagonalPositiveAndMatchesClosed) {
    const auto grid = make_frequency_grid<double>(64);
    for (std::uint64_t s = 0; s < 3; ++s)
        for_lattice([&](const DsiParams<double>& p) {
            const auto chain = make_chain(p, random_seed(p, s));
            if (std::abs(convergence_ratio(chain)) >= 1) return;
            for (double w : grid.omegas)
                for (int k = 0; k < p.T; ++k) {
                    EXPECT_GT(spectral_diag(chain, k, w), 0.0);
                    EXPECT_NEAR(spectral_diag(chain, k, w),
                                spectral_closed(chain, k, k, w).real(), 1e-12);
                }
        });
}

TEST(SpectralStructure, ExampleMatchesGeneral) {
    const auto grid = make_frequency_grid<double>(64);
    for_lattice([&](const DsiParams<double>& p) {
        const auto chain = simple_bm_chain(p);
        for (double w : grid.omegas)
            for (int j = 0; j < p.T; ++j)
                for (int r = 0; r < p.T; ++r) {
                    EXPECT_LE(std::abs(simple_bm_spectral(p, j, r, w) -
                                       spectral_closed(chain, j, r, w)),
                              1e-12);
                    EXPECT_LE(std::abs(simple_bm_spectral_two_term(p, j, r, w) -
                                       spectral_two_term(chain, j, r, w)),
                              1e-12);
                }
    });
}

TEST(SpectralStructure, LagInversionByQuadrature) {
    // (1/n) sum_m d(omega_m) e^{i omega_m T s} 2 pi recovers l^{-Hs} Q(l^s).
    const int n = 256;
    const auto grid = make_frequency_grid<double>(n);
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const auto p = make_params(0.7, 2.0, 3);
        const auto chain = seed == 0 ? simple_bm_chain(p) : make_chain(p, random_seed(p, seed));
        const auto q = make_qcov(chain);
        for (long s = -2; s <= 2; ++s) {
            CMat<double> acc = CMat<double>::Zero(3, 3);
            for (double w : grid.omegas) {
                CMat<double> d(3, 3);
                for (int j = 0; j < 3; ++j)
                    for (int r = 0; r < 3; ++r) d(j, r) = spectral_closed(chain, j, r, w);
                acc += d * std::polar(1.0, w * 3.0 * double(s));
            }
            acc *= 2 * kPi / n;
            const Mat<double> want = std::pow(p.scale(), -p.H * double(s)) * q_cov(q, 0, s);
            EXPECT_LE((acc - want.cast<std::complex<double>>()).cwiseAbs().maxCoeff(), 1e-6)
                << "s=" << s;
        }
    }
}

// =============================================================================
// Closed-form pieces
// =============================================================================

TEST(SecondTerm, TwoFormsAgree) {
    const auto grid = make_frequency_grid<double>(64);
    for (std::uint64_t s = 0; s < 3; ++s)
        for_lattice([&](const DsiParams<double>& p) {
            const auto chain = make_chain(p, random_seed(p, s));
            if (std::abs(convergence_ratio(chain)) >= 1) return;
            for (double w : grid.omegas)
                for (int j = 0; j < p.T; ++j)
                    for (int r = 0; r < p.T; ++r) {
                        const auto t = closed_form_terms(chain, j, r, w);
                        EXPECT_LE(std::abs(t.second_ratio - t.second_series),
                                  1e-12 * std::max(1.0, std::abs(t.second_series)));
                    }
        });
}

TEST(SecondTerm, TwoTermFormAntiHermitianPart) {
    // Taking Q(l^0) = C R in every entry leaves d_jr - conj(d_rj) = (a_jr - a_rj) / 2pi.
    const auto p = make_params(0.6, 2.0, 3);
    const auto chain = make_chain(p, random_seed(p, 4));
    const auto q = make_qcov(chain);
    for (double w : {0.0, 0.7, 2.9})
        for (int j = 0; j < 3; ++j)
            for (int r = 0; r < 3; ++r) {
                const auto defect =
                    spectral_two_term(chain, j, r, w) - std::conj(spectral_two_term(chain, r, j, w));
                const double want = (q.C(j, r) * q.R[r] - q.C(r, j) * q.R[j]) / (2 * kPi);
                EXPECT_NEAR(std::abs(defect - want), 0.0, 1e-13);
            }
}

TEST(SecondTerm, LagZeroCorrectionOnlyAboveDiagonal) {
    const auto p = make_params(0.6, 2.0, 3);
    const auto chain = make_chain(p, random_seed(p, 4));
    for (int j = 0; j < 3; ++j)
        for (int r = 0; r <= j; ++r)
            EXPECT_EQ(closed_form_terms(chain, j, r, 0.3).lag_zero, 0.0);
}

// =============================================================================
// Errors
// =============================================================================

TEST(SpectralErrors, DivergentSeries) {
    const auto p = make_params(1.0, 2.0, 1);
    CovarianceSeed<double> seed{Vec<double>(1), Vec<double>(1)};
    seed.r0 << 1.0;
    seed.r1 << 2.0; // perfect correlation, rho = 1
    const auto chain = make_chain(p, seed);
    EXPECT_THROW(spectral_closed(chain, 0, 0, 0.5), ConvergenceError);
    EXPECT_THROW(spectral_sum(chain, 0, 0, 0.5, 10), ConvergenceError);
    EXPECT_THROW(spectral_diag(chain, 0, 0.5), ConvergenceError);
    EXPECT_THROW(auto_truncation(1.0), ConvergenceError);
}

TEST(SpectralErrors, NearPole) {
    const auto p = make_params(1.0, 2.0, 1);
    CovarianceSeed<double> seed{Vec<double>(1), Vec<double>(1)};
    seed.r0 << 1.0;
    seed.r1 << 2.0 * (1.0 - std::ldexp(1.0, -50));
    const auto chain = make_chain(p, seed);
    EXPECT_THROW(spectral_closed(chain, 0, 0, 0.0), PoleError);
}

TEST(SpectralErrors, IndexRange) {
    const auto chain = simple_bm_chain(make_params(0.5, 2.0, 2));
    EXPECT_THROW(spectral_closed(chain, 2, 0, 0.0), DomainError);
    EXPECT_THROW(make_frequency_grid<double>(0), DomainError);
}

TEST(Truncation, AutoChoice) {
    EXPECT_EQ(auto_truncation(0.5), 40);
    EXPECT_EQ(auto_truncation(0.0), 1);
    EXPECT_LE(std::pow(0.9, auto_truncation(0.9)), 1e-12);
}

// =============================================================================
// Periodically correlated pipeline
// =============================================================================

namespace {

// Full PC covariance table from the min-formula oracle, shifted by whole
// periods so both times sit at or after t = 1.
double oracle_pc_cov(const DsiParams<double>& p, long n, long tau) {
    long m = n;
    while (m + tau < 0) m += p.T;
    return std::pow(p.alpha, -double(2 * m + tau) * p.H) *
           simple_bm_cov(std::pow(p.alpha, m + tau), std::pow(p.alpha, m), p.H, p.scale());
}

} // namespace

TEST(Gladyshev, SinglePeriodIsIdentity) {
    const auto p = make_params(0.75, 2.0, 1);
    const auto chain = simple_bm_chain(p);
    const auto b = make_bk_table(chain, 4);
    for (long tau = -4; tau <= 4; ++tau)
        EXPECT_NEAR(std::abs(b(0, tau) - pc_counterpart_cov(chain, 0, tau)), 0.0, 1e-15);
}

TEST(Gladyshev, ConstantInN) {
    Vec<double> r(4);
    r.setConstant(2.5);
    EXPECT_NEAR(std::abs(bk_from_pc_cov<double>(r, 0) - 2.5), 0.0, 1e-15);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(bk_from_pc_cov<double>(r, k)), 0.0, 1e-15);
}

TEST(Gladyshev, RoundTrip) {
    for_lattice([](const DsiParams<double>& p) {
        const auto chain = simple_bm_chain(p);
        const auto b = make_bk_table(chain, 3L * p.T);
        for (long n = 0; n < 2 * p.T; ++n)
            for (long tau = -3L * p.T; tau <= 3L * p.T; ++tau) {
                const double ref = pc_counterpart_cov(chain, n, tau);
                EXPECT_LE(std::abs(reconstruct_pc_cov(b, n, tau) - ref),
                          1e-12 * std::max(1.0, std::abs(ref)));
                if (n + tau >= 0) {
                    EXPECT_LE(dtsim::testing::scaled(dsi_cov_from_spectra(chain, n, tau, b),
                                                     dtsim_cov(chain, n, tau)),
                              1e-10);
                }
            }
    });
}

TEST(Gladyshev, OriginValueAndScaleStep) {
    const auto p = make_params(0.6, 1.5, 2);
    const auto seed = random_seed(p, 3);
    const auto chain = make_chain(p, seed);
    const auto b = make_bk_table(chain, 2);
    EXPECT_NEAR(dsi_cov_from_spectra(chain, 0, 0, b), seed.r0[0], 1e-13);
    EXPECT_NEAR(dsi_cov_from_spectra(chain, 3, 1, b),
                std::pow(p.alpha, 2 * p.T * p.H) * dsi_cov_from_spectra(chain, 1, 1, b), 1e-12);
}

TEST(Gladyshev, WhiteSpectrum) {
    const auto b = make_bk_table<double>(
        [](long n, long tau) { return tau == 0 ? (n == 0 ? 3.0 : 1.0) : 0.0; }, 2, 5, 0.0);
    for (double w : {0.0, 1.0, 4.0}) {
        EXPECT_NEAR(std::abs(fk_from_bk(b, 0, w, 5).value - 2.0 / (2 * kPi)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(fk_from_bk(b, 1, w, 5).value - 1.0 / (2 * kPi)), 0.0, 1e-15);
    }
}

TEST(Gladyshev, PeriodicExtensions) {
    const auto p = make_params(0.75, 2.0, 2);
    const auto b = make_bk_table(simple_bm_chain(p), 40);
    for (double w : {0.3, 2.0}) {
        EXPECT_NEAR(std::abs(fk_from_bk(b, 0, w, 40).value - fk_from_bk(b, 2, w, 40).value), 0.0,
                    1e-15);
        EXPECT_NEAR(std::abs(fk_from_bk(b, 1, w, 40).value - fk_from_bk(b, -1, w, 40).value), 0.0,
                    1e-15);
        EXPECT_NEAR(std::abs(fk_from_bk(b, 1, w, 40).value -
                             fk_from_bk(b, 1, w + 2 * kPi, 40).value),
                    0.0, 1e-12);
    }
    EXPECT_THROW(fk_from_bk(b, 0, 0.0, 41), IndexError);
}

TEST(Gladyshev, QuadratureRecoversLagZero) {
    const auto p = make_params(0.75, 2.0, 2);
    const auto b = make_bk_table(simple_bm_chain(p), 40);
    const int n = 256;
    const auto grid = make_frequency_grid<double>(n);
    for (int k = 0; k < 2; ++k) {
        std::complex<double> acc = 0;
        for (double w : grid.omegas) acc += fk_from_bk(b, k, w, 40).value;
        acc *= 2 * kPi / n;
        EXPECT_NEAR(std::abs(acc - b(k, 0)), 0.0, 1e-6);
    }
}

TEST(Gladyshev, FjkMapping) {
    const auto p = make_params(0.75, 2.0, 1);
    const auto b = make_bk_table(simple_bm_chain(p), 30);
    const auto f = pc_spectral_matrix(b, 0.8, 30);
    EXPECT_NEAR(std::abs(f(0, 0) - fk_from_bk(b, 0, 0.8, 30).value), 0.0, 1e-15);

    const auto b2 = make_bk_table(simple_bm_chain(make_params(0.75, 2.0, 2)), 30);
    const auto fk = [&](long k, double w) { return fk_from_bk(b2, k, w, 30).value; };
    EXPECT_NEAR(std::abs(fjk(fk, 2, 0, 0, 1.2) - fk(0, 0.6) / 2.0), 0.0, 1e-15);
}

TEST(Gladyshev, MatrixHermitian) {
    for_lattice([](const DsiParams<double>& p) {
        const long S = 3L * p.T;
        const auto b = make_bk_table(make_chain(p, random_seed(p, 7)), S);
        for (double w : {0.0, 0.9, 3.1, 5.5}) {
            const auto f = pc_spectral_matrix(b, w, S);
            EXPECT_LE((f - f.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        }
    });
}

TEST(Gladyshev, ChainPipelineMatchesFullTable) {
    for_lattice([](const DsiParams<double>& p) {
        const long S = 6L * p.T;
        const auto chain = simple_bm_chain(p);
        const auto from_chain = make_bk_table(chain, S);
        const auto from_table = make_bk_table<double>(
            [&](long n, long tau) { return oracle_pc_cov(p, n, tau); }, p.T, S,
            std::pow(p.alpha, -0.5 * p.T));
        for (double w : {0.0, 1.1, 4.0}) {
            const auto a = pc_spectral_matrix(from_chain, w, S);
            const auto c = pc_spectral_matrix(from_table, w, S);
            const double bound = fk_from_bk(from_chain, 0, w, S).tail_bound;
            EXPECT_LE((a - c).cwiseAbs().maxCoeff(), std::max(1e-12, bound));
        }
    });
}
