#pragma once

// Seeded Monte Carlo ensembles of Brownian motion and simple Brownian motion
// on the geometric grid alpha^0, ..., alpha^k_max.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dtsim/core.hpp"

namespace dtsim {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n_paths x (k_max + 1) values at alpha^0..alpha^k_max. Identical inputs
/// give bit-identical paths, whatever the number of worker threads.
struct Ensemble {
    DsiParams<double> params;
    int k_max;
    int n_paths;
    std::uint64_t rng_seed;
    RowMat paths;
};

struct CovEstimate {
    double value;
    double std_error; ///< sample sd of the per-path products / sqrt(n_paths)
    int n_paths;
    bool degenerate;  ///< single path: std_error reported as 0
};

/// Paths per independently seeded batch.
inline constexpr int kBatchPaths = 4096;

/**
 * B(1) ~ N(0, 1) and independent increments B(alpha^k) - B(alpha^{k-1}) ~
 * N(0, alpha^k - alpha^{k-1}). Batch b draws from std::mt19937_64 seeded with
 * std::seed_seq{seed_lo, seed_hi, b}; normals by the Box-Muller transform.
 * `threads` = 0 uses the hardware concurrency.
 */
Ensemble simulate_brownian(const DsiParams<double>& params, int k_max,
                           int n_paths, std::uint64_t seed,
                           unsigned threads = 0);

/// X(alpha^k) = lambda^{n(H-1/2)} B(alpha^k), n = floor(k/T) + 1, driven by
/// the same Brownian paths simulate_brownian produces for this seed.
Ensemble simulate_simple_bm(const DsiParams<double>& params, int k_max,
                            int n_paths, std::uint64_t seed,
                            unsigned threads = 0);

/// Zero-mean estimate of E[X(alpha^{n+tau}) X(alpha^n)].
CovEstimate empirical_cov(const Ensemble& e, long n, long tau);

/// Zero-mean estimate of E[X(alpha^a) X(alpha^b)] for grid indices a, b.
CovEstimate empirical_grid_cov(const Ensemble& e, long a, long b);

/// Estimate of E[W^j(l^{n+tau}) W^k(l^n)] for the embedding
/// W^k(l^n) = X(alpha^{nT+k}).
CovEstimate embedding_empirical_cov(const Ensemble& e, int j, int k, long n,
                                    long tau);

/// CSV `path,k,t,value`, one row per path and grid index.
void write_ensemble_csv(std::ostream& out, const Ensemble& e);

} // namespace dtsim
