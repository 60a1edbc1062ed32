#include "dtsim/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include "dtsim/seed_io.hpp"

namespace dtsim {

namespace {

// Standard normals from a 64-bit Mersenne Twister. std::normal_distribution
// is not specified bit-for-bit, so the transform is spelled out here.
class NormalSource {
public:
    NormalSource(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

void check_counts(int k_max, int n_paths) {
    if (k_max < 0) throw DomainError("k_max must be nonnegative");
    if (n_paths < 1) throw DomainError("n_paths must be positive");
}

} // namespace

Ensemble simulate_brownian(const DsiParams<double>& params, int k_max,
                           int n_paths, std::uint64_t seed, unsigned threads) {
    check_counts(k_max, n_paths);
    const auto grid = make_grid(params, k_max);
    Vec<double> step_sd(k_max + 1);
    step_sd[0] = 1.0; // Var B(alpha^0) = 1
    for (int k = 1; k <= k_max; ++k)
        step_sd[k] = std::sqrt(grid.times[k] - grid.times[k - 1]);

    Ensemble e{params, k_max, n_paths, seed, RowMat(n_paths, k_max + 1)};
    const int n_batches = (n_paths + kBatchPaths - 1) / kBatchPaths;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int b = next++; b < n_batches; b = next++) {
            NormalSource normal(seed, static_cast<std::uint64_t>(b));
            const int first = b * kBatchPaths;
            const int last = std::min(n_paths, first + kBatchPaths);
            for (int i = first; i < last; ++i) {
                double level = 0.0;
                for (int k = 0; k <= k_max; ++k) {
                    level += step_sd[k] * normal();
                    e.paths(i, k) = level;
                }
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n_batches));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    return e;
}

Ensemble simulate_simple_bm(const DsiParams<double>& params, int k_max,
                            int n_paths, std::uint64_t seed, unsigned threads) {
    Ensemble e = simulate_brownian(params, k_max, n_paths, seed, threads);
    const double lambda = params.scale();
    for (int k = 0; k <= k_max; ++k) {
        const long n = floor_div(k, params.T) + 1;
        e.paths.col(k) *= std::pow(lambda, static_cast<double>(n) * params.h_prime());
    }
    return e;
}

CovEstimate empirical_grid_cov(const Ensemble& e, long a, long b) {
    if (a < 0 || b < 0 || a > e.k_max || b > e.k_max)
        throw IndexError("covariance indices outside the simulated grid 0.." +
                         std::to_string(e.k_max));
    const Vec<double> prod = e.paths.col(a).cwiseProduct(e.paths.col(b));
    const double mean = prod.mean();
    if (e.n_paths == 1) return {mean, 0.0, 1, true};
    const double var =
        (prod.array() - mean).square().sum() / static_cast<double>(e.n_paths - 1);
    return {mean, std::sqrt(var / e.n_paths), e.n_paths, false};
}

CovEstimate empirical_cov(const Ensemble& e, long n, long tau) {
    return empirical_grid_cov(e, n + tau, n);
}

CovEstimate embedding_empirical_cov(const Ensemble& e, int j, int k, long n,
                                    long tau) {
    const int T = e.params.T;
    if (j < 0 || j >= T || k < 0 || k >= T)
        throw IndexError("embedding component index out of range");
    return empirical_grid_cov(e, (n + tau) * T + j, n * T + k);
}

void write_ensemble_csv(std::ostream& out, const Ensemble& e) {
    const auto grid = make_grid(e.params, e.k_max);
    out << "path,k,t,value\n";
    for (int i = 0; i < e.n_paths; ++i)
        for (int k = 0; k <= e.k_max; ++k)
            out << i << ',' << k << ',' << format_real(grid.times[k]) << ','
                << format_real(e.paths(i, k)) << '\n';
}

} // namespace dtsim
