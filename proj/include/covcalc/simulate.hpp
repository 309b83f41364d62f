#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "covcalc/grid.hpp"
#include "covcalc/kernels.hpp"
#include "covcalc/measure.hpp"

namespace covcalc {

/**
 * Cholesky factor of the increment Gram matrix (the cell-mass matrix of the
 * covariance measure). When plain LLT fails, a uniform diagonal jitter is
 * applied under a strict budget; beyond it, numerical_error is raised with
 * an eigenvalue diagnostic.
 */
struct GramFactor {
    Eigen::MatrixXd L; // lower triangular, n x n
    double jitter = 0.0;
    double min_eig = 0.0; // populated only when a repair was attempted
};

GramFactor gram_factor(const DiscreteMeasure& m);

// Row-major so a single path is contiguous in memory.
using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * Sampled Gaussian paths on a grid: paths(m, i) = X^{(m)}_{t_i}, column 0
 * identically zero. Path m is a pure function of (seed, m), so ensembles are
 * reproducible for any thread count and any M prefix.
 */
struct PathEnsemble {
    Grid grid;
    std::string kernel_id;
    std::uint64_t seed = 0;
    double jitter = 0.0;
    PathMatrix paths; // M x (n+1)

    std::size_t M() const { return static_cast<std::size_t>(paths.rows()); }
    double x(std::size_t m, std::size_t i) const {
        return paths(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i));
    }
};

// Draws M paths with correlated increments L * z, z iid standard normal.
PathEnsemble sample_paths(const GramFactor& factor, const Grid& grid,
                          const std::string& kernel_id, std::size_t M,
                          std::uint64_t seed, int threads = 0);

// Time-changed Brownian motion: independent increments of variance
// lambda(t_{i+1}) - lambda(t_i). A lambda that decreases anywhere on the
// grid raises std::domain_error.
PathEnsemble martingale_paths(const std::function<double(double)>& lambda, const Grid& grid,
                              std::size_t M, std::uint64_t seed, int threads = 0);

// Sum of an independent Brownian ensemble and an fbm(H) ensemble, with
// sub-seeds derived from `seed`.
PathEnsemble mixed_fbm_paths(double H, const Grid& grid, std::size_t M,
                             std::uint64_t seed, int threads = 0);

// Family dispatcher: diagonal fast paths for bm/martingale, the mixed
// sampler for mixed_fbm, dense Cholesky for everything else.
PathEnsemble sample_gaussian(const KernelSpec& kernel, const Grid& grid, std::size_t M,
                             std::uint64_t seed, int threads = 0);

// Binary ensemble format: "CVC1" magic, u32 version, u64 n, u64 M, u64 seed,
// then M rows of n+1 little-endian doubles.
void write_paths_binary(const PathEnsemble& e, std::ostream& os);
PathEnsemble read_paths_binary(std::istream& is);

/**
 * Ensemble sanity diagnostics on a probe grid: worst mean and covariance
 * deviations in units of 4 standard errors (<= 1 passes), plus a
 * Jarque-Bera-style Gaussianity statistic at the horizon.
 */
struct MomentDiagnostics {
    double max_mean_excess;
    double max_cov_excess;
    double jb_stat;
};

MomentDiagnostics moment_check(const PathEnsemble& e, const KernelSpec& kernel,
                               std::size_t probes = 5);

} // namespace covcalc
