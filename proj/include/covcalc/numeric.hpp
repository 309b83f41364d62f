#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace covcalc {

/**
 * Deterministic pairwise (cascade) summation. Used for every ensemble
 * reduction so results do not depend on how work was split across threads:
 * workers fill per-item slots, the reduction itself is always sequential.
 */
double pairwise_sum(std::span<const double> x);

struct MonteCarloEstimate {
    double value;      // sample mean
    double std_error;  // unbiased sample std / sqrt(paths)
    std::size_t paths;
};

// Throws std::invalid_argument when fewer than 2 samples are given.
MonteCarloEstimate mc_from_samples(std::span<const double> samples);

// Gaussian density with variance `var` (var > 0 required).
double normal_pdf(double x, double var);
double normal_cdf(double x);

/**
 * Adaptive midpoint refinement of \int_a^b f with Richardson acceptance on
 * nested ratio-3 rules. Never evaluates f at the endpoints, which makes it
 * usable on integrable endpoint singularities; an internal evaluation budget
 * bounds the work when a singularity outruns the tolerance split, so tol is
 * a refinement target rather than a guarantee.
 */
double adaptive_midpoint(const std::function<double(double)>& f, double a, double b,
                         double tol, int max_depth = 48);

// Adaptive Simpson quadrature; used as an independent oracle in tests.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

} // namespace covcalc
