#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "covcalc/calculus.hpp"
#include "covcalc/grid.hpp"
#include "covcalc/kernels.hpp"
#include "covcalc/simulate.hpp"

namespace covcalc {

struct CheckRecord {
    std::string name;
    std::string tag; // stable identity of the verified relation
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct Report {
    std::string suite;
    std::string kernel_id;
    nlohmann::ordered_json params;
    std::vector<CheckRecord> checks;

    bool all_pass() const;
    nlohmann::ordered_json to_json() const;
};

// Probabilists' Hermite polynomial, monic convention: H_{n+1} = x H_n - n H_{n-1},
// so E[H_n(Z) H_m(Z)] = n! for n = m and 0 otherwise.
double hermite(unsigned n, double x);

// I_n(1_{[0,s]}^{x n}) = R(s,s)^{n/2} H_n(X_s / sqrt(R(s,s))); 0 when s = 0 and n >= 1.
double multiple_integral_indicator(const PathEnsemble& e, std::size_t m, unsigned order,
                                   std::size_t grid_index, const KernelSpec& kernel);

struct ChaosConfig {
    unsigned N = 8;                                  // truncation order
    std::vector<std::pair<double, double>> points;   // (t, x) evaluation points
    double width = 0.0;                              // occupation width; 0 = default policy
};

// Deterministic n = 0 summand: \int_0^t p_{gamma(s)}(x) ds by adaptive
// midpoint refinement after the singularity-tempering substitution s = u^2.
double chaos_n0_term(const KernelSpec& kernel, double t, double x, double tol = 1e-8);

/**
 * Precomputed chaos-series weights for one evaluation point (t_k, x): the
 * summand n along a path is (h/n!) * sum_{i>=1, i<k} p_{gamma_i}(x)
 * H_n(x/sqrt(gamma_i)) H_n(X_i/sqrt(gamma_i)); the first cell is excluded
 * because gamma(0) = 0, and the n = 0 summand uses refined quadrature.
 */
struct ChaosEvaluator {
    Grid grid;
    std::size_t k;
    double x;
    unsigned N;
    double q0;
    std::vector<std::vector<double>> w; // [n-1][i] for n = 1..N
    std::vector<double> inv_sd;         // 1/sqrt(gamma(t_i))

    ChaosEvaluator(const KernelSpec& kernel, const Grid& grid, std::size_t t_index, double x,
                   unsigned N);
    std::vector<double> summands(const PathEnsemble& e, std::size_t m) const;
    double local_time(const PathEnsemble& e, std::size_t m) const;
};

// Mollified occupation density (1/(2 width)) h #{grid i <= k : |X_i - x| < width}.
double occupation_oracle(const PathEnsemble& e, std::size_t m, std::size_t t_index, double x,
                         double width);

// Default mollifier width: the root of E[occupation] = E[local time], which
// removes the deterministic mollification bias of the window estimator; falls
// back to max(sqrt(h)/4, 0.025 sqrt(gamma(t))) when no root brackets.
double default_occupation_width(const Grid& grid, const KernelSpec& kernel, double t, double x);

// Ensemble quadratic-variation scan against the closed-form energy (or the
// grid energy curve when no closed form exists).
Report qv_report(const KernelSpec& kernel, const Grid& grid, std::size_t M, std::uint64_t seed,
                 const std::vector<double>& eps_list, int threads = 0);

struct ItoCase {
    std::string id;
    std::function<double(double)> f, fprime, fsecond;
    bool bounded_fsecond = true;
};

// Named 1-d smooth test functions: xsq2, sin, cos, tanh, quartic (quartic has
// unbounded f'' and is rejected by ito_residual).
ItoCase ito_library(const std::string& id);

struct ItoReport {
    std::string kernel_id;
    std::string f_id;
    std::vector<double> probes;
    std::vector<double> residual_mean; // per probe
    std::vector<double> residual_l2;   // per probe
    double rms_l2 = 0.0;               // aggregate over probes
    std::size_t n = 0;
    std::size_t M = 0;
    std::string eps_policy;
};

/**
 * Pathwise change-of-variable residual
 *   f(X_t) - f(0) - delta-integral(f'(X)) - (1/2) sum_i f''(X_{t_i})
 *   (gamma(t_{i+1}) - gamma(t_i))
 * with the delta-integral from skorohod_via_trace at eps = h.
 */
ItoReport ito_residual(const KernelSpec& kernel, const ItoCase& f, const Grid& grid,
                       std::size_t M, std::uint64_t seed, const std::vector<double>& probes,
                       int threads = 0);

// Exact grid identity gamma(t_k) = E_n(t_k) + 2 mu(triangle).
Report gamma_decomposition_report(const KernelSpec& kernel, const Grid& grid);

// Hard two-sided increment bounds 2^{-K} |t-s|^{2HK} <= d^2 <= 2^{1-K} |t-s|^{2HK}
// over every grid pair (bifbm kernels only).
Report quasi_helix_report(const KernelSpec& kernel, const Grid& grid);

// Ito suite: residual scan over n in {64, 256, 1024} for the kernel's
// default smooth cases, with trend checks.
Report ito_suite(const KernelSpec& kernel, double T, std::size_t M, std::uint64_t seed,
                 int threads = 0);

// Chaos suite: isometry/orthogonality probes, local time against the
// occupation oracle, n = 0 closed form, partial-sum stability, symmetry.
Report chaos_report(const KernelSpec& kernel, const Grid& grid, std::size_t M,
                    std::uint64_t seed, const ChaosConfig& cfg, int threads = 0);

// Runs one named suite ("qv", "gamma", "ito", "chaos", "quasihelix") or
// every suite applicable to the kernel ("all").
std::vector<Report> run_suites(const std::string& suite, const KernelSpec& kernel,
                               const Grid& grid, std::size_t M, std::uint64_t seed,
                               int threads = 0);

} // namespace covcalc
