#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace covcalc {

enum class KernelFamily { bm, fbm, bifbm, martingale, mixed_fbm, stationary_inc };

enum class LambdaKind { identity, square };

/**
 * A Gaussian covariance kernel R(s,t) on [0,T]^2, identified by family and
 * parameters. Instances are validated value types; use parse() for user
 * input (canonical strings like "fbm:H=0.7" or "bifbm:H=0.75,K=0.6667").
 */
struct KernelSpec {
    KernelFamily family = KernelFamily::bm;
    double H = 0.5;                          // fbm / bifbm / mixed_fbm / stationary_inc
    double K = 1.0;                          // bifbm only
    LambdaKind lambda = LambdaKind::identity; // martingale time change

    // Throws std::invalid_argument when parameters are out of range.
    void validate() const;

    // Canonical string form; parse(id()) round-trips to an identical kernel.
    std::string id() const;

    // Parses a canonical kernel string. Unknown families, unknown keys and
    // out-of-range values raise config_error.
    static KernelSpec parse(std::string_view text);
};

// Covariance R(s,t); requires s,t >= 0.
double eval_covariance(const KernelSpec& k, double s, double t);

// gamma(t) = R(t,t) = Var(X_t).
double variance_curve(const KernelSpec& k, double t);

// Squared increment distance d^2(s,t) = Var(X_t - X_s).
double d_squared(const KernelSpec& k, double s, double t);

// Martingale time change lambda(t) for the given kind.
double lambda_value(LambdaKind kind, double t);

/**
 * Increment exponent 2HK of a bifbm kernel, snapped to the 2HK = 1 boundary
 * when within 1e-9. The boundary (e.g. H = 3/4, K = 2/3) is not exactly
 * representable in floating point, yet its measure is structurally different
 * from the 2HK > 1 case, so near-critical parameters are treated as critical.
 */
double bifbm_exponent(const KernelSpec& k);

/**
 * Density of the absolutely continuous off-diagonal part of the second
 * mixed derivative of R, where it exists:
 *   fbm (H>1/2):    H(2H-1)|t-s|^{2H-2}
 *   bifbm (2HK>=1): R1 part (always) + R2 part when 2HK>1
 *   mixed_fbm:      H(2H-1)|t-s|^{2H-2}
 *   bm/martingale:  0 (purely atomic on the diagonal)
 * Requires s != t and s,t > 0; fbm with H<1/2, bifbm with 2HK<1 and the
 * piecewise stationary-increment kernel (line atoms at |t-s|=1/2) raise
 * std::domain_error.
 */
double offdiag_density(const KernelSpec& k, double s, double t);

/**
 * Closed form of the diagonal (atomic) energy E(t) when one is known:
 *   bm t; martingale lambda(t); fbm H>1/2 -> 0, H=1/2 -> t;
 *   bifbm 2HK>1 -> 0, 2HK=1 -> 2^{1-K} t; mixed_fbm t; stationary_inc t.
 * Returns nullopt where the diagonal sums diverge (fbm H<1/2, bifbm 2HK<1).
 */
std::optional<double> energy_closed_form(const KernelSpec& k, double t);

/**
 * Decomposition of Q'' for stationary-increment kernels, where
 * R(s,t) = (Q(s)+Q(t)-Q(s-t))/2: point atoms (location, mass) plus the
 * absolutely continuous density of Q''. Supported for mixed_fbm and
 * stationary_inc; other families raise std::domain_error.
 */
struct QDecomposition {
    std::vector<std::pair<double, double>> atoms;
    std::function<double(double)> density;
    std::function<double(double)> q;
};

QDecomposition q_decomposition(const KernelSpec& k);

} // namespace covcalc
