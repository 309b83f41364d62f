#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "covcalc/grid.hpp"
#include "covcalc/measure.hpp"
#include "covcalc/numeric.hpp"
#include "covcalc/simulate.hpp"

namespace covcalc {

/**
 * Deterministic step function sum_i coeffs[i] 1_{]t_i, t_{i+1}]} on the grid
 * cells. All deterministic integrands pass through this class; smooth
 * integrands enter only via their grid sampling.
 */
struct StepFunction {
    std::vector<double> coeffs; // one per cell
};

// 1_{[0, t_k]} as a step function (first k cells).
StepFunction indicator_step(const Grid& grid, std::size_t k);

// Step function of sum_p v_p 1_{(a_p, b_p]} restricted to whole grid cells.
StepFunction step_from_intervals(const Grid& grid,
                                 const std::vector<std::array<double, 3>>& intervals);

// <phi, psi>_H = sum_{ij} phi_i psi_j mass(i,j). Bilinear and symmetric.
double h_inner(const DiscreteMeasure& m, const StepFunction& phi, const StepFunction& psi);

// |H|-norm: sqrt(sum_{ij} |phi_i||phi_j||mass(i,j)|).
double h_abs_norm(const DiscreteMeasure& m, const StepFunction& phi);

// L2 norm against the marginal variation measure nu.
double l2_nu_norm(const DiscreteMeasure& m, const StepFunction& phi);

// Plain Lebesgue L2 norm on [0,T] (diagnostic ratios only).
double l2_leb_norm(const Grid& grid, const StepFunction& phi);

/**
 * Smooth functions R^arity -> R in product form: sums of
 * coeff * prod_k atom_k(y_{coord_k}), with atoms drawn from
 * {1, a y + b, sin(a y + b), cos(a y + b), tanh(a y + b), exp(-(a y)^2/2)}.
 * Values, gradients, Hessians and structural partial derivatives are all
 * exact, which is what makes the grid identities testable at 1e-10.
 */
struct SmoothAtom {
    enum class Kind { one, lin, sinw, cosw, tanhw, gauss };
    Kind kind = Kind::one;
    double a = 1.0, b = 0.0;

    double val(double y) const;
    double d1(double y) const;
    double d2(double y) const;
};

struct SmoothTerm {
    double coeff = 1.0;
    std::vector<std::pair<int, SmoothAtom>> factors; // (coordinate, atom)
};

struct SmoothFn {
    int arity = 0;
    std::vector<SmoothTerm> terms;

    double value(std::span<const double> y) const;
    std::vector<double> gradient(std::span<const double> y) const;
    Eigen::MatrixXd hessian(std::span<const double> y) const;

    // Structural d/dy_j, again in product form.
    SmoothFn partial(int j) const;

    static SmoothFn constant(int arity, double c);
    static SmoothFn coordinate(int arity, int j); // y_j
    static SmoothFn atom(int arity, int j, SmoothAtom a);
    static SmoothFn product(const SmoothFn& f, const SmoothFn& g); // on concatenated coords
};

/**
 * Cylindrical functional F = f(W(phi_1), ..., W(phi_k)) with exact
 * derivatives through SmoothFn.
 */
struct CylindricalFunctional {
    std::vector<StepFunction> phis;
    SmoothFn f;
};

struct ElementaryTerm {
    StepFunction psi;
    CylindricalFunctional G;
};

// u_s = sum_l G_l(omega) psi_l(s).
struct ElementaryProcess {
    std::vector<ElementaryTerm> terms;
};

// Product functional (F*G)(omega) = F(omega) G(omega), still cylindrical.
CylindricalFunctional cyl_product(const CylindricalFunctional& F, const CylindricalFunctional& G);

// Scales every coefficient process of u by w.
ElementaryProcess scale_process(const ElementaryProcess& u, double w);

// Wiener sum sum_{i<upto} phi_i (X_{t_{i+1}} - X_{t_i}) along path m.
double wiener_integral(const PathEnsemble& e, std::size_t m, const StepFunction& phi,
                       std::size_t upto);

// F(omega) and the realized step function u(omega).
double eval_cyl(const PathEnsemble& e, std::size_t m, const CylindricalFunctional& F);
StepFunction realize_process(const PathEnsemble& e, std::size_t m, const ElementaryProcess& u);

// Malliavin derivative DF = sum_j d_j f(Y) phi_j as a step function.
StepFunction malliavin_derivative(const PathEnsemble& e, std::size_t m,
                                  const CylindricalFunctional& F);

// ||phi||_H^2 split into diagonal plus twice the strict lower triangle;
// returns the (rounding-level) gap against the full double sum.
double variance_split_check(const DiscreteMeasure& m, const StepFunction& phi);

/**
 * Regularized path integrals at eps = r*h (r a positive integer): the
 * forward sum (1/r) sum_{i<k} Y_{t_i}(X_{t_i+eps}-X_{t_i}), its backward
 * mirror, their symmetric mean, and the quadratic sum C_eps. The path is
 * prolongated by continuity on both sides of [0,T].
 */
double forward_integral(const PathEnsemble& e, std::size_t m, std::span<const double> y,
                        double eps, std::size_t upto);
double backward_integral(const PathEnsemble& e, std::size_t m, std::span<const double> y,
                         double eps, std::size_t upto);
double symmetric_integral(const PathEnsemble& e, std::size_t m, std::span<const double> y,
                          double eps, std::size_t upto);
double covariation(const PathEnsemble& e, std::size_t m, double eps, std::size_t upto);

/**
 * Skorohod integral of an elementary process along one path:
 *   delta(u) = sum_l [ g_l(Y) W(psi_l) - sum_j d_j g_l(Y) <phi_{lj}, psi_l>_H ].
 * SkorohodEval caches the path-independent inner products for ensemble loops.
 */
struct SkorohodEval {
    const ElementaryProcess* u = nullptr;
    std::vector<std::vector<double>> inner; // [l][j] = <phi_lj, psi_l>_H
};

SkorohodEval prepare_skorohod(const DiscreteMeasure& m, const ElementaryProcess& u);
double skorohod_eval(const PathEnsemble& e, std::size_t m, const SkorohodEval& se);
double skorohod_cylindrical(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                            const ElementaryProcess& u);

struct DualityResult {
    MonteCarloEstimate lhs;  // E[ F delta(u) ]
    MonteCarloEstimate rhs;  // E[ <DF, u>_H ]
    MonteCarloEstimate diff; // per-path difference, the operative statistic
};

DualityResult duality_check(const PathEnsemble& e, const DiscreteMeasure& m,
                            const CylindricalFunctional& F, const ElementaryProcess& u,
                            int threads = 0);

// |delta(F u) - (F delta(u) - <DF, u(omega)>_H)| along one path.
double product_rule_gap(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                        const CylindricalFunctional& F, const ElementaryProcess& u);

struct SkorohodVarianceResult {
    MonteCarloEstimate second_moment; // E[ delta(u)^2 ]
    MonteCarloEstimate norm_part;     // E[ ||u||_H^2 ]
    MonteCarloEstimate trace_part;    // E[ <Du, (Du)*>_{HxH} ]
    MonteCarloEstimate diff;          // per-path lhs - rhs
};

// Second-moment identity E delta(u)^2 = E||u||_H^2 + E<Du,(Du)*>.
SkorohodVarianceResult skorohod_variance_check(const PathEnsemble& e, const DiscreteMeasure& m,
                                               const ElementaryProcess& u, int threads = 0);

/**
 * Commutation identity D_c delta(u) = u_c + delta(D_c u), evaluated exactly
 * per path at the given probe cells. The left side differentiates the
 * Skorohod formula (Hessian path); the right side builds D_c u structurally
 * and integrates it. Returns the worst absolute gap.
 */
double commutation_gap(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                       const ElementaryProcess& u, std::span<const std::size_t> probe_cells);

// Linearity of delta over a weighted finite family: per-path gap between
// delta(sum w_x u_x) and sum w_x delta(u_x).
double fubini_gap(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                  const std::vector<std::pair<double, ElementaryProcess>>& family);

/**
 * Skorohod integral of f'(X) over [0, t_k] via the forward sum minus the
 * measure trace correction. The diagonal residue subtracts the atomic
 * (closed-form) energy increment, which is the bracket part already
 * accounted for by the Ito gamma term; kernels with no closed-form energy
 * (unbounded planar variation) raise std::domain_error.
 */
struct TraceWeights {
    std::vector<double> col_below;  // [j] = sum_{i<j} mass(i,j)
    std::vector<double> diag_resid; // [i] = mass(i,i) - (E_cf(t_{i+1}) - E_cf(t_i))
};

TraceWeights prepare_trace(const DiscreteMeasure& m);
double skorohod_via_trace(const PathEnsemble& e, std::size_t m, const TraceWeights& tw,
                          const std::function<double(double)>& fprime,
                          const std::function<double(double)>& fsecond, std::size_t upto);

} // namespace covcalc
