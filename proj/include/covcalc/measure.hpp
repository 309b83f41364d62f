#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "covcalc/grid.hpp"
#include "covcalc/kernels.hpp"

namespace covcalc {

/**
 * Discrete planar increment measure of a covariance kernel on a uniform
 * grid: mass(i,j) is the second difference of R over the cell
 * ]t_i,t_{i+1}] x ]t_j,t_{j+1}]. Cell masses are exact rectangle measures,
 * so refining the grid redistributes but never changes block totals.
 */
struct DiscreteMeasure {
    Grid grid;
    KernelSpec kernel;
    Eigen::MatrixXd mass; // n x n, symmetric

    double total() const;     // sum of all cell masses = R(T,T)
    double abs_total() const; // sum of |mass|
};

// Builds the cell-mass matrix. Dense construction is capped at n <= 4096
// (config_error beyond that).
DiscreteMeasure build_measure(const KernelSpec& kernel, const Grid& grid);

// Total variation of the discrete measure (= abs_total()).
double planar_variation(const DiscreteMeasure& m);

// Jordan decomposition into positive and negative parts.
std::pair<DiscreteMeasure, DiscreteMeasure> jordan_decompose(const DiscreteMeasure& m);

// Diagonal energy E_n(t_k) = sum_{i<k} mass(i,i), for k = 0..n.
std::vector<double> energy_curve(const DiscreteMeasure& m);

// Marginal variation per column cell: nu_j = sum_i |mass(i,j)|.
std::vector<double> marginal_variation(const DiscreteMeasure& m);

// Strict lower-triangle mass sum_{i<j<k} mass(i,j).
double triangle_mass(const DiscreteMeasure& m, std::size_t k);

// Block mass over cells [lo,hi) x [lo,hi).
double square_mass(const DiscreteMeasure& m, std::size_t lo, std::size_t hi);

// Largest |E_n(t_k) + 2*triangle_mass(k) - R(t_k,t_k)| over k; exact in
// theory, so the return is a pure rounding diagnostic.
double gamma_identity_gap(const DiscreteMeasure& m);

/**
 * Diagonal scan of the planar quadratic variation,
 *   (1/eps) \int_0^T (second difference of R over ]t,t+eps]^2)^2 dt,
 * by midpoint quadrature with `cells` subdivisions; the kernel (not the
 * cell-mass matrix) supplies exact rectangle masses at any offset. R is
 * prolongated by continuity past T.
 */
double planar_quadratic_variation(const KernelSpec& kernel, double eps, double T,
                                  std::size_t cells = 4096);

struct ScalingFit {
    double exponent;          // mean slope of log mass(]s,s+d]^2) against log d
    std::size_t starts_used;
    std::size_t starts_skipped; // starts dropped because a square mass was <= 0
};

// Dyadic square-scaling fit over d in {T/8, ..., T/256} (clipped to the
// grid). Throws numerical_error when no start yields an all-positive scan.
ScalingFit rectangle_scaling_exponent(const DiscreteMeasure& m);

// CSV dump: header "i,j,mass", one row per nonzero cell, 17 significant digits.
void write_measure_csv(const DiscreteMeasure& m, std::ostream& os);

} // namespace covcalc
