#include "covcalc/measure.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "covcalc/errors.hpp"
#include "covcalc/numeric.hpp"

namespace covcalc {

namespace {

double sum_rows(const Eigen::MatrixXd& a, bool absolute) {
    std::vector<double> rows(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        rows[static_cast<std::size_t>(i)] = absolute ? a.row(i).cwiseAbs().sum() : a.row(i).sum();
    return pairwise_sum(rows);
}

} // namespace

double DiscreteMeasure::total() const { return sum_rows(mass, false); }
double DiscreteMeasure::abs_total() const { return sum_rows(mass, true); }

DiscreteMeasure build_measure(const KernelSpec& kernel, const Grid& grid) {
    kernel.validate();
    if (grid.n > 4096)
        throw config_error("build_measure: dense construction capped at n <= 4096");
    const std::size_t n = grid.n;
    Eigen::MatrixXd mass(n, n);
    // Roll two covariance rows R(t_i, .) and R(t_{i+1}, .) across the grid;
    // each cell mass is the planar second difference of R.
    std::vector<double> prev(n + 1), next(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = eval_covariance(kernel, 0.0, grid.t(j));
    for (std::size_t i = 0; i < n; ++i) {
        const double ti1 = grid.t(i + 1);
        for (std::size_t j = 0; j <= n; ++j) next[j] = eval_covariance(kernel, ti1, grid.t(j));
        for (std::size_t j = 0; j < n; ++j)
            mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                next[j + 1] - next[j] - prev[j + 1] + prev[j];
        prev.swap(next);
    }
    return {grid, kernel, std::move(mass)};
}

double planar_variation(const DiscreteMeasure& m) { return m.abs_total(); }

std::pair<DiscreteMeasure, DiscreteMeasure> jordan_decompose(const DiscreteMeasure& m) {
    DiscreteMeasure pos{m.grid, m.kernel, m.mass.cwiseMax(0.0)};
    DiscreteMeasure neg{m.grid, m.kernel, (-m.mass).cwiseMax(0.0)};
    return {std::move(pos), std::move(neg)};
}

std::vector<double> energy_curve(const DiscreteMeasure& m) {
    const std::size_t n = m.grid.n;
    std::vector<double> e(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        e[k + 1] = e[k] + m.mass(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    return e;
}

std::vector<double> marginal_variation(const DiscreteMeasure& m) {
    const std::size_t n = m.grid.n;
    std::vector<double> nu(n);
    for (std::size_t j = 0; j < n; ++j)
        nu[j] = m.mass.col(static_cast<Eigen::Index>(j)).cwiseAbs().sum();
    return nu;
}

double triangle_mass(const DiscreteMeasure& m, std::size_t k) {
    if (k > m.grid.n) throw std::invalid_argument("triangle_mass: k beyond grid");
    std::vector<double> cols(k, 0.0);
    for (std::size_t j = 1; j < k; ++j)
        cols[j] = m.mass.col(static_cast<Eigen::Index>(j))
                      .head(static_cast<Eigen::Index>(j))
                      .sum();
    return pairwise_sum(cols);
}

double square_mass(const DiscreteMeasure& m, std::size_t lo, std::size_t hi) {
    if (lo > hi || hi > m.grid.n) throw std::invalid_argument("square_mass: bad block range");
    const auto l = static_cast<Eigen::Index>(lo);
    const auto w = static_cast<Eigen::Index>(hi - lo);
    return m.mass.block(l, l, w, w).sum();
}

double gamma_identity_gap(const DiscreteMeasure& m) {
    const auto energy = energy_curve(m);
    double worst = 0.0;
    for (std::size_t k = 0; k <= m.grid.n; ++k) {
        const double gamma_k = variance_curve(m.kernel, m.grid.t(k));
        const double gap = std::abs(energy[k] + 2.0 * triangle_mass(m, k) - gamma_k);
        worst = std::max(worst, gap);
    }
    return worst;
}

double planar_quadratic_variation(const KernelSpec& kernel, double eps, double T,
                                  std::size_t cells) {
    kernel.validate();
    if (!(eps > 0.0) || !(T > 0.0))
        throw std::invalid_argument("planar_quadratic_variation: eps and T must be positive");
    if (cells < 2) throw std::invalid_argument("planar_quadratic_variation: need >= 2 scan cells");
    auto r = [&](double s, double t) {
        return eval_covariance(kernel, std::min(s, T), std::min(t, T));
    };
    const double dt = T / static_cast<double>(cells);
    std::vector<double> vals(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double t = (static_cast<double>(i) + 0.5) * dt;
        const double g = r(t + eps, t + eps) - 2.0 * r(t, t + eps) + r(t, t);
        vals[i] = g * g;
    }
    return pairwise_sum(vals) * dt / eps;
}

ScalingFit rectangle_scaling_exponent(const DiscreteMeasure& m) {
    const std::size_t n = m.grid.n;
    // Dyadic widths T/2^k for k = 3..8, clipped to whole numbers of cells.
    std::vector<std::size_t> widths;
    for (int k = 3; k <= 8; ++k) {
        if (n % (1u << k) == 0 && n / (1u << k) >= 1) widths.push_back(n >> k);
    }
    if (widths.size() < 2)
        throw std::invalid_argument("rectangle_scaling_exponent: grid too coarse for a dyadic scan");

    const std::size_t wmax = widths.front();
    const std::size_t stride = std::max<std::size_t>(1, wmax / 4);
    std::vector<double> slopes;
    std::size_t skipped = 0;
    for (std::size_t start = 0; start + wmax <= n; start += stride) {
        std::vector<double> lx, ly;
        bool ok = true;
        for (std::size_t w : widths) {
            const double mass = square_mass(m, start, start + w);
            if (!(mass > 0.0)) {
                ok = false;
                break;
            }
            lx.push_back(std::log(static_cast<double>(w) * m.grid.h()));
            ly.push_back(std::log(mass));
        }
        if (!ok) {
            ++skipped;
            continue;
        }
        slopes.push_back(ls_slope(lx, ly));
    }
    if (slopes.empty())
        throw numerical_error("rectangle_scaling_exponent: no start offset had all-positive square masses");
    return {pairwise_sum(slopes) / static_cast<double>(slopes.size()), slopes.size(), skipped};
}

void write_measure_csv(const DiscreteMeasure& m, std::ostream& os) {
    os << "i,j,mass\n";
    char buf[96];
    const std::size_t n = m.grid.n;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = m.mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (v == 0.0) continue;
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.16e\n", i, j, v);
            os << buf;
        }
    }
}

} // namespace covcalc
