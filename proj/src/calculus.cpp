#include "covcalc/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "covcalc/parallel.hpp"

namespace covcalc {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vec(const StepFunction& f) {
    return {f.coeffs.data(), static_cast<Eigen::Index>(f.coeffs.size())};
}

void require_cells(const DiscreteMeasure& m, const StepFunction& f, const char* who) {
    if (f.coeffs.size() != m.grid.n)
        throw std::invalid_argument(std::string(who) + ": step function does not match grid");
}

// eps must be a positive whole number of cells.
std::size_t eps_cells(const Grid& grid, double eps, const char* who) {
    const double ratio = eps / grid.h();
    const double rounded = std::round(ratio);
    if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(std::string(who) + ": eps must be a positive integer multiple of h");
    return static_cast<std::size_t>(rounded);
}

} // namespace

StepFunction indicator_step(const Grid& grid, std::size_t k) {
    if (k > grid.n) throw std::invalid_argument("indicator_step: k beyond grid");
    StepFunction f{std::vector<double>(grid.n, 0.0)};
    std::fill(f.coeffs.begin(), f.coeffs.begin() + static_cast<std::ptrdiff_t>(k), 1.0);
    return f;
}

StepFunction step_from_intervals(const Grid& grid,
                                 const std::vector<std::array<double, 3>>& intervals) {
    StepFunction f{std::vector<double>(grid.n, 0.0)};
    for (const auto& [a, b, v] : intervals) {
        if (!(b > a)) throw std::invalid_argument("step_from_intervals: need b > a");
        for (std::size_t i = 0; i < grid.n; ++i)
            if (grid.t(i) >= a - 1e-12 && grid.t(i + 1) <= b + 1e-12) f.coeffs[i] += v;
    }
    return f;
}

double h_inner(const DiscreteMeasure& m, const StepFunction& phi, const StepFunction& psi) {
    require_cells(m, phi, "h_inner");
    require_cells(m, psi, "h_inner");
    return as_vec(phi).dot(m.mass * as_vec(psi));
}

double h_abs_norm(const DiscreteMeasure& m, const StepFunction& phi) {
    require_cells(m, phi, "h_abs_norm");
    const Eigen::VectorXd a = as_vec(phi).cwiseAbs();
    return std::sqrt(a.dot(m.mass.cwiseAbs() * a));
}

double l2_nu_norm(const DiscreteMeasure& m, const StepFunction& phi) {
    require_cells(m, phi, "l2_nu_norm");
    const auto nu = marginal_variation(m);
    double s = 0.0;
    for (std::size_t j = 0; j < nu.size(); ++j) s += phi.coeffs[j] * phi.coeffs[j] * nu[j];
    return std::sqrt(s);
}

double l2_leb_norm(const Grid& grid, const StepFunction& phi) {
    if (phi.coeffs.size() != grid.n)
        throw std::invalid_argument("l2_leb_norm: step function does not match grid");
    double s = 0.0;
    for (double c : phi.coeffs) s += c * c;
    return std::sqrt(s * grid.h());
}

double SmoothAtom::val(double y) const {
    switch (kind) {
    case Kind::one: return 1.0;
    case Kind::lin: return a * y + b;
    case Kind::sinw: return std::sin(a * y + b);
    case Kind::cosw: return std::cos(a * y + b);
    case Kind::tanhw: return std::tanh(a * y + b);
    case Kind::gauss: return std::exp(-0.5 * a * a * y * y);
    }
    return 0.0;
}

double SmoothAtom::d1(double y) const {
    switch (kind) {
    case Kind::one: return 0.0;
    case Kind::lin: return a;
    case Kind::sinw: return a * std::cos(a * y + b);
    case Kind::cosw: return -a * std::sin(a * y + b);
    case Kind::tanhw: {
        const double t = std::tanh(a * y + b);
        return a * (1.0 - t * t);
    }
    case Kind::gauss: return -a * a * y * std::exp(-0.5 * a * a * y * y);
    }
    return 0.0;
}

double SmoothAtom::d2(double y) const {
    switch (kind) {
    case Kind::one: return 0.0;
    case Kind::lin: return 0.0;
    case Kind::sinw: return -a * a * std::sin(a * y + b);
    case Kind::cosw: return -a * a * std::cos(a * y + b);
    case Kind::tanhw: {
        const double t = std::tanh(a * y + b);
        return -2.0 * a * a * t * (1.0 - t * t);
    }
    case Kind::gauss: {
        const double a2 = a * a;
        return (a2 * a2 * y * y - a2) * std::exp(-0.5 * a2 * y * y);
    }
    }
    return 0.0;
}

namespace {

// d/dy of an atom as a sum of products of atoms (same coordinate).
std::vector<std::pair<double, std::vector<SmoothAtom>>> atom_derivative(const SmoothAtom& at) {
    using K = SmoothAtom::Kind;
    switch (at.kind) {
    case K::one:
        return {};
    case K::lin:
        return {{at.a, {SmoothAtom{K::one, 1.0, 0.0}}}};
    case K::sinw:
        return {{at.a, {SmoothAtom{K::cosw, at.a, at.b}}}};
    case K::cosw:
        return {{-at.a, {SmoothAtom{K::sinw, at.a, at.b}}}};
    case K::tanhw:
        return {{at.a, {SmoothAtom{K::one, 1.0, 0.0}}},
                {-at.a, {SmoothAtom{K::tanhw, at.a, at.b}, SmoothAtom{K::tanhw, at.a, at.b}}}};
    case K::gauss:
        return {{-at.a * at.a, {SmoothAtom{K::lin, 1.0, 0.0}, SmoothAtom{K::gauss, at.a, 0.0}}}};
    }
    return {};
}

} // namespace

double SmoothFn::value(std::span<const double> y) const {
    double s = 0.0;
    for (const auto& t : terms) {
        double p = t.coeff;
        for (const auto& [c, at] : t.factors) p *= at.val(y[static_cast<std::size_t>(c)]);
        s += p;
    }
    return s;
}

std::vector<double> SmoothFn::gradient(std::span<const double> y) const {
    std::vector<double> g(static_cast<std::size_t>(arity), 0.0);
    for (const auto& t : terms) {
        const std::size_t nf = t.factors.size();
        for (std::size_t p = 0; p < nf; ++p) {
            double prod = t.coeff * t.factors[p].second.d1(y[static_cast<std::size_t>(t.factors[p].first)]);
            for (std::size_t q = 0; q < nf; ++q)
                if (q != p) prod *= t.factors[q].second.val(y[static_cast<std::size_t>(t.factors[q].first)]);
            g[static_cast<std::size_t>(t.factors[p].first)] += prod;
        }
    }
    return g;
}

Eigen::MatrixXd SmoothFn::hessian(std::span<const double> y) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(arity, arity);
    for (const auto& t : terms) {
        const std::size_t nf = t.factors.size();
        std::vector<double> vals(nf), d1s(nf), d2s(nf);
        for (std::size_t p = 0; p < nf; ++p) {
            const double yp = y[static_cast<std::size_t>(t.factors[p].first)];
            vals[p] = t.factors[p].second.val(yp);
            d1s[p] = t.factors[p].second.d1(yp);
            d2s[p] = t.factors[p].second.d2(yp);
        }
        for (std::size_t p = 0; p < nf; ++p) {
            for (std::size_t q = 0; q < nf; ++q) {
                if (p == q) continue;
                double prod = t.coeff * d1s[p] * d1s[q];
                for (std::size_t r = 0; r < nf; ++r)
                    if (r != p && r != q) prod *= vals[r];
                h(t.factors[p].first, t.factors[q].first) += prod;
            }
            double prod = t.coeff * d2s[p];
            for (std::size_t r = 0; r < nf; ++r)
                if (r != p) prod *= vals[r];
            h(t.factors[p].first, t.factors[p].first) += prod;
        }
    }
    return h;
}

SmoothFn SmoothFn::partial(int j) const {
    SmoothFn out;
    out.arity = arity;
    for (const auto& t : terms) {
        for (std::size_t p = 0; p < t.factors.size(); ++p) {
            if (t.factors[p].first != j) continue;
            for (const auto& [c, atoms] : atom_derivative(t.factors[p].second)) {
                SmoothTerm nt;
                nt.coeff = t.coeff * c;
                for (std::size_t q = 0; q < t.factors.size(); ++q)
                    if (q != p) nt.factors.push_back(t.factors[q]);
                for (const auto& at : atoms) nt.factors.emplace_back(j, at);
                out.terms.push_back(std::move(nt));
            }
        }
    }
    return out;
}

SmoothFn SmoothFn::constant(int arity, double c) {
    SmoothFn f;
    f.arity = arity;
    f.terms.push_back({c, {}});
    return f;
}

SmoothFn SmoothFn::coordinate(int arity, int j) {
    return atom(arity, j, SmoothAtom{SmoothAtom::Kind::lin, 1.0, 0.0});
}

SmoothFn SmoothFn::atom(int arity, int j, SmoothAtom a) {
    if (j < 0 || j >= arity) throw std::invalid_argument("SmoothFn::atom: coordinate out of range");
    SmoothFn f;
    f.arity = arity;
    f.terms.push_back({1.0, {{j, a}}});
    return f;
}

SmoothFn SmoothFn::product(const SmoothFn& f, const SmoothFn& g) {
    SmoothFn out;
    out.arity = f.arity + g.arity;
    for (const auto& tf : f.terms) {
        for (const auto& tg : g.terms) {
            SmoothTerm t;
            t.coeff = tf.coeff * tg.coeff;
            t.factors = tf.factors;
            for (const auto& [c, at] : tg.factors) t.factors.emplace_back(c + f.arity, at);
            out.terms.push_back(std::move(t));
        }
    }
    return out;
}

CylindricalFunctional cyl_product(const CylindricalFunctional& F, const CylindricalFunctional& G) {
    CylindricalFunctional out;
    out.phis = F.phis;
    out.phis.insert(out.phis.end(), G.phis.begin(), G.phis.end());
    out.f = SmoothFn::product(F.f, G.f);
    return out;
}

ElementaryProcess scale_process(const ElementaryProcess& u, double w) {
    ElementaryProcess out = u;
    for (auto& term : out.terms)
        for (double& c : term.psi.coeffs) c *= w;
    return out;
}

double wiener_integral(const PathEnsemble& e, std::size_t m, const StepFunction& phi,
                       std::size_t upto) {
    if (phi.coeffs.size() != e.grid.n)
        throw std::invalid_argument("wiener_integral: step function does not match grid");
    if (upto > e.grid.n) throw std::invalid_argument("wiener_integral: upto beyond grid");
    double s = 0.0;
    for (std::size_t i = 0; i < upto; ++i)
        s += phi.coeffs[i] * (e.x(m, i + 1) - e.x(m, i));
    return s;
}

double eval_cyl(const PathEnsemble& e, std::size_t m, const CylindricalFunctional& F) {
    std::vector<double> y(F.phis.size());
    for (std::size_t j = 0; j < F.phis.size(); ++j)
        y[j] = wiener_integral(e, m, F.phis[j], e.grid.n);
    return F.f.value(y);
}

StepFunction realize_process(const PathEnsemble& e, std::size_t m, const ElementaryProcess& u) {
    StepFunction out{std::vector<double>(e.grid.n, 0.0)};
    for (const auto& term : u.terms) {
        const double g = eval_cyl(e, m, term.G);
        for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += g * term.psi.coeffs[i];
    }
    return out;
}

StepFunction malliavin_derivative(const PathEnsemble& e, std::size_t m,
                                  const CylindricalFunctional& F) {
    std::vector<double> y(F.phis.size());
    for (std::size_t j = 0; j < F.phis.size(); ++j)
        y[j] = wiener_integral(e, m, F.phis[j], e.grid.n);
    const auto grad = F.f.gradient(y);
    StepFunction out{std::vector<double>(e.grid.n, 0.0)};
    for (std::size_t j = 0; j < F.phis.size(); ++j)
        for (std::size_t i = 0; i < out.coeffs.size(); ++i)
            out.coeffs[i] += grad[j] * F.phis[j].coeffs[i];
    return out;
}

double variance_split_check(const DiscreteMeasure& m, const StepFunction& phi) {
    require_cells(m, phi, "variance_split_check");
    const double full = h_inner(m, phi, phi);
    const std::size_t n = m.grid.n;
    double diag = 0.0, tri = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diag += phi.coeffs[i] * phi.coeffs[i] * m.mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        for (std::size_t j = i + 1; j < n; ++j)
            tri += phi.coeffs[i] * phi.coeffs[j] * m.mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return std::abs(full - (diag + 2.0 * tri));
}

double forward_integral(const PathEnsemble& e, std::size_t m, std::span<const double> y,
                        double eps, std::size_t upto) {
    if (y.size() != e.grid.points())
        throw std::invalid_argument("forward_integral: integrand must be sampled at all grid points");
    if (upto > e.grid.n) throw std::invalid_argument("forward_integral: upto beyond grid");
    const std::size_t r = eps_cells(e.grid, eps, "forward_integral");
    const std::size_t n = e.grid.n;
    double s = 0.0;
    for (std::size_t i = 0; i < upto; ++i)
        s += y[i] * (e.x(m, std::min(i + r, n)) - e.x(m, i));
    return s / static_cast<double>(r);
}

double backward_integral(const PathEnsemble& e, std::size_t m, std::span<const double> y,
                         double eps, std::size_t upto) {
    if (y.size() != e.grid.points())
        throw std::invalid_argument("backward_integral: integrand must be sampled at all grid points");
    if (upto > e.grid.n) throw std::invalid_argument("backward_integral: upto beyond grid");
    const std::size_t r = eps_cells(e.grid, eps, "backward_integral");
    double s = 0.0;
    for (std::size_t i = 0; i < upto; ++i)
        s += y[i] * (e.x(m, i) - e.x(m, i >= r ? i - r : 0));
    return s / static_cast<double>(r);
}

double symmetric_integral(const PathEnsemble& e, std::size_t m, std::span<const double> y,
                          double eps, std::size_t upto) {
    return 0.5 * (forward_integral(e, m, y, eps, upto) + backward_integral(e, m, y, eps, upto));
}

double covariation(const PathEnsemble& e, std::size_t m, double eps, std::size_t upto) {
    if (upto > e.grid.n) throw std::invalid_argument("covariation: upto beyond grid");
    const std::size_t r = eps_cells(e.grid, eps, "covariation");
    const std::size_t n = e.grid.n;
    double s = 0.0;
    for (std::size_t i = 0; i < upto; ++i) {
        const double d = e.x(m, std::min(i + r, n)) - e.x(m, i);
        s += d * d;
    }
    return s / static_cast<double>(r);
}

SkorohodEval prepare_skorohod(const DiscreteMeasure& m, const ElementaryProcess& u) {
    SkorohodEval se;
    se.u = &u;
    se.inner.resize(u.terms.size());
    for (std::size_t l = 0; l < u.terms.size(); ++l) {
        const auto& term = u.terms[l];
        se.inner[l].resize(term.G.phis.size());
        for (std::size_t j = 0; j < term.G.phis.size(); ++j)
            se.inner[l][j] = h_inner(m, term.G.phis[j], term.psi);
    }
    return se;
}

double skorohod_eval(const PathEnsemble& e, std::size_t m, const SkorohodEval& se) {
    double acc = 0.0;
    for (std::size_t l = 0; l < se.u->terms.size(); ++l) {
        const auto& term = se.u->terms[l];
        std::vector<double> y(term.G.phis.size());
        for (std::size_t j = 0; j < y.size(); ++j)
            y[j] = wiener_integral(e, m, term.G.phis[j], e.grid.n);
        acc += term.G.f.value(y) * wiener_integral(e, m, term.psi, e.grid.n);
        const auto grad = term.G.f.gradient(y);
        for (std::size_t j = 0; j < y.size(); ++j) acc -= grad[j] * se.inner[l][j];
    }
    return acc;
}

double skorohod_cylindrical(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                            const ElementaryProcess& u) {
    return skorohod_eval(e, m, prepare_skorohod(meas, u));
}

DualityResult duality_check(const PathEnsemble& e, const DiscreteMeasure& m,
                            const CylindricalFunctional& F, const ElementaryProcess& u,
                            int threads) {
    const SkorohodEval se = prepare_skorohod(m, u);
    // <phi_j, psi_l>_H reduces <DF, u(omega)>_H to a small bilinear form.
    std::vector<std::vector<double>> fp(F.phis.size(), std::vector<double>(u.terms.size()));
    for (std::size_t j = 0; j < F.phis.size(); ++j)
        for (std::size_t l = 0; l < u.terms.size(); ++l)
            fp[j][l] = h_inner(m, F.phis[j], u.terms[l].psi);

    const std::size_t paths = e.M();
    std::vector<double> lhs(paths), rhs(paths), diff(paths);
    parallel_for(0, paths, threads, [&](std::size_t q) {
        const double del = skorohod_eval(e, q, se);
        std::vector<double> y(F.phis.size());
        for (std::size_t j = 0; j < y.size(); ++j)
            y[j] = wiener_integral(e, q, F.phis[j], e.grid.n);
        const double fval = F.f.value(y);
        const auto grad = F.f.gradient(y);
        double inner = 0.0;
        for (std::size_t l = 0; l < u.terms.size(); ++l) {
            const double g = eval_cyl(e, q, u.terms[l].G);
            for (std::size_t j = 0; j < grad.size(); ++j) inner += grad[j] * g * fp[j][l];
        }
        lhs[q] = fval * del;
        rhs[q] = inner;
        diff[q] = lhs[q] - rhs[q];
    });
    return {mc_from_samples(lhs), mc_from_samples(rhs), mc_from_samples(diff)};
}

double product_rule_gap(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                        const CylindricalFunctional& F, const ElementaryProcess& u) {
    ElementaryProcess fu;
    for (const auto& term : u.terms) fu.terms.push_back({term.psi, cyl_product(F, term.G)});
    const double lhs = skorohod_cylindrical(e, m, meas, fu);
    const double fval = eval_cyl(e, m, F);
    const double del = skorohod_cylindrical(e, m, meas, u);
    const StepFunction df = malliavin_derivative(e, m, F);
    const StepFunction uw = realize_process(e, m, u);
    return std::abs(lhs - (fval * del - h_inner(meas, df, uw)));
}

SkorohodVarianceResult skorohod_variance_check(const PathEnsemble& e, const DiscreteMeasure& m,
                                               const ElementaryProcess& u, int threads) {
    const SkorohodEval se = prepare_skorohod(m, u);
    // Flatten Du = sum_r alpha_r(omega) phi_r x psi_r and precompute the
    // path-independent inner products the trace term contracts against.
    struct Rank {
        std::size_t l, j;
    };
    std::vector<Rank> ranks;
    for (std::size_t l = 0; l < u.terms.size(); ++l)
        for (std::size_t j = 0; j < u.terms[l].G.phis.size(); ++j) ranks.push_back({l, j});
    const std::size_t nr = ranks.size();
    Eigen::MatrixXd a(nr, nr); // a(r,q) = <phi_r, psi_q>_H
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t q = 0; q < nr; ++q)
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) =
                h_inner(m, u.terms[ranks[r].l].G.phis[ranks[r].j], u.terms[ranks[q].l].psi);
    Eigen::MatrixXd pp(u.terms.size(), u.terms.size()); // <psi_l, psi_k>_H
    for (std::size_t l = 0; l < u.terms.size(); ++l)
        for (std::size_t k = 0; k < u.terms.size(); ++k)
            pp(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
                h_inner(m, u.terms[l].psi, u.terms[k].psi);

    const std::size_t paths = e.M();
    std::vector<double> lhs(paths), norms(paths), traces(paths), diff(paths);
    parallel_for(0, paths, threads, [&](std::size_t q) {
        const double del = skorohod_eval(e, q, se);
        std::vector<double> g(u.terms.size());
        std::vector<double> alpha(nr);
        for (std::size_t l = 0; l < u.terms.size(); ++l) {
            const auto& G = u.terms[l].G;
            std::vector<double> y(G.phis.size());
            for (std::size_t j = 0; j < y.size(); ++j)
                y[j] = wiener_integral(e, q, G.phis[j], e.grid.n);
            g[l] = G.f.value(y);
            const auto grad = G.f.gradient(y);
            for (std::size_t r = 0; r < nr; ++r)
                if (ranks[r].l == l) alpha[r] = grad[ranks[r].j];
        }
        double norm2 = 0.0;
        for (std::size_t l = 0; l < g.size(); ++l)
            for (std::size_t k = 0; k < g.size(); ++k)
                norm2 += g[l] * g[k] * pp(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
        double trace = 0.0;
        for (std::size_t r = 0; r < nr; ++r)
            for (std::size_t s = 0; s < nr; ++s)
                trace += alpha[r] * alpha[s] * a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) *
                         a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r));
        lhs[q] = del * del;
        norms[q] = norm2;
        traces[q] = trace;
        diff[q] = del * del - norm2 - trace;
    });
    return {mc_from_samples(lhs), mc_from_samples(norms), mc_from_samples(traces),
            mc_from_samples(diff)};
}

namespace {

SmoothFn smooth_scale(SmoothFn f, double w) {
    for (auto& t : f.terms) t.coeff *= w;
    return f;
}

SmoothFn smooth_add(const SmoothFn& f, const SmoothFn& g) {
    if (f.arity != g.arity) throw std::invalid_argument("smooth_add: arity mismatch");
    SmoothFn out = f;
    out.terms.insert(out.terms.end(), g.terms.begin(), g.terms.end());
    return out;
}

} // namespace

double commutation_gap(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                       const ElementaryProcess& u, std::span<const std::size_t> probe_cells) {
    const SkorohodEval se = prepare_skorohod(meas, u);
    const StepFunction uw = realize_process(e, m, u);
    double worst = 0.0;
    for (std::size_t c : probe_cells) {
        if (c >= e.grid.n) throw std::invalid_argument("commutation_gap: probe cell beyond grid");
        // Left side: differentiate the Skorohod formula directly.
        double lhs = 0.0;
        for (std::size_t l = 0; l < u.terms.size(); ++l) {
            const auto& term = u.terms[l];
            std::vector<double> y(term.G.phis.size());
            for (std::size_t j = 0; j < y.size(); ++j)
                y[j] = wiener_integral(e, m, term.G.phis[j], e.grid.n);
            const double w = wiener_integral(e, m, term.psi, e.grid.n);
            const auto grad = term.G.f.gradient(y);
            const Eigen::MatrixXd hess = term.G.f.hessian(y);
            lhs += term.G.f.value(y) * term.psi.coeffs[c];
            for (std::size_t i = 0; i < y.size(); ++i) {
                lhs += grad[i] * term.G.phis[i].coeffs[c] * w;
                for (std::size_t j = 0; j < y.size(); ++j)
                    lhs -= hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                           term.G.phis[i].coeffs[c] * se.inner[l][j];
            }
        }
        // Right side: u_c + delta(D_c u) with D_c u built structurally.
        ElementaryProcess dcu;
        for (const auto& term : u.terms) {
            SmoothFn df = SmoothFn::constant(term.G.f.arity, 0.0);
            for (std::size_t j = 0; j < term.G.phis.size(); ++j) {
                const double w = term.G.phis[j].coeffs[c];
                if (w != 0.0)
                    df = smooth_add(df, smooth_scale(term.G.f.partial(static_cast<int>(j)), w));
            }
            dcu.terms.push_back({term.psi, CylindricalFunctional{term.G.phis, df}});
        }
        const double rhs = uw.coeffs[c] + skorohod_cylindrical(e, m, meas, dcu);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

double fubini_gap(const PathEnsemble& e, std::size_t m, const DiscreteMeasure& meas,
                  const std::vector<std::pair<double, ElementaryProcess>>& family) {
    ElementaryProcess mixed;
    double rhs = 0.0;
    for (const auto& [w, ux] : family) {
        const ElementaryProcess scaled = scale_process(ux, w);
        mixed.terms.insert(mixed.terms.end(), scaled.terms.begin(), scaled.terms.end());
        rhs += w * skorohod_cylindrical(e, m, meas, ux);
    }
    const double lhs = mixed.terms.empty() ? 0.0 : skorohod_cylindrical(e, m, meas, mixed);
    return std::abs(lhs - rhs);
}

TraceWeights prepare_trace(const DiscreteMeasure& m) {
    const std::size_t n = m.grid.n;
    const auto ecf = [&](double t) {
        const auto v = energy_closed_form(m.kernel, t);
        if (!v)
            throw std::domain_error("prepare_trace: kernel has no closed-form energy "
                                    "(planar variation unbounded), trace split undefined");
        return *v;
    };
    TraceWeights tw;
    tw.col_below.resize(n);
    tw.diag_resid.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        tw.col_below[j] = j == 0 ? 0.0
                                 : m.mass.col(static_cast<Eigen::Index>(j))
                                       .head(static_cast<Eigen::Index>(j))
                                       .sum();
        tw.diag_resid[j] = m.mass(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) -
                           (ecf(m.grid.t(j + 1)) - ecf(m.grid.t(j)));
    }
    return tw;
}

double skorohod_via_trace(const PathEnsemble& e, std::size_t m, const TraceWeights& tw,
                          const std::function<double(double)>& fprime,
                          const std::function<double(double)>& fsecond, std::size_t upto) {
    if (tw.col_below.size() != e.grid.n)
        throw std::invalid_argument("skorohod_via_trace: weights do not match grid");
    if (upto > e.grid.n) throw std::invalid_argument("skorohod_via_trace: upto beyond grid");
    std::vector<double> y(e.grid.points());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = fprime(e.x(m, i));
    double corr = 0.0;
    for (std::size_t j = 0; j < upto; ++j) {
        const double f2 = fsecond(e.x(m, j));
        corr += f2 * tw.col_below[j] + 0.5 * f2 * tw.diag_resid[j];
    }
    return forward_integral(e, m, y, e.grid.h(), upto) - corr;
}

} // namespace covcalc
