#include "covcalc/simulate.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "covcalc/errors.hpp"
#include "covcalc/numeric.hpp"
#include "covcalc/parallel.hpp"
#include "covcalc/rng.hpp"

namespace covcalc {

GramFactor gram_factor(const DiscreteMeasure& m) {
    const Eigen::MatrixXd& g = m.mass;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() == Eigen::Success)
        return {Eigen::MatrixXd(llt.matrixL()), 0.0, 0.0};

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double jitter = std::max(0.0, -2.0 * lmin);
    const double budget = 1e-10 * g.trace() / static_cast<double>(g.rows());
    if (!(jitter <= budget))
        throw numerical_error("gram_factor: Gram matrix too indefinite to repair (min eigenvalue " +
                              std::to_string(lmin) + ", jitter budget " + std::to_string(budget) + ")");
    Eigen::MatrixXd repaired = g;
    repaired.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> retry(repaired);
    if (retry.info() != Eigen::Success)
        throw numerical_error("gram_factor: Cholesky failed after jitter repair (min eigenvalue " +
                              std::to_string(lmin) + ")");
    return {Eigen::MatrixXd(retry.matrixL()), jitter, lmin};
}

PathEnsemble sample_paths(const GramFactor& factor, const Grid& grid,
                          const std::string& kernel_id, std::size_t M,
                          std::uint64_t seed, int threads) {
    const std::size_t n = grid.n;
    if (static_cast<std::size_t>(factor.L.rows()) != n)
        throw std::invalid_argument("sample_paths: factor size does not match grid");
    PathEnsemble e{grid, kernel_id, seed, factor.jitter,
                   PathMatrix::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(n + 1))};
    parallel_for(0, M, threads, [&](std::size_t m) {
        CounterRng rng(seed, m);
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) z[static_cast<Eigen::Index>(j)] = rng.normal(j);
        const Eigen::VectorXd v = factor.L.triangularView<Eigen::Lower>() * z;
        double acc = 0.0;
        const auto row = static_cast<Eigen::Index>(m);
        for (std::size_t i = 0; i < n; ++i) {
            acc += v[static_cast<Eigen::Index>(i)];
            e.paths(row, static_cast<Eigen::Index>(i + 1)) = acc;
        }
    });
    return e;
}

PathEnsemble martingale_paths(const std::function<double(double)>& lambda, const Grid& grid,
                              std::size_t M, std::uint64_t seed, int threads) {
    const std::size_t n = grid.n;
    std::vector<double> sd(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dl = lambda(grid.t(i + 1)) - lambda(grid.t(i));
        if (dl < 0.0)
            throw std::domain_error("martingale_paths: lambda decreases on the grid");
        sd[i] = std::sqrt(dl);
    }
    PathEnsemble e{grid, "martingale", seed, 0.0,
                   PathMatrix::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(n + 1))};
    parallel_for(0, M, threads, [&](std::size_t m) {
        CounterRng rng(seed, m);
        double acc = 0.0;
        const auto row = static_cast<Eigen::Index>(m);
        for (std::size_t i = 0; i < n; ++i) {
            acc += sd[i] * rng.normal(i);
            e.paths(row, static_cast<Eigen::Index>(i + 1)) = acc;
        }
    });
    return e;
}

PathEnsemble mixed_fbm_paths(double H, const Grid& grid, std::size_t M,
                             std::uint64_t seed, int threads) {
    KernelSpec fbm{KernelFamily::fbm, H, 1.0, LambdaKind::identity};
    fbm.validate();
    PathEnsemble w = martingale_paths([](double t) { return t; }, grid, M,
                                      derive_seed(seed, 0x77AA11), threads);
    const GramFactor f = gram_factor(build_measure(fbm, grid));
    PathEnsemble b = sample_paths(f, grid, fbm.id(), M, derive_seed(seed, 0xFB31), threads);
    PathEnsemble e{grid, KernelSpec{KernelFamily::mixed_fbm, H}.id(), seed, b.jitter,
                   w.paths + b.paths};
    return e;
}

PathEnsemble sample_gaussian(const KernelSpec& kernel, const Grid& grid, std::size_t M,
                             std::uint64_t seed, int threads) {
    kernel.validate();
    switch (kernel.family) {
    case KernelFamily::bm: {
        PathEnsemble e = martingale_paths([](double t) { return t; }, grid, M, seed, threads);
        e.kernel_id = kernel.id();
        return e;
    }
    case KernelFamily::martingale: {
        const LambdaKind kind = kernel.lambda;
        PathEnsemble e = martingale_paths([kind](double t) { return lambda_value(kind, t); },
                                          grid, M, seed, threads);
        e.kernel_id = kernel.id();
        return e;
    }
    case KernelFamily::mixed_fbm:
        return mixed_fbm_paths(kernel.H, grid, M, seed, threads);
    default: {
        const GramFactor f = gram_factor(build_measure(kernel, grid));
        return sample_paths(f, grid, kernel.id(), M, seed, threads);
    }
    }
}

namespace {
constexpr char kMagic[4] = {'C', 'V', 'C', '1'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void write_paths_binary(const PathEnsemble& e, std::ostream& os) {
    const std::uint64_t n = e.grid.n, m = e.M(), seed = e.seed;
    os.write(kMagic, 4);
    os.write(reinterpret_cast<const char*>(&kVersion), 4);
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(&m), 8);
    os.write(reinterpret_cast<const char*>(&seed), 8);
    os.write(reinterpret_cast<const char*>(e.paths.data()),
             static_cast<std::streamsize>(m * (n + 1) * sizeof(double)));
}

PathEnsemble read_paths_binary(std::istream& is) {
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t n = 0, m = 0, seed = 0;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&n), 8);
    is.read(reinterpret_cast<char*>(&m), 8);
    is.read(reinterpret_cast<char*>(&seed), 8);
    if (!is || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
        throw config_error("read_paths_binary: not a covcalc path file");
    PathEnsemble e{Grid(static_cast<std::size_t>(n), 1.0), "", seed, 0.0,
                   PathMatrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n + 1))};
    is.read(reinterpret_cast<char*>(e.paths.data()),
            static_cast<std::streamsize>(m * (n + 1) * sizeof(double)));
    if (!is) throw config_error("read_paths_binary: truncated path data");
    return e;
}

MomentDiagnostics moment_check(const PathEnsemble& e, const KernelSpec& kernel,
                               std::size_t probes) {
    const std::size_t n = e.grid.n, m = e.M();
    if (probes == 0 || m < 2) throw std::invalid_argument("moment_check: need probes and M >= 2");
    std::vector<std::size_t> idx(probes);
    for (std::size_t p = 0; p < probes; ++p) idx[p] = (p + 1) * n / probes;

    double mean_excess = 0.0, cov_excess = 0.0;
    std::vector<double> vals(m), prods(m);
    for (std::size_t a = 0; a < probes; ++a) {
        for (std::size_t q = 0; q < m; ++q) vals[q] = e.x(q, idx[a]);
        const auto est = mc_from_samples(vals);
        mean_excess = std::max(mean_excess, std::abs(est.value) / (4.0 * est.std_error));
        for (std::size_t b = a; b < probes; ++b) {
            for (std::size_t q = 0; q < m; ++q) prods[q] = e.x(q, idx[a]) * e.x(q, idx[b]);
            const auto pe = mc_from_samples(prods);
            const double ref = eval_covariance(kernel, e.grid.t(idx[a]), e.grid.t(idx[b]));
            cov_excess = std::max(cov_excess, std::abs(pe.value - ref) / (4.0 * pe.std_error));
        }
    }

    // Jarque-Bera statistic of the horizon marginal.
    for (std::size_t q = 0; q < m; ++q) vals[q] = e.x(q, n);
    const auto est = mc_from_samples(vals);
    const double sd = est.std_error * std::sqrt(static_cast<double>(m));
    double s3 = 0.0, s4 = 0.0;
    for (std::size_t q = 0; q < m; ++q) {
        const double z = (vals[q] - est.value) / sd;
        s3 += z * z * z;
        s4 += z * z * z * z;
    }
    const double skew = s3 / static_cast<double>(m);
    const double kurt = s4 / static_cast<double>(m);
    const double jb = static_cast<double>(m) * (skew * skew / 6.0 + (kurt - 3.0) * (kurt - 3.0) / 24.0);
    return {mean_excess, cov_excess, jb};
}

} // namespace covcalc
