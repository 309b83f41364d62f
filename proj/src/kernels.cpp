#include "covcalc/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "covcalc/errors.hpp"

namespace covcalc {

namespace {

// Fractional power via exp/log with an explicit 0^p = 0 guard, so expressions
// like |t-s|^{2H} are well defined on the diagonal.
inline double fpow(double x, double p) {
    if (x <= 0.0) return 0.0;
    return std::exp(p * std::log(x));
}

// Piecewise variance-of-increment function: |t| close to the origin, a
// matched fractional power in the tail (continuous at |t| = 1/2).
inline double q_piecewise(double t, double H) {
    const double a = std::abs(t);
    if (a <= 0.5) return a;
    return std::exp2(2.0 * H - 1.0) * fpow(a, 2.0 * H);
}

inline double q_mixed(double t, double H) {
    const double a = std::abs(t);
    return a + fpow(a, 2.0 * H);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw config_error("kernel parameter " + key + ": cannot parse number '" + text + "'");
    return v;
}

// Shortest round-trip formatting, so parse(id()) is lossless.
std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

void KernelSpec::validate() const {
    switch (family) {
    case KernelFamily::bm:
    case KernelFamily::martingale:
        return;
    case KernelFamily::fbm:
        if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("fbm: H must lie in (0,1)");
        return;
    case KernelFamily::bifbm:
        if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("bifbm: H must lie in (0,1)");
        if (!(K > 0.0 && K <= 1.0)) throw std::invalid_argument("bifbm: K must lie in (0,1]");
        return;
    case KernelFamily::mixed_fbm:
        if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("mixedfbm: H must lie in (1/2,1)");
        return;
    case KernelFamily::stationary_inc:
        if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("statinc: H must lie in (1/2,1)");
        return;
    }
    throw std::invalid_argument("KernelSpec: unknown family");
}

std::string KernelSpec::id() const {
    switch (family) {
    case KernelFamily::bm:
        return "bm";
    case KernelFamily::fbm:
        return "fbm:H=" + fmt_double(H);
    case KernelFamily::bifbm:
        return "bifbm:H=" + fmt_double(H) + ",K=" + fmt_double(K);
    case KernelFamily::martingale:
        return std::string("martingale:lambda=") + (lambda == LambdaKind::identity ? "identity" : "square");
    case KernelFamily::mixed_fbm:
        return "mixedfbm:H=" + fmt_double(H);
    case KernelFamily::stationary_inc:
        return "statinc:Q=piecewise,H=" + fmt_double(H);
    }
    return "?";
}

KernelSpec KernelSpec::parse(std::string_view text) {
    const std::string whole = trim(std::string(text));
    const auto colon = whole.find(':');
    const std::string fam = lower(trim(whole.substr(0, colon)));
    std::vector<std::pair<std::string, std::string>> kv;
    if (colon != std::string::npos) {
        std::string rest = whole.substr(colon + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            const std::string item = trim(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (!item.empty()) {
                const auto eq = item.find('=');
                if (eq == std::string::npos)
                    throw config_error("kernel '" + whole + "': expected key=value, got '" + item + "'");
                kv.emplace_back(lower(trim(item.substr(0, eq))), trim(item.substr(eq + 1)));
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    KernelSpec k;
    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : kv) {
            (void)value;
            if (std::find_if(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; }) == allowed.end())
                throw config_error("kernel '" + whole + "': unknown parameter '" + key + "'");
        }
    };
    auto get = [&](const char* key) -> const std::string* {
        for (const auto& [k2, v] : kv)
            if (k2 == key) return &v;
        return nullptr;
    };
    auto require = [&](const char* key) -> const std::string& {
        const std::string* v = get(key);
        if (!v) throw config_error("kernel '" + whole + "': missing parameter '" + std::string(key) + "'");
        return *v;
    };

    if (fam == "bm") {
        reject_unknown({});
        k.family = KernelFamily::bm;
    } else if (fam == "fbm") {
        reject_unknown({"h"});
        k.family = KernelFamily::fbm;
        k.H = parse_double("H", require("h"));
    } else if (fam == "bifbm") {
        reject_unknown({"h", "k"});
        k.family = KernelFamily::bifbm;
        k.H = parse_double("H", require("h"));
        k.K = parse_double("K", require("k"));
    } else if (fam == "martingale" || fam == "gauss_martingale") {
        reject_unknown({"lambda"});
        k.family = KernelFamily::martingale;
        const std::string lv = lower(require("lambda"));
        if (lv == "identity") k.lambda = LambdaKind::identity;
        else if (lv == "square") k.lambda = LambdaKind::square;
        else throw config_error("kernel '" + whole + "': lambda must be identity or square");
    } else if (fam == "mixedfbm" || fam == "mixed_fbm") {
        reject_unknown({"h"});
        k.family = KernelFamily::mixed_fbm;
        k.H = parse_double("H", require("h"));
    } else if (fam == "statinc" || fam == "stationary_inc") {
        reject_unknown({"q", "h"});
        k.family = KernelFamily::stationary_inc;
        if (const std::string* q = get("q"); q && lower(*q) != "piecewise")
            throw config_error("kernel '" + whole + "': only Q=piecewise is supported");
        k.H = parse_double("H", require("h"));
    } else {
        throw config_error("unknown kernel family '" + fam +
                           "' (expected bm, fbm, bifbm, martingale, mixedfbm or statinc)");
    }

    try {
        k.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("kernel '") + whole + "': " + e.what());
    }
    return k;
}

double lambda_value(LambdaKind kind, double t) {
    return kind == LambdaKind::identity ? t : t * t;
}

double eval_covariance(const KernelSpec& k, double s, double t) {
    if (s < 0.0 || t < 0.0) throw std::domain_error("eval_covariance: s,t must be >= 0");
    switch (k.family) {
    case KernelFamily::bm:
        return std::min(s, t);
    case KernelFamily::fbm: {
        const double p = 2.0 * k.H;
        return 0.5 * (fpow(s, p) + fpow(t, p) - fpow(std::abs(t - s), p));
    }
    case KernelFamily::bifbm: {
        const double p = 2.0 * k.H;
        return std::exp2(-k.K) * (fpow(fpow(s, p) + fpow(t, p), k.K) - fpow(std::abs(t - s), p * k.K));
    }
    case KernelFamily::martingale:
        return lambda_value(k.lambda, std::min(s, t));
    case KernelFamily::mixed_fbm:
        return 0.5 * (q_mixed(s, k.H) + q_mixed(t, k.H) - q_mixed(t - s, k.H));
    case KernelFamily::stationary_inc:
        return 0.5 * (q_piecewise(s, k.H) + q_piecewise(t, k.H) - q_piecewise(t - s, k.H));
    }
    throw std::domain_error("eval_covariance: unknown family");
}

double variance_curve(const KernelSpec& k, double t) {
    if (t < 0.0) throw std::domain_error("variance_curve: t must be >= 0");
    switch (k.family) {
    case KernelFamily::bm:
        return t;
    case KernelFamily::fbm:
        return fpow(t, 2.0 * k.H);
    case KernelFamily::bifbm:
        return fpow(t, 2.0 * k.H * k.K);
    case KernelFamily::martingale:
        return lambda_value(k.lambda, t);
    case KernelFamily::mixed_fbm:
        return q_mixed(t, k.H);
    case KernelFamily::stationary_inc:
        return q_piecewise(t, k.H);
    }
    throw std::domain_error("variance_curve: unknown family");
}

double d_squared(const KernelSpec& k, double s, double t) {
    return variance_curve(k, s) + variance_curve(k, t) - 2.0 * eval_covariance(k, s, t);
}

double bifbm_exponent(const KernelSpec& k) {
    if (k.family != KernelFamily::bifbm)
        throw std::domain_error("bifbm_exponent: kernel is not bifbm");
    const double p = 2.0 * k.H * k.K;
    return std::abs(p - 1.0) <= 1e-9 ? 1.0 : p;
}

double offdiag_density(const KernelSpec& k, double s, double t) {
    if (!(s > 0.0) || !(t > 0.0)) throw std::domain_error("offdiag_density: s,t must be > 0");
    if (s == t) throw std::domain_error("offdiag_density: s == t is on the diagonal");
    switch (k.family) {
    case KernelFamily::bm:
    case KernelFamily::martingale:
        return 0.0;
    case KernelFamily::fbm: {
        if (k.H < 0.5) throw std::domain_error("offdiag_density: fbm with H<1/2 has no measure of bounded variation");
        if (k.H == 0.5) return 0.0;
        return k.H * (2.0 * k.H - 1.0) * fpow(std::abs(t - s), 2.0 * k.H - 2.0);
    }
    case KernelFamily::bifbm: {
        const double hk2 = bifbm_exponent(k);
        if (hk2 < 1.0) throw std::domain_error("offdiag_density: bifbm with 2HK<1 has no measure of bounded variation");
        const double p = 2.0 * k.H;
        // d2R1/dsdt with R1 = 2^{-K}(s^{2H}+t^{2H})^K; vanishes for K=1.
        double r1 = 0.0;
        if (k.K < 1.0) {
            r1 = std::exp2(-k.K) * p * p * k.K * (k.K - 1.0) *
                 fpow(fpow(s, p) + fpow(t, p), k.K - 2.0) * fpow(s * t, p - 1.0);
        }
        // d2R2/dsdt with R2 = -2^{-K}|t-s|^{2HK}; vanishes when 2HK = 1.
        double r2 = 0.0;
        if (hk2 > 1.0) {
            r2 = std::exp2(-k.K) * hk2 * (hk2 - 1.0) * fpow(std::abs(t - s), hk2 - 2.0);
        }
        return r1 + r2;
    }
    case KernelFamily::mixed_fbm:
        return k.H * (2.0 * k.H - 1.0) * fpow(std::abs(t - s), 2.0 * k.H - 2.0);
    case KernelFamily::stationary_inc:
        throw std::domain_error("offdiag_density: piecewise kernel has line atoms at |t-s|=1/2, no density");
    }
    throw std::domain_error("offdiag_density: unknown family");
}

std::optional<double> energy_closed_form(const KernelSpec& k, double t) {
    if (t < 0.0) throw std::domain_error("energy_closed_form: t must be >= 0");
    switch (k.family) {
    case KernelFamily::bm:
        return t;
    case KernelFamily::fbm:
        if (k.H > 0.5) return 0.0;
        if (k.H == 0.5) return t;
        return std::nullopt;
    case KernelFamily::bifbm: {
        const double hk2 = bifbm_exponent(k);
        if (hk2 > 1.0) return 0.0;
        if (hk2 == 1.0) return std::exp2(1.0 - k.K) * t;
        return std::nullopt;
    }
    case KernelFamily::martingale:
        return lambda_value(k.lambda, t);
    case KernelFamily::mixed_fbm:
        return t;
    case KernelFamily::stationary_inc:
        // Q'' carries the atom 2*delta_0; the bracket is Q''({0}) t / 2.
        return t;
    }
    return std::nullopt;
}

QDecomposition q_decomposition(const KernelSpec& k) {
    QDecomposition d;
    if (k.family == KernelFamily::mixed_fbm) {
        const double H = k.H;
        d.atoms = {{0.0, 2.0}};
        d.density = [H](double u) {
            return 2.0 * H * (2.0 * H - 1.0) * fpow(std::abs(u), 2.0 * H - 2.0);
        };
        d.q = [H](double u) { return q_mixed(u, H); };
        return d;
    }
    if (k.family == KernelFamily::stationary_inc) {
        const double H = k.H;
        d.atoms = {{-0.5, 2.0 * H - 1.0}, {0.0, 2.0}, {0.5, 2.0 * H - 1.0}};
        d.density = [H](double u) {
            const double a = std::abs(u);
            if (a <= 0.5) return 0.0;
            return std::exp2(2.0 * H) * H * (2.0 * H - 1.0) * fpow(a, 2.0 * H - 2.0);
        };
        d.q = [H](double u) { return q_piecewise(u, H); };
        return d;
    }
    throw std::domain_error("q_decomposition: only mixed_fbm and stationary_inc have a Q'' decomposition");
}

} // namespace covcalc
