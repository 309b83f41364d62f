// covcalc command line front end. Subcommands:
//   measure   - dump the discrete covariance measure as CSV
//   simulate  - sample a path ensemble to a binary file
//   integrate - Monte Carlo estimate of one stochastic integral
//   verify    - run a named verification suite, exit 1 on failed checks
//   report    - verification bundle over the featured kernels
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "covcalc/calculus.hpp"
#include "covcalc/errors.hpp"
#include "covcalc/grid.hpp"
#include "covcalc/kernels.hpp"
#include "covcalc/measure.hpp"
#include "covcalc/numeric.hpp"
#include "covcalc/parallel.hpp"
#include "covcalc/simulate.hpp"
#include "covcalc/verify.hpp"

namespace {

using covcalc::config_error;
using nlohmann::ordered_json;

std::vector<double> parse_doubles(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw config_error(std::string(what) + ": bad number '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

double poly_eval(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
    return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
    if (d.empty()) d.push_back(0.0);
    return d;
}

struct Integrand {
    enum class Kind { step, poly } kind;
    covcalc::StepFunction phi;  // step
    std::vector<double> coeffs; // poly, g(x) = sum c_k x^k
    std::string text;
};

Integrand parse_integrand(const std::string& text, const covcalc::Grid& grid) {
    Integrand out;
    out.text = text;
    if (text.rfind("indicator:", 0) == 0) {
        const auto ab = parse_doubles(text.substr(10), "indicator");
        if (ab.size() != 2) throw config_error("indicator integrand needs 'indicator:a,b'");
        out.kind = Integrand::Kind::step;
        out.phi = covcalc::step_from_intervals(grid, {{ab[0], ab[1], 1.0}});
        return out;
    }
    if (text.rfind("step:", 0) == 0) {
        std::vector<std::array<double, 3>> iv;
        std::string rest = text.substr(5);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const std::size_t semi = rest.find(';', pos);
            const std::string piece =
                rest.substr(pos, semi == std::string::npos ? semi : semi - pos);
            const auto abv = parse_doubles(piece, "step");
            if (abv.size() != 3) throw config_error("step integrand needs 'step:a,b,v[;a,b,v...]'");
            iv.push_back({abv[0], abv[1], abv[2]});
            if (semi == std::string::npos) break;
            pos = semi + 1;
        }
        out.kind = Integrand::Kind::step;
        out.phi = covcalc::step_from_intervals(grid, iv);
        return out;
    }
    if (text.rfind("poly:", 0) == 0) {
        out.kind = Integrand::Kind::poly;
        out.coeffs = parse_doubles(text.substr(5), "poly");
        if (out.coeffs.empty()) throw config_error("poly integrand needs at least one coefficient");
        return out;
    }
    throw config_error("integrand must start with 'indicator:', 'step:' or 'poly:'");
}

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open output file '" + path + "'");
    return os;
}

std::string sanitize(const std::string& id) {
    std::string s = id;
    for (char& c : s)
        if (c == ':' || c == ',' || c == '=' || c == '.') c = '-';
    return s;
}

void print_report(const covcalc::Report& rep) {
    std::size_t passed = 0;
    std::cout << "suite " << rep.suite << "  kernel=" << rep.kernel_id << "  params=" << rep.params.dump()
              << "\n";
    for (const auto& c : rep.checks) {
        passed += c.pass ? 1 : 0;
        std::cout << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  value=" << c.value
                  << " reference=" << c.reference << " tolerance=" << c.tolerance << "\n";
    }
    std::cout << "  " << passed << "/" << rep.checks.size() << " checks passed\n";
}

void write_plotdata(const std::vector<covcalc::Report>& reports, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& rep : reports) {
        const auto path =
            std::filesystem::path(dir) / (rep.suite + "-" + sanitize(rep.kernel_id) + ".csv");
        std::ofstream os(path);
        if (!os) throw config_error("cannot open plotdata file '" + path.string() + "'");
        os << "name,tag,value,reference,tolerance,pass\n";
        for (const auto& c : rep.checks) {
            std::string name = c.name;
            for (char& ch : name)
                if (ch == ',') ch = ';';
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%.16e,%.16e,%.16e", c.value, c.reference, c.tolerance);
            os << name << "," << c.tag << "," << buf << "," << (c.pass ? 1 : 0) << "\n";
        }
    }
}

struct Options {
    std::string config_path;
    std::string kernel = "bm";
    std::size_t n = 256;
    double T = 1.0;
    std::size_t paths = 10000;
    std::uint64_t seed = 42;
    int threads = 0;
    std::string suite = "all";
    std::string mode;
    std::string integrand;
    double upto = -1.0;
    int eps_cells = 1;
    bool check_moments = false;
    std::string out;
    std::string json_out;
    std::string plotdata;
};

// Config file values fill in any option the command line left untouched.
// Unknown keys are rejected so typos cannot silently change a run.
void apply_config(const std::string& path, CLI::App& app, CLI::App* sub, Options& o) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw config_error("config file must hold a JSON object");

    const auto untouched = [&](const std::string& name) {
        if (const auto* opt = sub->get_option_no_throw(name)) return opt->count() == 0;
        if (const auto* opt = app.get_option_no_throw(name)) return opt->count() == 0;
        return false; // option does not exist for this subcommand: ignore the key
    };
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "kernel") { if (untouched("--kernel")) o.kernel = val.get<std::string>(); }
            else if (key == "n") { if (untouched("--n")) o.n = val.get<std::size_t>(); }
            else if (key == "T") { if (untouched("--T")) o.T = val.get<double>(); }
            else if (key == "paths") { if (untouched("--paths")) o.paths = val.get<std::size_t>(); }
            else if (key == "seed") { if (untouched("--seed")) o.seed = val.get<std::uint64_t>(); }
            else if (key == "threads") { if (untouched("--threads")) o.threads = val.get<int>(); }
            else if (key == "suite") { if (untouched("--suite")) o.suite = val.get<std::string>(); }
            else if (key == "mode") { if (untouched("--mode")) o.mode = val.get<std::string>(); }
            else if (key == "integrand") { if (untouched("--integrand")) o.integrand = val.get<std::string>(); }
            else if (key == "upto") { if (untouched("--upto")) o.upto = val.get<double>(); }
            else if (key == "eps_cells") { if (untouched("--eps-cells")) o.eps_cells = val.get<int>(); }
            else if (key == "out") { if (untouched("--out")) o.out = val.get<std::string>(); }
            else if (key == "json") { if (untouched("--json")) o.json_out = val.get<std::string>(); }
            else if (key == "plotdata") { if (untouched("--plotdata")) o.plotdata = val.get<std::string>(); }
            else throw config_error("config file: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config file: ") + e.what());
    }
}

int cmd_measure(const Options& o) {
    const auto kernel = covcalc::KernelSpec::parse(o.kernel);
    const covcalc::Grid grid(o.n, o.T);
    const auto m = covcalc::build_measure(kernel, grid);
    if (o.out.empty()) {
        covcalc::write_measure_csv(m, std::cout);
        return 0;
    }
    auto os = open_output(o.out);
    covcalc::write_measure_csv(m, os);
    ordered_json j{{"kernel", kernel.id()}, {"n", o.n},
                   {"T", o.T},              {"total", m.total()},
                   {"abs_total", m.abs_total()}, {"file", o.out}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto kernel = covcalc::KernelSpec::parse(o.kernel);
    const covcalc::Grid grid(o.n, o.T);
    const auto e = covcalc::sample_gaussian(kernel, grid, o.paths, o.seed, o.threads);
    {
        auto os = open_output(o.out);
        covcalc::write_paths_binary(e, os);
        if (!os) throw config_error("write failed on '" + o.out + "'");
    }
    ordered_json j{{"kernel", kernel.id()}, {"n", o.n},    {"T", o.T},
                   {"paths", o.paths},      {"seed", o.seed}, {"jitter", e.jitter},
                   {"file", o.out}};
    if (o.check_moments) {
        const auto d = covcalc::moment_check(e, kernel);
        j["moments"] = {{"max_mean_excess", d.max_mean_excess},
                        {"max_cov_excess", d.max_cov_excess},
                        {"jb_stat", d.jb_stat}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_integrate(const Options& o) {
    const auto kernel = covcalc::KernelSpec::parse(o.kernel);
    const covcalc::Grid grid(o.n, o.T);
    const auto integrand = parse_integrand(o.integrand, grid);

    std::size_t upto_idx = grid.n;
    double upto_time = o.T;
    if (o.upto >= 0.0) {
        upto_idx = grid.index_at(o.upto);
        if (std::abs(grid.t(upto_idx) - o.upto) > 1e-9 * o.T)
            throw config_error("--upto must name a grid point");
        upto_time = grid.t(upto_idx);
    }
    if (o.eps_cells < 1) throw config_error("--eps-cells must be a positive integer");
    const double eps = static_cast<double>(o.eps_cells) * grid.h();

    const bool needs_step = o.mode == "wiener";
    const bool needs_poly = o.mode == "skorohod-trace";
    if (needs_step && integrand.kind != Integrand::Kind::step)
        throw config_error("wiener mode integrates deterministic step functions (indicator:/step:)");
    if (needs_poly && integrand.kind != Integrand::Kind::poly)
        throw config_error("skorohod-trace mode needs a poly: integrand (coefficients of f')");

    const auto e = covcalc::sample_gaussian(kernel, grid, o.paths, o.seed, o.threads);
    std::vector<double> vals(o.paths);

    if (o.mode == "wiener") {
        covcalc::parallel_for(0, o.paths, o.threads, [&](std::size_t m) {
            vals[m] = covcalc::wiener_integral(e, m, integrand.phi, upto_idx);
        });
    } else if (o.mode == "forward" || o.mode == "backward" || o.mode == "symmetric") {
        const auto run = [&](const std::function<double(std::size_t, std::span<const double>)>& f) {
            if (integrand.kind == Integrand::Kind::step) {
                std::vector<double> y(grid.points(), 0.0);
                for (std::size_t i = 0; i < grid.n; ++i) y[i] = integrand.phi.coeffs[i];
                covcalc::parallel_for(0, o.paths, o.threads,
                                      [&](std::size_t m) { vals[m] = f(m, y); });
            } else {
                covcalc::parallel_for(0, o.paths, o.threads, [&](std::size_t m) {
                    std::vector<double> y(grid.points());
                    for (std::size_t i = 0; i < y.size(); ++i)
                        y[i] = poly_eval(integrand.coeffs, e.x(m, i));
                    vals[m] = f(m, y);
                });
            }
        };
        if (o.mode == "forward")
            run([&](std::size_t m, std::span<const double> y) {
                return covcalc::forward_integral(e, m, y, eps, upto_idx);
            });
        else if (o.mode == "backward")
            run([&](std::size_t m, std::span<const double> y) {
                return covcalc::backward_integral(e, m, y, eps, upto_idx);
            });
        else
            run([&](std::size_t m, std::span<const double> y) {
                return covcalc::symmetric_integral(e, m, y, eps, upto_idx);
            });
    } else if (o.mode == "skorohod-trace") {
        const auto meas = covcalc::build_measure(kernel, grid);
        const auto tw = covcalc::prepare_trace(meas);
        const auto dcoeffs = poly_derivative(integrand.coeffs);
        const auto fprime = [&](double x) { return poly_eval(integrand.coeffs, x); };
        const auto fsecond = [&](double x) { return poly_eval(dcoeffs, x); };
        covcalc::parallel_for(0, o.paths, o.threads, [&](std::size_t m) {
            vals[m] = covcalc::skorohod_via_trace(e, m, tw, fprime, fsecond, upto_idx);
        });
    } else {
        throw config_error("unknown mode '" + o.mode +
                           "' (expected wiener, forward, backward, symmetric or skorohod-trace)");
    }

    const auto est = covcalc::mc_from_samples(vals);
    ordered_json j{{"mode", o.mode},
                   {"integrand", integrand.text},
                   {"kernel", kernel.id()},
                   {"n", o.n},
                   {"T", o.T},
                   {"upto", upto_time},
                   {"eps", eps},
                   {"paths", o.paths},
                   {"seed", o.seed},
                   {"estimate", {{"mean", est.value}, {"std_error", est.std_error}}}};
    std::cout << j.dump(2) << "\n";
    if (!o.json_out.empty()) open_output(o.json_out) << j.dump(2) << "\n";
    return 0;
}

int finish_reports(const std::vector<covcalc::Report>& reports, const Options& o) {
    bool all = true;
    for (const auto& rep : reports) {
        print_report(rep);
        all = all && rep.all_pass();
    }
    if (!o.json_out.empty()) {
        ordered_json arr = ordered_json::array();
        for (const auto& rep : reports) arr.push_back(rep.to_json());
        open_output(o.json_out) << arr.dump(2) << "\n";
    }
    if (!o.plotdata.empty()) write_plotdata(reports, o.plotdata);
    std::cout << (all ? "VERIFY PASS" : "VERIFY FAIL") << "\n";
    return all ? 0 : 1;
}

int cmd_verify(const Options& o) {
    const auto kernel = covcalc::KernelSpec::parse(o.kernel);
    const covcalc::Grid grid(o.n, o.T);
    return finish_reports(covcalc::run_suites(o.suite, kernel, grid, o.paths, o.seed, o.threads),
                          o);
}

int cmd_report(const Options& o) {
    static const char* featured[] = {"bm", "fbm:H=0.7", "bifbm:H=0.75,K=0.6666666666666666",
                                     "mixedfbm:H=0.8", "martingale:lambda=identity"};
    const covcalc::Grid grid(o.n, o.T);
    std::vector<covcalc::Report> reports;
    for (const char* id : featured) {
        const auto kernel = covcalc::KernelSpec::parse(id);
        auto batch = covcalc::run_suites("all", kernel, grid, o.paths, o.seed, o.threads);
        for (auto& rep : batch) reports.push_back(std::move(rep));
    }
    return finish_reports(reports, o);
}

int run(int argc, char** argv) {
    CLI::App app{"discrete covariance measures, Gaussian simulation and stochastic calculus checks",
                 "covcalc"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "JSON file with default parameter values");
    app.add_option("--threads", o.threads, "worker threads (0 = COVCALC_THREADS or hardware)");

    const auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--kernel", o.kernel, "kernel id, e.g. bm, fbm:H=0.7, bifbm:H=0.9,K=0.5");
        sub->add_option("--n", o.n, "grid cells");
        sub->add_option("--T", o.T, "horizon");
    };
    const auto add_mc = [&](CLI::App* sub) {
        sub->add_option("--paths", o.paths, "Monte Carlo paths");
        sub->add_option("--seed", o.seed, "RNG seed");
    };

    auto* measure = app.add_subcommand("measure", "dump the discrete covariance measure as CSV");
    add_grid(measure);
    measure->add_option("--out", o.out, "output CSV path (default: stdout)");

    auto* simulate = app.add_subcommand("simulate", "sample a path ensemble to a binary file");
    add_grid(simulate);
    add_mc(simulate);
    simulate->add_option("--out", o.out, "output binary path")->required();
    simulate->add_flag("--check", o.check_moments, "include moment diagnostics in the summary");

    auto* integrate = app.add_subcommand("integrate", "Monte Carlo estimate of one integral");
    add_grid(integrate);
    add_mc(integrate);
    integrate->add_option("--mode", o.mode, "wiener|forward|backward|symmetric|skorohod-trace")
        ->required();
    integrate->add_option("--integrand", o.integrand, "indicator:a,b | step:a,b,v;... | poly:c0,c1,...")
        ->required();
    integrate->add_option("--upto", o.upto, "upper limit t (grid point, default T)");
    integrate->add_option("--eps-cells", o.eps_cells, "regularization eps in grid cells (default 1)");
    integrate->add_option("--json", o.json_out, "also write the result JSON to this path");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    add_grid(verify);
    add_mc(verify);
    verify->add_option("--suite", o.suite, "qv|gamma|ito|chaos|quasihelix|all (default all)");
    verify->add_option("--json", o.json_out, "write report JSON to this path");
    verify->add_option("--plotdata", o.plotdata, "write per-suite check CSVs into this directory");

    auto* report = app.add_subcommand("report", "verification bundle over the featured kernels");
    report->add_option("--n", o.n, "grid cells");
    report->add_option("--T", o.T, "horizon");
    add_mc(report);
    report->add_option("--json", o.json_out, "write report JSON to this path");
    report->add_option("--plotdata", o.plotdata, "write per-suite check CSVs into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (!o.config_path.empty()) apply_config(o.config_path, app, sub, o);

    if (sub == measure) return cmd_measure(o);
    if (sub == simulate) return cmd_simulate(o);
    if (sub == integrate) return cmd_integrate(o);
    if (sub == verify) return cmd_verify(o);
    return cmd_report(o);
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const covcalc::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
