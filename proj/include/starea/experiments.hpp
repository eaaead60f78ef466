#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "analytics.hpp"
#include "densities.hpp"
#include "errors.hpp"
#include "hyperbolic_kernels.hpp"
#include "quadrature.hpp"
#include "simulate.hpp"
#include "specfun.hpp"
#include "stats.hpp"

namespace starea {

inline constexpr const char* library_version = "1.0.0";

struct ExperimentSpec {
    std::string name;
    nlohmann::ordered_json params;  // experiment keys, defaults applied
    std::string output_dir = "out";
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
};

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation = "<=";  // value <relation> threshold passes
    bool pass = false;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ReportBundle {
    ExperimentSpec spec;
    std::vector<Check> checks;
    std::deque<Table> tables;
    std::vector<std::string> errors;
    double wall_time = 0.0;
    std::filesystem::path directory;

    bool passed() const {
        if (!errors.empty()) return false;
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "levy-baseline", "cp-area-cf", "cp-cauchy-limit", "ch-area-cf", "ch-gaussian-limit",
        "ch1-loop-density", "berger-homogenisation", "winding-cp1", "winding-ch1", "jacobi-selftest"};
    return names;
}

inline ojson arr(std::initializer_list<double> v) { return ojson(std::vector<double>(v)); }

inline const ojson& experiment_defaults(const std::string& name) {
    static const std::map<std::string, ojson> d = [] {
        std::map<std::string, ojson> m;
        m["levy-baseline"] = {{"t", 1.0}, {"lambda", arr({1.0})}, {"paths", 100000}, {"dt", 1e-2}};
        m["cp-area-cf"] = {{"n", 1},          {"t", 1.0},  {"lambda", arr({0.5, 1.0, 2.0})},
                           {"paths", 100000}, {"dt", 4e-3}, {"scheme", "log_clock"}};
        m["cp-cauchy-limit"] = {{"n", ojson::array({1, 2})}, {"t", 50.0},
                                {"lambda", arr({0.25, 0.5, 1.0, 2.0})}, {"paths", 10000},
                                {"dt", 4e-3}, {"scheme", "log_clock"}, {"analytic_tol", 5e-3}};
        m["ch-area-cf"] = {{"n", 1}, {"t", 1.0}, {"lambda", arr({0.5, 1.0})}, {"paths", 100000}, {"dt", 1e-3}};
        m["ch-gaussian-limit"] = {{"n", ojson::array({1, 2, 3})}, {"t", 50.0}, {"paths", 10000}, {"dt", 1e-2},
                                  {"transience_paths", 1000}, {"transience_t", 10.0}, {"transience_dt", 1e-3}};
        m["ch1-loop-density"] = {{"t", 1.0}, {"theta_min", -3.0}, {"theta_max", 3.0}, {"points", 21}, {"rel_tol", 1e-4}};
        m["berger-homogenisation"] = {{"n", 1}, {"t", 0.5}, {"lambda", 50.0}, {"grid", 5}, {"tol", 1e-6}};
        m["winding-cp1"] = {{"r0", 0.25 * std::numbers::pi}, {"t", 30.0}, {"lambda", arr({1.0})}, {"paths", 10000},
                            {"dt", 4e-3}, {"scheme", "log_clock"}, {"tol", 0.05}};
        m["winding-ch1"] = {{"r0", arr({0.5, 1.0})}, {"t", 100.0}, {"lambda", arr({0.5, 1.0, 2.0})},
                            {"paths", 10000}, {"dt", 2e-3}, {"scheme", "log_clock"}};
        m["jacobi-selftest"] = {{"rodrigues_degree", 6}, {"eigen_degree", 8}, {"tol_rodrigues", 1e-8},
                                {"tol_eigen", 1e-6}, {"tol_normalization", 1e-8}};
        return m;
    }();
    auto it = d.find(name);
    if (it == d.end()) throw ConfigError("unknown experiment: " + name);
    return it->second;
}

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline std::uint64_t as_uint(const ojson& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return std::uint64_t(v.get<std::int64_t>());
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return std::uint64_t(d);
    }
    throw ConfigError(key + " must be a nonnegative integer");
}

// value checked against the type of its default; scalars promote to arrays
inline ojson coerce(const ojson& v, const ojson& def, const std::string& key) {
    if (def.is_array()) {
        ojson list = v.is_array() ? v : ojson::array({v});
        if (list.empty()) throw ConfigError(key + " must not be empty");
        ojson out = ojson::array();
        for (auto& e : list) out.push_back(coerce(e, def.front(), key));
        return out;
    }
    if (v.is_array()) throw ConfigError(key + " takes a single value");
    if (def.is_string()) {
        if (!v.is_string()) throw ConfigError(key + " must be a string");
        return v;
    }
    if (def.is_number_integer()) return ojson(as_uint(v, key));
    if (!v.is_number()) throw ConfigError(key + " must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key + " must be finite");
    return ojson(d);
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "log_clock") return Scheme::log_clock;
    if (s == "euler_rho") return Scheme::euler_rho;
    if (s == "semi_implicit_r") return Scheme::semi_implicit_r;
    throw ConfigError("unknown scheme: " + s);
}

inline ExperimentSpec resolve_spec(const ojson& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be an object");
    if (!doc.contains("experiment")) throw ConfigError("no experiment given");
    if (!doc["experiment"].is_string()) throw ConfigError("experiment must be a string");
    ExperimentSpec spec;
    spec.name = doc["experiment"].get<std::string>();
    const ojson& defs = experiment_defaults(spec.name);
    spec.params = defs;
    for (auto& [k, v] : doc.items()) {
        if (k == "experiment") continue;
        if (k == "master_seed") {
            spec.master_seed = as_uint(v, k);
        } else if (k == "threads") {
            std::uint64_t t = as_uint(v, k);
            if (t < 1 || t > 1024) throw ConfigError("threads must lie in [1, 1024]");
            spec.threads = unsigned(t);
        } else if (k == "output_dir") {
            if (!v.is_string() || v.get<std::string>().empty()) throw ConfigError("output_dir must be a nonempty string");
            spec.output_dir = v.get<std::string>();
        } else if (defs.contains(k)) {
            spec.params[k] = coerce(v, defs[k], k);
        } else {
            throw UnknownKey(k);
        }
    }
    if (spec.params.contains("n"))
        for (auto& v : spec.params["n"].is_array() ? spec.params["n"] : ojson::array({spec.params["n"]}))
            if (v.get<std::uint64_t>() < 1) throw ConfigError("n must be >= 1");
    if (spec.params.contains("scheme")) parse_scheme(spec.params["scheme"].get<std::string>());
    for (const char* k : {"paths", "points", "grid", "transience_paths"})
        if (spec.params.contains(k) && spec.params[k].get<std::uint64_t>() < 1) throw ConfigError(std::string(k) + " must be >= 1");
    return spec;
}

}  // namespace detail

// JSON object from text; blank text is an empty object
inline nlohmann::ordered_json parse_document(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return nlohmann::ordered_json::object();
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = detail::line_column(text, e.byte);
        throw ParseError("malformed configuration", line, col);
    }
    if (!doc.is_object()) throw ParseError("configuration must be a JSON object", 1, 1);
    return doc;
}

// `experiment`, when given, takes precedence over the document.
inline ExperimentSpec parse_config(const std::string& text, const std::optional<std::string>& experiment = {}) {
    auto doc = parse_document(text);
    if (experiment) doc["experiment"] = *experiment;
    return detail::resolve_spec(doc);
}

// key=value, value read as JSON when it parses and as a string otherwise
inline void apply_override(nlohmann::ordered_json& doc, const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + kv);
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    auto parsed = nlohmann::ordered_json::parse(val, nullptr, false);
    doc[key] = parsed.is_discarded() ? nlohmann::ordered_json(val) : parsed;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// distinct, reproducible seed for the k-th run inside an experiment
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t k) { return splitmix64(master ^ splitmix64(k + 1)); }

struct Runner {
    const ExperimentSpec& spec;
    ReportBundle& out;

    double num(const char* k) const { return spec.params.at(k).get<double>(); }
    std::uint64_t count(const char* k) const { return spec.params.at(k).get<std::uint64_t>(); }
    std::vector<double> list(const char* k) const { return spec.params.at(k).get<std::vector<double>>(); }

    SimConfig sim(double horizon, double dt, std::uint64_t paths, std::uint64_t k) const {
        SimConfig c;
        c.horizon = horizon;
        c.dt = dt;
        c.paths = paths;
        c.master_seed = sub_seed(spec.master_seed, k);
        c.threads = spec.threads;
        if (spec.params.contains("scheme")) c.scheme = parse_scheme(spec.params.at("scheme").get<std::string>());
        return c;
    }

    void check(std::string name, double value, double threshold, std::string rel = "<=") {
        bool pass = (rel == "<=") ? (value <= threshold) : (value > threshold);
        out.checks.push_back({std::move(name), value, threshold, std::move(rel), pass});
    }

    Table& table(std::string name, std::vector<std::string> cols) {
        out.tables.push_back({std::move(name), std::move(cols), {}});
        return out.tables.back();
    }
};

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string lam_tag(const char* what, double v) { return std::string(what) + "=" + fmt(v); }

inline SampleSet scaled(const std::vector<AreaSample>& s, double k) {
    SampleSet out;
    out.values.reserve(s.size());
    for (auto& x : s) out.values.push_back(x.theta_end * k);
    return out;
}

inline void levy_baseline(Runner& R) {
    const double t = R.num("t");
    auto s = sample_planar_area(t, R.sim(t, R.num("dt"), R.count("paths"), 0));
    SampleSet v;
    for (auto& x : s.samples) v.values.push_back(x.s_end);
    auto ms = mean_se(v.values);
    R.check("mean_area_abs", std::abs(ms.mean), 3.0 * ms.se);
    auto& tab = R.table("cf", {"lambda", "quadrature", "mc_re", "mc_im", "mc_se"});
    for (double lam : R.list("lambda")) {
        double q = levy_unconditional_cf(lam, t);
        auto e = empirical_cf(v, lam);
        tab.rows.push_back({lam, q, e.value.real(), e.value.imag(), e.std_error});
        R.check(lam_tag("cf_abs_diff lambda", lam), std::abs(e.value - std::complex<double>(q, 0.0)), 3.0 * e.std_error);
    }
}

inline void cp_area_cf(Runner& R) {
    const int n = int(R.count("n"));
    const double t = R.num("t"), dt = R.num("dt");
    const auto paths = R.count("paths");
    auto direct = sample_area(Geometry::cp(n), R.sim(t, dt, paths, 0));
    auto th = scaled(direct.samples, 1.0);
    auto& tab = R.table("cf", {"lambda", "analytic", "girsanov", "girsanov_se", "direct_re", "direct_im", "direct_se"});
    std::uint64_t k = 1;
    for (double lam : R.list("lambda")) {
        double a = cf_marginal_cp(n, lam, t);
        auto g = girsanov_cf_estimator(Geometry::cp(n), std::abs(lam), R.sim(t, dt, paths, k++));
        auto d = empirical_cf(th, lam);
        tab.rows.push_back({lam, a, g.value.real(), g.std_error, d.value.real(), d.value.imag(), d.std_error});
        R.check(lam_tag("analytic_vs_girsanov lambda", lam), std::abs(a - g.value.real()), 3.0 * g.std_error);
        R.check(lam_tag("analytic_vs_direct lambda", lam), std::abs(a - d.value), 3.0 * d.std_error);
        R.check(lam_tag("girsanov_vs_direct lambda", lam), std::abs(g.value - d.value),
                3.0 * std::hypot(g.std_error, d.std_error));
    }
}

inline void cp_cauchy_limit(Runner& R) {
    const double t = R.num("t"), dt = R.num("dt"), tol = R.num("analytic_tol");
    auto& tab = R.table("cf", {"n", "lambda", "analytic_scaled", "limit", "analytic_abs_err", "mc_re", "mc_im", "mc_se"});
    std::uint64_t k = 0;
    for (double nd : R.list("n")) {
        const int n = int(nd);
        auto s = sample_area(Geometry::cp(n), R.sim(t, dt, R.count("paths"), k++));
        auto th = scaled(s.samples, 1.0 / t);
        double worst = 0.0;
        for (double lam : R.list("lambda")) {
            double a = cf_marginal_cp(n, lam / t, t);
            double lim = reference_cf(CauchyLaw(n), lam).real();
            auto e = empirical_cf(th, lam);
            worst = std::max(worst, std::abs(a - lim));
            tab.rows.push_back({nd, lam, a, lim, std::abs(a - lim), e.value.real(), e.value.imag(), e.std_error});
            R.check("mc_vs_limit n=" + std::to_string(n) + " " + lam_tag("lambda", lam), std::abs(e.value - lim),
                    3.0 * e.std_error);
        }
        R.check("analytic_max_abs_err n=" + std::to_string(n), worst, tol);
    }
}

// 2D quadrature of e^{i lam theta} against the CH^1 joint law
inline double ch1_cf_quadrature(double t, double lam) {
    static const auto gh = gauss_hermite(60);
    auto inner = [&](double r) {
        double s = 0.0, k = std::sqrt(2.0 * t);
        for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
            double th = k * gh.nodes[i];
            s += gh.weights[i] * std::exp(gh.nodes[i] * gh.nodes[i]) * std::cos(lam * th) *
                 ch1_joint_density(t, r, th).value;
        }
        return std::numbers::pi * std::sinh(2.0 * r) * s * k;
    };
    double upper = 8.0 + 4.0 * t;
    return integrate_or_throw(inner, 0.0, upper, 1e-9, 1e-8).value;
}

inline void ch_area_cf(Runner& R) {
    const int n = int(R.count("n"));
    const double t = R.num("t"), dt = R.num("dt");
    const auto paths = R.count("paths");
    auto direct = sample_area(Geometry::ch(n), R.sim(t, dt, paths, 0));
    auto th = scaled(direct.samples, 1.0);
    auto& tab = R.table("cf", {"lambda", "girsanov", "girsanov_se", "direct_re", "direct_im", "direct_se", "quadrature"});
    std::uint64_t k = 1;
    for (double lam : R.list("lambda")) {
        auto g = cf_marginal_ch(n, lam, R.sim(t, dt, paths, k++));
        auto d = empirical_cf(th, lam);
        double q = (n == 1) ? ch1_cf_quadrature(t, lam) : std::nan("");
        tab.rows.push_back({lam, g.value.real(), g.std_error, d.value.real(), d.value.imag(), d.std_error, q});
        R.check(lam_tag("girsanov_vs_direct lambda", lam), std::abs(g.value - d.value),
                3.0 * std::hypot(g.std_error, d.std_error));
        if (n == 1) {
            R.check(lam_tag("girsanov_vs_quadrature lambda", lam), std::abs(g.value.real() - q), 3.0 * g.std_error);
            R.check(lam_tag("direct_vs_quadrature lambda", lam), std::abs(d.value - q), 3.0 * d.std_error);
        }
    }
}

inline void ch_gaussian_limit(Runner& R) {
    const double t = R.num("t"), dt = R.num("dt");
    auto& ks_tab = R.table("ks", {"n", "paths", "ks_d", "p_value", "variance"});
    auto& tr_tab = R.table("transience", {"n", "paths", "steps", "violations", "min_margin"});
    std::uint64_t k = 0;
    for (double nd : R.list("n")) {
        const int n = int(nd);
        auto s = sample_area(Geometry::ch(n), R.sim(t, dt, R.count("paths"), k++));
        auto z = scaled(s.samples, 1.0 / std::sqrt(t));
        auto ks = ks_statistic(z, std_normal_cdf);
        double var = pairwise_sum(z.values.data(), z.values.size(), [](double x) { return x * x; }) / z.values.size();
        ks_tab.rows.push_back({nd, double(z.values.size()), ks.d, ks.p_value, var});
        R.check("ks_p_value n=" + std::to_string(n), ks.p_value, 0.01, ">");
    }
    const double tt = R.num("transience_t"), tdt = R.num("transience_dt");
    for (double nd : R.list("n")) {
        const int n = int(nd);
        auto cfg = R.sim(tt, tdt, R.count("transience_paths"), k++);
        std::vector<double> margin(cfg.paths, std::numeric_limits<double>::infinity());
        std::vector<std::uint64_t> bad(cfg.paths, 0);
        const double a = n - 0.5;
        auto obs = [&](std::uint64_t path, double time, double r, double gamma) {
            double m = r - (a * time + gamma);
            margin[path] = std::min(margin[path], m);
            if (m < -tdt) ++bad[path];
        };
        auto s = sample_radial_hyperbolic(n, 0.0, 0.0, cfg, HyperbolicClock::none, obs);
        std::uint64_t violations = 0;
        for (auto b : bad) violations += b;
        double mn = *std::min_element(margin.begin(), margin.end());
        tr_tab.rows.push_back({nd, double(cfg.paths), double(s.stats.steps), double(violations), mn});
        R.check("transience_violations n=" + std::to_string(n), double(violations), 0.0);
    }
}

inline void ch1_loop_density(Runner& R) {
    const double t = R.num("t"), lo = R.num("theta_min"), hi = R.num("theta_max"), tol = R.num("rel_tol");
    const auto pts = R.count("points");
    const double pi = std::numbers::pi;
    auto slice = [&](double th) { return ch1_joint_density(t, 0.0, th).value; };
    const double p0 = slice(0.0);
    double W = 8.0 * (std::sqrt(t) + t);
    double C = integrate_or_throw(slice, -W, W, 1e-16, 1e-12).value;
    auto& tab = R.table("density", {"theta", "quadrature", "stated_form", "stated_rel_err", "slice_ratio", "sech2_shape",
                                     "shape_rel_err", "loop_density", "normalized_slice", "loop_rel_err"});
    double e_stated = 0.0, e_shape = 0.0, e_loop = 0.0;
    for (std::uint64_t i = 0; i < pts; ++i) {
        double th = (pts == 1) ? lo : lo + (hi - lo) * double(i) / double(pts - 1);
        double q = slice(th);
        double stated = std::exp(-0.5 * t) / (2.0 * t * t) * std::exp(-th * th / (2.0 * t)) / std::pow(std::cosh(pi * th / t), 2);
        double shape = std::exp(-th * th / (2.0 * t)) / std::pow(std::cosh(0.5 * pi * th / t), 2);
        double loop = ch1_loop_area_density(t, th);
        double rs = std::abs(q - stated) / stated, rsh = std::abs(q / p0 - shape) / shape, rl = std::abs(loop - q / C) / (q / C);
        e_stated = std::max(e_stated, rs);
        e_shape = std::max(e_shape, rsh);
        e_loop = std::max(e_loop, rl);
        tab.rows.push_back({th, q, stated, rs, q / p0, shape, rsh, loop, q / C, rl});
    }
    R.check("stated_form_max_rel_err", e_stated, tol);
    R.check("sech2_shape_max_rel_err", e_shape, tol);
    R.check("loop_density_vs_normalized_slice_max_rel_err", e_loop, tol);
}

inline double berger_mass(int n, double lam, double t) {
    const double c = 2.0 * std::pow(std::numbers::pi, n) / std::tgamma(n);
    auto inner = [&](double r) {
        return integrate_or_throw([&](double th) { return berger_kernel(n, lam, t, r, th).value; }, 0.0,
                                  2.0 * std::numbers::pi, 1e-14, 1e-12).value;
    };
    return integrate_or_throw([&](double r) { return c * inner(r) * std::pow(std::sin(r), 2 * n - 1) * std::cos(r); },
                              0.0, 0.5 * std::numbers::pi, 1e-12, 1e-12).value;
}

inline void berger_homogenisation(Runner& R) {
    const int n = int(R.count("n"));
    const double t = R.num("t"), lam = R.num("lambda"), tol = R.num("tol");
    const auto g = R.count("grid");
    const double pi = std::numbers::pi;
    auto& tab = R.table("grid", {"r", "theta", "kernel", "limit", "abs_diff"});
    double worst = 0.0;
    for (std::uint64_t i = 0; i < g; ++i)
        for (std::uint64_t j = 0; j < g; ++j) {
            double r = 0.5 * pi * double(i + 1) / double(g + 1);
            double th = 2.0 * pi * double(j) / double(g);
            double a = berger_kernel(n, lam, t, r, th).value, b = berger_limit_kernel(n, t, r).value;
            worst = std::max(worst, std::abs(a - b));
            tab.rows.push_back({r, th, a, b, std::abs(a - b)});
        }
    R.check("max_abs_diff", worst, tol);
    double mass = berger_mass(n, lam, t);
    double c = 2.0 * std::pow(pi, n) / std::tgamma(n);
    double lim_mass = integrate_or_throw([&](double r) {
                          return c * 2.0 * pi * berger_limit_kernel(n, t, r).value * std::pow(std::sin(r), 2 * n - 1) * std::cos(r);
                      }, 0.0, 0.5 * pi, 1e-13, 1e-12).value;
    auto& nt = R.table("normalization", {"lambda", "mass"});
    nt.rows.push_back({lam, mass});
    nt.rows.push_back({std::numeric_limits<double>::infinity(), lim_mass});
    R.check("kernel_mass_abs_err", std::abs(mass - 1.0), tol);
    R.check("limit_mass_abs_err", std::abs(lim_mass - 1.0), tol);
}

inline void winding_cp1(Runner& R) {
    const double t = R.num("t"), r0 = R.num("r0"), tol = R.num("tol");
    auto s = sample_winding(WindingGeometry::cp1, r0, R.sim(t, R.num("dt"), R.count("paths"), 0));
    SampleSet v;
    for (auto& x : s.samples) v.values.push_back(x.phi_end / t);
    auto& tab = R.table("cf", {"lambda", "mc_re", "mc_im", "mc_se", "limit", "abs_err"});
    for (double lam : R.list("lambda")) {
        auto e = empirical_cf(v, lam);
        double lim = winding_limit_cf(WindingGeometry::cp1, r0, lam);
        tab.rows.push_back({lam, e.value.real(), e.value.imag(), e.std_error, lim, std::abs(e.value - lim)});
        R.check(lam_tag("cf_abs_err lambda", lam), std::abs(e.value - lim), tol);
    }
    auto& st = R.table("sampler", {"paths", "steps", "clamps", "caps"});
    st.rows.push_back({double(s.samples.size()), double(s.stats.steps), double(s.stats.clamps), double(s.stats.caps)});
}

inline void winding_ch1(Runner& R) {
    const double t = R.num("t");
    auto& tab = R.table("cf", {"r0", "lambda", "mc_re", "mc_im", "mc_se", "limit"});
    std::uint64_t k = 0;
    for (double r0 : R.list("r0")) {
        auto s = sample_winding(WindingGeometry::ch1, r0, R.sim(t, R.num("dt"), R.count("paths"), k++));
        SampleSet v;
        for (auto& x : s.samples) v.values.push_back(x.phi_end);
        for (double lam : R.list("lambda")) {
            auto e = empirical_cf(v, lam);
            double lim = winding_limit_cf(WindingGeometry::ch1, r0, lam);
            tab.rows.push_back({r0, lam, e.value.real(), e.value.imag(), e.std_error, lim});
            R.check(lam_tag("cf_abs_diff r0", r0) + " " + lam_tag("lambda", lam), std::abs(e.value - lim), 3.0 * e.std_error);
        }
    }
}

// Rodrigues formula, derivative by a trapezoid Cauchy integral
inline double rodrigues_reference(int m, double a, double b, double x) {
    const int nodes = 256;
    double rad = 0.5 * std::min(1.0 - x, 1.0 + x);
    std::complex<double> acc = 0.0;
    for (int k = 0; k < nodes; ++k) {
        double ph = 2.0 * std::numbers::pi * (k + 0.5) / nodes;
        std::complex<double> e(std::cos(ph), std::sin(ph)), z = x + rad * e;
        acc += std::pow(1.0 - z, a + m) * std::pow(1.0 + z, b + m) * std::pow(std::conj(e), m);
    }
    double dm = (acc.real() / nodes) * std::tgamma(m + 1.0) / std::pow(rad, m);
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign / (std::pow(2.0, m) * std::tgamma(m + 1.0)) * std::pow(1.0 - x, -a) * std::pow(1.0 + x, -b) * dm;
}

inline void jacobi_selftest(Runner& R) {
    const int mr = int(R.count("rodrigues_degree")), me = int(R.count("eigen_degree"));
    const double params[] = {0.0, 0.5, 1.0, 2.0};
    auto& rt = R.table("rodrigues", {"m", "alpha", "beta", "x", "recurrence", "rodrigues", "abs_diff"});
    double worst_r = 0.0;
    for (double a : params)
        for (double b : params)
            for (int m = 0; m <= mr; ++m)
                for (int i = 0; i <= 12; ++i) {
                    double x = -0.9 + 0.15 * i;
                    double p = jacobi_poly(m, JacobiParams(a, b), x), q = rodrigues_reference(m, a, b, x);
                    worst_r = std::max(worst_r, std::abs(p - q));
                    rt.rows.push_back({double(m), a, b, x, p, q, std::abs(p - q)});
                }
    R.check("rodrigues_max_abs_diff", worst_r, R.num("tol_rodrigues"));

    // (1-x^2) f'' + (b - a - (a+b+2) x) f' = -m(m+a+b+1) f, Richardson-extrapolated differences
    double worst_e = 0.0;
    for (double a : params)
        for (double b : params)
            for (int m = 1; m <= me; ++m) {
                JacobiParams p(a, b);
                double ev = m * (m + a + b + 1.0);
                for (int i = 0; i <= 10; ++i) {
                    double x = -0.85 + 0.17 * i;
                    auto G = [&](double h) {
                        double f0 = jacobi_poly(m, p, x), fp = jacobi_poly(m, p, x + h), fm = jacobi_poly(m, p, x - h);
                        return (1 - x * x) * (fp - 2 * f0 + fm) / (h * h) + (b - a - (a + b + 2) * x) * (fp - fm) / (2 * h);
                    };
                    double h = 2e-3, rich = (4.0 * G(0.5 * h) - G(h)) / 3.0;
                    double expect = -ev * jacobi_poly(m, p, x);
                    worst_e = std::max(worst_e, std::abs(rich - expect) / std::max(std::abs(expect), 1e-2 * ev));
                }
            }
    R.check("eigenfunction_max_rel_err", worst_e, R.num("tol_eigen"));

    auto& nt = R.table("normalization", {"alpha", "beta", "t", "integral", "abs_err"});
    double worst_n = 0.0;
    for (auto [a, b] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.7}, {2.0, 1.3}})
        for (double t : {0.2, 0.5, 2.0}) {
            JacobiParams p(a, b);
            double I = integrate_or_throw([&](double r) { return spherical_density(p, t, 0.0, r).value; }, 0.0,
                                          0.5 * std::numbers::pi, 1e-13, 1e-13).value;
            worst_n = std::max(worst_n, std::abs(I - 1.0));
            nt.rows.push_back({a, b, t, I, std::abs(I - 1.0)});
        }
    R.check("density_normalization_max_abs_err", worst_n, R.num("tol_normalization"));
}

inline void write_csv(const std::filesystem::path& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << t.columns[i];
    f << '\n';
    for (auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << fmt(row[i]);
        f << '\n';
    }
    if (!f) throw ConfigError("failed writing " + path.string());
}

inline nlohmann::ordered_json number(double v) {
    if (std::isfinite(v)) return v;
    return fmt(v);  // JSON has no inf/nan
}

}  // namespace detail

inline ReportBundle run_experiment(const ExperimentSpec& spec) {
    ReportBundle out;
    out.spec = spec;
    detail::experiment_defaults(spec.name);  // rejects unknown names
    namespace fs = std::filesystem;
    out.directory = fs::path(spec.output_dir) / spec.name;
    std::error_code ec;
    fs::create_directories(out.directory, ec);
    if (ec || !fs::is_directory(out.directory)) throw ConfigError("output directory not writable: " + out.directory.string());

    static const std::map<std::string, void (*)(detail::Runner&)> table = {
        {"levy-baseline", detail::levy_baseline},
        {"cp-area-cf", detail::cp_area_cf},
        {"cp-cauchy-limit", detail::cp_cauchy_limit},
        {"ch-area-cf", detail::ch_area_cf},
        {"ch-gaussian-limit", detail::ch_gaussian_limit},
        {"ch1-loop-density", detail::ch1_loop_density},
        {"berger-homogenisation", detail::berger_homogenisation},
        {"winding-cp1", detail::winding_cp1},
        {"winding-ch1", detail::winding_ch1},
        {"jacobi-selftest", detail::jacobi_selftest},
    };
    auto t0 = std::chrono::steady_clock::now();
    detail::Runner R{spec, out};
    try {
        table.at(spec.name)(R);
    } catch (const NumericError& e) {
        out.errors.push_back(e.what());
    } catch (const DomainError& e) {
        out.errors.push_back(e.what());
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::ordered_json m;
    m["schema_version"] = 1;
    m["experiment"] = spec.name;
    m["library_version"] = library_version;
    m["master_seed"] = spec.master_seed;
    nlohmann::ordered_json cfg = spec.params;
    cfg["experiment"] = spec.name;
    cfg["master_seed"] = spec.master_seed;
    cfg["output_dir"] = spec.output_dir;
    cfg["threads"] = spec.threads;
    m["config"] = cfg;
    m["wall_time_seconds"] = out.wall_time;
    m["checks"] = nlohmann::ordered_json::array();
    for (auto& c : out.checks)
        m["checks"].push_back({{"name", c.name},
                               {"value", detail::number(c.value)},
                               {"threshold", detail::number(c.threshold)},
                               {"relation", c.relation},
                               {"verdict", c.pass ? "pass" : "fail"}});
    for (auto& e : out.errors)
        m["checks"].push_back({{"name", "numeric_error"}, {"message", e}, {"verdict", "fail"}});
    m["tables"] = nlohmann::ordered_json::array();
    for (auto& t : out.tables) {
        std::string file = t.name + ".csv";
        detail::write_csv(out.directory / file, t);
        m["tables"].push_back(file);
    }
    m["passed"] = out.passed();
    std::ofstream f(out.directory / "manifest.json", std::ios::binary);
    if (!f) throw ConfigError("cannot write manifest in " + out.directory.string());
    f << m.dump(2) << '\n';
    return out;
}

}  // namespace starea
