#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "thenon/eremenko.hpp"
#include "thenon/errors.hpp"
#include "thenon/periodic4.hpp"
#include "thenon/render.hpp"
#include "thenon/stable.hpp"
#include "thenon/wiman_valiron.hpp"

namespace thenon::cli {

namespace {

[[noreturn]] void invalid(const std::string& m) { throw Error(ErrorKind::ValidationError, m); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) invalid(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!ok.count(k)) invalid(where + ": unknown key '" + k + "'");
}

double get_double(const json& obj, const char* key, double def, const std::string& where) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) invalid(where + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) invalid(where + "." + key + ": must be finite");
    return x;
}

long get_int(const json& obj, const char* key, long def, const std::string& where) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) invalid(where + "." + key + ": expected an integer");
    return v.get<long>();
}

bool get_bool(const json& obj, const char* key, bool def, const std::string& where) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_boolean()) invalid(where + "." + key + ": expected a boolean");
    return v.get<bool>();
}

std::vector<cplx> complex_list(const json& v, const std::string& where) {
    if (!v.is_array()) invalid(where + ": expected an array");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_complex(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

C2 parse_c2(const json& v, const std::string& where) {
    const std::vector<cplx> p = complex_list(v, where);
    if (p.size() != 2) invalid(where + ": expected two complex entries");
    return {p[0], p[1]};
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

json finite_or_string(double x) {
    if (std::isfinite(x)) return x;
    return fmt(x);
}

// Cartesian parts of a scaled value; overflow shows up as inf.
cplx cartesian_parts(const ScaledComplex& z) {
    if (z.is_zero()) return {0.0, 0.0};
    const double m = std::exp(z.log_abs());
    const double c = std::cos(z.arg()), s = std::sin(z.arg());
    return {c == 0.0 ? 0.0 : m * c, s == 0.0 ? 0.0 : m * s};
}

json scaled_json(const ScaledComplex& z) {
    return json{{"log_abs", finite_or_string(z.log_abs())}, {"arg", z.arg()}};
}

struct Options {
    std::string command;
    std::optional<std::string> config_path;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<double> seed_radius;
    std::optional<int> depth;
    std::optional<double> tol;
    std::optional<std::string> g;
    std::optional<double> r;
};

struct Config {
    json doc = json::object();

    const json& block(const char* name) const {
        static const json empty = json::object();
        return doc.contains(name) ? doc.at(name) : empty;
    }
};

Config load_config(const std::optional<std::string>& path) {
    Config c;
    if (!path) return c;
    std::ifstream is(*path);
    if (!is) throw Error(ErrorKind::IoError, "cannot open config " + *path);
    try {
        c.doc = json::parse(is);
    } catch (const json::parse_error& e) {
        invalid(std::string("config: ") + e.what());
    }
    check_keys(c.doc, {"function", "delta", "threads", "out", "wv", "periodic4", "escape", "stable", "render", "orbit"},
               "config");
    if (c.doc.contains("wv")) check_keys(c.doc["wv"], {"r", "alpha", "grid", "tau0", "tau1"}, "wv");
    if (c.doc.contains("periodic4"))
        check_keys(c.doc["periodic4"], {"g", "r", "tol", "k_offset", "require_admissible", "max_iter"}, "periodic4");
    if (c.doc.contains("escape"))
        check_keys(c.doc["escape"], {"seed_radius", "depth", "offsets", "c_max", "grid", "min_margin", "out"}, "escape");
    if (c.doc.contains("stable"))
        check_keys(c.doc["stable"],
                   {"seed_radius", "depth", "offsets", "j0", "iter_max", "tol", "t_probe", "n_steps", "back_steps", "out"},
                   "stable");
    if (c.doc.contains("render"))
        check_keys(c.doc["render"],
                   {"base", "u", "v", "width", "height", "s_min", "s_max", "t_min", "t_max", "max_iter",
                    "log_escape_radius", "out"},
                   "render");
    if (c.doc.contains("orbit")) check_keys(c.doc["orbit"], {"start", "n_max", "log_escape_radius", "out"}, "orbit");
    return c;
}

int resolve_threads(const Options& o, const Config& c) {
    int n = 0;
    if (o.threads) {
        n = *o.threads;
    } else if (c.doc.contains("threads")) {
        n = static_cast<int>(get_int(c.doc, "threads", 0, "config"));
    } else if (const char* env = std::getenv("THENON_THREADS"); env && *env) {
        const std::string s(env);
        int v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) invalid("THENON_THREADS: not an integer");
        n = v;
    } else {
        n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    if (n < 1 || n > 1024) invalid("threads must lie in [1, 1024]");
    return n;
}

EntireFunction config_function(const Config& c) {
    if (!c.doc.contains("function")) return make_exp();
    return parse_function(c.doc.at("function"));
}

cplx config_delta(const Config& c) {
    const cplx d = c.doc.contains("delta") ? parse_complex(c.doc.at("delta"), "delta") : cplx(1.0, 0.0);
    if (d == cplx(0.0, 0.0)) invalid("delta must be nonzero");
    return d;
}

// flag, then command block, then top level
std::optional<std::string> out_path(const Options& o, const json& blk, const Config& c) {
    if (o.out) return o.out;
    if (blk.contains("out")) {
        if (!blk.at("out").is_string()) invalid("out: expected a string");
        return blk.at("out").get<std::string>();
    }
    if (c.doc.contains("out")) {
        if (!c.doc.at("out").is_string()) invalid("out: expected a string");
        return c.doc.at("out").get<std::string>();
    }
    return std::nullopt;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::IoError, "cannot open output " + path);
    return os;
}

void finish(std::ofstream& os, const std::string& path) {
    os.flush();
    if (!os) throw Error(ErrorKind::IoError, "write failed for " + path);
}

CascadeOptions cascade_options(const json& blk, const std::string& where) {
    CascadeOptions co;
    if (blk.contains("offsets")) {
        const json& v = blk.at("offsets");
        if (!v.is_array()) invalid(where + ".offsets: expected an array");
        for (const auto& x : v) {
            if (!x.is_number()) invalid(where + ".offsets: expected numbers");
            co.offsets.push_back(x.get<double>());
        }
    }
    co.c_max = get_double(blk, "c_max", co.c_max, where);
    co.grid = static_cast<int>(get_int(blk, "grid", co.grid, where));
    co.min_margin = get_double(blk, "min_margin", co.min_margin, where);
    return co;
}

double seed_radius(const Options& o, const json& blk, const std::string& where) {
    const double r = o.seed_radius ? *o.seed_radius : get_double(blk, "seed_radius", 3200.0, where);
    if (!(r > 0.0)) invalid(where + ": seed radius must be positive");
    return r;
}

int depth(const Options& o, const json& blk, const std::string& where) {
    const long d = o.depth ? *o.depth : get_int(blk, "depth", 3, where);
    if (d < 1 || d > 16) invalid(where + ": depth must lie in [1, 16]");
    return static_cast<int>(d);
}

json cascade_summary(const Cascade& c) {
    json levels = json::array();
    for (const LevelFrame& L : c.levels()) {
        const json N = L.wv ? json(L.wv->N) : tower_json(Tower::exp(L.log_N));
        levels.push_back(json{{"n", L.n},
                              {"log_r", tower_json(L.log_r)},
                              {"N", N},
                              {"log_N", tower_json(L.log_N)},
                              {"log_M", tower_json(L.log_M)},
                              {"annulus", json::array({tower_json(L.annulus_inner()), tower_json(L.annulus_outer())})},
                              {"c_ratio", json::array({L.c_ratio_min, L.c_ratio_max})},
                              {"log_margin", finite_or_string(L.log_margin)},
                              {"contained", L.contained},
                              {"native", L.native},
                              {"covering_winding", L.covering_winding}});
    }
    return levels;
}

json bound_json(const BoundReport& b) {
    json per = json::array();
    for (const BoundLevel& l : b.per_level)
        per.push_back(json{{"n", l.n},
                           {"ratio_min", l.ratio_min},
                           {"ratio_max", l.ratio_max},
                           {"ratio_center", l.ratio_center},
                           {"max_log_phi_prime", tower_json(l.max_log_phi_prime)}});
    return json{{"C_lower", b.C_lower}, {"C_upper", b.C_upper}, {"c_max", b.c_max}, {"pass", b.pass}, {"per_level", per}};
}

int cmd_wv(const Options& o, const Config& c, std::ostream& out) {
    const json& blk = c.block("wv");
    const EntireFunction f = config_function(c);
    double r = get_double(blk, "r", 4000.0, "wv");
    if (o.seed_radius) r = *o.seed_radius;
    if (o.r) r = *o.r;
    if (!(r > 0.0)) invalid("wv: r must be positive");
    const double alpha = get_double(blk, "alpha", 2.0 / 3.0, "wv");
    const long grid = get_int(blk, "grid", 16, "wv");
    if (grid < 1 || grid > 4096) invalid("wv: grid must lie in [1, 4096]");
    ResidualThresholds th;
    th.tau0 = get_double(blk, "tau0", th.tau0, "wv");
    th.tau1 = get_double(blk, "tau1", th.tau1, "wv");
    const WVFrame fr = build_frame(f, r, alpha);
    const WVResidualReport rep = residual_report(f, fr, static_cast<int>(grid), th, resolve_threads(o, c));
    const json j{{"function", f.name()},
                 {"r", rep.r},
                 {"N", rep.N},
                 {"log_M", rep.log_M},
                 {"sup_eps0", rep.sup_eps0},
                 {"sup_eps1", rep.sup_eps1},
                 {"sup_eps2", rep.sup_eps2},
                 {"admissible", rep.admissible},
                 {"sample_count", rep.sample_count},
                 {"zeta", complex_json(fr.zeta)},
                 {"alpha", fr.alpha},
                 {"contained", fr.contained},
                 {"clipped", fr.domain.clipped}};
    out << j.dump() << '\n';
    return 0;
}

EntireFunction parse_g(const std::string& s) {
    if (s == "id") return make_poly({0.0, 1.0});
    if (s == "z2") return make_poly({0.0, 0.0, 1.0});
    json spec;
    try {
        spec = json::parse(s);
    } catch (const json::parse_error&) {
        invalid("--g: expected id, z2 or a JSON function spec");
    }
    return parse_function(spec);
}

int cmd_periodic(const Options& o, const Config& c, std::ostream& out) {
    const json& blk = c.block("periodic4");
    EntireFunction g = make_poly({0.0, 1.0});
    if (o.g) g = parse_g(*o.g);
    else if (blk.contains("g")) g = parse_function(blk.at("g"));
    const double r = o.r ? *o.r : get_double(blk, "r", 4.0, "periodic4");
    const double tol = o.tol ? *o.tol : get_double(blk, "tol", 1e-12, "periodic4");
    if (!(r > 0.0)) invalid("periodic4: r must be positive");
    if (!(tol > 0.0)) invalid("periodic4: tol must be positive");
    FirstOrderOptions fo;
    fo.k_offset = static_cast<int>(get_int(blk, "k_offset", 0, "periodic4"));
    fo.require_admissible = get_bool(blk, "require_admissible", false, "periodic4");
    fo.max_iter = static_cast<int>(get_int(blk, "max_iter", fo.max_iter, "periodic4"));
    if (fo.max_iter < 1) invalid("periodic4: max_iter must be >= 1");
    const FirstOrderSolution s = solve_first_order(g, r, tol, fo);
    const Period4Point p = refine_period4(g, s, tol);
    const Period4Report v = verify_period4(g, p.point, tol);
    json orbit = json::array();
    for (const C2& q : v.orbit) orbit.push_back(json{{"z", complex_json(q[0])}, {"w", complex_json(q[1])}});
    const json j{{"z0", complex_json(s.z0)},
                 {"k", s.k},
                 {"period_point", {{"z", complex_json(p.point[0])}, {"w", complex_json(p.point[1])}}},
                 {"residual", v.residual},
                 {"g_residual", p.g_residual},
                 {"primitive", v.primitive},
                 {"orbit", orbit}};
    out << j.dump() << '\n';
    return 0;
}

int cmd_escape(const Options& o, const Config& c, std::ostream& out) {
    const json& blk = c.block("escape");
    const HenonMap map(config_function(c), config_delta(c));
    const double r0 = seed_radius(o, blk, "escape");
    const int d = depth(o, blk, "escape");
    const CascadeOptions co = cascade_options(blk, "escape");
    const auto path = out_path(o, blk, c);
    const Cascade cas = build_cascade(map, r0, d, co);
    const EscapingOrbit eo = escaping_point(cas);
    const BoundReport br = bound_report(cas, co.c_max, co.grid);
    json orbit = json::array();
    for (const EscapingLevel& l : eo.levels)
        orbit.push_back(json{{"n", l.n},
                             {"u", complex_json(l.u)},
                             {"log_abs_z", tower_json(l.log_abs_z)},
                             {"arg_z", l.arg_z},
                             {"annulus_offset", l.annulus_offset},
                             {"in_annulus", l.in_annulus},
                             {"nesting_error", l.nesting_error}});
    if (path) {
        std::ofstream os = open_out(*path);
        write_orbit_csv(os, eo.record);
        finish(os, *path);
    }
    json j{{"function", map.f().name()},
           {"delta", complex_json(map.delta())},
           {"seed_radius", r0},
           {"depth", d},
           {"levels", cascade_summary(cas)},
           {"bound", bound_json(br)},
           {"orbit", orbit}};
    if (path) j["orbit_csv"] = *path;
    out << j.dump() << '\n';
    return 0;
}

json rate_json(const RateReport& r) {
    json steps = json::array();
    for (const RateStep& s : r.per_step)
        steps.push_back(json{{"level", s.level},
                             {"log_abs_t", tower_json(s.log_abs_t)},
                             {"log_abs_dz", tower_json(s.log_abs_dz)},
                             {"chart_bound", s.chart_bound}});
    return json{{"per_step", steps}, {"log_lambda", tower_json(r.log_lambda)}, {"lambda_fit", r.lambda_fit}, {"pass", r.pass}};
}

int cmd_stable(const Options& o, const Config& c, std::ostream& out) {
    const json& blk = c.block("stable");
    const HenonMap map(config_function(c), config_delta(c));
    const double r0 = seed_radius(o, blk, "stable");
    const int d = depth(o, blk, "stable");
    const CascadeOptions co = cascade_options(blk, "stable");
    const long j0 = get_int(blk, "j0", 0, "stable");
    const long iter_max = get_int(blk, "iter_max", 10, "stable");
    const double tol = o.tol ? *o.tol : get_double(blk, "tol", 1e-12, "stable");
    const cplx t_probe = blk.contains("t_probe") ? parse_complex(blk.at("t_probe"), "stable.t_probe") : cplx(0.3, 0.0);
    const long back = get_int(blk, "back_steps", 1, "stable");
    if (j0 < 0 || j0 >= d) invalid("stable: j0 must lie in [0, depth)");
    if (iter_max < 2 || iter_max > 64) invalid("stable: iter_max must lie in [2, 64]");
    if (back < 0 || back > 64) invalid("stable: back_steps must lie in [0, 64]");
    if (!(tol > 0.0)) invalid("stable: tol must be positive");
    const auto path = out_path(o, blk, c);

    const Cascade cas = build_cascade(map, r0, d, co);
    const StableFrame fr = make_stable_frame(cas);
    const StableCurve sc = local_stable_curve(fr, static_cast<int>(j0), static_cast<int>(iter_max), tol);
    const long max_steps = static_cast<long>(sc.chain.size()) - 1;
    const long n_steps = get_int(blk, "n_steps", max_steps, "stable");
    if (n_steps < 0 || n_steps > max_steps) invalid("stable: n_steps must lie in [0, " + std::to_string(max_steps) + "]");
    const RateReport rate = convergence_rate(fr, sc, t_probe, static_cast<int>(n_steps));

    const auto& grid = VerticalGraph::t_grid();
    json polyline = json::array();
    std::ostringstream csv;
    csv << "t_re,t_im,re_z,im_z,log_abs_z,level,log_abs_dz,arg_dz\n";
    for (long b = 0; b <= back; ++b) {
        const std::vector<Point2> pts = globalize(fr, sc, static_cast<int>(b));
        json line = json::array();
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const cplx t = grid[k];
            const cplx zc = cartesian_parts(pts[k].z);
            const DeepComplex dz = sc.graph().eval(DeepComplex(t));
            csv << fmt(t.real()) << ',' << fmt(t.imag()) << ',' << fmt(zc.real()) << ',' << fmt(zc.imag()) << ','
                << fmt(pts[k].z.log_abs()) << ',' << -b << ',' << fmt(dz.log_abs().to_double()) << ','
                << fmt(dz.is_zero() ? 0.0 : dz.arg()) << '\n';
            line.push_back(json{{"t", complex_json(t)}, {"z", scaled_json(pts[k].z)}, {"w", scaled_json(pts[k].w)}});
        }
        polyline.push_back(json{{"back_steps", b}, {"points", line}});
    }
    if (path) {
        std::ofstream os = open_out(*path);
        os << csv.str();
        finish(os, *path);
    }
    json dist = json::array(), ratio = json::array();
    for (const Tower& t : sc.log_dist) dist.push_back(tower_json(t));
    for (const Tower& t : sc.log_ratio) ratio.push_back(tower_json(t));
    json j{{"function", map.f().name()},
           {"delta", complex_json(map.delta())},
           {"seed_radius", r0},
           {"depth", d},
           {"j0", j0},
           {"converged", sc.converged},
           {"chain_length", sc.chain.size()},
           {"log_dist", dist},
           {"log_ratio", ratio},
           {"max_log_step_ratio", tower_json(sc.max_log_step_ratio)},
           {"max_log_slope", tower_json(sc.graph().max_log_slope())},
           {"rate", rate_json(rate)},
           {"t_probe", complex_json(t_probe)},
           {"polyline", polyline}};
    if (path) j["curve_csv"] = *path;
    out << j.dump() << '\n';
    return 0;
}

int cmd_render(const Options& o, const Config& c, std::ostream& out) {
    const json& blk = c.block("render");
    const HenonMap map(config_function(c), config_delta(c));
    SliceSpec s;
    if (blk.contains("base")) s.base = parse_c2(blk.at("base"), "render.base");
    if (blk.contains("u")) s.u = parse_c2(blk.at("u"), "render.u");
    if (blk.contains("v")) s.v = parse_c2(blk.at("v"), "render.v");
    s.width = static_cast<int>(get_int(blk, "width", s.width, "render"));
    s.height = static_cast<int>(get_int(blk, "height", s.height, "render"));
    s.s_min = get_double(blk, "s_min", s.s_min, "render");
    s.s_max = get_double(blk, "s_max", s.s_max, "render");
    s.t_min = get_double(blk, "t_min", s.t_min, "render");
    s.t_max = get_double(blk, "t_max", s.t_max, "render");
    s.max_iter = static_cast<int>(get_int(blk, "max_iter", s.max_iter, "render"));
    s.log_escape_radius = get_double(blk, "log_escape_radius", s.log_escape_radius, "render");
    validate(s);
    const int threads = resolve_threads(o, c);
    const std::string path = out_path(o, blk, c).value_or("render.ppm");
    const EscapeGrid g = render_slice(map, s, threads);
    write_ppm(g, path);
    long escaped = 0;
    for (int n : g.counts) escaped += n < s.max_iter;
    const json j{{"function", map.f().name()},
                 {"delta", complex_json(map.delta())},
                 {"width", s.width},
                 {"height", s.height},
                 {"max_iter", s.max_iter},
                 {"log_escape_radius", s.log_escape_radius},
                 {"threads", threads},
                 {"escaped", escaped},
                 {"bounded", static_cast<long>(g.counts.size()) - escaped},
                 {"out", path}};
    out << j.dump() << '\n';
    return 0;
}

int cmd_orbit(const Options& o, const Config& c, std::ostream& out) {
    const json& blk = c.block("orbit");
    const HenonMap map(config_function(c), config_delta(c));
    const C2 start = blk.contains("start") ? parse_c2(blk.at("start"), "orbit.start") : C2{cplx(0.5, 0.0), cplx(0.0, 0.0)};
    const long n_max = get_int(blk, "n_max", 64, "orbit");
    if (n_max < 0 || n_max > 1000000) invalid("orbit: n_max must lie in [0, 1000000]");
    const double R = get_double(blk, "log_escape_radius", 2.995732273553991, "orbit");
    const OrbitRecord rec = iterate_orbit(map, Point2::from_cartesian(start), static_cast<int>(n_max), R);
    if (const auto path = out_path(o, blk, c)) {
        std::ofstream os = open_out(*path);
        write_orbit_csv(os, rec);
        finish(os, *path);
    } else {
        write_orbit_csv(out, rec);
    }
    return 0;
}

int exit_code(ErrorKind k) {
    if (k == ErrorKind::ValidationError) return 2;
    if (k == ErrorKind::IoError) return 1;
    return is_numerical(k) ? 3 : 1;
}

void report(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

cplx parse_complex(const json& v, const std::string& where) {
    double re = 0.0, im = 0.0;
    if (v.is_number()) {
        re = v.get<double>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        re = v[0].get<double>();
        im = v[1].get<double>();
    } else {
        invalid(where + ": expected a number or [re, im]");
    }
    if (!std::isfinite(re) || !std::isfinite(im)) invalid(where + ": must be finite");
    return {re, im};
}

EntireFunction parse_function(const json& spec) {
    if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string())
        invalid("function: expected an object with a string 'kind'");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "exp" || kind == "sin" || kind == "z_exp" || kind == "exp_z2") {
        check_keys(spec, {"kind"}, "function");
        if (kind == "exp") return make_exp();
        if (kind == "sin") return make_sin();
        if (kind == "z_exp") return make_z_exp();
        return make_exp_z2();
    }
    if (kind == "poly") {
        check_keys(spec, {"kind", "coeffs"}, "function");
        if (!spec.contains("coeffs")) invalid("function: poly needs coeffs");
        std::vector<cplx> coeffs = complex_list(spec.at("coeffs"), "function.coeffs");
        if (coeffs.empty()) invalid("function: poly needs at least one coefficient");
        return make_poly(std::move(coeffs));
    }
    if (kind == "exp_of") {
        check_keys(spec, {"kind", "g", "scale", "offset"}, "function");
        if (!spec.contains("g")) invalid("function: exp_of needs g");
        const json& g = spec.at("g");
        check_keys(g, {"kind", "coeffs"}, "function.g");
        if (!g.contains("kind") || g.at("kind") != "poly" || !g.contains("coeffs"))
            invalid("function.g: expected {\"kind\":\"poly\",\"coeffs\":[...]}");
        std::vector<cplx> coeffs = complex_list(g.at("coeffs"), "function.g.coeffs");
        if (coeffs.empty()) invalid("function.g: needs at least one coefficient");
        const cplx scale = spec.contains("scale") ? parse_complex(spec.at("scale"), "function.scale") : cplx(1.0, 0.0);
        const cplx offset = spec.contains("offset") ? parse_complex(spec.at("offset"), "function.offset") : cplx(0.0, 0.0);
        return make_exp_of(std::move(coeffs), scale, offset);
    }
    invalid("function: unknown kind '" + kind + "'");
}

json tower_json(const Tower& t) {
    if (t.is_double()) return t.to_double();
    if (t.height() == 0) return fmt(t.to_double());
    return json{{"sign", t.sign()}, {"tower_height", t.height()}, {"top", t.top()}};
}

json complex_json(cplx z) { return json::array({finite_or_string(z.real()), finite_or_string(z.imag())}); }

void write_orbit_csv(std::ostream& os, const OrbitRecord& rec) {
    os << "n,re_z,im_z,re_w,im_w,log_abs_z,arg_z\n";
    for (std::size_t n = 0; n < rec.points.size(); ++n) {
        const Point2& p = rec.points[n];
        const cplx z = cartesian_parts(p.z), w = cartesian_parts(p.w);
        os << n << ',' << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << fmt(w.real()) << ',' << fmt(w.imag()) << ','
           << fmt(p.z.log_abs()) << ',' << fmt(p.z.is_zero() ? 0.0 : p.z.arg()) << '\n';
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"transcendental Henon map toolkit", "thenon"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all");
    app.option_defaults()->always_capture_default();
    const char* commands[][2] = {{"wv", "Wiman-Valiron residual report"},
                                 {"periodic", "period-4 orbit of (e^{g(z)} + w, z)"},
                                 {"escape", "escaping orbit cascade"},
                                 {"stable", "local stable curve and its globalization"},
                                 {"render", "escape-time slice to PPM"},
                                 {"orbit", "forward orbit as CSV"}};
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", o.config_path, "JSON config file");
        sub->add_option("--out", o.out, "output path");
        sub->add_option("--threads", o.threads, "worker threads");
        sub->add_option("--seed-radius", o.seed_radius, "starting radius");
        sub->add_option("--depth", o.depth, "cascade depth");
        sub->add_option("--tol", o.tol, "solver tolerance");
        sub->add_option("--r", o.r, "radius");
        sub->add_option("--g", o.g, "exponent polynomial: id, z2 or a JSON spec");
        sub->callback([&o, name = std::string(name)] { o.command = name; });
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        report(err, "UsageError", e.what());
        return 2;
    }

    try {
        const Config c = load_config(o.config_path);
        if (o.command == "wv") return cmd_wv(o, c, out);
        if (o.command == "periodic") return cmd_periodic(o, c, out);
        if (o.command == "escape") return cmd_escape(o, c, out);
        if (o.command == "stable") return cmd_stable(o, c, out);
        if (o.command == "render") return cmd_render(o, c, out);
        return cmd_orbit(o, c, out);
    } catch (const Error& e) {
        report(err, std::string(to_string(e.kind())), e.what());
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        report(err, "ValidationError", e.what());
        return 2;
    } catch (const std::exception& e) {
        report(err, "InternalError", e.what());
        return 1;
    }
}

}  // namespace thenon::cli
