#include "thenon/eremenko.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thenon/errors.hpp"

namespace thenon {

namespace {

constexpr double kChartRe = 2.0;
constexpr double kChartIm = 4.0 * kPi;

// Levels with r above this use the asymptotic model.
const double kNativeLogR = std::log(1e6);

bool in_chart(cplx u, double slack) {
    return std::abs(u.real()) <= kChartRe + slack && std::abs(u.imag()) <= kChartIm + slack;
}


}  // namespace

Cascade::Cascade(HenonMap map, std::vector<LevelFrame> levels, CascadeOptions opts)
    : map_(std::move(map)), levels_(std::move(levels)), opts_(std::move(opts)), memo_(std::make_unique<Memo>()) {
    if (levels_.empty()) throw Error(ErrorKind::ValidationError, "Cascade: at least one level required");
}

DeepComplex Cascade::u_over_N(int n, cplx u) const {
    const LevelFrame& lv = level(n);
    if (lv.native) return DeepComplex(u / static_cast<double>(lv.wv->N));
    return DeepComplex(u) / DeepComplex::from_polar(lv.log_N, 0.0);
}

DeepComplex Cascade::z_at(int n, cplx u) const {
    const LevelFrame& lv = level(n);
    if (lv.native) return DeepComplex(chart_point(*lv.wv, u));
    const cplx e = u_over_N(n, u).to_complex();
    return DeepComplex::from_polar(lv.log_r + Tower(e.real()), lv.arg_zeta + e.imag());
}

cplx Cascade::L(int n, cplx u) const {
    const LevelFrame& lv = level(n);
    const EntireFunction& f = map_.f();
    if (lv.native) {
        const cplx zeta = lv.wv->zeta;
        return f.log_increment(zeta, DeepComplex(zeta * expm1(u / static_cast<double>(lv.wv->N)))).to_complex();
    }
    // (N/d)(e^{d u/N} - 1); once N is itself beyond the double range only the
    // leading terms survive and are formed directly, since a round trip
    // through u/N would lose |u|
    const double d = f.asymptotic_model()->degree;
    const DeepComplex N = DeepComplex::from_polar(lv.log_N, 0.0);
    if (lv.log_N > Tower(60.0)) return u + (DeepComplex(u * u * (d / 2.0)) / N).to_complex();
    const DeepComplex x = DeepComplex(cplx(d, 0.0)) * u_over_N(n, u);
    return (expm1(x) * N / DeepComplex(cplx(d, 0.0))).to_complex();
}

cplx Cascade::Lp(int n, cplx u) const {
    const LevelFrame& lv = level(n);
    if (lv.native) {
        const cplx z = chart_point(*lv.wv, u);
        return map_.f().derivative_ratio(z, 1) * z / static_cast<double>(lv.wv->N);
    }
    const double d = map_.f().asymptotic_model()->degree;
    if (lv.log_N > Tower(60.0)) return 1.0 + (DeepComplex(u * d) / DeepComplex::from_polar(lv.log_N, 0.0)).to_complex();
    return 1.0 + expm1(DeepComplex(cplx(d, 0.0)) * u_over_N(n, u)).to_complex();
}

DeepComplex Cascade::q_at(int n, cplx u) const {
    const LevelFrame& lv = level(n);
    if (lv.native) return DeepComplex(map_.f().derivative_ratio(chart_point(*lv.wv, u), 1));
    // (N / z) L', with N/r carried as its own tower
    const cplx e = u_over_N(n, u).to_complex();
    return DeepComplex::from_polar(lv.log_N_over_r - Tower(e.real()), -lv.arg_zeta - e.imag()) * DeepComplex(Lp(n, u));
}

DeepComplex Cascade::f_at(int n, cplx u) const {
    const LevelFrame& lv = level(n);
    const cplx l = L(n, u);
    return DeepComplex::from_polar(lv.log_M + Tower(l.real()), lv.arg_f_zeta + l.imag());
}

DeepComplex Cascade::log_increment(int n, cplx u, const DeepComplex& h) const {
    const LevelFrame& lv = level(n);
    if (lv.native) return map_.f().log_increment(chart_point(*lv.wv, u), h);
    // b z^d ((1 + h/z)^d - 1) with b z^d = (N/d) e^{d u/N}
    const double d = map_.f().asymptotic_model()->degree;
    const DeepComplex dd(cplx(d, 0.0));
    const DeepComplex bzd = DeepComplex::from_polar(lv.log_N, 0.0) / dd * DeepComplex(Lp(n, u));
    const DeepComplex x = h / z_at(n, u);
    return bzd * expm1(dd * log1p(x));
}

cplx Cascade::solve_branch(int n, cplx rhs) const {
    if (n < 1 || n > depth()) throw Error(ErrorKind::ValidationError, "branch: level out of range");
    const int m = n - 1;
    const cplx delta = map_.delta();
    auto E = [&](cplx x) {
        cplx e = L(m, x) - rhs;
        if (m > 0) e += log1p(-DeepComplex(delta) * phi_at(m, x) / f_at(m, x)).to_complex();
        return e;
    };
    cplx x = rhs;
    cplx e = E(x);
    for (int it = 0; it < 60; ++it) {
        if (std::abs(e) <= 1e-14 * (1.0 + std::abs(x))) break;
        const cplx step = e / Lp(m, x);
        double lam = 1.0;
        cplx xn = x - step;
        cplx en = E(xn);
        for (int h = 0; h < 20 && !(std::abs(en) < std::abs(e)); ++h) {
            lam *= 0.5;
            xn = x - lam * step;
            en = E(xn);
        }
        x = xn;
        e = en;
    }
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()) || !(std::abs(e) <= 1e-9 * (1.0 + std::abs(x))))
        throw Error(ErrorKind::BranchNewtonFailed, "branch: Newton failed at level " + std::to_string(n));
    return x;
}

cplx Cascade::branch(int n, cplx u) const {
    const auto key = std::make_pair(n, std::make_pair(u.real(), u.imag()));
    {
        std::lock_guard<std::mutex> lock(memo_->mu);
        auto it = memo_->anchors.find(key);
        if (it != memo_->anchors.end()) return it->second;
    }
    // always from the level's root anchor, never from a neighbouring cache
    // entry, so results do not depend on call order
    const cplx rhs = (DeepComplex(level(n).sigma) + u_over_N(n, u)).to_complex();
    const cplx x = solve_branch(n, rhs);
    if (!in_chart(x, 1e-9)) throw Error(ErrorKind::OutsideDomain, "branch: image leaves D_" + std::to_string(n - 1));
    std::lock_guard<std::mutex> lock(memo_->mu);
    memo_->anchors.emplace(key, x);
    return x;
}

double Cascade::branch_residual(int n, cplx u) const {
    const int m = n - 1;
    const cplx x = branch(n, u);
    const cplx rhs = (DeepComplex(level(n).sigma) + u_over_N(n, u)).to_complex();
    cplx e = L(m, x) - rhs;
    if (m > 0) e += log1p(-DeepComplex(map_.delta()) * phi_at(m, x) / f_at(m, x)).to_complex();
    return std::abs(e);
}

DeepComplex Cascade::phi_at(int n, cplx u) const {
    if (n == 0) return DeepComplex::zero();
    return z_at(n - 1, branch(n, u));
}

DeepComplex Cascade::phi_prime(int n, cplx u) const {
    if (n == 0) return DeepComplex::zero();
    return DeepComplex(cplx(1.0, 0.0)) / dF(n - 1, branch(n, u));
}

DeepComplex Cascade::dF(int n, cplx u) const {
    return f_at(n, u) * q_at(n, u) - DeepComplex(map_.delta()) * phi_prime(n, u);
}

cplx Cascade::eps_ratio(int n, cplx u) const {
    if (n == 0) return 0.0;
    return (DeepComplex(map_.delta()) * phi_prime(n, u) / (f_at(n, u) * q_at(n, u))).to_complex();
}

cplx Cascade::E1(int n, cplx u, const DeepComplex& h) const {
    const LevelFrame& lv = level(n);
    const DeepComplex q = q_at(n, u);
    const DeepComplex qh = q * h;
    // ℓ / (q h) with ℓ = log f(z+h) - log f(z)
    cplx rl = 1.0;
    if (lv.native) {
        if (!(qh.log_abs() < Tower(-40.0))) rl = (map_.f().log_increment(chart_point(*lv.wv, u), h) / qh).to_complex();
    } else {
        const double d = map_.f().asymptotic_model()->degree;
        const DeepComplex x = h / z_at(n, u);
        if (x.log_abs() < Tower(-18.0)) {
            rl = 1.0 + (DeepComplex(cplx((d - 1.0) / 2.0, 0.0)) * x).to_complex();
        } else {
            const cplx xc = x.to_complex();
            rl = expm1(d * log1p(xc)) / (d * xc);
        }
    }
    const DeepComplex l = DeepComplex(rl) * qh;
    if (l.log_abs() < Tower(-18.0)) return rl * (1.0 + 0.5 * l.to_complex());
    const cplx lc = l.to_complex();
    return rl * expm1(lc) / lc;
}

cplx Cascade::F_factor(int n, cplx u, const DeepComplex& h) const {
    const cplx e1 = E1(n, u, h);
    if (n == 0 || h.is_zero()) return e1;
    const cplx eps = eps_ratio(n, u);
    if (eps == cplx(0.0, 0.0)) return e1;
    return (e1 - eps * phi_factor(n, u, h)) / (1.0 - eps);
}

cplx Cascade::phi_factor(int n, cplx u, const DeepComplex& h) const {
    if (n == 0) return 0.0;
    if (h.is_zero()) return 1.0;
    const cplx x = branch(n, u);
    const DeepComplex D = dF(n - 1, x);
    cplx kappa = 1.0;
    for (int it = 0; it < 60; ++it) {
        const cplx next = 1.0 / F_factor(n - 1, x, DeepComplex(kappa) * h / D);
        if (std::abs(next - kappa) <= 1e-15 * std::abs(next)) return next;
        kappa = next;
    }
    throw Error(ErrorKind::BranchNewtonFailed, "incr_phi: no convergence at level " + std::to_string(n));
}

DeepComplex Cascade::incr_F(int n, cplx u, const DeepComplex& h) const {
    if (h.is_zero()) return h;
    return DeepComplex(F_factor(n, u, h)) * dF(n, u) * h;
}

DeepComplex Cascade::incr_phi(int n, cplx u, const DeepComplex& h) const {
    if (n == 0 || h.is_zero()) return DeepComplex::zero();
    return DeepComplex(phi_factor(n, u, h)) * h / dF(n - 1, branch(n, u));
}

double Cascade::c_ratio(int n, cplx u) const {
    const cplx l = L(n, u);
    const cplx en = u_over_N(n, u).to_complex();
    double r = std::exp(l.real() - en.real()) * std::abs(Lp(n, u));
    if (n > 0) {
        const DeepComplex fp = f_at(n, u) * q_at(n, u);
        r *= std::abs(1.0 - (DeepComplex(map_.delta()) * phi_prime(n, u) / fp).to_complex());
    }
    return r;
}

namespace {

struct Candidate {
    LevelFrame lv;
    bool ok = false;
};

double margin_of(double s, const Tower& log_N) {
    const double two_over_N = Tower::exp(Tower(std::log(2.0)) - log_N).to_double();
    return std::min(1.0 + s - two_over_N, 1.0 - s - two_over_N);
}

Candidate try_level(const HenonMap& map, const LevelFrame& prev, int n, double s, const CascadeOptions& opts) {
    const EntireFunction& f = map.f();
    Candidate c;
    LevelFrame& lv = c.lv;
    lv.n = n;
    lv.s = s;
    lv.log_r = prev.log_M + Tower(s);
    if (lv.log_r.is_double() && lv.log_r.to_double() < kNativeLogR) {
        const double r = std::exp(lv.log_r.to_double());
        WVFrame wv = build_frame(f, r);
        const auto rep = residual_report(f, wv);
        lv.native = true;
        lv.arg_zeta = std::arg(wv.zeta);
        lv.log_M = wv.log_M;
        lv.arg_f_zeta = wv.arg_f_zeta;
        lv.log_N = std::log(static_cast<double>(wv.N));
        lv.contained = wv.contained;
        lv.eps_bound = rep.admissible ? rep.sup_eps0 : kInf;
        lv.wv = wv;
    } else {
        const auto& model = f.asymptotic_model();
        if (!model) {
            throw Error(ErrorKind::DepthUnrepresentable,
                        "build_cascade: level " + std::to_string(n) + " needs log r = " + lv.log_r.str() +
                            " but " + f.name() + " has no asymptotic model");
        }
        const double d = model->degree;
        const Tower dlogr = Tower(d) * lv.log_r;
        lv.log_N = Tower(std::log(d * std::abs(model->lead))) + dlogr;
        lv.log_M = Tower(std::log(std::abs(model->scale))) + Tower::exp(Tower(std::log(std::abs(model->lead))) + dlogr);
        double best = kInf;
        for (int j = 0; j < model->degree; ++j) {
            const double a = wrap_angle((-std::arg(model->lead) + 2 * kPi * j) / d);
            if (a < best) best = a;
        }
        lv.arg_zeta = best;
        lv.arg_f_zeta = std::arg(model->scale);
        // ε_0 ≈ exp(d u^2 / 2N) - 1 over the chart rectangle
        lv.eps_bound = Tower::exp(Tower(std::log(d * (4.0 + 16.0 * kPi * kPi) / 2.0)) - lv.log_N).to_double();
        const double alpha = 2.0 / 3.0;
        lv.contained = Tower(1.0 - alpha) * lv.log_N > Tower(std::log(2.0 + 4.0 * kPi * 1.001));
    }
    lv.log_N_over_r = lv.log_N - lv.log_r;
    lv.sigma = cplx(s, wrap_angle(lv.arg_zeta - prev.arg_f_zeta));
    lv.log_margin = margin_of(s, lv.log_N);
    const double log_delta = std::log(std::abs(map.delta()));
    const double half = lv.log_margin / 2.0;
    lv.delta_nbhd = std::abs(map.delta());
    if (half > 0.0 && Tower(log_delta) - lv.log_r > Tower(std::log(half))) {
        lv.delta_nbhd = Tower::exp(Tower(std::log(half)) + lv.log_r).to_double();
    }
    c.ok = lv.log_margin >= opts.min_margin && lv.contained && lv.eps_bound < 0.25 &&
           lv.log_M - lv.log_r >= Tower(opts.log_M_over_r_min);
    return c;
}

}  // namespace

Cascade build_cascade(const HenonMap& map, double r0_seed, int depth, const CascadeOptions& opts) {
    if (depth < 1) throw Error(ErrorKind::ValidationError, "build_cascade: depth must be >= 1");
    if (!(r0_seed > 0.0)) throw Error(ErrorKind::ValidationError, "build_cascade: r0_seed must be positive");
    const EntireFunction& f = map.f();
    std::vector<LevelFrame> levels;

    const double r0 = admissible_radius(f, r0_seed, +1);
    {
        LevelFrame lv;
        WVFrame wv = build_frame(f, r0);
        lv.n = 0;
        lv.native = true;
        lv.log_r = std::log(r0);
        lv.arg_zeta = std::arg(wv.zeta);
        lv.log_M = wv.log_M;
        lv.arg_f_zeta = wv.arg_f_zeta;
        lv.log_N = std::log(static_cast<double>(wv.N));
        lv.log_N_over_r = lv.log_N - lv.log_r;
        lv.contained = wv.contained;
        lv.eps_bound = residual_report(f, wv).sup_eps0;
        lv.log_margin = kInf;
        lv.delta_nbhd = std::abs(map.delta());
        lv.wv = wv;
        if (wv.log_M - std::log(r0) < opts.log_M_over_r_min)
            throw Error(ErrorKind::NoAdmissibleRadius, "build_cascade: M(r_0)/r_0 below the configured bound");
        levels.push_back(lv);
    }

    for (int n = 1; n <= depth; ++n) {
        std::vector<double> cands;
        if (static_cast<int>(opts.offsets.size()) >= n) cands.push_back(opts.offsets[n - 1]);
        else cands.push_back(0.0);
        for (int k = 1; k <= 18; ++k) {
            cands.push_back(0.05 * k);
            cands.push_back(-0.05 * k);
        }
        bool found = false;
        for (double s : cands) {
            if (std::abs(s) >= 1.0) continue;
            Candidate c = try_level(map, levels.back(), n, s, opts);
            if (c.ok) {
                levels.push_back(c.lv);
                found = true;
                break;
            }
        }
        if (!found)
            throw Error(ErrorKind::NoAdmissibleRadius, "build_cascade: no admissible radius in A_" + std::to_string(n));
    }

    Cascade c(map, std::move(levels), opts);
    for (int n = 1; n <= depth; ++n) {
        if (!(c.branch_residual(n, 0.0) < 1e-9))
            throw Error(ErrorKind::BranchNewtonFailed, "build_cascade: branch identity fails at level " + std::to_string(n));
    }
    for (int n = 0; n < depth; ++n) c.set_covering(n, covering_winding(c, n));
    const BoundReport rep = bound_report(c, opts.c_max, opts.grid);
    for (const auto& bl : rep.per_level) c.set_ratios(bl.n, bl.ratio_min, bl.ratio_max);
    c.set_bound_C(std::max(rep.C_upper, 1.0 / rep.C_lower));
    return c;
}

ScaledComplex branch_eval(const Cascade& c, int n, const ScaledComplex& w) {
    if (n < 1 || n > c.depth()) throw Error(ErrorKind::ValidationError, "branch_eval: level out of range");
    const LevelFrame& prev = c.level(n - 1);
    if (!prev.log_M.is_double())
        throw Error(ErrorKind::DepthUnrepresentable, "branch_eval: w at level " + std::to_string(n) + " is not representable");
    const double off = w.log_abs() - prev.log_M.to_double();
    if (!(std::abs(off) < 1.0)) throw Error(ErrorKind::OutsideDomain, "branch_eval: w outside the annulus A_n");
    const double im0 = c.level(n).sigma.imag();
    const cplx rhs(off, im0 + wrap_angle(w.arg() - prev.arg_f_zeta - im0));
    const cplx x = c.solve_branch(n, rhs);
    if (!in_chart(x, 1e-9)) throw Error(ErrorKind::OutsideDomain, "branch_eval: preimage outside D_{n-1}");
    return c.z_at(n - 1, x).to_scaled();
}

EscapingOrbit escaping_point(const Cascade& c) {
    const int d = c.depth();
    if (d < 1) throw Error(ErrorKind::ValidationError, "escaping_point: cascade depth must be >= 1");
    std::vector<cplx> u(d + 1);
    u[d] = 0.0;
    for (int n = d; n >= 1; --n) {
        try {
            u[n - 1] = c.branch(n, u[n]);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::OutsideDomain)
                throw Error(ErrorKind::PullbackOutsideDomain, "escaping_point: pullback left D_" + std::to_string(n - 1));
            throw;
        }
    }
    EscapingOrbit out;
    std::vector<DeepComplex> z(d + 1);
    for (int n = 0; n <= d; ++n) {
        EscapingLevel el;
        el.n = n;
        el.u = u[n];
        z[n] = c.z_at(n, u[n]);
        el.arg_z = z[n].arg();
        if (n == 0) {
            el.log_abs_z = z[0].log_abs();
        } else {
            // forward: z_n = f(z_{n-1}) - δ z_{n-2}
            const int m = n - 1;
            cplx l = c.L(m, u[m]);
            if (m > 0) l += log1p(-DeepComplex(c.map().delta()) * z[m - 1] / c.f_at(m, u[m])).to_complex();
            el.annulus_offset = l.real();
            el.log_abs_z = c.level(m).log_M + Tower(l.real());
            el.in_annulus = std::abs(el.annulus_offset) <= 1.0 && el.log_abs_z >= c.level(m).annulus_inner() &&
                            el.log_abs_z <= c.level(m).annulus_outer();
            const cplx chart = (DeepComplex(c.level(n).sigma) + c.u_over_N(n, u[n])).to_complex();
            el.nesting_error = std::abs(l - chart);
        }
        out.levels.push_back(el);
    }
    out.record.log_escape_radius = kInf;
    for (int n = 0; n <= d; ++n) {
        if (!z[n].log_abs().is_double()) {
            out.record.truncated = true;
            break;
        }
        const ScaledComplex w = n == 0 ? ScaledComplex::zero() : z[n - 1].to_scaled();
        out.record.points.push_back({z[n].to_scaled(), w});
    }
    return out;
}

BoundReport bound_report(const Cascade& c, double c_max, int grid) {
    if (grid < 2) throw Error(ErrorKind::ValidationError, "bound_report: grid must be >= 2");
    BoundReport rep;
    rep.c_max = c_max;
    rep.C_lower = kInf;
    rep.C_upper = 0.0;
    for (int n = 0; n <= c.depth(); ++n) {
        BoundLevel bl;
        bl.n = n;
        bl.ratio_min = kInf;
        bl.max_log_phi_prime = Tower::neg_inf();
        for (int i = 0; i < grid; ++i) {
            for (int k = 0; k < grid; ++k) {
                const cplx u(-kChartRe + 2 * kChartRe * i / (grid - 1), -kChartIm + 2 * kChartIm * k / (grid - 1));
                const double r = c.c_ratio(n, u);
                bl.ratio_min = std::min(bl.ratio_min, r);
                bl.ratio_max = std::max(bl.ratio_max, r);
                if (n >= 1) {
                    const Tower lp = c.phi_prime(n, u).log_abs();
                    if (lp > bl.max_log_phi_prime) bl.max_log_phi_prime = lp;
                }
            }
        }
        bl.ratio_center = c.c_ratio(n, 0.0);
        rep.C_lower = std::min(rep.C_lower, bl.ratio_min);
        rep.C_upper = std::max(rep.C_upper, bl.ratio_max);
        rep.per_level.push_back(bl);
    }
    rep.pass = rep.C_lower >= 1.0 / c_max && rep.C_upper <= c_max;
    return rep;
}

int covering_winding(const Cascade& c, int n, int per_side) {
    const cplx delta = c.map().delta();
    auto image = [&](cplx u) {
        cplx l = c.L(n, u);
        if (n > 0) l += log1p(-DeepComplex(delta) * c.phi_at(n, u) / c.f_at(n, u)).to_complex();
        return l;
    };
    const cplx corners[4] = {{-kChartRe, -kChartIm}, {kChartRe, -kChartIm}, {kChartRe, kChartIm}, {-kChartRe, kChartIm}};
    std::vector<cplx> path;
    for (int side = 0; side < 4; ++side) {
        const cplx a = corners[side], b = corners[(side + 1) % 4];
        for (int k = 0; k < per_side; ++k) path.push_back(image(a + (b - a) * (static_cast<double>(k) / per_side)));
    }
    int best = 1 << 30;
    for (int i = 0; i < 5; ++i) {
        for (int k = 0; k < 7; ++k) {
            const cplx p(-1.0 + 0.5 * i, -1.5 * kPi + 0.5 * kPi * k);
            double total = 0.0;
            for (std::size_t j = 0; j < path.size(); ++j) {
                const cplx a = path[j] - p, b = path[(j + 1) % path.size()] - p;
                total += wrap_angle(std::arg(b) - std::arg(a));
            }
            best = std::min(best, static_cast<int>(std::lround(total / (2 * kPi))));
        }
    }
    return best;
}

}  // namespace thenon
