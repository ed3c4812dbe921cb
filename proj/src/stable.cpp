#include "thenon/stable.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thenon/errors.hpp"

namespace thenon {

namespace {

const Tower kTiny(-45.0);
// relative agreement of successive fiber iterates
const Tower kFiberTol(std::log(1e-13));

DeepComplex one() { return DeepComplex(cplx(1.0, 0.0)); }

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (cplx x : v) m = std::max(m, std::abs(x));
    return m;
}

bool is_tiny(const DeepComplex& x) { return x.is_zero() || x.log_abs() < kTiny; }

void check_level(const StableFrame& fr, int n, int need_above) {
    if (n < 0 || n + need_above > fr.depth())
        throw Error(ErrorKind::ValidationError, "stable: level " + std::to_string(n) + " out of range");
}

}  // namespace

StableFrame make_stable_frame(const Cascade& c) {
    StableFrame fr;
    fr.cascade = &c;
    const EscapingOrbit orb = escaping_point(c);
    for (const auto& l : orb.levels) {
        fr.u.push_back(l.u);
        fr.A.push_back(c.dF(l.n, l.u));
    }
    return fr;
}

Point2 shear(const Cascade& c, int n, const ScaledComplex& z, cplx t) {
    if (std::abs(t) > 1.0 + 1e-12) throw Error(ErrorKind::OutsideDomain, "shear: |t| > 1");
    if (n < 0 || n > c.depth()) throw Error(ErrorKind::ValidationError, "shear: level out of range");
    if (n == 0) {
        if (!c.level(0).wv->domain.contains(z.to_cartesian(), 1e-9)) throw Error(ErrorKind::OutsideDomain, "shear: z outside D_0");
        return {z, ScaledComplex::from_cartesian(t)};
    }
    return {z, ScaledComplex::from_cartesian(t) + branch_eval(c, n, z)};
}

std::pair<ScaledComplex, cplx> unshear(const Cascade& c, int n, const Point2& p) {
    if (n < 0 || n > c.depth()) throw Error(ErrorKind::ValidationError, "unshear: level out of range");
    if (n == 0) return {p.z, p.w.to_cartesian()};
    return {p.z, (p.w - branch_eval(c, n, p.z)).to_cartesian()};
}

ChartOffset tilde_map(const StableFrame& fr, int n, const ChartOffset& p) {
    check_level(fr, n, 1);
    const Cascade& c = *fr.cascade;
    if (!p.t.is_zero() && p.t.log_abs() > Tower(1e-12)) throw Error(ErrorKind::OutsideDomain, "tilde_map: |t| > 1");
    const DeepComplex delta(c.map().delta());
    ChartOffset out;
    out.xi = c.incr_F(n, fr.u[n], p.xi) - delta * p.t;
    // z̃ must stay where φ_{n+1} is defined: within D_{n+1} in size
    const LevelFrame& up = c.level(n + 1);
    const Tower extent = up.log_r - up.log_N + Tower(std::log(2.0 + 8.0 * kPi));
    if (!out.xi.is_zero() && out.xi.log_abs() > extent)
        throw Error(ErrorKind::OutsideDomain, "tilde_map: image leaves D_" + std::to_string(n + 1));
    out.t = p.xi - c.incr_phi(n + 1, fr.u[n + 1], out.xi);
    return out;
}

const std::vector<cplx>& VerticalGraph::t_grid() {
    static const std::vector<cplx> grid = [] {
        std::vector<cplx> g;
        for (int k = 0; k < kDiameter; ++k) g.emplace_back(-1.0 + k / 16.0, 0.0);
        for (int k = 0; k < kBoundary; ++k) g.push_back(std::polar(1.0, kPi * (2 * k + 1) / kBoundary));
        return g;
    }();
    return grid;
}

VerticalGraph::VerticalGraph(int level, DeepComplex scale, std::vector<cplx> eta)
    : level_(level), scale_(std::move(scale)), eta_(std::move(eta)), deriv_(kDiameter) {
    if (static_cast<int>(eta_.size()) != kNodes) throw Error(ErrorKind::ValidationError, "VerticalGraph: wrong node count");
    const double h = 1.0 / 16.0;
    std::vector<cplx> sec(kDiameter - 1);
    for (int k = 0; k + 1 < kDiameter; ++k) sec[k] = (eta_[k + 1] - eta_[k]) / h;
    // |η'| may not exceed 1/|scale|, the cone bound in ξ
    const Tower lcap = -scale_.log_abs();
    for (int k = 0; k < kDiameter; ++k) {
        cplx d;
        double lim;
        if (k == 0) {
            d = sec[0];
            lim = std::abs(sec[0]);
        } else if (k == kDiameter - 1) {
            d = sec[k - 1];
            lim = std::abs(sec[k - 1]);
        } else {
            d = 0.5 * (sec[k - 1] + sec[k]);
            lim = 3.0 * std::min(std::abs(sec[k - 1]), std::abs(sec[k]));
        }
        if (std::abs(d) > lim) d *= lim / std::abs(d);
        if (std::abs(d) > 0.0 && Tower(std::log(std::abs(d))) > lcap) d /= std::abs(d) * std::exp(-lcap.to_double());
        deriv_[k] = d;
    }
}

VerticalGraph VerticalGraph::vertical(int level) {
    return VerticalGraph(level, one(), std::vector<cplx>(kNodes, cplx(0.0, 0.0)));
}

cplx VerticalGraph::interp(cplx tau) const {
    const double h = 1.0 / 16.0;
    const int k = std::clamp(static_cast<int>(std::floor((tau.real() + 1.0) / h)), 0, kDiameter - 2);
    const cplx s = (tau - cplx(-1.0 + k * h, 0.0)) / h;
    const cplx s2 = s * s, s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * eta_[k] + (s3 - 2.0 * s2 + s) * h * deriv_[k] +
           (-2.0 * s3 + 3.0 * s2) * eta_[k + 1] + (s3 - s2) * h * deriv_[k + 1];
}

DeepComplex VerticalGraph::eval(const DeepComplex& tau) const {
    if (tau.is_zero()) return scale_ * DeepComplex(eta_[kCenter]);
    if (tau.log_abs() < kTiny) return scale_ * (DeepComplex(eta_[kCenter]) + DeepComplex(deriv_[kCenter]) * tau);
    if (tau.log_abs() > Tower(1e-9)) throw Error(ErrorKind::OutsideDomain, "VerticalGraph: |t| > 1");
    return scale_ * DeepComplex(interp(tau.to_complex()));
}

Tower VerticalGraph::max_log_slope() const {
    const auto& t = t_grid();
    double worst = 0.0;
    auto pair = [&](int a, int b) { worst = std::max(worst, std::abs(eta_[a] - eta_[b]) / std::abs(t[a] - t[b])); };
    for (int k = 0; k + 1 < kDiameter; ++k) pair(k, k + 1);
    for (int k = 0; k < kBoundary; ++k) pair(kDiameter + k, kDiameter + (k + 1) % kBoundary);
    if (worst == 0.0) return Tower::neg_inf();
    return scale_.log_abs() + Tower(std::log(worst));
}

Tower VerticalGraph::log_sup() const {
    double m = 0.0;
    for (cplx e : eta_) m = std::max(m, std::abs(e));
    if (m == 0.0 || scale_.is_zero()) return Tower::neg_inf();
    return scale_.log_abs() + Tower(std::log(m));
}

FiberNode solve_fiber(const StableFrame& fr, int j, const VerticalGraph& target, const DeepComplex& t) {
    check_level(fr, j, 1);
    const Cascade& c = *fr.cascade;
    const DeepComplex delta(c.map().delta());
    const DeepComplex scale = one() / fr.A[j];
    const cplx u1 = fr.u[j + 1];
    FiberNode node;
    DeepComplex tau = DeepComplex::zero();
    for (int it = 1; it <= 60; ++it) {
        // ξ = φ_{j+1}(z_{j+1} + δt + γ(t̃)) - z_j and t̃ = ξ - (φ_{j+1}(z_{j+1} + γ(t̃)) - z_j)
        const DeepComplex G = target.eval(tau);
        const DeepComplex H = delta * t + G;
        const cplx kH = H.is_zero() ? cplx(1.0, 0.0) : c.phi_factor(j + 1, u1, H);
        const cplx kG = G.is_zero() ? cplx(1.0, 0.0) : c.phi_factor(j + 1, u1, G);
        const DeepComplex eta = DeepComplex(kH) * H;
        const DeepComplex T = eta - DeepComplex(kG) * G;
        const DeepComplex next = T * scale;
        const DeepComplex diff = next - tau;
        tau = next;
        if (diff.is_zero() || diff.log_abs() < next.log_abs() + kFiberTol) {
            node.eta = eta.to_complex();
            node.T = T.to_complex();
            node.kappa = kH;
            node.tilde = tau;
            node.iterations = it;
            if (!tau.is_zero() && tau.log_abs() > Tower(1e-9))
                throw Error(ErrorKind::OutsideDomain, "fiber: t̃ leaves the unit disk at level " + std::to_string(j + 1));
            return node;
        }
    }
    throw Error(ErrorKind::NewtonFailed, "fiber: no convergence at level " + std::to_string(j));
}

Pullback graph_pullback(const StableFrame& fr, int j, const VerticalGraph& target) {
    check_level(fr, j, 1);
    if (target.level() != j + 1) throw Error(ErrorKind::ValidationError, "graph_pullback: target must sit one level up");
    const auto& grid = VerticalGraph::t_grid();
    std::vector<FiberNode> fibers;
    std::vector<cplx> eta;
    for (int k = 0; k < VerticalGraph::kNodes; ++k) {
        try {
            fibers.push_back(solve_fiber(fr, j, target, DeepComplex(grid[k])));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NewtonFailed || e.kind() == ErrorKind::BranchNewtonFailed)
                throw Error(ErrorKind::NewtonFailed, "graph_pullback: node " + std::to_string(k) + ": " + e.what());
            throw;
        }
        eta.push_back(fibers.back().eta);
    }
    VerticalGraph g(j, one() / fr.A[j], std::move(eta));
    if (g.max_log_slope() > Tower(std::log(1.1)))
        throw Error(ErrorKind::ConeViolation, "graph_pullback: slope exceeds 1.1 at level " + std::to_string(j));
    return {std::move(g), std::move(fibers)};
}

namespace {

// The difference of two graphs at level j+1, carried to level j along the
// fibers of one of them. To first order the fiber equation gives
// Δξ_j(t) = κ Δξ_{j+1}(t̃) / A_j. Also returns log(sup|Δξ_j| / sup|Δξ_{j+1}|),
// assembled from its factors: as a difference of two tower logs it would
// cancel.
std::pair<VerticalGraph, Tower> propagate(const StableFrame& fr, int j, const VerticalGraph& D,
                                          const std::vector<FiberNode>& fibers) {
    const DeepComplex scale = one() / fr.A[j];
    const double m_old = max_abs(D.eta());
    bool tiny = D.eta()[VerticalGraph::kCenter] == cplx(0.0, 0.0);
    for (const auto& f : fibers) tiny = tiny && is_tiny(f.tilde);
    std::vector<cplx> shape(VerticalGraph::kNodes);
    if (tiny) {
        // Δξ_{j+1}(t̃) = S η'(0) scale_j T
        for (int k = 0; k < VerticalGraph::kNodes; ++k) shape[k] = fibers[k].T * fibers[k].kappa;
        const cplx d = D.center_slope();
        const double m_new = max_abs(shape);
        Tower lr = Tower::neg_inf();
        if (d != cplx(0.0, 0.0) && m_new > 0.0 && m_old > 0.0)
            lr = Tower(std::log(std::abs(d) * m_new / m_old)) + scale.log_abs() + scale.log_abs();
        return {VerticalGraph(j, D.scale() * DeepComplex(d) * scale * scale, std::move(shape)), lr};
    }
    std::vector<DeepComplex> w;
    DeepComplex ref = DeepComplex::zero();
    for (int k = 0; k < VerticalGraph::kNodes; ++k) {
        w.push_back(D.eval(fibers[k].tilde) * DeepComplex(fibers[k].kappa) * scale);
        if (!w.back().is_zero() && (ref.is_zero() || w.back().log_abs() > ref.log_abs())) ref = w.back();
    }
    if (ref.is_zero() || m_old == 0.0) return {VerticalGraph(j, one(), std::move(shape)), Tower::neg_inf()};
    for (int k = 0; k < VerticalGraph::kNodes; ++k) shape[k] = (w[k] / ref).to_complex();
    VerticalGraph g(j, ref, std::move(shape));
    const Tower lr = g.log_sup() - D.log_sup();
    return {std::move(g), lr};
}

}  // namespace

StableCurve local_stable_curve(const StableFrame& fr, int j0, int iter_max, double tol) {
    if (j0 < 0 || j0 + 2 > fr.depth()) throw Error(ErrorKind::ValidationError, "local_stable_curve: cascade depth must be >= j0 + 2");
    if (iter_max < 2) throw Error(ErrorKind::ValidationError, "local_stable_curve: iter_max must be >= 2");
    if (!(tol > 0.0)) throw Error(ErrorKind::ValidationError, "local_stable_curve: tol must be positive");
    const int kmax = std::min(fr.depth(), j0 + iter_max);

    // pulls[k][j - j0]: pullback of the vertical line at level k down to j
    std::vector<std::vector<Pullback>> pulls(kmax + 1);
    for (int k = j0 + 1; k <= kmax; ++k) {
        VerticalGraph g = VerticalGraph::vertical(k);
        std::vector<Pullback> row;
        for (int j = k - 1; j >= j0; --j) {
            row.push_back(graph_pullback(fr, j, g));
            g = row.back().graph;
        }
        std::reverse(row.begin(), row.end());
        pulls[k] = std::move(row);
    }

    StableCurve out;
    out.j0 = j0;
    for (const auto& p : pulls[kmax]) out.chain.push_back(p.graph);
    out.chain.push_back(VerticalGraph::vertical(kmax));

    for (int k = j0 + 1; k < kmax; ++k) {
        // L_{k+1,k} minus the vertical line at level k
        VerticalGraph D = pulls[k + 1][k - j0].graph;
        std::vector<Tower> per{D.log_sup()};
        for (int j = k - 1; j >= j0; --j) {
            auto [next, lr] = propagate(fr, j, D, pulls[k + 1][j - j0].fibers);
            D = std::move(next);
            per.push_back(D.log_sup());
            if (lr > out.max_log_step_ratio) out.max_log_step_ratio = lr;
        }
        out.log_dist.push_back(per.back());
        out.level_log_dist.push_back(std::move(per));
    }
    for (std::size_t i = 1; i < out.log_dist.size(); ++i) out.log_ratio.push_back(out.log_dist[i] - out.log_dist[i - 1]);
    out.converged = !out.log_dist.empty() && out.log_dist.back() < Tower(std::log(tol));
    if (!out.converged) throw Error(ErrorKind::BudgetExceeded, "local_stable_curve: graph distance still above tol");
    return out;
}

RateReport convergence_rate(const StableFrame& fr, const StableCurve& curve, cplx t_probe, int n_steps) {
    if (std::abs(t_probe) > 0.5) throw Error(ErrorKind::ValidationError, "convergence_rate: |t_probe| must be <= 1/2");
    if (n_steps < 1 || n_steps + 1 > static_cast<int>(curve.chain.size()))
        throw Error(ErrorKind::ValidationError, "convergence_rate: n_steps out of range");
    RateReport rep;
    DeepComplex t(t_probe);
    auto record = [&](int level, const DeepComplex& tt, const DeepComplex& xi) {
        RateStep s;
        s.level = level;
        s.log_abs_t = tt.is_zero() ? Tower::neg_inf() : tt.log_abs();
        s.log_abs_dz = xi.is_zero() ? Tower::neg_inf() : xi.log_abs();
        // |z' - z| <= |t'|, with a relative allowance for rounding
        s.chart_bound = xi.is_zero() || (!tt.is_zero() && xi.log_abs() <= tt.log_abs() + Tower(1e-12));
        rep.per_step.push_back(s);
    };
    record(curve.j0, t, curve.chain[0].eval(t));
    for (int s = 1; s <= n_steps; ++s) {
        const int j = curve.j0 + s - 1;
        // the forward image lies on the next graph; only its t is propagated
        t = solve_fiber(fr, j, curve.chain[s], t).tilde;
        record(j + 1, t, curve.chain[s].eval(t));
    }
    bool zero = false;
    for (const auto& s : rep.per_step) zero = zero || s.log_abs_t == Tower::neg_inf();
    if (zero) {
        rep.log_lambda = Tower::neg_inf();
        rep.lambda_fit = 0.0;
    } else {
        // least-squares slope of log|t'_n| against n
        const double xbar = n_steps / 2.0;
        double sxx = 0.0;
        Tower sxy(0.0);
        for (int i = 0; i <= n_steps; ++i) {
            sxx += (i - xbar) * (i - xbar);
            sxy = sxy + Tower(i - xbar) * rep.per_step[i].log_abs_t;
        }
        rep.log_lambda = sxy / Tower(sxx);
        rep.lambda_fit = rep.log_lambda.is_double() ? std::exp(rep.log_lambda.to_double()) : (rep.log_lambda.sign() < 0 ? 0.0 : kInf);
    }
    rep.pass = rep.lambda_fit <= 0.6;
    for (const auto& s : rep.per_step) rep.pass = rep.pass && s.chart_bound;
    return rep;
}

std::vector<Point2> globalize(const StableFrame& fr, const StableCurve& curve, int back_steps) {
    if (back_steps < 0) throw Error(ErrorKind::ValidationError, "globalize: back_steps must be >= 0");
    const Cascade& c = *fr.cascade;
    const int j = curve.j0;
    const DeepComplex zj = c.z_at(j, fr.u[j]);
    const auto& grid = VerticalGraph::t_grid();
    std::vector<Point2> out;
    for (int k = 0; k < VerticalGraph::kDiameter; ++k) {
        const ScaledComplex z = (zj + curve.graph().xi(k)).to_scaled();
        Point2 p = shear(c, j, z, grid[k]);
        for (int s = 0; s < back_steps; ++s) p = inverse(c.map(), p);
        out.push_back(p);
    }
    return out;
}

}  // namespace thenon
