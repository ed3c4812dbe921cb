#include <cmath>

#include "doctest.h"
#include "thenon/errors.hpp"
#include "thenon/stable.hpp"

using namespace thenon;

namespace {

const Cascade& cascade3() {
    static const Cascade c = build_cascade(HenonMap(make_exp(), 1.0), 3200.0, 3);
    return c;
}

const StableFrame& frame3() {
    static const StableFrame fr = make_stable_frame(cascade3());
    return fr;
}

const StableCurve& curve3() {
    static const StableCurve sc = local_stable_curve(frame3(), 0, 10, 1e-12);
    return sc;
}

// sup log|φ_1'| over D_1
Tower alpha0() { return bound_report(cascade3()).per_level[1].max_log_phi_prime; }

}  // namespace

TEST_CASE("shear: level 1 for exp") {
    const Cascade& c = cascade3();
    const ScaledComplex z1 = c.z_at(1, 0.0).to_scaled();
    const Point2 on = shear(c, 1, z1, 0.0);
    // t = 0 lands on Γ_1: w = φ_1(z), and e^w = z
    const ScaledComplex back = make_exp().evaluate_scaled(on.w);
    CHECK(std::abs(back.log_abs() - z1.log_abs()) < 1e-12 * z1.log_abs());
    const Point2 p = shear(c, 1, z1, 0.5);
    CHECK(std::abs((p.w - on.w).to_cartesian() - 0.5) < 1e-9);
    auto [z, t] = unshear(c, 1, p);
    CHECK(z.log_abs() == z1.log_abs());
    CHECK(std::abs(t - 0.5) < 1e-10);
}

TEST_CASE("shear: level 0 and errors") {
    const Cascade& c = cascade3();
    const ScaledComplex z0 = c.z_at(0, cplx(0.5, 2.0)).to_scaled();
    const Point2 p = shear(c, 0, z0, cplx(0.1, -0.2));
    auto [z, t] = unshear(c, 0, p);
    CHECK(std::abs(z.to_cartesian() - z0.to_cartesian()) == 0.0);
    CHECK(std::abs(t - cplx(0.1, -0.2)) < 1e-15);
    CHECK_THROWS_AS(shear(c, 0, z0, 1.5), Error);
    CHECK_THROWS_AS(shear(c, 0, ScaledComplex::from_cartesian(10.0), 0.0), Error);
}

TEST_CASE("tilde_map: base point is fixed along the whole cascade") {
    const StableFrame& fr = frame3();
    ChartOffset p{DeepComplex::zero(), DeepComplex::zero()};
    for (int n = 0; n < 3; ++n) {
        p = tilde_map(fr, n, p);
        CHECK(p.xi.is_zero());
        CHECK(p.t.is_zero());
    }
}

TEST_CASE("tilde_map: vertical underflow") {
    const StableFrame& fr = frame3();
    const ChartOffset q = tilde_map(fr, 0, {DeepComplex::zero(), DeepComplex(cplx(0.5, 0.0))});
    // |t̃| <= α |δ t|
    CHECK(q.t.log_abs() <= Tower(std::log(0.5)) + alpha0() + Tower(1e-9));
    CHECK(q.t.log_abs() < Tower(-3000.0));
    // z̃ = -δt to leading order
    CHECK(std::abs(q.xi.to_complex() + 0.5) < 1e-12);
}

TEST_CASE("tilde_map: horizontal expansion") {
    const StableFrame& fr = frame3();
    const Cascade& c = cascade3();
    const DeepComplex dxi = DeepComplex(cplx(1e-4, 0.0)) / fr.A[0];
    const ChartOffset a = tilde_map(fr, 0, {DeepComplex::zero(), DeepComplex(cplx(0.3, 0.0))});
    const ChartOffset b = tilde_map(fr, 0, {dxi, DeepComplex(cplx(0.3, 0.0))});
    const DeepComplex dz = b.xi - a.xi;
    // Θ >= C^{-1} M_0 N_0 / r_0
    const Tower log_theta = dz.log_abs() - dxi.log_abs();
    const Tower bound = c.level(0).log_M + c.level(0).log_N - c.level(0).log_r - Tower(std::log(c.bound_C()));
    CHECK(log_theta >= bound);
    CHECK(std::abs(std::abs(dz.to_complex()) - 1e-4) < 1e-9);
}

TEST_CASE("VerticalGraph: interpolation and cone bound") {
    const auto& grid = VerticalGraph::t_grid();
    REQUIRE(static_cast<int>(grid.size()) == VerticalGraph::kNodes);
    CHECK(grid[VerticalGraph::kCenter] == cplx(0.0, 0.0));
    std::vector<cplx> eta;
    for (cplx t : grid) eta.push_back(0.25 * t + 0.1 * t * t);
    const VerticalGraph g(0, DeepComplex(cplx(1.0, 0.0)), eta);
    CHECK(std::abs(g.eval(DeepComplex(cplx(0.3, 0.0))).to_complex() - (0.075 + 0.009)) < 1e-3);
    CHECK(std::abs(g.eval(DeepComplex(cplx(0.3, 0.2))).to_complex() - (0.25 * cplx(0.3, 0.2) + 0.1 * cplx(0.3, 0.2) * cplx(0.3, 0.2))) < 1e-3);
    // at tiny τ only the slope at 0 survives
    const DeepComplex tiny = DeepComplex::from_polar(Tower(-500.0), 0.3);
    const cplx ratio = (g.eval(tiny) / tiny).to_complex();
    CHECK(std::abs(ratio - 0.25) < 1e-3);
    CHECK(g.max_log_slope() < Tower(0.0));
    CHECK(VerticalGraph::vertical(2).max_log_slope() == Tower::neg_inf());
    CHECK_THROWS_AS(g.eval(DeepComplex(cplx(1.5, 0.0))), Error);
}

TEST_CASE("graph_pullback: vertical line") {
    const StableFrame& fr = frame3();
    const Pullback pb = graph_pullback(fr, 0, VerticalGraph::vertical(1));
    const VerticalGraph& g = pb.graph;
    CHECK(g.level() == 0);
    // base to base
    CHECK(g.eta()[VerticalGraph::kCenter] == cplx(0.0, 0.0));
    CHECK(pb.fibers[VerticalGraph::kCenter].tilde.is_zero());
    // slope about 1/|A_0| = e^{-3200}
    CHECK(g.max_log_slope() < Tower(-3000.0));
    // ξ_0(t) = δ t / A_0 to leading order
    for (int k = 0; k < VerticalGraph::kNodes; ++k) CHECK(std::abs(g.eta()[k] - VerticalGraph::t_grid()[k]) < 1e-9);
    CHECK_THROWS_AS(graph_pullback(fr, 0, VerticalGraph::vertical(2)), Error);
}

TEST_CASE("graph_pullback: contraction between two vertical lines") {
    const StableFrame& fr = frame3();
    const cplx c0(1e-3, 2e-3);
    const VerticalGraph a = VerticalGraph::vertical(1);
    const VerticalGraph b(1, DeepComplex(cplx(1.0, 0.0)), std::vector<cplx>(VerticalGraph::kNodes, c0));
    const VerticalGraph pa = graph_pullback(fr, 0, a).graph;
    const VerticalGraph pb = graph_pullback(fr, 0, b).graph;
    double m = 0.0;
    for (int k = 0; k < VerticalGraph::kNodes; ++k) m = std::max(m, std::abs(pb.eta()[k] - pa.eta()[k]));
    // both graphs share the scale 1/A_0
    const Tower log_ratio = pa.scale().log_abs() + Tower(std::log(m / std::abs(c0)));
    CHECK(log_ratio <= Tower(std::log(0.55)));
    CHECK(std::abs(m - std::abs(c0)) < 1e-9);
}

TEST_CASE("local_stable_curve: contraction and base") {
    const StableCurve& sc = curve3();
    CHECK(sc.converged);
    REQUIRE(sc.chain.size() == 4);
    REQUIRE(sc.log_dist.size() == 2);
    for (const auto& d : sc.log_dist) CHECK(d <= Tower(0.0));
    for (const auto& per : sc.level_log_dist)
        for (const auto& d : per) CHECK(d <= Tower(0.0));
    for (const auto& r : sc.log_ratio) CHECK(r <= Tower(std::log(0.55)));
    CHECK(sc.max_log_step_ratio <= Tower(std::log(0.55)));
    for (const auto& g : sc.chain) {
        CHECK(g.eta()[VerticalGraph::kCenter] == cplx(0.0, 0.0));
        CHECK(g.max_log_slope() <= Tower(0.0));
    }
}

TEST_CASE("local_stable_curve: preconditions") {
    const Cascade c1 = build_cascade(HenonMap(make_exp(), 1.0), 3200.0, 1);
    const StableFrame fr = make_stable_frame(c1);
    CHECK_THROWS_AS(local_stable_curve(fr, 0, 10, 1e-12), Error);
    CHECK_THROWS_AS(local_stable_curve(frame3(), 0, 1, 1e-12), Error);
    CHECK_THROWS_AS(local_stable_curve(frame3(), 2, 10, 1e-12), Error);
}

TEST_CASE("convergence_rate: base orbit") {
    const RateReport r = convergence_rate(frame3(), curve3(), 0.0, 3);
    REQUIRE(r.per_step.size() == 4);
    for (const auto& s : r.per_step) CHECK(s.log_abs_t == Tower::neg_inf());
    CHECK(r.lambda_fit == 0.0);
    CHECK(r.pass);
}

TEST_CASE("convergence_rate: probe at 0.3") {
    const RateReport r = convergence_rate(frame3(), curve3(), 0.3, 3);
    REQUIRE(r.per_step.size() == 4);
    CHECK(r.per_step[0].log_abs_t.to_double() == doctest::Approx(std::log(0.3)));
    // |t'_1| / |t'_0| <= α(0)
    CHECK(r.per_step[1].log_abs_t - r.per_step[0].log_abs_t <= alpha0() + Tower(1e-9));
    for (std::size_t i = 1; i < r.per_step.size(); ++i) CHECK(r.per_step[i].log_abs_t < r.per_step[i - 1].log_abs_t);
    for (const auto& s : r.per_step) CHECK(s.chart_bound);
    CHECK(r.lambda_fit <= 0.6);
    CHECK(r.pass);
    CHECK_THROWS_AS(convergence_rate(frame3(), curve3(), 0.7, 3), Error);
    CHECK_THROWS_AS(convergence_rate(frame3(), curve3(), 0.3, 4), Error);
}

TEST_CASE("globalize") {
    const StableFrame& fr = frame3();
    const HenonMap F(make_exp(), 1.0);
    const auto p0 = globalize(fr, curve3(), 0);
    const auto p1 = globalize(fr, curve3(), 1);
    REQUIRE(p0.size() == p1.size());
    for (std::size_t k = 0; k < p0.size(); ++k) {
        // back_steps = 0: (z_0 + ξ(t), t)
        CHECK(std::abs(p0[k].w.to_cartesian() - VerticalGraph::t_grid()[k]) < 1e-15);
        const C2 img = forward(F, p1[k].to_cartesian());
        const C2 want = p0[k].to_cartesian();
        CHECK(norm(img - want) < 1e-6 * (1.0 + norm(want)));
        CHECK(p1[k].z.log_abs() < p0[k].z.log_abs());
    }
    CHECK_THROWS_AS(globalize(fr, curve3(), -1), Error);
}
