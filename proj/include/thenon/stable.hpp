#pragma once

#include <utility>
#include <vector>

#include "thenon/eremenko.hpp"

namespace thenon {

// The cascade together with its escaping orbit: u[j] is the chart point of
// P_j at level j and A[j] = (f - δφ_j)'(z_j).
struct StableFrame {
    const Cascade* cascade = nullptr;
    std::vector<cplx> u;
    std::vector<DeepComplex> A;

    int depth() const { return cascade->depth(); }
};

StableFrame make_stable_frame(const Cascade& c);

// Φ_n(z, t) = (z, t + φ_n(z)) and its inverse.
Point2 shear(const Cascade& c, int n, const ScaledComplex& z, cplx t);
std::pair<ScaledComplex, cplx> unshear(const Cascade& c, int n, const Point2& p);

// A point of level n in sheared coordinates, as offsets from the base point
// (z_n, 0): z = z_n + xi.
struct ChartOffset {
    DeepComplex xi;
    DeepComplex t;
};

// F̃ = Φ_{n+1}^{-1} ∘ F ∘ Φ_n in offsets from the base orbit.
ChartOffset tilde_map(const StableFrame& fr, int n, const ChartOffset& p);

// A graph z = z_j + ξ(t) over the unit t-disk. ξ is stored as scale * η with
// η ordinary complex, so that the shape survives when |ξ| is far outside the
// double range.
class VerticalGraph {
public:
    // 33 points on the real diameter (index 16 is t = 0), then 32 on the
    // circle at half-step angles
    static constexpr int kDiameter = 33;
    static constexpr int kBoundary = 32;
    static constexpr int kNodes = kDiameter + kBoundary;
    static constexpr int kCenter = 16;
    static const std::vector<cplx>& t_grid();

    VerticalGraph(int level, DeepComplex scale, std::vector<cplx> eta);
    // ξ ≡ 0: the vertical line through the base point
    static VerticalGraph vertical(int level);

    int level() const { return level_; }
    const DeepComplex& scale() const { return scale_; }
    const std::vector<cplx>& eta() const { return eta_; }
    DeepComplex xi(int k) const { return scale_ * DeepComplex(eta_[k]); }
    // ξ(τ) by slope-limited cubic Hermite interpolation along the diameter
    // (continued analytically off the real axis)
    DeepComplex eval(const DeepComplex& tau) const;
    // η'(0) after limiting
    cplx center_slope() const { return deriv_[kCenter]; }
    // log of the largest |Δξ| / |Δt| over adjacent nodes
    Tower max_log_slope() const;
    // log sup |ξ|
    Tower log_sup() const;

private:
    cplx interp(cplx tau) const;

    int level_;
    DeepComplex scale_;
    std::vector<cplx> eta_;
    std::vector<cplx> deriv_;
};

// Per-node solution of the fiber equation z̃(z,t) = γ(t̃(z,t)):
// ξ = scale_j * eta, t̃ = scale_j * T, kappa the relative factor of φ_{j+1}.
struct FiberNode {
    cplx eta;
    cplx T;
    cplx kappa;
    DeepComplex tilde;
    int iterations = 0;
};

struct Pullback {
    VerticalGraph graph;
    std::vector<FiberNode> fibers;
};

// Connected component through the base of F̃^{-1}(target) ∩ 𝕌_j, as a graph.
Pullback graph_pullback(const StableFrame& fr, int j, const VerticalGraph& target);

// One fiber solve at a single (possibly tiny) t.
FiberNode solve_fiber(const StableFrame& fr, int j, const VerticalGraph& target, const DeepComplex& t);

struct StableCurve {
    int j0 = 0;
    // graphs at levels j0, j0+1, ..., top, pulled back from the vertical
    // line at the deepest start
    std::vector<VerticalGraph> chain;
    // log dist(L_{k,j0}, L_{k+1,j0}) for k = j0+1, ...
    std::vector<Tower> log_dist;
    // for each such pair, log dist at levels k, k-1, ..., j0
    std::vector<std::vector<Tower>> level_log_dist;
    // log of dist_{k+1} / dist_k
    std::vector<Tower> log_ratio;
    // largest per-level contraction dist_j / dist_{j+1} over all pairs
    Tower max_log_step_ratio = Tower::neg_inf();
    bool converged = false;

    const VerticalGraph& graph() const { return chain.front(); }
};

StableCurve local_stable_curve(const StableFrame& fr, int j0, int iter_max, double tol);

struct RateStep {
    int level = 0;
    Tower log_abs_t;
    // log |z'_n - z_n|
    Tower log_abs_dz;
    bool chart_bound = true;
};

struct RateReport {
    std::vector<RateStep> per_step;
    Tower log_lambda = Tower::neg_inf();
    double lambda_fit = 0.0;
    bool pass = false;
};

RateReport convergence_rate(const StableFrame& fr, const StableCurve& curve, cplx t_probe, int n_steps);

// Diameter of the local curve in ambient coordinates, pulled back by the
// exact inverse back_steps times.
std::vector<Point2> globalize(const StableFrame& fr, const StableCurve& curve, int back_steps);

}  // namespace thenon
