#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "thenon/henon.hpp"
#include "thenon/wiman_valiron.hpp"

namespace thenon {

// One level of the cascade. Points of D_n are addressed by the chart
// coordinate u in [-2,2] x [-4π,4π], z = ζ_n exp(u / N_n).
struct LevelFrame {
    int n = 0;
    Tower log_r;
    double arg_zeta = 0.0;
    Tower log_M;
    // Arg f(ζ_n)
    double arg_f_zeta = 0.0;
    Tower log_N;
    Tower log_N_over_r;
    // Native levels carry a full frame; the rest use the asymptotic model.
    bool native = false;
    std::optional<WVFrame> wv;
    // log r_n - log M_{n-1}
    double s = 0.0;
    // s + i wrap(Arg ζ_n - Arg f(ζ_{n-1})): where the branch root sits in the
    // chart of level n-1
    cplx sigma;
    // min distance in log|z| from D_n to the boundary of A_n
    double log_margin = 0.0;
    double delta_nbhd = 0.0;
    bool contained = false;
    // sup |ε_0| on D_n (measured when native, model bound otherwise)
    double eps_bound = 0.0;
    // winding of the image of ∂D_n around the test points of A_{n+1}
    int covering_winding = 0;
    double c_ratio_min = 0.0;
    double c_ratio_max = 0.0;

    Tower annulus_inner() const { return log_M - Tower(1.0); }
    Tower annulus_outer() const { return log_M + Tower(1.0); }
};

struct CascadeOptions {
    // s for level n is tried first from offsets[n-1]
    std::vector<double> offsets;
    double min_margin = 0.1;
    // log of the lower bound on M(r)/r
    double log_M_over_r_min = 13.815510557964274;
    double c_max = 10.0;
    int grid = 9;
};

class Cascade {
public:
    Cascade(HenonMap map, std::vector<LevelFrame> levels, CascadeOptions opts);

    const HenonMap& map() const { return map_; }
    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    const LevelFrame& level(int n) const { return levels_.at(n); }
    const std::vector<LevelFrame>& levels() const { return levels_; }
    const CascadeOptions& options() const { return opts_; }
    double bound_C() const { return bound_C_; }
    void set_bound_C(double c) { bound_C_ = c; }
    void set_covering(int n, int winding) { levels_.at(n).covering_winding = winding; }
    void set_ratios(int n, double lo, double hi) {
        levels_.at(n).c_ratio_min = lo;
        levels_.at(n).c_ratio_max = hi;
    }

    // log f(z_u) - log f(ζ_n) and its u-derivative.
    cplx L(int n, cplx u) const;
    cplx Lp(int n, cplx u) const;
    DeepComplex z_at(int n, cplx u) const;
    DeepComplex f_at(int n, cplx u) const;
    // f'/f at z_u
    DeepComplex q_at(int n, cplx u) const;
    // u / N_n
    DeepComplex u_over_N(int n, cplx u) const;
    // log f(z_u + h) - log f(z_u)
    DeepComplex log_increment(int n, cplx u, const DeepComplex& h) const;

    // φ_n in charts: the chart point of level n-1 mapped to u by f - δφ_{n-1}.
    cplx branch(int n, cplx u) const;
    // residual of the branch equation at (n, u)
    double branch_residual(int n, cplx u) const;
    // Solves L_{n-1}(x) + log(1 - δφ_{n-1}/f) = rhs near rhs.
    cplx solve_branch(int n, cplx rhs) const;

    // φ_n(z_u); zero at n = 0
    DeepComplex phi_at(int n, cplx u) const;
    DeepComplex phi_prime(int n, cplx u) const;
    // f' - δφ_n' at z_u
    DeepComplex dF(int n, cplx u) const;
    // (f - δφ_n)(z_u + h) - (f - δφ_n)(z_u)
    DeepComplex incr_F(int n, cplx u, const DeepComplex& h) const;
    // φ_n(z_u + h) - φ_n(z_u)
    DeepComplex incr_phi(int n, cplx u, const DeepComplex& h) const;
    // The increments in relative form, so that O(1) factors survive at
    // tower scale:
    //   incr_F   = F_factor * dF(n, u) * h
    //   incr_phi = phi_factor * h / dF(n-1, branch(n, u))
    cplx F_factor(int n, cplx u, const DeepComplex& h) const;
    cplx phi_factor(int n, cplx u, const DeepComplex& h) const;
    // δφ_n' / f' at z_u
    cplx eps_ratio(int n, cplx u) const;
    // |f' - δφ_n'| / (M_n N_n / r_n) at z_u
    double c_ratio(int n, cplx u) const;

private:
    // (e^ℓ - 1) / (q h) with ℓ = log f(z_u + h) - log f(z_u), q = f'/f
    cplx E1(int n, cplx u, const DeepComplex& h) const;

    HenonMap map_;
    std::vector<LevelFrame> levels_;
    CascadeOptions opts_;
    double bound_C_ = 0.0;
    // memo of solved branch points, keyed by (level, chart point)
    struct Memo {
        std::mutex mu;
        std::map<std::pair<int, std::pair<double, double>>, cplx> anchors;
    };
    std::unique_ptr<Memo> memo_;
};

Cascade build_cascade(const HenonMap& map, double r0_seed, int depth, const CascadeOptions& opts = {});

// φ_n(w) for w in A_n given in scaled form. Needs log M_{n-1} to be a double.
ScaledComplex branch_eval(const Cascade& c, int n, const ScaledComplex& w);

struct EscapingLevel {
    int n = 0;
    cplx u;
    Tower log_abs_z;
    double arg_z = 0.0;
    // log|z_n| - log M_{n-1}, from the forward formula
    double annulus_offset = 0.0;
    bool in_annulus = true;
    // forward offset vs. the chart of level n
    double nesting_error = 0.0;
};

struct EscapingOrbit {
    std::vector<EscapingLevel> levels;
    // points whose coordinates fit in scaled form
    OrbitRecord record;
};

EscapingOrbit escaping_point(const Cascade& c);

struct BoundLevel {
    int n = 0;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    double ratio_center = 0.0;
    // max over sampled w in D_n of log|φ_n'|
    Tower max_log_phi_prime;
};

struct BoundReport {
    double C_lower = 0.0;
    double C_upper = 0.0;
    double c_max = 10.0;
    bool pass = false;
    std::vector<BoundLevel> per_level;
};

BoundReport bound_report(const Cascade& c, double c_max = 10.0, int grid = 9);

// Winding number of the image of ∂D_n under log(f - δφ_n) - log f(ζ_n),
// minimized over test points of [-1,1] x [-1.5π,1.5π].
int covering_winding(const Cascade& c, int n, int per_side = 256);

}  // namespace thenon
