#pragma once

#include "thenon/entire_fn.hpp"

namespace thenon {

// {r e^{-2/N} < |z| < r e^{2/N}, |Arg z - arg_center| < half_width}
struct SectorDomain {
    double log_r_inner = 0.0;
    double log_r_outer = 0.0;
    double arg_center = 0.0;
    double half_width = 0.0;
    // half-width 4π/N exceeded π and was cut back
    bool clipped = false;

    bool contains(cplx z, double slack = 0.0) const;
};

struct WVFrame {
    double r = 0.0;
    cplx zeta;
    double log_M = 0.0;
    // Arg f(ζ); log f(ζ) = log_M + i arg_f_zeta
    double arg_f_zeta = 0.0;
    long N = 0;
    double alpha = 2.0 / 3.0;
    SectorDomain domain;
    double wv_disk_radius = 0.0;
    // Upper bound on max |z - ζ| over D (radial step plus arc length).
    double containment_extent = 0.0;
    // D inside the disk |z - ζ| < r / N^alpha
    bool contained = false;
};

WVFrame build_frame(const EntireFunction& f, double r, double alpha = 2.0 / 3.0, int samples = 1024);

// Point of D in chart coordinates: ζ exp(u/N), u in [-2,2] x [-N hw, N hw].
cplx chart_point(const WVFrame& frame, cplx u);

// exp(log f(ζ) + N (log z - log ζ)), logarithm anchored at ζ.
ScaledComplex wv_predict(const WVFrame& frame, const EntireFunction& f, cplx z);

struct ResidualThresholds {
    double tau0 = 0.25;
    double tau1 = 0.25;
};

struct WVResidualReport {
    double r = 0.0;
    double sup_eps0 = 0.0;
    double sup_eps1 = 0.0;
    double sup_eps2 = -1.0;
    int sample_count = 0;
    bool admissible = false;
    long N = 0;
    double log_M = 0.0;
};

// eps_0 = f(z) / ((z/ζ)^N f(ζ)) - 1 at one point of D.
cplx eps0_at(const WVFrame& frame, const EntireFunction& f, cplx z);
// eps_j = f^{(j)}(z) ζ^j / (N^j f(z)) - 1.
cplx epsj_at(const WVFrame& frame, const EntireFunction& f, cplx z, int j);

WVResidualReport residual_report(const EntireFunction& f, const WVFrame& frame, int grid = 16,
                                 ResidualThresholds thresholds = {}, int threads = 1);

struct RadiusSearch {
    double alpha = 2.0 / 3.0;
    int grid = 16;
    int max_steps = 200;
    ResidualThresholds thresholds;
};

// Walks r by e^{±1/8} until the frame is contained and the residual screen
// passes.
double admissible_radius(const EntireFunction& f, double r_seed, int direction, const RadiusSearch& opts = {});

}  // namespace thenon
