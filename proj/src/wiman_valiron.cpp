#include "thenon/wiman_valiron.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "thenon/errors.hpp"

namespace thenon {

bool SectorDomain::contains(cplx z, double slack) const {
    if (z == cplx(0.0, 0.0)) return false;
    const double lr = std::log(std::abs(z));
    const double da = std::abs(wrap_angle(std::arg(z) - arg_center));
    return lr > log_r_inner - slack && lr < log_r_outer + slack && da < half_width + slack;
}

WVFrame build_frame(const EntireFunction& f, double r, double alpha, int samples) {
    if (!(r > 0.0)) throw Error(ErrorKind::ValidationError, "build_frame: r must be positive");
    if (!(alpha > 0.5 && alpha < 1.0)) throw Error(ErrorKind::ValidationError, "build_frame: alpha must lie in (1/2, 1)");
    WVFrame fr;
    fr.r = r;
    fr.alpha = alpha;
    const MaxModulus mm = max_modulus(f, r, samples);
    fr.zeta = mm.zeta;
    fr.log_M = mm.log_M;
    fr.arg_f_zeta = f.evaluate_scaled(ScaledComplex::from_cartesian(mm.zeta)).arg();
    fr.N = central_index(f, r);
    const double N = static_cast<double>(fr.N);
    const double lr = std::log(r);
    fr.domain.log_r_inner = lr - 2.0 / N;
    fr.domain.log_r_outer = lr + 2.0 / N;
    fr.domain.arg_center = std::arg(mm.zeta);
    fr.domain.half_width = 4.0 * kPi / N;
    if (fr.domain.half_width > kPi) {
        fr.domain.half_width = kPi;
        fr.domain.clipped = true;
    }
    fr.wv_disk_radius = r / std::pow(N, alpha);
    fr.containment_extent = r * std::max(std::expm1(2.0 / N), -std::expm1(-2.0 / N)) +
                            r * std::exp(2.0 / N) * fr.domain.half_width;
    fr.contained = !fr.domain.clipped && fr.containment_extent < fr.wv_disk_radius;
    return fr;
}

cplx chart_point(const WVFrame& frame, cplx u) {
    return frame.zeta * std::exp(u / static_cast<double>(frame.N));
}

namespace {

// N (log z - log ζ) with the argument measured relative to Arg ζ.
cplx chart_log(const WVFrame& frame, cplx z) {
    const double dr = std::log(std::abs(z)) - std::log(frame.r);
    const double da = wrap_angle(std::arg(z) - std::arg(frame.zeta));
    return static_cast<double>(frame.N) * cplx(dr, da);
}

}  // namespace

ScaledComplex wv_predict(const WVFrame& frame, const EntireFunction& f, cplx z) {
    (void)f;
    if (!frame.domain.contains(z, 1e-12)) {
        throw Error(ErrorKind::OutsideDomain, "wv_predict: point outside the domain D");
    }
    const cplx l = cplx(frame.log_M, frame.arg_f_zeta) + chart_log(frame, z);
    return ScaledComplex::from_polar(l.real(), l.imag());
}

cplx eps0_at(const WVFrame& frame, const EntireFunction& f, cplx z) {
    const cplx pred = cplx(frame.log_M, frame.arg_f_zeta) + chart_log(frame, z);
    const cplx actual = f.evaluate_scaled(ScaledComplex::from_cartesian(z)).log();
    const cplx d = actual - pred;
    return expm1(cplx(d.real(), wrap_angle(d.imag())));
}

cplx epsj_at(const WVFrame& frame, const EntireFunction& f, cplx z, int j) {
    const cplx ratio = f.derivative_ratio(z, j);
    return ratio * std::pow(frame.zeta / static_cast<double>(frame.N), j) - 1.0;
}

WVResidualReport residual_report(const EntireFunction& f, const WVFrame& frame, int grid,
                                 ResidualThresholds thresholds, int threads) {
    if (grid < 8) throw Error(ErrorKind::ValidationError, "residual_report: grid must be >= 8");
    const double N = static_cast<double>(frame.N);
    const double hw = frame.domain.half_width;
    std::vector<double> e0(grid, 0.0), e1(grid, 0.0), e2(grid, 0.0);
    std::atomic<bool> have_eps2{true};

    auto row = [&](int i) {
        const double a = -2.0 + 4.0 * i / (grid - 1);
        for (int k = 0; k < grid; ++k) {
            const double b = -hw + 2.0 * hw * k / (grid - 1);
            const cplx z = std::polar(frame.r * std::exp(a / N), std::arg(frame.zeta) + b);
            e0[i] = std::max(e0[i], std::abs(eps0_at(frame, f, z)));
            e1[i] = std::max(e1[i], std::abs(epsj_at(frame, f, z, 1)));
            try {
                e2[i] = std::max(e2[i], std::abs(epsj_at(frame, f, z, 2)));
            } catch (const Error&) {
                have_eps2 = false;
            }
        }
    };

    const int workers = std::max(1, std::min(threads, grid));
    if (workers == 1) {
        for (int i = 0; i < grid; ++i) row(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < grid; i += workers) row(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    WVResidualReport rep;
    rep.r = frame.r;
    rep.N = frame.N;
    rep.log_M = frame.log_M;
    rep.sample_count = grid * grid;
    rep.sup_eps0 = *std::max_element(e0.begin(), e0.end());
    rep.sup_eps1 = *std::max_element(e1.begin(), e1.end());
    rep.sup_eps2 = have_eps2.load() ? *std::max_element(e2.begin(), e2.end()) : -1.0;
    rep.admissible = rep.sup_eps0 < thresholds.tau0 && rep.sup_eps1 < thresholds.tau1;
    return rep;
}

double admissible_radius(const EntireFunction& f, double r_seed, int direction, const RadiusSearch& opts) {
    if (!(r_seed > 0.0)) throw Error(ErrorKind::ValidationError, "admissible_radius: r_seed must be positive");
    if (direction != 1 && direction != -1) throw Error(ErrorKind::ValidationError, "admissible_radius: direction must be +1 or -1");
    double r = r_seed;
    for (int step = 0; step < opts.max_steps; ++step) {
        const WVFrame fr = build_frame(f, r, opts.alpha);
        if (fr.contained && residual_report(f, fr, opts.grid, opts.thresholds).admissible) return r;
        r *= std::exp(direction / 8.0);
    }
    throw Error(ErrorKind::SearchBudgetExceeded, "admissible_radius: no admissible radius within 200 steps");
}

}  // namespace thenon
