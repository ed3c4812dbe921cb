#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "thenon/errors.hpp"
#include "thenon/wiman_valiron.hpp"

using namespace thenon;

namespace {

// Geometry oracle: max |z - ζ| over a dense sample of the closed sector D.
double max_distance_over_D(const WVFrame& fr) {
    double best = 0.0;
    const double N = static_cast<double>(fr.N);
    for (int i = 0; i <= 200; ++i) {
        const double lr = std::log(fr.r) + (-2.0 + 4.0 * i / 200) / N;
        for (int k = 0; k <= 200; ++k) {
            const double th = std::arg(fr.zeta) - fr.domain.half_width + 2 * fr.domain.half_width * k / 200;
            best = std::max(best, std::abs(std::polar(std::exp(lr), th) - fr.zeta));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("build_frame for exp at r = 4000") {
    const auto fr = build_frame(make_exp(), 4000.0);
    CHECK(fr.N == 4000);
    CHECK(std::abs(fr.zeta - 4000.0) < 1e-6);
    CHECK(fr.log_M == doctest::Approx(4000.0).epsilon(1e-14));
    CHECK(fr.wv_disk_radius == doctest::Approx(15.874).epsilon(1e-4));
    CHECK(fr.contained);
    CHECK(fr.containment_extent == doctest::Approx((2 + 4 * kPi) * 4000.0 / 4000.0).epsilon(2e-3));
    const double oracle = max_distance_over_D(fr);
    CHECK(oracle < fr.wv_disk_radius);
    CHECK(fr.containment_extent >= oracle);
}

TEST_CASE("small radii fail containment") {
    const auto fr = build_frame(make_exp(), 40.0);
    CHECK(!fr.contained);
    CHECK(fr.wv_disk_radius == doctest::Approx(3.42).epsilon(1e-3));
    CHECK(max_distance_over_D(fr) > 12.0);
}

TEST_CASE("polynomial frame is clipped") {
    const auto fr = build_frame(make_poly({0, 0, 0, 1.0}), 10.0);
    CHECK(fr.N == 3);
    CHECK(fr.domain.clipped);
    CHECK(fr.domain.half_width == doctest::Approx(kPi));
    CHECK(!fr.contained);
}

TEST_CASE("wv_predict examples") {
    const auto f = make_exp();
    const auto fr = build_frame(f, 4000.0);
    const auto at_center = wv_predict(fr, f, fr.zeta);
    CHECK(at_center.log_abs() == doctest::Approx(f.log_abs_at(fr.zeta)).epsilon(1e-15));

    const double th = 4 * kPi / fr.N;
    const cplx z = std::polar(4000.0, th * (1 - 1e-12));
    const double resid = std::abs(f.evaluate_scaled(ScaledComplex::from_cartesian(z)).log_abs() -
                                  wv_predict(fr, f, z).log_abs());
    CHECK(resid == doctest::Approx(8 * kPi * kPi / 4000.0).epsilon(1e-3));

    const cplx edge = 4000.0 * std::exp(2.0 / fr.N * (1 - 1e-12));
    CHECK(std::abs(eps0_at(fr, f, edge)) < 1e-3);
    CHECK_THROWS_AS(wv_predict(fr, f, 4100.0), Error);
}

TEST_CASE("wv_predict is exact at the center for the whole library") {
    for (const auto& f : {make_exp(), make_sin(), make_z_exp(), make_exp_z2(), make_poly({1.0, 2.0, 3.0})}) {
        const auto fr = build_frame(f, 30.0);
        const auto p = wv_predict(fr, f, fr.zeta);
        const auto v = f.evaluate_scaled(ScaledComplex::from_cartesian(fr.zeta));
        CHECK(p.log_abs() == doctest::Approx(v.log_abs()).epsilon(1e-14));
        CHECK(std::abs(wrap_angle(p.arg() - v.arg())) < 1e-12);
        CHECK(std::abs(eps0_at(fr, f, fr.zeta)) < 1e-12);
    }
}

TEST_CASE("residual_report examples") {
    const auto f = make_exp();
    const auto rep = residual_report(f, build_frame(f, 4000.0), 16);
    CHECK(rep.sup_eps0 < 0.05);
    CHECK(rep.sup_eps1 < 0.05);
    CHECK(rep.sup_eps2 >= 0.0);
    CHECK(rep.admissible);
    CHECK(rep.sample_count == 256);

    const auto cube = make_poly({0, 0, 0, 1.0});
    const auto rc = residual_report(cube, build_frame(cube, 5.0), 8);
    CHECK(rc.sup_eps0 < 1e-12);
    CHECK_THROWS_AS(residual_report(f, build_frame(f, 4000.0), 4), Error);
}

TEST_CASE("residual_report is independent of thread count") {
    const auto f = make_exp();
    const auto fr = build_frame(f, 5000.0);
    const auto a = residual_report(f, fr, 16, {}, 1);
    const auto b = residual_report(f, fr, 16, {}, 4);
    CHECK(a.sup_eps0 == b.sup_eps0);
    CHECK(a.sup_eps1 == b.sup_eps1);
    CHECK(a.sup_eps2 == b.sup_eps2);
}

TEST_CASE("sup eps0 decreases with r for exp") {
    const auto f = make_exp();
    double prev = 1.0;
    for (double r : {3200.0, 6400.0, 12800.0}) {
        const double e = residual_report(f, build_frame(f, r), 32).sup_eps0;
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("admissible_radius examples") {
    const auto f = make_exp();
    CHECK(admissible_radius(f, 4000.0, 1) == 4000.0);
    const double r = admissible_radius(f, 40.0, 1);
    // first step of the e^{1/8} walk with N >= (2+4π)^3
    CHECK(r == doctest::Approx(40.0 * std::exp(35.0 / 8.0)).epsilon(1e-12));
    CHECK(!build_frame(f, r * std::exp(-1.0 / 8.0)).contained);
    const double rs = admissible_radius(make_sin(), 50.0, 1);
    CHECK(rs <= 50.0 * std::exp(25.0));
    CHECK(rs == doctest::Approx(50.0 * std::exp(34.0 / 8.0)).epsilon(1e-12));
    CHECK_THROWS_AS(admissible_radius(f, 40.0, 0), Error);
}

TEST_CASE("log f is injective on the sample grid of D") {
    const auto f = make_exp();
    const auto fr = build_frame(f, 4000.0);
    const int g = 24;
    std::vector<cplx> vals;
    const double hw = fr.domain.half_width;
    for (int i = 0; i < g; ++i) {
        for (int k = 0; k < g; ++k) {
            const double a = -2.0 + 4.0 * i / (g - 1);
            const double b = -hw + 2 * hw * k / (g - 1);
            const cplx z = std::polar(fr.r * std::exp(a / fr.N), b);
            const auto v = f.evaluate_scaled(ScaledComplex::from_cartesian(z));
            // continuous log: the argument is unwrapped against the chart coordinate
            const double raw_im = v.arg();
            const double chart_im = fr.N * b;
            vals.push_back({v.log_abs(), chart_im + wrap_angle(raw_im - chart_im)});
        }
    }
    for (std::size_t i = 0; i < vals.size(); ++i)
        for (std::size_t k = i + 1; k < vals.size(); ++k) REQUIRE(std::abs(vals[i] - vals[k]) > 1e-9);
}
