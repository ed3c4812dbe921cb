#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "thenon/errors.hpp"
#include "thenon/numeric.hpp"

using namespace thenon;
using testsupport::rel_err;

TEST_CASE("from_cartesian examples") {
    auto one = ScaledComplex::from_cartesian(1.0);
    CHECK(one.log_abs() == 0.0);
    CHECK(one.arg() == 0.0);
    auto zero = ScaledComplex::from_cartesian(0.0);
    CHECK(zero.log_abs() == -kInf);
    CHECK(zero.arg() == 0.0);
    auto me = ScaledComplex::from_cartesian(-std::exp(1.0));
    CHECK(me.log_abs() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(me.arg() == doctest::Approx(kPi));
    // negative zero imaginary part still lands on +pi
    auto me2 = ScaledComplex::from_cartesian(cplx(-2.0, -0.0));
    CHECK(me2.arg() == doctest::Approx(kPi));
}

TEST_CASE("mul examples") {
    auto a = ScaledComplex::from_polar(0, 0) * ScaledComplex::from_polar(0, 0);
    CHECK(a.log_abs() == 0.0);
    auto b = ScaledComplex::from_polar(100, kPi / 2) * ScaledComplex::from_polar(100, kPi / 2);
    CHECK(b.log_abs() == 200.0);
    CHECK(b.arg() == doctest::Approx(kPi));
    auto c = mul(ScaledComplex::from_polar(std::log(2.0), 0), ScaledComplex::from_polar(std::log(3.0), 0));
    CHECK(c.log_abs() == doctest::Approx(std::log(6.0)));
    CHECK(c.arg() == 0.0);
}

TEST_CASE("add examples") {
    auto a = ScaledComplex::from_polar(0, 0) + ScaledComplex::from_polar(0, 0);
    CHECK(a.log_abs() == doctest::Approx(std::log(2.0)));
    auto b = add(ScaledComplex::from_polar(1000, 0), ScaledComplex::from_polar(0, 0));
    CHECK(b.log_abs() == 1000.0);
    CHECK(b.arg() == 0.0);
    // oracle: native 3 + 4i
    auto c = ScaledComplex::from_polar(std::log(3.0), 0) + ScaledComplex::from_polar(std::log(4.0), kPi / 2);
    const cplx native(3.0, 4.0);
    CHECK(c.log_abs() == doctest::Approx(std::log(std::abs(native))).epsilon(1e-14));
    CHECK(c.arg() == doctest::Approx(std::atan(4.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("zero is absorbing for mul and neutral for add") {
    auto x = ScaledComplex::from_cartesian(cplx(2, 3));
    CHECK((x * ScaledComplex::zero()).is_zero());
    CHECK((x + ScaledComplex::zero()).log_abs() == x.log_abs());
    CHECK((x - x).is_zero());
}

TEST_CASE("exp_scaled examples") {
    auto a = exp_scaled(ScaledComplex::zero());
    CHECK(a.log_abs() == 0.0);
    CHECK(a.arg() == 0.0);
    auto b = exp_scaled(ScaledComplex::from_polar(50.0, 0.0));
    CHECK(b.log_abs() == doctest::Approx(std::exp(50.0)).epsilon(1e-14));
    CHECK(b.arg() == 0.0);
    auto c = exp_scaled(ScaledComplex::from_cartesian(cplx(0, kPi)));
    CHECK(c.log_abs() == doctest::Approx(0.0));
    CHECK(c.arg() == doctest::Approx(kPi));
    CHECK_THROWS_AS(exp_scaled(ScaledComplex::from_polar(800.0, 0.0)), Error);
}

TEST_CASE("round trip across the representable range") {
    testsupport::Gen g(1);
    for (int i = 0; i < 2000; ++i) {
        const cplx z = g.log_uniform(1e-300, 1e300);
        CHECK(rel_err(ScaledComplex::from_cartesian(z).to_cartesian(), z) < 1e-12);
    }
}

TEST_CASE("add and mul agree with native arithmetic") {
    testsupport::Gen g(2);
    for (int i = 0; i < 10000; ++i) {
        const cplx a = g.log_uniform(1e-10, 1e10);
        const cplx b = g.log_uniform(1e-10, 1e10);
        const auto sa = ScaledComplex::from_cartesian(a);
        const auto sb = ScaledComplex::from_cartesian(b);
        REQUIRE(rel_err((sa * sb).to_cartesian(), a * b) < 1e-10);
        // relative to the larger operand: cancellation is inherent to addition
        const double scale = std::max(std::abs(a), std::abs(b));
        REQUIRE(std::abs((sa + sb).to_cartesian() - (a + b)) / scale < 1e-10);
    }
}

TEST_CASE("mul is associative") {
    testsupport::Gen g(3);
    for (int i = 0; i < 10000; ++i) {
        const auto a = ScaledComplex::from_cartesian(g.log_uniform(1e-10, 1e10));
        const auto b = ScaledComplex::from_cartesian(g.log_uniform(1e-10, 1e10));
        const auto c = ScaledComplex::from_cartesian(g.log_uniform(1e-10, 1e10));
        REQUIRE(rel_err(((a * b) * c).to_cartesian(), (a * (b * c)).to_cartesian()) < 1e-12);
    }
}

TEST_CASE("exp_scaled matches native exp") {
    testsupport::Gen g(4);
    for (int i = 0; i < 5000; ++i) {
        const cplx z(g.uniform(-499, 499), g.uniform(-50, 50));
        REQUIRE(rel_err(exp_scaled(ScaledComplex::from_cartesian(z)).to_cartesian(), std::exp(z)) < 1e-10);
    }
}

TEST_CASE("wrap_angle range") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    testsupport::Gen g(5);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(g.uniform(-1e4, 1e4));
        REQUIRE(w > -kPi);
        REQUIRE(w <= kPi);
    }
}

TEST_CASE("complex expm1 and log1p") {
    testsupport::Gen g(6);
    for (int i = 0; i < 1000; ++i) {
        const cplx z = g.in_box(2.0);
        REQUIRE(rel_err(thenon::expm1(z), std::exp(z) - 1.0) < 1e-12);
        REQUIRE(rel_err(thenon::log1p(z), std::log(1.0 + z)) < 1e-12);
    }
    const cplx tiny(1e-20, 2e-20);
    CHECK(rel_err(thenon::expm1(tiny), tiny) < 1e-15);
    CHECK(rel_err(thenon::log1p(tiny), tiny) < 1e-15);
}

TEST_CASE("Tower arithmetic at double scale") {
    testsupport::Gen g(7);
    for (int i = 0; i < 2000; ++i) {
        const double a = g.uniform(-1e3, 1e3);
        const double b = g.uniform(-1e3, 1e3);
        REQUIRE((Tower(a) + Tower(b)).to_double() == doctest::Approx(a + b));
        REQUIRE((Tower(a) * Tower(b)).to_double() == doctest::Approx(a * b));
        REQUIRE((Tower(a) < Tower(b)) == (a < b));
    }
    CHECK(Tower::exp(Tower(2.0)).to_double() == doctest::Approx(std::exp(2.0)));
    CHECK(Tower(std::exp(3.0)).log().to_double() == doctest::Approx(3.0));
}

TEST_CASE("Tower beyond double range") {
    const Tower big = Tower::exp(Tower(3200.0));  // e^3200
    CHECK(big.height() == 1);
    CHECK(big.log().to_double() == 3200.0);
    CHECK(big > Tower(1e308));
    CHECK(-big < Tower(-1e308));
    // e^3200 + e^3199 = e^3200 (1 + 1/e)
    const Tower s = big + Tower::exp(Tower(3199.0));
    CHECK(s.log().to_double() == doctest::Approx(3200.0 + std::log1p(std::exp(-1.0))));
    // small summand is absorbed
    CHECK(big + Tower(1.5) == big);
    CHECK((big - big).is_zero());
    const Tower huge = Tower::exp(big);  // e^{e^3200}
    CHECK(huge.height() == 2);
    CHECK(huge.log() == big);
    CHECK(huge > big);
    CHECK((huge * Tower(2.0)).log().log().to_double() == doctest::Approx(3200.0));
    CHECK((Tower(1.0) / huge).to_double() == 0.0);
    CHECK(Tower::exp(-huge).to_double() == 0.0);
    CHECK(!huge.is_double());
    CHECK(huge.str() == "exp^2(3200)");
}

TEST_CASE("Tower log/exp round trip over heights") {
    Tower t(5.0);
    for (int h = 0; h < 5; ++h) t = Tower::exp(t);
    for (int h = 0; h < 5; ++h) t = t.log();
    CHECK(t.to_double() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("DeepComplex agrees with native arithmetic") {
    testsupport::Gen g(8);
    for (int i = 0; i < 2000; ++i) {
        const cplx a = g.log_uniform(1e-5, 1e5);
        const cplx b = g.log_uniform(1e-5, 1e5);
        const DeepComplex da(a);
        const DeepComplex db(b);
        const double scale = std::max(std::abs(a), std::abs(b));
        REQUIRE(std::abs((da + db).to_complex() - (a + b)) / scale < 1e-12);
        REQUIRE(rel_err((da * db).to_complex(), a * b) < 1e-12);
        REQUIRE(rel_err((da / db).to_complex(), a / b) < 1e-12);
    }
}

TEST_CASE("DeepComplex keeps astronomically small offsets") {
    const Tower tiny_log = -Tower::exp(Tower(3200.0));  // |x| = e^{-e^3200}
    const DeepComplex x = DeepComplex::from_polar(tiny_log, 0.3);
    CHECK(!x.is_zero());
    CHECK(x.to_complex() == cplx(0.0, 0.0));
    // O(1) factors fall below the resolution of a height-1 log-magnitude
    const DeepComplex y = x * DeepComplex(cplx(2.0, 0.0));
    CHECK((y / x).to_complex().real() == doctest::Approx(1.0));
    CHECK((x - x).is_zero());
    // at height 0 they are kept
    const DeepComplex u = DeepComplex::from_polar(Tower(-5000.0), 0.3);
    CHECK(((u + u) / u).to_complex().real() == doctest::Approx(2.0));
    CHECK(((u * DeepComplex(cplx(0, 3))) / u).to_complex().imag() == doctest::Approx(3.0));
    CHECK(expm1(x).log_abs() == x.log_abs());
    CHECK((log1p(x) / x).to_complex().real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(DeepComplex::from_polar(-tiny_log, 0.0).to_complex(), Error);
}

TEST_CASE("DeepComplex expm1/log1p at moderate size") {
    testsupport::Gen g(9);
    for (int i = 0; i < 500; ++i) {
        const cplx z = g.log_uniform(1e-12, 1.0);
        REQUIRE(rel_err(expm1(DeepComplex(z)).to_complex(), thenon::expm1(z)) < 1e-12);
        REQUIRE(rel_err(log1p(DeepComplex(z)).to_complex(), thenon::log1p(z)) < 1e-12);
    }
}
