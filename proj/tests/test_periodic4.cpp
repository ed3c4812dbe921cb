#include <cmath>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "thenon/errors.hpp"
#include "thenon/periodic4.hpp"

using namespace thenon;

namespace {

const cplx kStar(std::log(kPi), kPi / 2);
const cplx kPiI(0.0, kPi);

EntireFunction ident() { return make_poly({0.0, 1.0}); }
EntireFunction square() { return make_poly({0.0, 0.0, 1.0}); }

// Roots of 2z e^{z^2} = πi: Newton from a polar grid over 1 <= |z| <= 5.
std::vector<cplx> square_roots_oracle() {
    std::vector<cplx> roots;
    for (int i = 0; i <= 40; ++i) {
        for (int k = 0; k < 96; ++k) {
            cplx z = std::polar(1.0 + 4.0 * i / 40, 2 * kPi * k / 96);
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                const cplx e = std::exp(z * z);
                const cplx h = 2.0 * z * e - kPiI;
                const cplx dh = (2.0 + 4.0 * z * z) * e;
                z -= h / dh;
                if (!std::isfinite(z.real()) || std::abs(z) > 8) break;
                if (std::abs(2.0 * z * std::exp(z * z) - kPiI) < 1e-12) {
                    ok = true;
                    break;
                }
            }
            if (!ok) continue;
            bool fresh = true;
            for (cplx r : roots)
                if (std::abs(r - z) < 1e-8) fresh = false;
            if (fresh) roots.push_back(z);
        }
    }
    return roots;
}

}  // namespace

TEST_CASE("solve_first_order for g = id") {
    const auto s = solve_first_order(ident(), 4.0, 1e-12);
    CHECK(s.k == 0);
    CHECK(std::abs(s.z0 - kStar) < 1e-12);
    CHECK(s.residual < 1e-12);
    CHECK(s.z0.real() == doctest::Approx(1.14473).epsilon(1e-5));
    CHECK(s.z0.imag() == doctest::Approx(1.57080).epsilon(1e-5));

    FirstOrderOptions o;
    o.k_offset = 1;
    const auto s1 = solve_first_order(ident(), 4.0, 1e-12, o);
    CHECK(s1.k == 1);
    CHECK(std::abs(s1.z0 - (kStar + cplx(0, 2 * kPi))) < 1e-12);
}

TEST_CASE("solve_first_order reads k off the radius for g = id") {
    // seed u0 + i v0 with v0 = sqrt(r^2 - log^2 π); r = 9 gives v0 ≈ 8.93, k = 1
    const auto s = solve_first_order(ident(), 9.0, 1e-12);
    CHECK(s.k == 1);
    CHECK(std::abs(s.z0 - (kStar + cplx(0, 2 * kPi))) < 1e-12);
}

TEST_CASE("solve_first_order rejects constant g") {
    try {
        solve_first_order(make_poly({2.0}), 4.0, 1e-12);
        FAIL("expected DerivativeVanishes");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DerivativeVanishes);
    }
}

TEST_CASE("solve_first_order for g = z^2 matches a grid-seeded oracle root") {
    const auto s = solve_first_order(square(), 4.0, 1e-12);
    CHECK(s.residual < 1e-10);
    const auto roots = square_roots_oracle();
    REQUIRE(roots.size() > 4);
    double best = kInf;
    for (cplx r : roots) best = std::min(best, std::abs(r - s.z0));
    CHECK(best < 1e-8);
    // the root sits where |e^{g}| = π / |g'|, near the seed circle
    CHECK(std::abs(s.z0) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("solve_first_order screens transcendental g") {
    try {
        solve_first_order(make_exp(), 4.0, 1e-12);
        FAIL("expected NoAdmissibleFrame");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoAdmissibleFrame);
    }
    FirstOrderOptions o;
    o.require_admissible = true;
    CHECK_THROWS_AS(solve_first_order(square(), 4.0, 1e-12, o), Error);
}

TEST_CASE("G_map examples") {
    const auto g = ident();
    auto a = G_map(g, kStar, kStar);
    CHECK(std::abs(a[0] - kPiI) < 1e-14);
    CHECK(std::abs(a[1] + kPiI) < 1e-14);
    auto b = G_map(g, 0.0, 0.0);
    CHECK(std::abs(b[0] - 1.0) < 1e-15);
    CHECK(std::abs(b[1] + 1.0) < 1e-15);
    auto c = G_map(g, 0.0, kPiI);
    CHECK(std::abs(c[0] - 1.0) < 1e-15);
    CHECK(std::abs(c[1] - 1.0) < 1e-15);
}

TEST_CASE("G_jacobian matches finite differences") {
    testsupport::Gen gen(11);
    const auto g = square();
    for (int i = 0; i < 50; ++i) {
        const cplx z = gen.in_box(1.5), w = gen.in_box(1.5);
        const auto J = G_jacobian(g, z, w);
        const double h = 1e-6;
        const auto gzp = G_map(g, z + h, w), gzm = G_map(g, z - h, w);
        const auto gwp = G_map(g, z, w + h), gwm = G_map(g, z, w - h);
        const cplx fd[4] = {(gzp[0] - gzm[0]) / (2 * h), (gwp[0] - gwm[0]) / (2 * h), (gzp[1] - gzm[1]) / (2 * h),
                            (gwp[1] - gwm[1]) / (2 * h)};
        for (int j = 0; j < 4; ++j) CHECK(std::abs(fd[j] - J[j]) < 1e-5 * std::max(1.0, std::abs(J[j])));
    }
}

TEST_CASE("refine_period4 for g = id") {
    const auto g = ident();
    const auto s = solve_first_order(g, 4.0, 1e-12);
    const auto p = refine_period4(g, s, 1e-13);
    CHECK(p.iterations <= 2);
    CHECK(std::abs(p.point[0] - kStar) < 1e-13);
    CHECK(std::abs(p.point[1] - kStar) < 1e-13);

    const auto q = refine_period4(g, s, 1e-13, C2{s.z0 + 0.05, s.z0 + cplx(0, 0.05)});
    CHECK(std::abs(q.point[0] - kStar) < 1e-12);
    CHECK(std::abs(q.point[1] - kStar) < 1e-12);
}

TEST_CASE("refine_period4 for g = z^2") {
    const auto g = square();
    const auto s = solve_first_order(g, 4.0, 1e-12);
    const auto p = refine_period4(g, s, 1e-12);
    CHECK(p.g_residual < 1e-10);
    const auto rep = verify_period4(g, p.point, 1e-6);
    CHECK(rep.residual < 1e-6);
    CHECK(rep.primitive);
}

TEST_CASE("refine_period4 errors") {
    const auto g = ident();
    auto s = solve_first_order(g, 4.0, 1e-12);
    // ball about z* + 0.25 of radius π/16 excludes z*
    s.z0 = kStar + 0.25;
    try {
        refine_period4(g, s, 1e-13, C2{kStar + 0.05, kStar + 0.05});
        FAIL("expected StepLeftDomain");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepLeftDomain);
    }
    s.z0 = kStar + 1.0;
    try {
        refine_period4(g, s, 1e-13);
        FAIL("expected NoConvergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoConvergence);
    }
    CHECK(koebe_radius(g, kStar) == doctest::Approx(kPi / 16));
}

TEST_CASE("verify_period4 examples") {
    const auto g = ident();
    const auto rep = verify_period4(g, C2{kStar, kStar}, 1e-6);
    CHECK(rep.residual < 1e-12);
    CHECK(rep.primitive);
    // closed-form orbit (w + πi, z), (z - πi, w + πi), (w, z - πi)
    const C2 want[3] = {{kStar + kPiI, kStar}, {kStar - kPiI, kStar + kPiI}, {kStar, kStar - kPiI}};
    for (int j = 0; j < 3; ++j) CHECK(norm(rep.orbit[j + 1] - want[j]) < 1e-12);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) CHECK(norm(rep.orbit[i] - rep.orbit[j]) > 0.1);

    const auto z = verify_period4(g, C2{0.0, 0.0}, 1e-6);
    CHECK(z.residual > 1.0);

    // F has no fixed points (e^{g} never vanishes); a coarse tol makes the
    // orbit look lower-period instead
    const auto coarse = verify_period4(g, C2{kStar, kStar}, 10.0);
    CHECK(coarse.residual < 1e-12);
    CHECK_FALSE(coarse.primitive);
}

TEST_CASE("DG diagonal dominance at the g = z^2 seed") {
    const auto g = square();
    const auto s = solve_first_order(g, 4.0, 1e-12);
    const auto J = G_jacobian(g, s.z0, s.z0);
    const double M = std::exp(s.frame.log_M);
    CHECK(std::abs(J[0]) / std::abs(J[1]) > M / 2);
    CHECK(std::abs(J[3]) / std::abs(J[2]) > M / 2);
}

TEST_CASE("distinct branch indices give distinct orbits") {
    const auto g = square();
    std::vector<Period4Report> reps;
    std::vector<int> ks;
    for (int off : {0, 1}) {
        FirstOrderOptions o;
        o.k_offset = off;
        const auto s = solve_first_order(g, 4.0, 1e-12, o);
        ks.push_back(s.k);
        const auto p = refine_period4(g, s, 1e-12);
        reps.push_back(verify_period4(g, p.point, 1e-6));
        CHECK(reps.back().residual < 1e-6);
    }
    CHECK(ks[0] != ks[1]);
    for (const auto& a : reps[0].orbit)
        for (const auto& b : reps[1].orbit) CHECK(norm(a - b) > 0.1);
}
