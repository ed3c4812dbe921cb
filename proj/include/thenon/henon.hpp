#pragma once

#include <array>
#include <optional>
#include <vector>

#include "thenon/entire_fn.hpp"

namespace thenon {

using C2 = std::array<cplx, 2>;

struct Point2 {
    ScaledComplex z;
    ScaledComplex w;

    static Point2 from_cartesian(cplx z, cplx w);
    static Point2 from_cartesian(const C2& p) { return from_cartesian(p[0], p[1]); }
    // Throws MagnitudeOverflow outside the double range.
    C2 to_cartesian() const;
};

double norm(const C2& p);
C2 operator-(const C2& a, const C2& b);
C2 operator+(const C2& a, const C2& b);

// F(z, w) = (f(z) - δ w, z)
class HenonMap {
public:
    HenonMap(EntireFunction f, cplx delta);

    const EntireFunction& f() const { return f_; }
    cplx delta() const { return delta_; }

private:
    EntireFunction f_;
    cplx delta_;
};

Point2 forward(const HenonMap& map, const Point2& p);
// F^{-1}(z, w) = (w, (f(w) - z) / δ)
Point2 inverse(const HenonMap& map, const Point2& p);

C2 forward(const HenonMap& map, const C2& p);
C2 inverse(const HenonMap& map, const C2& p);

// DF = [[f'(z), -δ], [1, 0]], row-major.
std::array<cplx, 4> jacobian(const HenonMap& map, const C2& p);

struct OrbitRecord {
    std::vector<Point2> points;
    std::optional<int> escaped_at;
    double log_escape_radius = 0.0;
    // iteration stopped on MagnitudeOverflow
    bool truncated = false;
};

OrbitRecord iterate_orbit(const HenonMap& map, const Point2& p0, int n_max, double log_escape_radius);

struct PeriodicResult {
    C2 point{};
    int iterations = 0;
    double residual = 0.0;
    // smallest j <= k with |F^j(p) - p| <= 1e-6
    int minimal_period = 0;
    bool primitive = false;
};

PeriodicResult newton_periodic(const HenonMap& map, int k, const C2& seed, double tol, int max_iter = 100);
PeriodicResult newton_periodic(const HenonMap& map, int k, const Point2& seed, double tol, int max_iter = 100);

}  // namespace thenon
