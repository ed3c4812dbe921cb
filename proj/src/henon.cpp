#include "thenon/henon.hpp"

#include <cmath>
#include <utility>

#include "thenon/errors.hpp"

namespace thenon {

Point2 Point2::from_cartesian(cplx z, cplx w) {
    return {ScaledComplex::from_cartesian(z), ScaledComplex::from_cartesian(w)};
}

C2 Point2::to_cartesian() const { return {z.to_cartesian(), w.to_cartesian()}; }

double norm(const C2& p) { return std::hypot(std::abs(p[0]), std::abs(p[1])); }
C2 operator-(const C2& a, const C2& b) { return {a[0] - b[0], a[1] - b[1]}; }
C2 operator+(const C2& a, const C2& b) { return {a[0] + b[0], a[1] + b[1]}; }

HenonMap::HenonMap(EntireFunction f, cplx delta) : f_(std::move(f)), delta_(delta) {
    if (delta == cplx(0.0, 0.0)) throw Error(ErrorKind::ValidationError, "HenonMap: delta must be nonzero");
}

Point2 forward(const HenonMap& map, const Point2& p) {
    const ScaledComplex fz = map.f().evaluate_scaled(p.z);
    return {fz - ScaledComplex::from_cartesian(map.delta()) * p.w, p.z};
}

Point2 inverse(const HenonMap& map, const Point2& p) {
    const ScaledComplex fw = map.f().evaluate_scaled(p.w);
    return {p.w, (fw - p.z) / ScaledComplex::from_cartesian(map.delta())};
}

C2 forward(const HenonMap& map, const C2& p) {
    return {map.f().evaluate(p[0]) - map.delta() * p[1], p[0]};
}

C2 inverse(const HenonMap& map, const C2& p) {
    return {p[1], (map.f().evaluate(p[1]) - p[0]) / map.delta()};
}

std::array<cplx, 4> jacobian(const HenonMap& map, const C2& p) {
    return {map.f().derivative(p[0], 1), -map.delta(), 1.0, 0.0};
}

OrbitRecord iterate_orbit(const HenonMap& map, const Point2& p0, int n_max, double log_escape_radius) {
    if (n_max < 1) throw Error(ErrorKind::ValidationError, "iterate_orbit: n_max must be >= 1");
    OrbitRecord rec;
    rec.log_escape_radius = log_escape_radius;
    rec.points.push_back(p0);
    if (p0.z.log_abs() > log_escape_radius) {
        rec.escaped_at = 0;
        return rec;
    }
    Point2 p = p0;
    for (int n = 1; n <= n_max; ++n) {
        try {
            p = forward(map, p);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::MagnitudeOverflow) throw;
            rec.truncated = true;
            return rec;
        }
        rec.points.push_back(p);
        if (p.z.log_abs() > log_escape_radius) {
            rec.escaped_at = n;
            return rec;
        }
    }
    return rec;
}

namespace {

using M2 = std::array<cplx, 4>;

M2 matmul(const M2& a, const M2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

C2 iterate(const HenonMap& map, C2 p, int k) {
    for (int i = 0; i < k; ++i) p = forward(map, p);
    return p;
}

double residual_or_inf(const HenonMap& map, const C2& p, int k) {
    try {
        const double r = norm(iterate(map, p, k) - p);
        return std::isfinite(r) ? r : kInf;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::MagnitudeOverflow) throw;
        return kInf;
    }
}

}  // namespace

PeriodicResult newton_periodic(const HenonMap& map, int k, const C2& seed, double tol, int max_iter) {
    if (k < 1 || k > 8) throw Error(ErrorKind::ValidationError, "newton_periodic: k must lie in [1, 8]");
    C2 p = seed;
    double res = residual_or_inf(map, p, k);
    if (!std::isfinite(res)) throw Error(ErrorKind::MagnitudeOverflow, "newton_periodic: seed orbit leaves double range");
    int it = 0;
    while (res >= tol) {
        if (it >= max_iter) throw Error(ErrorKind::NoConvergence, "newton_periodic: no convergence within max_iter");
        ++it;
        M2 J{1.0, 0.0, 0.0, 1.0};
        C2 q = p;
        for (int i = 0; i < k; ++i) {
            J = matmul(jacobian(map, q), J);
            q = forward(map, q);
        }
        const C2 H = q - p;
        const M2 A{J[0] - 1.0, J[1], J[2], J[3] - 1.0};
        const cplx det = A[0] * A[3] - A[1] * A[2];
        if (std::abs(det) < 1e-14) throw Error(ErrorKind::SingularJacobian, "newton_periodic: singular Jacobian");
        const C2 step{-(A[3] * H[0] - A[1] * H[1]) / det, -(-A[2] * H[0] + A[0] * H[1]) / det};
        double lambda = 1.0;
        C2 trial = p + C2{step[0] * lambda, step[1] * lambda};
        double tres = residual_or_inf(map, trial, k);
        for (int h = 0; h < 20 && !(tres < res); ++h) {
            lambda *= 0.5;
            trial = p + C2{step[0] * lambda, step[1] * lambda};
            tres = residual_or_inf(map, trial, k);
        }
        if (!std::isfinite(tres)) throw Error(ErrorKind::NoConvergence, "newton_periodic: iterate left double range");
        p = trial;
        res = tres;
    }
    PeriodicResult out;
    out.point = p;
    out.iterations = it;
    out.residual = res;
    out.minimal_period = k;
    C2 q = p;
    for (int j = 1; j < k; ++j) {
        q = forward(map, q);
        if (norm(q - p) <= 1e-6) {
            out.minimal_period = j;
            break;
        }
    }
    out.primitive = out.minimal_period == k;
    return out;
}

PeriodicResult newton_periodic(const HenonMap& map, int k, const Point2& seed, double tol, int max_iter) {
    return newton_periodic(map, k, seed.to_cartesian(), tol, max_iter);
}

}  // namespace thenon
