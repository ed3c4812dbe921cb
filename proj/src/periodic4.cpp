#include "thenon/periodic4.hpp"

#include <cmath>

#include "thenon/errors.hpp"

namespace thenon {

namespace {

const cplx kPiI(0.0, kPi);

bool is_constant(const EntireFunction& g) {
    if (!g.is_polynomial()) return false;
    const auto& c = g.poly_coeffs();
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] != cplx(0.0, 0.0)) return false;
    return true;
}

cplx nonzero_derivative(const EntireFunction& g, cplx z) {
    const cplx d = g.derivative(z, 1);
    if (d == cplx(0.0, 0.0)) throw Error(ErrorKind::DerivativeVanishes, "solve_first_order: g' vanishes");
    return d;
}

double first_order_residual(const EntireFunction& g, cplx z) {
    try {
        return std::abs(g.derivative(z, 1) * std::exp(g.evaluate(z)) - kPiI);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::MagnitudeOverflow) throw;
        return kInf;
    }
}

}  // namespace

FirstOrderSolution solve_first_order(const EntireFunction& g, double r, double tol, const FirstOrderOptions& opts) {
    if (!(tol > 0.0)) throw Error(ErrorKind::ValidationError, "solve_first_order: tol must be positive");
    if (is_constant(g)) throw Error(ErrorKind::DerivativeVanishes, "solve_first_order: g is constant");

    FirstOrderSolution sol;
    sol.frame = build_frame(g, r);
    if (g.transcendental() || opts.require_admissible) {
        if (!sol.frame.contained || !residual_report(g, sol.frame).admissible)
            throw Error(ErrorKind::NoAdmissibleFrame, "solve_first_order: frame at r is not admissible");
    }
    const WVFrame& fr = sol.frame;
    const double N = static_cast<double>(fr.N);

    // |e^{g}| = π / |g'| with |g'| ≈ N M / r, and |g| ≈ M.
    const double M = std::exp(fr.log_M);
    const double u0 = std::log(kPi * r / (N * M));
    if (!(M > std::abs(u0))) throw Error(ErrorKind::NoAdmissibleFrame, "solve_first_order: M(r) too small for the rectangle");
    const double v0 = std::sqrt(M * M - u0 * u0);
    sol.center = cplx(u0, v0);

    // invert N (log z - log ζ) + log g(ζ) = log(u0 + i v0)
    const cplx gz = g.evaluate(fr.zeta);
    cplx z = fr.zeta * std::exp((std::log(sol.center) - std::log(gz)) / N);
    sol.seed = z;

    cplx d = nonzero_derivative(g, z);
    cplx logd = std::log(d);
    const cplx raw = g.evaluate(z) + logd;
    sol.k = static_cast<int>(std::lround((raw.imag() - kPi / 2) / (2 * kPi))) + opts.k_offset;
    const cplx target(std::log(kPi), kPi / 2 + 2 * kPi * sol.k);

    // log g' continued along the Newton path from its principal value at the seed
    auto phi = [&](cplx zz, cplx ll) { return g.evaluate(zz) + ll - target; };
    cplx val = phi(z, logd);
    double res = first_order_residual(g, z);
    int it = 0;
    while (!(res < tol && std::abs(val) < 1e-6)) {
        if (it >= opts.max_iter) throw Error(ErrorKind::NoConvergence, "solve_first_order: Newton did not converge");
        ++it;
        const cplx d2 = g.derivative(z, 2);
        const cplx dphi = d + d2 / d;
        if (dphi == cplx(0.0, 0.0)) throw Error(ErrorKind::DerivativeVanishes, "solve_first_order: Φ' vanishes");
        const cplx step = -val / dphi;
        double lambda = 1.0;
        for (int h = 0;; ++h) {
            const cplx zn = z + lambda * step;
            const cplx dn = nonzero_derivative(g, zn);
            const cplx ln = logd + std::log(dn / d);
            const cplx vn = phi(zn, ln);
            if (std::abs(vn) < std::abs(val) || h >= 20) {
                z = zn;
                d = dn;
                logd = ln;
                val = vn;
                break;
            }
            lambda *= 0.5;
        }
        res = first_order_residual(g, z);
    }
    sol.z0 = z;
    sol.residual = res;
    sol.iterations = it;
    return sol;
}

std::array<cplx, 2> G_map(const EntireFunction& g, cplx z, cplx w) {
    const cplx gz = g.evaluate(z);
    const cplx gw = g.evaluate(w);
    return {g.evaluate(w + std::exp(gz)) - gw, g.evaluate(z - std::exp(gw)) - gz};
}

std::array<cplx, 4> G_jacobian(const EntireFunction& g, cplx z, cplx w) {
    const cplx egz = std::exp(g.evaluate(z));
    const cplx egw = std::exp(g.evaluate(w));
    const cplx a = g.derivative(w + egz, 1);
    const cplx b = g.derivative(z - egw, 1);
    return {a * egz * g.derivative(z, 1), a - g.derivative(w, 1), b - g.derivative(z, 1),
            -b * egw * g.derivative(w, 1)};
}

double koebe_radius(const EntireFunction& g, cplx z0) {
    const double d = std::abs(g.derivative(z0, 1));
    if (d == 0.0) throw Error(ErrorKind::DerivativeVanishes, "koebe_radius: g' vanishes at z0");
    return kPi / (16.0 * d);
}

Period4Point refine_period4(const EntireFunction& g, const FirstOrderSolution& seed, double tol,
                            std::optional<C2> start, int max_iter) {
    if (!(tol > 0.0)) throw Error(ErrorKind::ValidationError, "refine_period4: tol must be positive");
    const cplx z0 = seed.z0;
    const double ball = koebe_radius(g, z0);
    C2 p = start.value_or(C2{z0, z0});
    auto defect = [&](const C2& q) {
        const auto G = G_map(g, q[0], q[1]);
        return C2{G[0] - kPiI, G[1] + kPiI};
    };
    C2 H = defect(p);
    if (!(norm(H) < 0.5))
        throw Error(ErrorKind::NoConvergence, "refine_period4: seed residual |G - (πi, -πi)| >= 0.5");
    Period4Point out;
    int it = 0;
    while (norm(H) >= tol) {
        if (it >= max_iter) throw Error(ErrorKind::NoConvergence, "refine_period4: Newton did not converge");
        ++it;
        const auto J = G_jacobian(g, p[0], p[1]);
        const cplx det = J[0] * J[3] - J[1] * J[2];
        if (std::abs(det) < 1e-14) throw Error(ErrorKind::SingularJacobian, "refine_period4: singular DG");
        p = C2{p[0] - (J[3] * H[0] - J[1] * H[1]) / det, p[1] - (-J[2] * H[0] + J[0] * H[1]) / det};
        if (std::abs(p[0] - z0) > ball || std::abs(p[1] - z0) > ball)
            throw Error(ErrorKind::StepLeftDomain, "refine_period4: iterate left the Koebe ball");
        H = defect(p);
    }
    out.point = p;
    out.iterations = it;
    out.g_residual = norm(H);
    return out;
}

C2 period4_forward(const EntireFunction& g, const C2& p) { return {std::exp(g.evaluate(p[0])) + p[1], p[0]}; }

Period4Report verify_period4(const EntireFunction& g, const C2& p, double tol) {
    Period4Report rep;
    rep.orbit[0] = p;
    try {
        C2 q = p;
        bool distinct = true;
        for (int j = 1; j <= 4; ++j) {
            q = period4_forward(g, q);
            if (j < 4) {
                rep.orbit[j] = q;
                if (!(norm(q - p) > tol)) distinct = false;
            }
        }
        rep.residual = norm(q - p);
        if (!std::isfinite(rep.residual)) rep.residual = kInf;
        rep.primitive = distinct;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::MagnitudeOverflow) throw;
        rep.residual = kInf;
        rep.primitive = false;
    }
    return rep;
}

}  // namespace thenon
