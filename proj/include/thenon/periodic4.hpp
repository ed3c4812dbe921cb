#pragma once

#include <array>
#include <optional>

#include "thenon/henon.hpp"
#include "thenon/wiman_valiron.hpp"

namespace thenon {

// Period-4 orbits of F(z, w) = (e^{g(z)} + w, z).

struct FirstOrderOptions {
    // added to the branch index read off the seed
    int k_offset = 0;
    // Polynomial g skips the admissibility screen unless this is set;
    // transcendental g is always screened.
    bool require_admissible = false;
    int max_iter = 100;
};

struct FirstOrderSolution {
    cplx z0;
    int k = 0;
    WVFrame frame;
    // |g'(z0) e^{g(z0)} - πi|
    double residual = 0.0;
    cplx seed;
    // target point u0 + i v0 in the g-plane
    cplx center;
    int iterations = 0;
};

// Solves g'(z) e^{g(z)} = πi on the branch g + log g' = log π + iπ/2 + 2kπi.
FirstOrderSolution solve_first_order(const EntireFunction& g, double r, double tol, const FirstOrderOptions& opts = {});

// (g(w + e^{g(z)}) - g(w), g(z - e^{g(w)}) - g(z))
std::array<cplx, 2> G_map(const EntireFunction& g, cplx z, cplx w);
// Row-major Jacobian of G_map.
std::array<cplx, 4> G_jacobian(const EntireFunction& g, cplx z, cplx w);

// Radius of the ball about z0 in which the Newton iterates must stay.
double koebe_radius(const EntireFunction& g, cplx z0);

struct Period4Point {
    C2 point{};
    int iterations = 0;
    // |G(z, w) - (πi, -πi)|
    double g_residual = 0.0;
};

// Newton on G - (πi, -πi) from (z0, z0), or from `start` when given.
Period4Point refine_period4(const EntireFunction& g, const FirstOrderSolution& seed, double tol,
                            std::optional<C2> start = std::nullopt, int max_iter = 50);

// (e^{g(z)} + w, z)
C2 period4_forward(const EntireFunction& g, const C2& p);

struct Period4Report {
    double residual = 0.0;
    bool primitive = false;
    std::array<C2, 4> orbit{};
};

Period4Report verify_period4(const EntireFunction& g, const C2& p, double tol);

}  // namespace thenon
