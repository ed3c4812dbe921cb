#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "thenon/numeric.hpp"

namespace testsupport {

using thenon::cplx;

inline double rel_err(cplx got, cplx want) {
    const double d = std::abs(got - want);
    const double s = std::abs(want);
    return s == 0.0 ? d : d / s;
}

// Fixed-seed generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed = 20240611) : rng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

    cplx in_box(double half) { return {uniform(-half, half), uniform(-half, half)}; }

    // Random magnitude log-uniform in [lo, hi], random argument.
    cplx log_uniform(double lo, double hi) {
        const double m = std::exp(uniform(std::log(lo), std::log(hi)));
        return std::polar(m, uniform(-thenon::kPi, thenon::kPi));
    }

    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }

private:
    std::mt19937_64 rng_;
};

}  // namespace testsupport
