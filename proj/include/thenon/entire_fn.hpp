#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thenon/numeric.hpp"

namespace thenon {

// Large-|z| form f ~ scale * exp(lead * z^degree), used once radii leave the
// double range.
struct AsymptoticModel {
    int degree = 1;
    cplx lead{1.0, 0.0};
    cplx scale{1.0, 0.0};
};

class EntireFunction {
public:
    struct Parts {
        std::string name;
        bool transcendental = true;
        std::function<cplx(cplx)> eval;
        std::function<cplx(cplx, int)> deriv;
        // Coefficient a_n with phase; log|a_n| is derived from it.
        std::function<ScaledComplex(long)> coeff;
        std::function<ScaledComplex(const ScaledComplex&)> scaled_eval;
        std::function<ScaledComplex(const ScaledComplex&, int)> scaled_deriv;
        // Exact log f(z+h) - log f(z); generic fallback when empty.
        std::function<DeepComplex(cplx, const DeepComplex&)> log_increment;
        std::optional<AsymptoticModel> model;
        std::vector<cplx> poly;
    };

    explicit EntireFunction(Parts parts);

    const std::string& name() const { return parts_->name; }
    bool transcendental() const { return parts_->transcendental; }
    bool is_polynomial() const { return !parts_->poly.empty(); }
    const std::vector<cplx>& poly_coeffs() const { return parts_->poly; }
    bool has_scaled() const { return static_cast<bool>(parts_->scaled_eval); }
    const std::optional<AsymptoticModel>& asymptotic_model() const { return parts_->model; }

    // Throws MagnitudeOverflow when the result is not a finite double.
    cplx evaluate(cplx z) const;
    cplx derivative(cplx z, int j) const;

    ScaledComplex coefficient(long n) const;
    double coeff_log_abs(long n) const;

    // Scaled evaluation; falls back to the native evaluator when no scaled
    // form exists.
    ScaledComplex evaluate_scaled(const ScaledComplex& z) const;
    ScaledComplex derivative_scaled(const ScaledComplex& z, int j) const;

    double log_abs_at(cplx z) const;
    // f^{(j)}(z) / f(z), formed in scaled arithmetic.
    cplx derivative_ratio(cplx z, int j) const;
    // log f(z+h) - log f(z), continuous in h from 0.
    DeepComplex log_increment(cplx z, const DeepComplex& h) const;

private:
    std::shared_ptr<const Parts> parts_;
};

EntireFunction make_exp();
EntireFunction make_sin();
// z * e^z
EntireFunction make_z_exp();
// Coefficients in increasing degree.
EntireFunction make_poly(std::vector<cplx> coeffs);
// scale * e^{g(z)} + offset with g a polynomial.
EntireFunction make_exp_of(std::vector<cplx> g, cplx scale = 1.0, cplx offset = 0.0);
EntireFunction make_exp_z2();

struct MaxModulus {
    double log_M = 0.0;
    cplx zeta;
};

MaxModulus max_modulus(const EntireFunction& f, double r, int samples = 1024);

// Largest index maximizing log|a_n| + n log r.
long central_index(const EntireFunction& f, double r);

}  // namespace thenon
