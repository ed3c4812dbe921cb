#pragma once

#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace thenon {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
// ln(DBL_MAX)
inline constexpr double kMaxLog = 709.782712893384;
// Exponent gap beyond which the smaller summand is dropped.
inline constexpr double kDropGap = 40.0;

// Wraps to (-pi, pi].
double wrap_angle(double x);

// Stable e^z - 1 for complex z.
cplx expm1(cplx z);
// Stable log(1 + z) for complex z.
cplx log1p(cplx z);

// Complex number stored as (ln|z|, Arg z). Zero is (-inf, 0).
class ScaledComplex {
public:
    ScaledComplex() = default;

    static ScaledComplex from_polar(double log_abs, double arg);
    static ScaledComplex from_cartesian(cplx z);
    static ScaledComplex zero() { return {}; }
    static ScaledComplex one() { return from_polar(0.0, 0.0); }

    double log_abs() const { return log_abs_; }
    double arg() const { return arg_; }
    bool is_zero() const { return log_abs_ == -kInf; }

    // Throws MagnitudeOverflow when |z| exceeds the double range.
    cplx to_cartesian() const;
    // Principal logarithm ln|z| + i Arg z; -inf real part for zero.
    cplx log() const { return {log_abs_, arg_}; }

    friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b);
    friend ScaledComplex operator/(const ScaledComplex& a, const ScaledComplex& b);
    friend ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b);
    friend ScaledComplex operator-(const ScaledComplex& a, const ScaledComplex& b);
    friend ScaledComplex operator-(const ScaledComplex& a);

private:
    double log_abs_ = -kInf;
    double arg_ = 0.0;
};

ScaledComplex mul(const ScaledComplex& a, const ScaledComplex& b);
ScaledComplex add(const ScaledComplex& a, const ScaledComplex& b);

// e^z for z given in scaled form. Throws MagnitudeOverflow if Re z is not a
// finite double.
ScaledComplex exp_scaled(const ScaledComplex& z);
ScaledComplex exp_scaled(cplx z);

// Signed real of iterated-exponential size: value = sign * exp^height(top).
// Height 0 is an ordinary double; height h >= 1 is only used when the value
// at height h-1 would overflow. Used for log-magnitudes deep in a cascade,
// where ln r_3 for f = exp is about e^{e^{3200}}.
class Tower {
public:
    Tower() = default;
    Tower(double x);  // NOLINT(google-explicit-constructor)

    static Tower exp(const Tower& x);
    static Tower neg_inf() { return Tower(-kInf); }

    Tower log() const;
    Tower abs() const;

    int sign() const { return sign_; }
    int height() const { return height_; }
    double top() const { return top_; }

    bool is_zero() const { return sign_ == 0; }
    // Height 0 and finite.
    bool is_double() const;
    // Value as a double; +-inf beyond the double range.
    double to_double() const;
    std::string str() const;

    friend Tower operator+(const Tower& a, const Tower& b);
    friend Tower operator-(const Tower& a, const Tower& b);
    friend Tower operator-(const Tower& a);
    friend Tower operator*(const Tower& a, const Tower& b);
    friend Tower operator/(const Tower& a, const Tower& b);

    friend bool operator==(const Tower& a, const Tower& b);
    friend bool operator<(const Tower& a, const Tower& b);
    friend bool operator>(const Tower& a, const Tower& b) { return b < a; }
    friend bool operator<=(const Tower& a, const Tower& b) { return !(b < a); }
    friend bool operator>=(const Tower& a, const Tower& b) { return !(a < b); }

private:
    static Tower raw(int sign, int height, double top);
    static bool mag_less(const Tower& a, const Tower& b);

    int sign_ = 0;
    int height_ = 0;
    double top_ = 0.0;
};

// Complex number whose log-magnitude is a Tower: holds offsets like
// e^{-e^{3200}} and derivatives like e^{e^{3200}}.
class DeepComplex {
public:
    DeepComplex() = default;
    DeepComplex(cplx z);  // NOLINT(google-explicit-constructor)
    DeepComplex(const ScaledComplex& z);  // NOLINT(google-explicit-constructor)

    static DeepComplex from_polar(const Tower& log_abs, double arg);
    static DeepComplex zero() { return {}; }

    const Tower& log_abs() const { return log_abs_; }
    double arg() const { return arg_; }
    bool is_zero() const;

    // True when the value is an ordinary finite complex double (possibly
    // after underflow to zero).
    bool fits_double() const;
    // Converts; underflow gives 0, overflow throws MagnitudeOverflow.
    cplx to_complex() const;
    // Throws MagnitudeOverflow when ln|z| is not a double.
    ScaledComplex to_scaled() const;

    friend DeepComplex operator*(const DeepComplex& a, const DeepComplex& b);
    friend DeepComplex operator/(const DeepComplex& a, const DeepComplex& b);
    friend DeepComplex operator+(const DeepComplex& a, const DeepComplex& b);
    friend DeepComplex operator-(const DeepComplex& a, const DeepComplex& b);
    friend DeepComplex operator-(const DeepComplex& a);

private:
    Tower log_abs_ = Tower::neg_inf();
    double arg_ = 0.0;
};

// e^x - 1 with x possibly far below double resolution.
DeepComplex expm1(const DeepComplex& x);
// log(1 + x) with x possibly far below double resolution.
DeepComplex log1p(const DeepComplex& x);

}  // namespace thenon
