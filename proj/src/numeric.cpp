#include "thenon/numeric.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "thenon/errors.hpp"

namespace thenon {

namespace {
// Sums below this fraction of the dominant term are rounding noise of
// cancellation and are returned as exact zero.
constexpr double kCancel = 4.0 * std::numeric_limits<double>::epsilon();
}  // namespace

double wrap_angle(double x) {
    if (!std::isfinite(x)) return x;
    double r = std::remainder(x, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    if (r > kPi) r -= 2.0 * kPi;
    return r;
}

cplx expm1(cplx z) {
    const double a = z.real();
    const double b = z.imag();
    const double s = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * s * s;
    const double im = std::exp(a) * std::sin(b);
    return {re, im};
}

cplx log1p(cplx z) {
    const double x = z.real();
    const double y = z.imag();
    if (std::abs(z) < 0.5) {
        return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
    }
    return std::log(1.0 + z);
}

// ---------------------------------------------------------------- ScaledComplex

ScaledComplex ScaledComplex::from_polar(double log_abs, double arg) {
    ScaledComplex s;
    if (log_abs == -kInf) return s;
    s.log_abs_ = log_abs;
    s.arg_ = wrap_angle(arg);
    return s;
}

ScaledComplex ScaledComplex::from_cartesian(cplx z) {
    if (z == cplx(0.0, 0.0)) return {};
    return from_polar(std::log(std::abs(z)), std::arg(z));
}

cplx ScaledComplex::to_cartesian() const {
    if (is_zero()) return {0.0, 0.0};
    const double m = std::exp(log_abs_);
    if (!std::isfinite(m)) {
        throw Error(ErrorKind::MagnitudeOverflow, "value exceeds double range: log|z| = " +
                                                      std::to_string(log_abs_));
    }
    return std::polar(m, arg_);
}

ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero() || b.is_zero()) return {};
    return ScaledComplex::from_polar(a.log_abs_ + b.log_abs_, a.arg_ + b.arg_);
}

ScaledComplex operator/(const ScaledComplex& a, const ScaledComplex& b) {
    if (b.is_zero()) throw Error(ErrorKind::MagnitudeOverflow, "division by zero");
    if (a.is_zero()) return {};
    return ScaledComplex::from_polar(a.log_abs_ - b.log_abs_, a.arg_ - b.arg_);
}

ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const ScaledComplex& big = a.log_abs_ >= b.log_abs_ ? a : b;
    const ScaledComplex& small = a.log_abs_ >= b.log_abs_ ? b : a;
    const double gap = big.log_abs_ - small.log_abs_;
    if (gap > kDropGap) return big;
    const cplx s = 1.0 + std::polar(std::exp(-gap), small.arg_ - big.arg_);
    if (std::abs(s) < kCancel) return {};
    return ScaledComplex::from_polar(big.log_abs_ + std::log(std::abs(s)), big.arg_ + std::arg(s));
}

ScaledComplex operator-(const ScaledComplex& a) {
    if (a.is_zero()) return a;
    return ScaledComplex::from_polar(a.log_abs_, a.arg_ + kPi);
}

ScaledComplex operator-(const ScaledComplex& a, const ScaledComplex& b) { return a + (-b); }

ScaledComplex mul(const ScaledComplex& a, const ScaledComplex& b) { return a * b; }
ScaledComplex add(const ScaledComplex& a, const ScaledComplex& b) { return a + b; }

namespace {

// r * trig as a double, or throws when it leaves the double range.
double scaled_component(double log_r, double trig) {
    if (trig == 0.0) return 0.0;
    const double l = log_r + std::log(std::abs(trig));
    if (l > kMaxLog) {
        throw Error(ErrorKind::MagnitudeOverflow,
                    "exponent beyond double range: log|Re or Im z| = " + std::to_string(l));
    }
    return std::exp(l) * (trig > 0 ? 1.0 : -1.0);
}

}  // namespace

ScaledComplex exp_scaled(const ScaledComplex& z) {
    if (z.is_zero()) return ScaledComplex::one();
    double re;
    double im;
    if (z.log_abs() <= kMaxLog) {
        const cplx c = std::polar(std::exp(z.log_abs()), z.arg());
        re = c.real();
        im = c.imag();
    } else {
        re = scaled_component(z.log_abs(), std::cos(z.arg()));
        im = scaled_component(z.log_abs(), std::sin(z.arg()));
    }
    if (!std::isfinite(re) || !std::isfinite(im)) {
        throw Error(ErrorKind::MagnitudeOverflow, "exponent beyond double range");
    }
    return ScaledComplex::from_polar(re, im);
}

ScaledComplex exp_scaled(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw Error(ErrorKind::MagnitudeOverflow, "exponent beyond double range");
    }
    return ScaledComplex::from_polar(z.real(), z.imag());
}

// ---------------------------------------------------------------- Tower

Tower::Tower(double x) {
    if (x == 0.0) return;
    if (std::isnan(x)) {
        sign_ = 1;
        top_ = x;
        return;
    }
    sign_ = x > 0 ? 1 : -1;
    top_ = std::abs(x);
}

Tower Tower::raw(int sign, int height, double top) {
    Tower t;
    t.sign_ = sign;
    t.height_ = height;
    t.top_ = top;
    return t;
}

bool Tower::is_double() const { return height_ == 0 && std::isfinite(top_); }

double Tower::to_double() const {
    if (height_ == 0) return sign_ * top_;
    return sign_ * kInf;
}

Tower Tower::exp(const Tower& x) {
    if (x.sign_ == 0) return Tower(1.0);
    if (x.height_ == 0) {
        const double v = x.sign_ * x.top_;
        if (v <= kMaxLog || std::isnan(v)) return Tower(std::exp(v));
        if (v == kInf) return Tower(kInf);
        return raw(1, 1, v);
    }
    if (x.sign_ < 0) return Tower(0.0);
    return raw(1, x.height_ + 1, x.top_);
}

Tower Tower::log() const {
    if (sign_ == 0) return neg_inf();
    if (sign_ < 0) return Tower(std::nan(""));
    if (height_ == 0) return Tower(std::log(top_));
    if (height_ == 1) return Tower(top_);
    return raw(1, height_ - 1, top_);
}

Tower Tower::abs() const {
    Tower t = *this;
    if (t.sign_ < 0) t.sign_ = 1;
    return t;
}

std::string Tower::str() const {
    char buf[64];
    if (height_ == 0) {
        std::snprintf(buf, sizeof buf, "%.17g", to_double());
    } else {
        std::snprintf(buf, sizeof buf, "%sexp^%d(%.17g)", sign_ < 0 ? "-" : "", height_, top_);
    }
    return buf;
}

bool Tower::mag_less(const Tower& a, const Tower& b) {
    const bool ainf = a.height_ == 0 && std::isinf(a.top_);
    const bool binf = b.height_ == 0 && std::isinf(b.top_);
    if (ainf) return false;
    if (binf) return true;
    if (a.height_ != b.height_) return a.height_ < b.height_;
    return a.top_ < b.top_;
}

bool operator==(const Tower& a, const Tower& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return a.sign_ == b.sign_;
    return a.sign_ == b.sign_ && a.height_ == b.height_ && a.top_ == b.top_;
}

bool operator<(const Tower& a, const Tower& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_;
    if (a.sign_ == 0) return false;
    return a.sign_ > 0 ? Tower::mag_less(a, b) : Tower::mag_less(b, a);
}

Tower operator-(const Tower& a) {
    Tower t = a;
    t.sign_ = -t.sign_;
    return t;
}

Tower operator+(const Tower& a, const Tower& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    if (a.height_ == 0 && b.height_ == 0) {
        const double s = a.to_double() + b.to_double();
        if (std::isfinite(s) || std::isinf(a.top_) || std::isinf(b.top_)) return Tower(s);
    }
    Tower x = a;
    Tower y = b;
    if (Tower::mag_less(x, y)) std::swap(x, y);
    const Tower lx = x.abs().log();
    const Tower d = y.abs().log() - lx;
    if (!d.is_double() || d.to_double() < -kDropGap) return x;
    const double e = std::exp(d.to_double());
    const double corr = x.sign_ == y.sign_ ? std::log1p(e) : std::log1p(-e);
    if (corr == -kInf) return Tower(0.0);
    Tower r = Tower::exp(lx + Tower(corr));
    if (r.sign_ != 0) r.sign_ = x.sign_;
    return r;
}

Tower operator-(const Tower& a, const Tower& b) { return a + (-b); }

Tower operator*(const Tower& a, const Tower& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return Tower(0.0);
    if (a.height_ == 0 && b.height_ == 0) {
        const double p = a.to_double() * b.to_double();
        if (std::isnormal(p) || std::isinf(a.top_) || std::isinf(b.top_)) return Tower(p);
    }
    Tower r = Tower::exp(a.abs().log() + b.abs().log());
    if (r.sign_ != 0) r.sign_ = a.sign_ * b.sign_;
    return r;
}

Tower operator/(const Tower& a, const Tower& b) {
    if (b.sign_ == 0) return Tower(a.sign_ >= 0 ? kInf : -kInf);
    if (a.sign_ == 0) return Tower(0.0);
    if (a.height_ == 0 && b.height_ == 0) {
        const double q = a.to_double() / b.to_double();
        if (std::isnormal(q) || std::isinf(a.top_) || std::isinf(b.top_)) return Tower(q);
    }
    Tower r = Tower::exp(a.abs().log() - b.abs().log());
    if (r.sign_ != 0) r.sign_ = a.sign_ * b.sign_;
    return r;
}

// ---------------------------------------------------------------- DeepComplex

DeepComplex::DeepComplex(cplx z) {
    if (z == cplx(0.0, 0.0)) return;
    log_abs_ = Tower(std::log(std::abs(z)));
    arg_ = wrap_angle(std::arg(z));
}

DeepComplex::DeepComplex(const ScaledComplex& z) {
    if (z.is_zero()) return;
    log_abs_ = Tower(z.log_abs());
    arg_ = z.arg();
}

DeepComplex DeepComplex::from_polar(const Tower& log_abs, double arg) {
    DeepComplex d;
    if (log_abs == Tower::neg_inf()) return d;
    d.log_abs_ = log_abs;
    d.arg_ = wrap_angle(arg);
    return d;
}

bool DeepComplex::is_zero() const { return log_abs_ == Tower::neg_inf(); }

bool DeepComplex::fits_double() const { return log_abs_ < Tower(kMaxLog); }

cplx DeepComplex::to_complex() const {
    if (is_zero()) return {0.0, 0.0};
    if (!fits_double()) {
        throw Error(ErrorKind::MagnitudeOverflow, "value exceeds double range: log|z| = " + log_abs_.str());
    }
    return std::polar(std::exp(log_abs_.to_double()), arg_);
}

ScaledComplex DeepComplex::to_scaled() const {
    if (is_zero()) return {};
    if (!log_abs_.is_double()) {
        throw Error(ErrorKind::MagnitudeOverflow, "log-magnitude exceeds double range: " + log_abs_.str());
    }
    return ScaledComplex::from_polar(log_abs_.to_double(), arg_);
}

DeepComplex operator*(const DeepComplex& a, const DeepComplex& b) {
    if (a.is_zero() || b.is_zero()) return {};
    return DeepComplex::from_polar(a.log_abs_ + b.log_abs_, a.arg_ + b.arg_);
}

DeepComplex operator/(const DeepComplex& a, const DeepComplex& b) {
    if (b.is_zero()) throw Error(ErrorKind::MagnitudeOverflow, "division by zero");
    if (a.is_zero()) return {};
    return DeepComplex::from_polar(a.log_abs_ - b.log_abs_, a.arg_ - b.arg_);
}

DeepComplex operator+(const DeepComplex& a, const DeepComplex& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const bool a_big = a.log_abs_ >= b.log_abs_;
    const DeepComplex& big = a_big ? a : b;
    const DeepComplex& small = a_big ? b : a;
    const Tower d = small.log_abs_ - big.log_abs_;
    if (!d.is_double() || d.to_double() < -kDropGap) return big;
    const cplx s = 1.0 + std::polar(std::exp(d.to_double()), small.arg_ - big.arg_);
    if (std::abs(s) < kCancel) return {};
    return DeepComplex::from_polar(big.log_abs_ + Tower(std::log(std::abs(s))), big.arg_ + std::arg(s));
}

DeepComplex operator-(const DeepComplex& a) {
    if (a.is_zero()) return a;
    return DeepComplex::from_polar(a.log_abs_, a.arg_ + kPi);
}

DeepComplex operator-(const DeepComplex& a, const DeepComplex& b) { return a + (-b); }

namespace {
// Below this log-magnitude two Taylor terms are exact to double precision.
constexpr double kTaylorLog = -18.0;
}  // namespace

DeepComplex expm1(const DeepComplex& x) {
    if (x.is_zero()) return x;
    if (x.log_abs() < Tower(kTaylorLog)) return x + x * x * DeepComplex(cplx(0.5, 0.0));
    if (x.log_abs() < Tower(6.0)) return DeepComplex(expm1(x.to_complex()));
    // |x| > e^6: e^x is either negligible next to 1 or dwarfs it
    const Tower re = Tower::exp(x.log_abs()) * Tower(std::cos(x.arg()));
    const Tower im = Tower::exp(x.log_abs()) * Tower(std::sin(x.arg()));
    const double phase = im.is_double() ? std::remainder(im.to_double(), 2 * kPi) : 0.0;
    return DeepComplex::from_polar(re, phase) - DeepComplex(cplx(1.0, 0.0));
}

DeepComplex log1p(const DeepComplex& x) {
    if (x.is_zero()) return x;
    if (x.log_abs() < Tower(kTaylorLog)) return x - x * x * DeepComplex(cplx(0.5, 0.0));
    return DeepComplex(log1p(x.to_complex()));
}

}  // namespace thenon
