#include "thenon/entire_fn.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <utility>

#include "thenon/errors.hpp"

namespace thenon {

namespace {

cplx horner(const std::vector<cplx>& c, cplx z) {
    cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

ScaledComplex horner_scaled(const std::vector<cplx>& c, const ScaledComplex& z) {
    ScaledComplex acc;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * z + ScaledComplex::from_cartesian(*it);
    }
    return acc;
}

std::vector<cplx> poly_derivative(const std::vector<cplx>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<cplx> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
    return d;
}

std::vector<cplx> poly_derivative(std::vector<cplx> c, int j) {
    for (int i = 0; i < j; ++i) c = poly_derivative(c);
    return c;
}

std::vector<cplx> poly_add(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k) r[i + k] += a[i] * b[k];
    return r;
}

std::vector<cplx> trimmed(std::vector<cplx> c) {
    while (c.size() > 1 && c.back() == cplx(0.0, 0.0)) c.pop_back();
    if (c.empty()) c.push_back(0.0);
    return c;
}

// Coefficients of h -> p(z + h), i.e. p^{(k)}(z)/k!.
std::vector<cplx> taylor_shift(const std::vector<cplx>& p, cplx z) {
    std::vector<cplx> b(p.size(), 0.0);
    std::vector<cplx> work = p;
    double fact = 1.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        b[k] = horner(work, z) / fact;
        work = poly_derivative(work);
        fact *= static_cast<double>(k + 1);
    }
    return b;
}

DeepComplex poly_increment(const std::vector<cplx>& p, cplx z, const DeepComplex& h) {
    const std::vector<cplx> b = taylor_shift(p, z);
    DeepComplex sum;
    DeepComplex hk = h;
    for (std::size_t k = 1; k < b.size(); ++k) {
        sum = sum + DeepComplex(b[k]) * hk;
        hk = hk * h;
    }
    return sum;
}

void check_finite(cplx v, const char* what) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw Error(ErrorKind::MagnitudeOverflow, std::string(what) + " exceeds double range");
    }
}

}  // namespace

EntireFunction::EntireFunction(Parts parts) : parts_(std::make_shared<const Parts>(std::move(parts))) {}

cplx EntireFunction::evaluate(cplx z) const {
    const cplx v = parts_->eval(z);
    check_finite(v, "f(z)");
    return v;
}

cplx EntireFunction::derivative(cplx z, int j) const {
    if (j < 0) throw Error(ErrorKind::ValidationError, "derivative order must be >= 0");
    if (j == 0) return evaluate(z);
    const cplx v = parts_->deriv(z, j);
    check_finite(v, "f^(j)(z)");
    return v;
}

ScaledComplex EntireFunction::coefficient(long n) const {
    if (n < 0) return {};
    return parts_->coeff(n);
}

double EntireFunction::coeff_log_abs(long n) const { return coefficient(n).log_abs(); }

ScaledComplex EntireFunction::evaluate_scaled(const ScaledComplex& z) const {
    if (parts_->scaled_eval) return parts_->scaled_eval(z);
    return ScaledComplex::from_cartesian(evaluate(z.to_cartesian()));
}

ScaledComplex EntireFunction::derivative_scaled(const ScaledComplex& z, int j) const {
    if (j == 0) return evaluate_scaled(z);
    if (parts_->scaled_deriv) return parts_->scaled_deriv(z, j);
    return ScaledComplex::from_cartesian(derivative(z.to_cartesian(), j));
}

double EntireFunction::log_abs_at(cplx z) const {
    return evaluate_scaled(ScaledComplex::from_cartesian(z)).log_abs();
}

cplx EntireFunction::derivative_ratio(cplx z, int j) const {
    const ScaledComplex zs = ScaledComplex::from_cartesian(z);
    return (derivative_scaled(zs, j) / evaluate_scaled(zs)).to_cartesian();
}

DeepComplex EntireFunction::log_increment(cplx z, const DeepComplex& h) const {
    if (h.is_zero()) return h;
    if (parts_->log_increment) return parts_->log_increment(z, h);
    const cplx q = derivative_ratio(z, 1);
    const cplx q2 = derivative_ratio(z, 2) - q * q;
    const double scale = std::log(1.0 + std::abs(q) + std::sqrt(std::abs(q2)));
    if (h.log_abs() + Tower(scale) < Tower(-18.0)) {
        return h * DeepComplex(q) + h * h * DeepComplex(0.5 * q2);
    }
    const cplx hc = h.to_complex();
    const cplx d = evaluate_scaled(ScaledComplex::from_cartesian(z + hc)).log() -
                   evaluate_scaled(ScaledComplex::from_cartesian(z)).log();
    const cplx est = q * hc;
    return DeepComplex(cplx(d.real(), est.imag() + wrap_angle(d.imag() - est.imag())));
}

// ---------------------------------------------------------------- library

EntireFunction make_exp() {
    EntireFunction::Parts p;
    p.name = "exp";
    p.eval = [](cplx z) { return std::exp(z); };
    p.deriv = [](cplx z, int) { return std::exp(z); };
    p.coeff = [](long n) { return ScaledComplex::from_polar(-std::lgamma(n + 1.0), 0.0); };
    p.scaled_eval = [](const ScaledComplex& z) { return exp_scaled(z); };
    p.scaled_deriv = [](const ScaledComplex& z, int) { return exp_scaled(z); };
    p.log_increment = [](cplx, const DeepComplex& h) { return h; };
    p.model = AsymptoticModel{1, 1.0, 1.0};
    return EntireFunction(std::move(p));
}

namespace {

ScaledComplex times_i(const ScaledComplex& z, double quarter_turns) {
    if (z.is_zero()) return z;
    return ScaledComplex::from_polar(z.log_abs(), z.arg() + quarter_turns * kPi / 2.0);
}

// sin^{(j)} in scaled form: j even -> +-sin, j odd -> +-cos.
ScaledComplex sin_family(const ScaledComplex& z, int j) {
    const ScaledComplex a = exp_scaled(times_i(z, 1.0));
    const ScaledComplex b = exp_scaled(times_i(z, -1.0));
    const ScaledComplex half = ScaledComplex::from_polar(-std::log(2.0), 0.0);
    ScaledComplex v;
    if (j % 2 == 0) {
        v = (a - b) * half * ScaledComplex::from_polar(0.0, -kPi / 2.0);
    } else {
        v = (a + b) * half;
    }
    if (j % 4 >= 2) v = -v;
    return v;
}

}  // namespace

EntireFunction make_sin() {
    EntireFunction::Parts p;
    p.name = "sin";
    p.eval = [](cplx z) { return std::sin(z); };
    p.deriv = [](cplx z, int j) {
        switch (j % 4) {
        case 0: return std::sin(z);
        case 1: return std::cos(z);
        case 2: return -std::sin(z);
        default: return -std::cos(z);
        }
    };
    p.coeff = [](long n) {
        if (n % 2 == 0) return ScaledComplex{};
        const double arg = ((n - 1) / 2) % 2 == 0 ? 0.0 : kPi;
        return ScaledComplex::from_polar(-std::lgamma(n + 1.0), arg);
    };
    p.scaled_eval = [](const ScaledComplex& z) { return sin_family(z, 0); };
    p.scaled_deriv = [](const ScaledComplex& z, int j) { return sin_family(z, j); };
    return EntireFunction(std::move(p));
}

EntireFunction make_z_exp() {
    EntireFunction::Parts p;
    p.name = "zexp";
    p.eval = [](cplx z) { return z * std::exp(z); };
    p.deriv = [](cplx z, int j) { return (z + static_cast<double>(j)) * std::exp(z); };
    p.coeff = [](long n) {
        if (n == 0) return ScaledComplex{};
        return ScaledComplex::from_polar(-std::lgamma(static_cast<double>(n)), 0.0);
    };
    p.scaled_eval = [](const ScaledComplex& z) { return z * exp_scaled(z); };
    p.scaled_deriv = [](const ScaledComplex& z, int j) {
        return (z + ScaledComplex::from_cartesian(static_cast<double>(j))) * exp_scaled(z);
    };
    p.log_increment = [](cplx z, const DeepComplex& h) {
        return log1p(h / DeepComplex(z)) + h;
    };
    return EntireFunction(std::move(p));
}

EntireFunction make_poly(std::vector<cplx> coeffs) {
    const std::vector<cplx> c = trimmed(std::move(coeffs));
    EntireFunction::Parts p;
    p.name = "poly";
    p.transcendental = false;
    p.poly = c;
    p.eval = [c](cplx z) { return horner(c, z); };
    p.deriv = [c](cplx z, int j) { return horner(poly_derivative(c, j), z); };
    p.coeff = [c](long n) {
        if (n >= static_cast<long>(c.size())) return ScaledComplex{};
        return ScaledComplex::from_cartesian(c[n]);
    };
    p.scaled_eval = [c](const ScaledComplex& z) { return horner_scaled(c, z); };
    p.scaled_deriv = [c](const ScaledComplex& z, int j) {
        return horner_scaled(poly_derivative(c, j), z);
    };
    p.log_increment = [c](cplx z, const DeepComplex& h) {
        const cplx fz = horner(c, z);
        return log1p(poly_increment(c, z, h) / DeepComplex(fz));
    };
    return EntireFunction(std::move(p));
}

namespace {

// Power series of e^{g}, grown on demand.
class ExpSeries {
public:
    explicit ExpSeries(std::vector<cplx> g) : g_(std::move(g)) {
        e_.push_back(exp_scaled(g_[0]));
    }

    ScaledComplex at(long n) {
        std::lock_guard<std::mutex> lock(mu_);
        while (static_cast<long>(e_.size()) <= n) {
            const long m = static_cast<long>(e_.size()) - 1;  // computing e_{m+1}
            ScaledComplex acc;
            const long kmax = std::min<long>(m, static_cast<long>(g_.size()) - 2);
            for (long k = 0; k <= kmax; ++k) {
                const cplx gk = g_[k + 1] * static_cast<double>(k + 1);
                if (gk == cplx(0.0, 0.0)) continue;
                acc = acc + ScaledComplex::from_cartesian(gk) * e_[m - k];
            }
            e_.push_back(acc * ScaledComplex::from_polar(-std::log(static_cast<double>(m + 1)), 0.0));
        }
        return e_[n];
    }

private:
    std::vector<cplx> g_;
    std::vector<ScaledComplex> e_;
    std::mutex mu_;
};

}  // namespace

EntireFunction make_exp_of(std::vector<cplx> g_in, cplx scale, cplx offset) {
    const std::vector<cplx> g = trimmed(std::move(g_in));
    constexpr int kMaxOrder = 8;
    std::vector<std::vector<cplx>> P{{1.0}};
    const std::vector<cplx> dg = poly_derivative(g);
    for (int j = 0; j < kMaxOrder; ++j) {
        P.push_back(trimmed(poly_add(poly_derivative(P.back()), poly_mul(dg, P.back()))));
    }
    auto series = std::make_shared<ExpSeries>(g);

    EntireFunction::Parts p;
    p.name = "exp_of";
    p.transcendental = g.size() > 1;
    p.eval = [g, scale, offset](cplx z) { return scale * std::exp(horner(g, z)) + offset; };
    p.deriv = [g, scale, P](cplx z, int j) {
        if (j > kMaxOrder) throw Error(ErrorKind::ValidationError, "derivative order too high");
        return scale * std::exp(horner(g, z)) * horner(P[j], z);
    };
    p.coeff = [series, scale, offset](long n) {
        ScaledComplex v = series->at(n) * ScaledComplex::from_cartesian(scale);
        if (n == 0) v = v + ScaledComplex::from_cartesian(offset);
        return v;
    };
    p.scaled_eval = [g, scale, offset](const ScaledComplex& z) {
        const cplx gz = horner_scaled(g, z).to_cartesian();
        return exp_scaled(gz) * ScaledComplex::from_cartesian(scale) + ScaledComplex::from_cartesian(offset);
    };
    p.scaled_deriv = [g, scale, P](const ScaledComplex& z, int j) {
        if (j > kMaxOrder) throw Error(ErrorKind::ValidationError, "derivative order too high");
        const cplx gz = horner_scaled(g, z).to_cartesian();
        return exp_scaled(gz) * ScaledComplex::from_cartesian(scale) * horner_scaled(P[j], z);
    };
    if (offset == cplx(0.0, 0.0)) {
        p.log_increment = [g](cplx z, const DeepComplex& h) { return poly_increment(g, z, h); };
    }
    int nonzero = 0;
    int degree = 0;
    for (std::size_t k = 1; k < g.size(); ++k) {
        if (g[k] != cplx(0.0, 0.0)) {
            ++nonzero;
            degree = static_cast<int>(k);
        }
    }
    if (nonzero == 1) p.model = AsymptoticModel{degree, g[degree], scale * std::exp(g[0])};
    return EntireFunction(std::move(p));
}

EntireFunction make_exp_z2() {
    EntireFunction f = make_exp_of({0.0, 0.0, 1.0});
    return f;
}

// ---------------------------------------------------------------- max modulus

namespace {

struct Refined {
    double theta;
    double value;
};

Refined refine_angle(const EntireFunction& f, double r, double center, double h) {
    auto val = [&](double t) { return f.log_abs_at(std::polar(r, t)); };
    constexpr double kInvPhi = 0.6180339887498949;
    double a = center - h;
    double b = center + h;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = val(c);
    double fd = val(d);
    Refined best{center, val(center)};
    while (b - a > 1e-12) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = val(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = val(d);
        }
    }
    const double mid = 0.5 * (a + b);
    const double fm = val(mid);
    if (fm >= best.value) best = {mid, fm};

    // Polish on the angular derivative -Im(z f'/f), which has a simple root
    // where golden section only sees a flat top.
    auto dval = [&](double t) {
        const cplx z = std::polar(r, t);
        return -(z * f.derivative_ratio(z, 1)).imag();
    };
    try {
        double t0 = best.theta;
        double t1 = t0 + 1e-9;
        double d0 = dval(t0);
        double d1 = dval(t1);
        const double start_abs = std::abs(d0);
        for (int it = 0; it < 8 && d1 != d0 && d1 != 0.0; ++it) {
            const double t2 = t1 - d1 * (t1 - t0) / (d1 - d0);
            t0 = t1;
            d0 = d1;
            t1 = t2;
            d1 = dval(t1);
        }
        if (std::abs(t1 - center) <= h && std::abs(d1) <= start_abs) {
            const double v = val(t1);
            if (v >= best.value - 1e-12 * std::max(1.0, std::abs(best.value))) best = {t1, v};
        }
    } catch (const Error&) {
        // derivative unavailable at this scale; keep the golden-section result
    }
    return best;
}

}  // namespace

MaxModulus max_modulus(const EntireFunction& f, double r, int samples) {
    if (!(r > 0.0)) throw Error(ErrorKind::ValidationError, "max_modulus: r must be positive");
    if (samples < 256) throw Error(ErrorKind::ValidationError, "max_modulus: samples must be >= 256");
    const double step = 2.0 * kPi / samples;
    std::vector<double> theta(samples);
    std::vector<double> vals(samples);
    for (int k = 0; k < samples; ++k) {
        theta[k] = -kPi + step * (k + 1);
        vals[k] = f.log_abs_at(std::polar(r, theta[k]));
    }
    const double best_sample = *std::max_element(vals.begin(), vals.end());

    std::vector<int> peaks;
    for (int k = 0; k < samples; ++k) {
        const double prev = vals[(k + samples - 1) % samples];
        const double next = vals[(k + 1) % samples];
        if (vals[k] >= prev && vals[k] >= next) peaks.push_back(k);
    }
    std::vector<int> by_value = peaks;
    std::stable_sort(by_value.begin(), by_value.end(), [&](int a, int b) { return vals[a] > vals[b]; });
    std::vector<int> chosen(by_value.begin(), by_value.begin() + std::min<std::size_t>(8, by_value.size()));
    int extra = 0;
    for (int k : peaks) {
        if (extra >= 8) break;
        if (vals[k] >= best_sample - 1e-9 && std::find(chosen.begin(), chosen.end(), k) == chosen.end()) {
            chosen.push_back(k);
            ++extra;
        }
    }

    std::vector<Refined> refined;
    for (int k : chosen) {
        Refined rr = refine_angle(f, r, theta[k], step);
        rr.theta = wrap_angle(rr.theta);
        refined.push_back(rr);
    }
    double top = -kInf;
    for (const auto& rr : refined) top = std::max(top, rr.value);
    const Refined* pick = nullptr;
    for (const auto& rr : refined) {
        if (rr.value >= top - 1e-9 && (pick == nullptr || rr.theta < pick->theta)) pick = &rr;
    }
    return {pick->value, std::polar(r, pick->theta)};
}

long central_index(const EntireFunction& f, double r) {
    if (!(r > 0.0)) throw Error(ErrorKind::ValidationError, "central_index: r must be positive");
    constexpr long kBudget = 10000000;
    const double lr = std::log(r);
    double best = -kInf;
    long best_n = 0;
    int below = 0;
    for (long n = 0; n < kBudget; ++n) {
        const double c = f.coeff_log_abs(n);
        const double v = c == -kInf ? -kInf : c + static_cast<double>(n) * lr;
        if (v != -kInf) {
            const double tie = 1e-12 * std::max(1.0, std::abs(best));
            if (best == -kInf || v >= best - tie) {
                best_n = n;
                best = std::max(best, v);
            }
        }
        if (best != -kInf && !(v >= best - 100.0)) {
            if (++below >= 50) return best_n;
        } else {
            below = 0;
        }
    }
    throw Error(ErrorKind::ScanBudgetExceeded, "central_index: no decisive maximum within budget");
}

}  // namespace thenon
