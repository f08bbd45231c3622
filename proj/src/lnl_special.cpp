#include "lnl_impl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace asymerr::detail {

namespace {

// log(1 + z) - z without cancellation near zero
double log1pmx(double z) {
    if (std::abs(z) > 0.01) return std::log1p(z) - z;
    double term = z, sum = 0;
    for (int k = 2; k <= 12; ++k) {
        term *= -z;
        sum += term / k;
    }
    return sum;
}

// 2 p t - 2 log(q + p e^t), p = (1+A)/2, q = (1-A)/2
double llb_h(double t, double A) {
    const double p = 0.5 * (1 + A), q = 0.5 * (1 - A);
    if (std::abs(t) < 1e-3) {
        // cumulants of a Bernoulli(p)
        const double pq = p * q;
        const double k2 = pq, k3 = pq * (q - p), k4 = pq * (1 - 6 * pq);
        const double k5 = pq * (q - p) * (1 - 12 * pq), k6 = pq * (1 - 30 * pq + 120 * pq * pq);
        const double t2 = t * t;
        return -2 * t2 * (k2 / 2 + t * (k3 / 6 + t * (k4 / 24 + t * (k5 / 120 + t * k6 / 720))));
    }
    if (t > 0) return 2 * p * t - 2 * (t + std::log(p + q * std::exp(-t)));
    return 2 * p * t - 2 * std::log1p(p * std::expm1(t));
}

double llb_f(double x, double A, double c) { return c * c * llb_h(x / c, A); }

class LogLogisticBeta final : public LnLImpl {
public:
    LogLogisticBeta(double g, double c, double A) : g_(g), c_(c), A_(A) {}
    LnLFamily family() const override { return LnLFamily::LogLogisticBeta; }
    std::vector<double> params() const override { return {g_, c_, A_}; }
    std::vector<std::string> param_names() const override { return {"g", "c", "A"}; }
    double eval(double x) const override {
        if (std::isinf(c_)) return -0.25 * g_ * x * x;
        return g_ * llb_f(x, A_, c_);
    }
    double slope(double x) const override {
        if (std::isinf(c_)) return -0.5 * g_ * x;
        // c (A + 1) - 2 c (1 + A) e^t / ((1 + A) e^t + 1 - A)
        const double t = x / c_;
        const double p = 0.5 * (1 + A_), q = 0.5 * (1 - A_);
        const double w = t > 0 ? p / (p + q * std::exp(-t)) : p * std::exp(t) / (q + p * std::exp(t));
        return g_ * c_ * 2 * (p - w);
    }

private:
    double g_, c_, A_;
};

class Logarithmic final : public LnLImpl {
public:
    Logarithmic(double sp, double sm)
        : beta_(sp / sm), gamma_((sp - sm) / (sp * sm)), lb_(std::log(sp / sm)) {}
    LnLFamily family() const override { return LnLFamily::Logarithmic; }
    std::vector<double> params() const override { return {beta_, gamma_}; }
    std::vector<std::string> param_names() const override { return {"beta", "gamma"}; }
    double eval(double x) const override {
        const double r = std::log1p(gamma_ * x) / lb_;
        return -0.5 * r * r;
    }
    double slope(double x) const override {
        return -std::log1p(gamma_ * x) / (lb_ * lb_) * gamma_ / (1 + gamma_ * x);
    }
    std::pair<double, double> domain() const override {
        if (gamma_ > 0) return {-1 / gamma_, kInf};
        return {-kInf, -1 / gamma_};
    }

private:
    double beta_, gamma_, lb_;
};

// N (log(1 + gamma y) - gamma y), y = x or -x
class GeneralizedPoisson final : public LnLImpl {
public:
    GeneralizedPoisson(double N, double gamma, bool flip, double s)
        : N_(N), g_(gamma), flip_(flip), s_(s) {}
    LnLFamily family() const override { return LnLFamily::GeneralizedPoisson; }
    std::vector<double> params() const override {
        const double sign = flip_ ? -1.0 : 1.0;
        if (g_ == 0) return {kInf, 0, kInf, 0, sign};
        return {N_, N_ * g_, 1 / g_, g_, sign};
    }
    std::vector<std::string> param_names() const override {
        return {"N", "alpha", "beta", "gamma", "sign"};
    }
    double eval(double x) const override {
        if (g_ == 0) return -0.5 * x * x / (s_ * s_);
        const double y = flip_ ? -x : x;
        return N_ * log1pmx(g_ * y);
    }
    double slope(double x) const override {
        if (g_ == 0) return -x / (s_ * s_);
        const double y = flip_ ? -x : x;
        const double d = -N_ * g_ * g_ * y / (1 + g_ * y);
        return flip_ ? -d : d;
    }
    std::pair<double, double> domain() const override {
        if (g_ == 0) return {-kInf, kInf};
        if (flip_) return {-kInf, 1 / g_};
        return {-1 / g_, kInf};
    }

private:
    double N_, g_;
    bool flip_;
    double s_;
};

// Shape-parameter curves raw(z; alpha) whose peak is found numerically.
struct ShapeFit {
    double z0, peak, zl, zr;
    double asym() const { return ((zr - z0) - (z0 - zl)) / (zr - zl); }
};

struct EdgeworthShape {
    double alpha; // >= 0
    double lower() const {
        // single real root of 1 + alpha He3 while alpha < 1/2
        if (alpha == 0) return -kInf;
        const auto r = solve_cubic_real(alpha, 0.0, -3 * alpha, 1.0);
        return r.front();
    }
    double raw(double z) const {
        return -0.5 * z * z + std::log1p(alpha * (z * z * z - 3 * z));
    }
    double d(double z) const {
        return -z + alpha * (3 * z * z - 3) / (1 + alpha * (z * z * z - 3 * z));
    }
    double peak_hint_lo() const { return -1.0; }
    double peak_hint_hi() const { return 0.5; }
};

struct SkewShape {
    double alpha; // >= 0
    double lower() const { return -kInf; }
    double raw(double z) const { return -0.5 * z * z + log_gauss_cdf(alpha * z); }
    double d(double z) const {
        const double u = alpha * z;
        return -z + alpha * std::exp(-0.5 * u * u - 0.5 * std::log(2 * std::numbers::pi) -
                                     log_gauss_cdf(u));
    }
    double peak_hint_lo() const { return 0.0; }
    double peak_hint_hi() const { return 1.0; }
};

template <class Shape>
ShapeFit fit_shape(const Shape& s) {
    const double z0 = s.alpha == 0
                          ? 0.0
                          : find_root([&](double z) { return s.d(z); }, s.peak_hint_lo(),
                                      s.peak_hint_hi(), 1e-15)
                                .value;
    const double p = s.raw(z0);
    auto f = [&](double z) { return s.raw(z) - p + 0.5; };
    double hi = z0 + 1;
    while (f(hi) > 0) hi += 1;
    const double lb = s.lower();
    double lo = z0 - 1;
    while (f(lo) > 0) lo = std::max(lo - 1, 0.5 * (lo + lb));
    const double zr = find_root(f, z0, hi, 1e-15).value;
    const double zl = find_root(f, lo, z0, 1e-15).value;
    return {z0, p, zl, zr};
}

// raw(z0 + sign * x / k) - peak
template <class Shape>
class ShapeCurve final : public LnLImpl {
public:
    ShapeCurve(LnLFamily f, Shape s, ShapeFit fit, double k, double sign)
        : f_(f), s_(s), fit_(fit), k_(k), sign_(sign) {}
    LnLFamily family() const override { return f_; }
    std::vector<double> params() const override {
        // location of z = 0 relative to a_hat, scale, signed shape
        return {-sign_ * k_ * fit_.z0, k_, sign_ * s_.alpha};
    }
    std::vector<std::string> param_names() const override {
        if (f_ == LnLFamily::Edgeworth) return {"a0_shift", "sigma", "alpha"};
        return {"xi_shift", "omega", "alpha"};
    }
    double eval(double x) const override { return s_.raw(fit_.z0 + sign_ * x / k_) - fit_.peak; }
    double slope(double x) const override { return sign_ * s_.d(fit_.z0 + sign_ * x / k_) / k_; }
    std::pair<double, double> domain() const override {
        const double lb = s_.lower();
        if (!std::isfinite(lb)) return {-kInf, kInf};
        const double edge = sign_ * k_ * (lb - fit_.z0);
        return sign_ > 0 ? std::pair{edge, kInf} : std::pair{-kInf, edge};
    }

private:
    LnLFamily f_;
    Shape s_;
    ShapeFit fit_;
    double k_, sign_;
};

constexpr double kSkewAlphaMax = 1e3;

double edgeworth_alpha_max() {
    static const double a = maximize([](double al) { return fit_shape(EdgeworthShape{al}).asym(); },
                                     0.05, 0.2, 1e-12)
                                .x;
    return a;
}

template <class Shape>
ImplPtr shape_curve(LnLFamily f, double sp, double sm, double alpha_max, double asym_max) {
    const double A = (sp - sm) / (sp + sm);
    if (std::abs(A) > asym_max)
        fail(ErrorCode::UnrepresentableAsymmetry, "lnl_from_triple",
             lnl_family_name(f) + " asymmetry " + fmt(A) + " beyond bound " + fmt(asym_max));
    double alpha = 0;
    if (A != 0)
        alpha = find_root([&](double al) { return fit_shape(Shape{al}).asym() - std::abs(A); }, 0.0,
                          alpha_max, 1e-15)
                    .value;
    const Shape s{alpha};
    const auto fit = fit_shape(s);
    const double k = (sp + sm) / (fit.zr - fit.zl);
    return std::make_shared<ShapeCurve<Shape>>(f, s, fit, k, A < 0 ? -1.0 : 1.0);
}

} // namespace

double lnl_edgeworth_max_asymmetry() {
    static const double v = fit_shape(EdgeworthShape{edgeworth_alpha_max()}).asym();
    return v;
}

double lnl_skew_normal_max_asymmetry() {
    static const double v = fit_shape(SkewShape{kSkewAlphaMax}).asym();
    return v;
}

ImplPtr make_lnl_edgeworth(double sp, double sm) {
    return shape_curve<EdgeworthShape>(LnLFamily::Edgeworth, sp, sm, edgeworth_alpha_max(),
                                       lnl_edgeworth_max_asymmetry());
}

ImplPtr make_lnl_skew_normal(double sp, double sm) {
    return shape_curve<SkewShape>(LnLFamily::SkewNormal, sp, sm, kSkewAlphaMax,
                                  lnl_skew_normal_max_asymmetry());
}

ImplPtr make_logarithmic(double sp, double sm) {
    if (sp == sm)
        fail(ErrorCode::Degenerate, "lnl_from_triple",
             "logarithmic is 0/0 for equal errors (beta = 1, gamma = 0)");
    return std::make_shared<Logarithmic>(sp, sm);
}

ImplPtr make_generalized_poisson(double sp, double sm) {
    if (sp == sm) return std::make_shared<GeneralizedPoisson>(kInf, 0.0, false, sp);
    const bool flip = sm > sp;
    const double big = std::max(sp, sm), small = std::min(sp, sm);
    // (1 - g small)/(1 + g big) = exp(-g (big + small)), trivial root g = 0 divided out
    auto H = [&](double g) { return (log1pmx(-g * small) - log1pmx(g * big)) / (g * g); };
    double lo = 0, hi = 1 / small;
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (mid > 0 && H(mid) > 0 ? lo : hi) = mid;
    }
    const double g = 0.5 * (lo + hi);
    const double N = -0.5 / log1pmx(g * big);
    return std::make_shared<GeneralizedPoisson>(N, g, flip, big);
}

ImplPtr make_log_logistic_beta(double sp, double sm) {
    if (sp == sm) return std::make_shared<LogLogisticBeta>(2 / (sp * sp), kInf, 0.0);
    if (sm > sp) {
        // f(-x; -A) = f(x; A)
        const auto m = make_log_logistic_beta(sm, sp)->params();
        return std::make_shared<LogLogisticBeta>(m[0], m[1], -m[2]);
    }
    const double A0 = (sp - sm) / (sp + sm);
    const double dir = 1.0;
    // c from F(sp) = F(-sm) at fixed A
    auto c_for = [&](double A) {
        auto G = [&](double lc) {
            const double c = std::exp(lc);
            return llb_f(sp, A, c) - llb_f(-sm, A, c);
        };
        const double lo = std::log(std::min(sp, sm)) - 40, hi = std::log(std::max(sp, sm)) + 40;
        // no crossing pair this close to A0: c runs off to infinity
        if (G(lo) * G(hi) > 0) return kInf;
        return std::exp(find_root(G, lo, hi, 1e-14).value);
    };
    // A between A0 and +-1, t = 0 at A0
    auto A_of = [&](double u) { return A0 + (dir - A0) / (1 + std::exp(-u)); };
    auto obj = [&](double u) {
        const double A = A_of(u);
        const double c = c_for(A);
        return std::isinf(c) ? -kInf : -llb_f(sp, A, c);
    };
    constexpr int n = 160;
    const double ulo = -40, uhi = 14;
    int best = 0;
    double bv = -kInf;
    for (int i = 0; i <= n; ++i) {
        const double v = obj(ulo + (uhi - ulo) * i / n);
        if (v > bv) {
            bv = v;
            best = i;
        }
    }
    const double a = ulo + (uhi - ulo) * std::max(best - 1, 0) / n;
    const double b = ulo + (uhi - ulo) * std::min(best + 1, n) / n;
    const double u = maximize(obj, a, b, 1e-10).x;
    const double A = A_of(u);
    const double c = c_for(A);
    const double g = -0.5 / llb_f(sp, A, c);
    return std::make_shared<LogLogisticBeta>(g, c, A);
}

} // namespace asymerr::detail
