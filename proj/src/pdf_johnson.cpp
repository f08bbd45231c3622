#include "pdf_impl.hpp"

#include <cmath>

// boost 1.74 pchip calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <numbers>

namespace asymerr::detail {

namespace {

// |normalized skewness| of S_U for w = exp(1/delta^2) and Omega = gamma/delta
double su_abs_skew(double w, double O) {
    const double num = w * (w + 2) * std::sinh(3 * O) + 3 * std::sinh(O);
    const double den = w * std::cosh(2 * O) + 1;
    return std::sqrt(w * (w - 1) / 2) * std::abs(num) / std::pow(den, 1.5);
}

// log-normal boundary: smallest w reaching skewness s
double lognormal_w(double s) {
    const auto roots = solve_cubic_real(1.0, 6.0, 9.0, -s * s);
    double e = 0.0;
    for (double r : roots) e = std::max(e, r);
    return 1 + e;
}

// Omega >= 0 with su_abs_skew(w, Omega) = s
double solve_omega(double w, double s) {
    if (s == 0.0) return 0.0;
    auto f = [&](double O) { return su_abs_skew(w, O) - s; };
    double hi = 1.0;
    while (f(hi) < 0) {
        hi *= 2;
        if (hi > 100) fail(ErrorCode::NoSignChange, "johnson", "no Omega for skewness " + fmt(s));
    }
    return find_root(f, 0.0, hi, 1e-15).value;
}

// differential entropy of the unit-variance S_U member
double su_entropy(double w, double O) {
    const double delta = 1 / std::sqrt(std::log(w));
    const double g = O * delta;
    auto lncosh = [&](double z) {
        const double u = std::abs((z - g) / delta);
        return (u + std::log1p(std::exp(-2 * u)) - std::numbers::ln2) * gauss_pdf(z);
    };
    const double E = integrate(lncosh, -14.0, 0.0, 1e-13, 1e-17) +
                     integrate(lncosh, 0.0, 14.0, 1e-13, 1e-17);
    return 0.5 * std::log(2 * std::numbers::pi * std::numbers::e) - std::log(delta) + E -
           0.5 * std::log((w - 1) * (w * std::cosh(2 * O) + 1) / 2);
}

constexpr double kSkewStep = 0.005;
constexpr double kSkewMax = 2.0;

double maxent_w_at(double s) {
    const double wln = lognormal_w(s);
    auto H = [&](double t) {
        const double w = wln + std::exp(t);
        return su_entropy(w, solve_omega(w, s));
    };
    const auto best = maximize(H, -30.0, 2.0, 1e-10);
    return wln + std::exp(best.x);
}

const boost::math::interpolators::pchip<std::vector<double>>& maxent_table() {
    static const auto table = [] {
        const int n = static_cast<int>(std::lround(kSkewMax / kSkewStep));
        std::vector<double> s(n + 1), w(n + 1);
        s[0] = 0.0;
        w[0] = 1.0;
        for (int i = 1; i <= n; ++i) {
            s[i] = i * kSkewStep;
            w[i] = maxent_w_at(s[i]);
        }
        return boost::math::interpolators::pchip<std::vector<double>>(std::move(s), std::move(w));
    }();
    return table;
}

class JohnsonSU final : public PdfImpl {
public:
    JohnsonSU(double xi, double lambda, double gamma, double delta)
        : xi_(xi), l_(lambda), g_(gamma), d_(delta) {}

    PdfFamily family() const override { return PdfFamily::JohnsonSU; }
    std::vector<double> params() const override { return {xi_, l_, g_, d_}; }
    std::vector<std::string> param_names() const override {
        return {"xi", "lambda", "gamma", "delta"};
    }

    double density(double x) const override {
        const double y = (x - xi_) / l_;
        return d_ / (l_ * std::sqrt(1 + y * y)) * gauss_pdf(g_ + d_ * std::asinh(y));
    }
    double cdf(double x) const override { return gauss_cdf(g_ + d_ * std::asinh((x - xi_) / l_)); }
    double quantile(double p) const override {
        return xi_ + l_ * std::sinh((gauss_quantile(p) - g_) / d_);
    }
    double sample(RandomSource& rs) const override {
        return xi_ + l_ * std::sinh((rs.next_gaussian() - g_) / d_);
    }
    MomentTriple compute_moments() const override {
        const double e = std::expm1(1 / (d_ * d_));
        const double w = 1 + e;
        const double O = g_ / d_;
        const double mu = xi_ - l_ * std::sqrt(w) * std::sinh(O);
        const double V = l_ * l_ / 2 * e * (w * std::cosh(2 * O) + 1);
        const double g = -l_ * l_ * l_ / 4 * std::sqrt(w) * e * e *
                         (w * (w + 2) * std::sinh(3 * O) + 3 * std::sinh(O));
        return {mu, V, g};
    }

protected:
    double center_hint() const override { return quantile(0.5); }
    double width_hint() const override { return l_ / d_; }

private:
    double xi_, l_, g_, d_;
};

PdfModel su_with_skewness(double mu, double V, double s) {
    if (s == 0.0) return make_gaussian_limit(PdfFamily::JohnsonSU, mu, std::sqrt(V));
    const double w = maxent_table()(std::abs(s));
    const double O = -std::copysign(solve_omega(w, std::abs(s)), s);
    const double delta = 1 / std::sqrt(std::log(w));
    const double lambda = std::sqrt(2 * V / ((w - 1) * (w * std::cosh(2 * O) + 1)));
    return make_johnson_su(mu + lambda * std::sqrt(w) * std::sinh(O), lambda, O * delta, delta);
}

double asym(const QuantileTriple& q) {
    return (q.sigma_plus - q.sigma_minus) / (q.sigma_plus + q.sigma_minus);
}

} // namespace

PdfModel make_johnson_su(double xi, double lambda, double gamma, double delta) {
    return finish(std::make_shared<JohnsonSU>(xi, lambda, gamma, delta));
}

double johnson_max_skewness() { return kSkewMax; }

double johnson_max_asymmetry() {
    static const double v = asym(su_with_skewness(0, 1, kSkewMax).quantiles());
    return v;
}

PdfModel johnson_from_moments(const MomentTriple& m) {
    const double s = m.skewness();
    if (std::abs(s) > kSkewMax)
        fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
             "johnson-su skewness " + fmt(s) + " beyond tabulated bound " + fmt(kSkewMax));
    return su_with_skewness(m.mu, m.V, s);
}

PdfModel johnson_from_quantiles(const QuantileTriple& q) {
    const double A = asym(q);
    if (A == 0.0) return make_gaussian_limit(PdfFamily::JohnsonSU, q.M, q.sigma_plus);
    const double lim = johnson_max_asymmetry();
    if (std::abs(A) > lim)
        fail(ErrorCode::UnrepresentableAsymmetry, "pdf_from_quantiles",
             "johnson-su asymmetry " + fmt(A) + " beyond bound " + fmt(lim));
    auto f = [&](double s) { return asym(su_with_skewness(0, 1, s).quantiles()) - std::abs(A); };
    const double s = std::copysign(find_root(f, 0.0, kSkewMax, 1e-14).value, A);
    const auto base = su_with_skewness(0, 1, s);
    const auto bq = base.quantiles();
    const double c = (q.sigma_plus + q.sigma_minus) / (bq.sigma_plus + bq.sigma_minus);
    const auto p = base.params();
    return make_johnson_su(q.M + c * (p[0] - bq.M), c * p[1], p[2], p[3]);
}

} // namespace asymerr::detail
