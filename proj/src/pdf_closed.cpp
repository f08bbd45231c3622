#include "pdf_impl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace asymerr::detail {

namespace {

constexpr double kPi = std::numbers::pi;
const double kRoot2OverPi = std::sqrt(2 / kPi);

// ---- Fechner (split normal) ----

class Fechner final : public PdfImpl {
public:
    Fechner(double m, double s1, double s2) : m_(m), s1_(s1), s2_(s2) {}

    PdfFamily family() const override { return PdfFamily::Fechner; }
    std::vector<double> params() const override { return {m_, s1_, s2_}; }
    std::vector<std::string> param_names() const override { return {"m", "sigma1", "sigma2"}; }

    double density(double x) const override {
        const double s = x < m_ ? s1_ : s2_;
        if (s == 0.0) return 0.0;
        return 2 / (s1_ + s2_) * gauss_pdf((x - m_) / s);
    }
    double cdf(double x) const override {
        const double t = s1_ + s2_;
        if (x < m_) return s1_ > 0 ? 2 * s1_ / t * gauss_cdf((x - m_) / s1_) : 0.0;
        if (s2_ == 0) return 1.0;
        return (s1_ + s2_ * (2 * gauss_cdf((x - m_) / s2_) - 1)) / t;
    }
    double quantile(double p) const override {
        const double t = s1_ + s2_;
        if (p * t < s1_) return m_ + s1_ * gauss_quantile(p * t / (2 * s1_));
        const double u = (p * t - s1_) / (2 * s2_) + 0.5;
        if (u <= 0.5) return m_;
        return m_ + s2_ * gauss_quantile(u);
    }
    double sample(RandomSource& rs) const override {
        const double z = std::abs(rs.next_gaussian());
        const double u = rs.next_uniform();
        return u * (s1_ + s2_) < s1_ ? m_ - s1_ * z : m_ + s2_ * z;
    }
    std::pair<double, double> support() const override {
        return {s1_ > 0 ? -kInf : m_, s2_ > 0 ? kInf : m_};
    }
    MomentTriple compute_moments() const override {
        const double d = s2_ - s1_;
        const double mu = m_ + kRoot2OverPi * d;
        const double V = (1 - 2 / kPi) * d * d + s1_ * s2_;
        const double g = kRoot2OverPi * d * ((4 / kPi - 1) * d * d + s1_ * s2_);
        return {mu, V, g};
    }

protected:
    double center_hint() const override { return m_; }
    double width_hint() const override { return (s1_ + s2_) / 2; }

private:
    double m_, s1_, s2_;
};

// ---- Edgeworth ----

class Edgeworth final : public PdfImpl {
public:
    Edgeworth(double mu, double sigma, double gamma)
        : mu_(mu), s_(sigma), g_(gamma), k_(gamma / (6 * sigma * sigma * sigma)) {
        for (double z : {-6.0, -1.0, 1.0, 6.0})
            if (1 + k_ * z * (z * z - 3) < 0) negative_ = true;
    }

    PdfFamily family() const override { return PdfFamily::Edgeworth; }
    std::vector<double> params() const override { return {mu_, s_, g_}; }
    std::vector<std::string> param_names() const override { return {"mu", "sigma", "gamma"}; }

    double density(double x) const override {
        const double z = (x - mu_) / s_;
        const double phi = gauss_pdf(z);
        if (phi == 0.0) return 0.0;
        return phi * (1 + k_ * z * (z * z - 3)) / s_;
    }
    double cdf(double x) const override {
        const double z = (x - mu_) / s_;
        const double phi = gauss_pdf(z);
        return gauss_cdf(z) - (phi == 0.0 ? 0.0 : k_ * phi * (z * z - 1));
    }
    double sample(RandomSource& rs) const override {
        if (negative_)
            fail(ErrorCode::Domain, "sample", "edgeworth density goes negative; sampling refused");
        return PdfImpl::sample(rs);
    }
    MomentTriple compute_moments() const override { return {mu_, s_ * s_, g_}; }
    QuantileTriple compute_quantiles() const override {
        const double M = mu_ + s_ * median_z();
        return {M, mu_ + s_ - M, M - (mu_ - s_)};
    }

    // fixed point of z = Phi^-1(1/2 + k (z^2 - 1) phi(z))
    double median_z() const {
        double z = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double p = 0.5 + k_ * (z * z - 1) * gauss_pdf(z);
            if (!(p > 0 && p < 1)) break;
            const double next = gauss_quantile(p);
            if (std::abs(next - z) < 1e-15) return next;
            z = next;
        }
        fail(ErrorCode::NonConvergent, "edgeworth", "median iteration diverges");
    }

protected:
    double center_hint() const override { return mu_; }
    double width_hint() const override { return s_; }

private:
    double mu_, s_, g_, k_;
};

double edgeworth_k_from_asym(double A) {
    return (gauss_cdf(-A) - 0.5) / ((A * A - 1) * gauss_pdf(A));
}

// ---- skew normal ----

class SkewNormal final : public PdfImpl {
public:
    SkewNormal(double xi, double omega, double alpha)
        : xi_(xi), w_(omega), a_(alpha), d_(alpha / std::sqrt(1 + alpha * alpha)) {}

    PdfFamily family() const override { return PdfFamily::SkewNormal; }
    std::vector<double> params() const override { return {xi_, w_, a_}; }
    std::vector<std::string> param_names() const override { return {"xi", "omega", "alpha"}; }

    double density(double x) const override {
        const double z = (x - xi_) / w_;
        return 2 / w_ * gauss_pdf(z) * gauss_cdf(a_ * z);
    }
    double cdf(double x) const override {
        const double z = (x - xi_) / w_;
        return std::clamp(gauss_cdf(z) - 2 * owens_t(z, a_), 0.0, 1.0);
    }
    double sample(RandomSource& rs) const override {
        const double u0 = rs.next_gaussian(), u1 = rs.next_gaussian();
        return xi_ + w_ * (d_ * std::abs(u0) + std::sqrt(1 - d_ * d_) * u1);
    }
    MomentTriple compute_moments() const override {
        const double b = d_ * kRoot2OverPi;
        return {xi_ + w_ * b, w_ * w_ * (1 - b * b), (4 - kPi) / 2 * b * b * b * w_ * w_ * w_};
    }

protected:
    double center_hint() const override { return xi_ + w_ * d_ * kRoot2OverPi; }
    double width_hint() const override { return w_; }

private:
    double xi_, w_, a_, d_;
};

// ---- log-normal ----

class LogNormal final : public PdfImpl {
public:
    LogNormal(double xi, double gamma, double delta, int sign)
        : xi_(xi), g_(gamma), d_(delta), sign_(sign) {}

    PdfFamily family() const override { return PdfFamily::LogNormal; }
    std::vector<double> params() const override { return {xi_, g_, d_, double(sign_)}; }
    std::vector<std::string> param_names() const override {
        return {"xi", "gamma", "delta", "sign"};
    }

    double density(double x) const override {
        const double y = sign_ * (x - xi_);
        if (y <= 0) return 0.0;
        return d_ / y * gauss_pdf(g_ + d_ * std::log(y));
    }
    double cdf(double x) const override {
        const double y = sign_ * (x - xi_);
        if (y <= 0) return sign_ > 0 ? 0.0 : 1.0;
        const double z = g_ + d_ * std::log(y);
        return sign_ > 0 ? gauss_cdf(z) : gauss_cdf(-z);
    }
    double quantile(double p) const override {
        const double z = sign_ > 0 ? gauss_quantile(p) : -gauss_quantile(p);
        return xi_ + sign_ * std::exp((z - g_) / d_);
    }
    double sample(RandomSource& rs) const override {
        return xi_ + sign_ * std::exp((rs.next_gaussian() - g_) / d_);
    }
    std::pair<double, double> support() const override {
        return sign_ > 0 ? std::pair{xi_, kInf} : std::pair{-kInf, xi_};
    }
    MomentTriple compute_moments() const override {
        const double e = std::expm1(1 / (d_ * d_));
        const double m = std::exp(-g_ / d_);
        const double V = (1 + e) * e * m * m;
        return {xi_ + sign_ * std::sqrt(1 + e) * m, V,
                sign_ * (e + 3) * std::sqrt(e) * std::pow(V, 1.5)};
    }

protected:
    double center_hint() const override { return xi_ + sign_ * std::exp(-g_ / d_); }
    double width_hint() const override { return std::sqrt(compute_moments().V); }

private:
    double xi_, g_, d_;
    int sign_;
};

// Exactly symmetric input for a family whose symmetric member is a limit.
class GaussianLimit final : public PdfImpl {
public:
    GaussianLimit(PdfFamily f, double mu, double sigma) : f_(f), mu_(mu), s_(sigma) {}

    PdfFamily family() const override { return f_; }
    std::vector<double> params() const override { return {mu_, s_}; }
    std::vector<std::string> param_names() const override { return {"mu", "sigma"}; }

    double density(double x) const override { return gauss_pdf((x - mu_) / s_) / s_; }
    double cdf(double x) const override { return gauss_cdf((x - mu_) / s_); }
    double quantile(double p) const override { return mu_ + s_ * gauss_quantile(p); }
    double sample(RandomSource& rs) const override { return mu_ + s_ * rs.next_gaussian(); }
    MomentTriple compute_moments() const override { return {mu_, s_ * s_, 0.0}; }
    QuantileTriple compute_quantiles() const override { return {mu_, s_, s_}; }

protected:
    double center_hint() const override { return mu_; }
    double width_hint() const override { return s_; }

private:
    PdfFamily f_;
    double mu_, s_;
};

double asym(const QuantileTriple& q) {
    return (q.sigma_plus - q.sigma_minus) / (q.sigma_plus + q.sigma_minus);
}

// Solves asym(shape(t)) = |A| for t in [0, hi], then scales and shifts the
// standard shape onto q. make(t) builds the unit-scale model.
template <class Make, class Rescale>
PdfModel solve_shape(const QuantileTriple& q, double hi, Make make, Rescale rescale) {
    const double A = asym(q);
    double t = 0.0;
    if (A != 0.0)
        t = find_root([&](double x) { return asym(make(x).quantiles()) - std::abs(A); }, 0.0, hi,
                      1e-14).value;
    t = std::copysign(t, A);
    const auto base = make(t).quantiles();
    const double c = (q.sigma_plus + q.sigma_minus) / (base.sigma_plus + base.sigma_minus);
    return rescale(t, c, q.M - c * base.M);
}

} // namespace

PdfModel make_fechner(double m, double s1, double s2) {
    return finish(std::make_shared<Fechner>(m, s1, s2));
}
PdfModel make_edgeworth(double mu, double sigma, double gamma) {
    return finish(std::make_shared<Edgeworth>(mu, sigma, gamma));
}
PdfModel make_skew_normal(double xi, double omega, double alpha) {
    return finish(std::make_shared<SkewNormal>(xi, omega, alpha));
}
PdfModel make_log_normal(double xi, double gamma, double delta, int sign) {
    return finish(std::make_shared<LogNormal>(xi, gamma, delta, sign));
}
PdfModel make_gaussian_limit(PdfFamily family, double mu, double sigma) {
    return finish(std::make_shared<GaussianLimit>(family, mu, sigma));
}

PdfModel fechner_from_quantiles(const QuantileTriple& q) {
    const double lim = asym(make_fechner(0, 0, 2).quantiles());
    if (std::abs(asym(q)) > lim)
        fail(ErrorCode::UnrepresentableAsymmetry, "pdf_from_quantiles",
             "fechner asymmetry " + fmt(asym(q)) + " beyond bound " + fmt(lim));
    return solve_shape(
        q, 1.0, [](double t) { return make_fechner(0, 1 - t, 1 + t); },
        [](double t, double c, double shift) { return make_fechner(shift, c * (1 - t), c * (1 + t)); });
}

PdfModel fechner_from_moments(const MomentTriple& m) {
    const double s = m.skewness();
    auto skew = [](double t) { return make_fechner(0, 1 - t, 1 + t).moments().skewness(); };
    const double lim = skew(1.0);
    if (std::abs(s) > lim)
        fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
             "fechner skewness " + fmt(s) + " beyond bound " + fmt(lim));
    double t = 0.0;
    if (s != 0.0) t = find_root([&](double x) { return skew(x) - std::abs(s); }, 0.0, 1.0, 1e-15).value;
    t = std::copysign(t, s);
    const auto base = make_fechner(0, 1 - t, 1 + t).moments();
    const double c = std::sqrt(m.V / base.V);
    return make_fechner(m.mu - c * base.mu, c * (1 - t), c * (1 + t));
}

double edgeworth_max_asymmetry() {
    static const double v =
        find_root([](double A) { return edgeworth_k_from_asym(A) - 0.5; }, 1e-6, 0.9, 1e-15).value;
    return v;
}

namespace {

PdfModel edgeworth_checked(double mu, double sigma, double gamma, ErrorCode code,
                           const std::string& where) {
    try {
        return make_edgeworth(mu, sigma, gamma);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonConvergent) throw;
        fail(code, where, "edgeworth median iteration diverges");
    }
}

} // namespace

PdfModel edgeworth_from_quantiles(const QuantileTriple& q) {
    const double A = asym(q);
    const double k = edgeworth_k_from_asym(A);
    if (!(std::abs(k) < 0.5))
        fail(ErrorCode::UnrepresentableAsymmetry, "pdf_from_quantiles",
             "edgeworth asymmetry " + fmt(A) + " beyond bound " + fmt(edgeworth_max_asymmetry()));
    const double sigma = (q.sigma_plus + q.sigma_minus) / 2;
    const double mu = q.M + (q.sigma_plus - q.sigma_minus) / 2;
    return edgeworth_checked(mu, sigma, 6 * k * sigma * sigma * sigma,
                             ErrorCode::UnrepresentableAsymmetry, "pdf_from_quantiles");
}

PdfModel edgeworth_from_moments(const MomentTriple& m) {
    const double s = m.skewness();
    if (!(std::abs(s) < 3.0))
        fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
             "edgeworth skewness " + fmt(s) + " beyond bound 3");
    return edgeworth_checked(m.mu, std::sqrt(m.V), m.gamma, ErrorCode::UnrepresentableSkewness,
                             "pdf_from_moments");
}

PdfModel skew_normal_from_quantiles(const QuantileTriple& q) {
    const double A = asym(q);
    constexpr double lim = 0.21564027;
    auto make = [](double a) { return make_skew_normal(0, 1, a); };
    if (std::abs(A) >= lim)
        fail(ErrorCode::UnrepresentableAsymmetry, "pdf_from_quantiles",
             "skew-normal asymmetry " + fmt(A) + " beyond half-Gaussian bound " + fmt(lim));
    double hi = 1.0;
    if (A != 0.0) {
        while (asym(make(hi).quantiles()) < std::abs(A)) {
            hi *= 2;
            if (hi > 1e4)
                fail(ErrorCode::UnrepresentableAsymmetry, "pdf_from_quantiles",
                     "skew-normal asymmetry " + fmt(A) + " too close to the half-Gaussian bound");
        }
    }
    return solve_shape(q, hi, make, [](double a, double c, double shift) {
        return make_skew_normal(shift, c, a);
    });
}

PdfModel skew_normal_from_moments(const MomentTriple& m) {
    const double s = m.skewness();
    const double lim = max_skewness(PdfFamily::SkewNormal);
    if (std::abs(s) >= lim)
        fail(ErrorCode::UnrepresentableSkewness, "pdf_from_moments",
             "skew-normal skewness " + fmt(s) + " beyond bound " + fmt(lim));
    const double r = std::pow(2 * std::abs(s) / (4 - kPi), 2.0 / 3.0);
    const double delta = std::copysign(std::sqrt(kPi / 2 * r / (1 + r)), s);
    const double alpha = delta / std::sqrt(1 - delta * delta);
    const double b = delta * kRoot2OverPi;
    const double omega = std::sqrt(m.V / (1 - b * b));
    return make_skew_normal(m.mu - omega * b, omega, alpha);
}

PdfModel log_normal_from_quantiles(const QuantileTriple& q) {
    if (q.sigma_plus == q.sigma_minus)
        return make_gaussian_limit(PdfFamily::LogNormal, q.M, q.sigma_plus);
    const int sign = q.sigma_plus > q.sigma_minus ? 1 : -1;
    const double big = std::max(q.sigma_plus, q.sigma_minus);
    const double small = std::min(q.sigma_plus, q.sigma_minus);
    const double r = big / small;
    const double delta = 1 / std::log(r);
    const double m = big / (r - 1);
    return make_log_normal(q.M - sign * m, -delta * std::log(m), delta, sign);
}

PdfModel log_normal_from_moments(const MomentTriple& m) {
    const double s = m.skewness();
    if (s == 0.0) return make_gaussian_limit(PdfFamily::LogNormal, m.mu, std::sqrt(m.V));
    // e (e + 3)^2 = s^2 with e = w - 1
    const auto roots = solve_cubic_real(1.0, 6.0, 9.0, -s * s);
    double e = 0.0;
    for (double r : roots) e = std::max(e, r);
    if (!(e > 0)) return make_gaussian_limit(PdfFamily::LogNormal, m.mu, std::sqrt(m.V));
    const double w = 1 + e;
    const double delta = 1 / std::sqrt(std::log1p(e));
    const double scale = std::sqrt(m.V / (w * e));
    const int sign = s > 0 ? 1 : -1;
    return make_log_normal(m.mu - sign * std::sqrt(w) * scale, -delta * std::log(scale), delta, sign);
}

} // namespace asymerr::detail
