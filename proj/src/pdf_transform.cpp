#include "pdf_impl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace asymerr::detail {

namespace {

const double kSqrt2Pi = std::sqrt(2 * std::numbers::pi);

// real roots of c2 x^2 + c1 x + c0 inside [lo, hi]
void quadratic_roots_in(double c2, double c1, double c0, double lo, double hi,
                        std::vector<double>& out) {
    std::vector<double> r;
    if (c2 == 0.0) {
        if (c1 != 0.0) r.push_back(-c0 / c1);
    } else {
        const double disc = c1 * c1 - 4 * c2 * c0;
        if (disc < 0) return;
        const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
        if (q != 0.0) r.push_back(c0 / q);
        r.push_back(q / c2);
    }
    for (double x : r)
        if (x > lo && x < hi) out.push_back(x);
}

// ---- dimidiated ----

class Dimidiated final : public PdfImpl {
public:
    Dimidiated(double M, double sp, double sm) : M_(M), sp_(sp), sm_(sm) {}

    PdfFamily family() const override { return PdfFamily::Dimidiated; }
    std::vector<double> params() const override { return {M_, sp_, sm_}; }
    std::vector<std::string> param_names() const override {
        return {"M", "sigma_plus", "sigma_minus"};
    }

    double density(double x) const override {
        const double s = x < M_ ? sm_ : sp_;
        if (s == 0.0) return 0.0;
        return gauss_pdf((x - M_) / s) / s;
    }
    double cdf(double x) const override {
        if (x < M_) return sm_ > 0 ? gauss_cdf((x - M_) / sm_) : 0.0;
        return sp_ > 0 ? gauss_cdf((x - M_) / sp_) : 1.0;
    }
    double quantile(double p) const override {
        const double z = gauss_quantile(p);
        return M_ + (p < 0.5 ? sm_ : sp_) * z;
    }
    double sample(RandomSource& rs) const override {
        const double z = rs.next_gaussian();
        return M_ + (z < 0 ? sm_ : sp_) * z;
    }
    std::pair<double, double> support() const override {
        return {sm_ > 0 ? -kInf : M_, sp_ > 0 ? kInf : M_};
    }
    MomentTriple compute_moments() const override {
        const double D = sp_ - sm_;
        const double S2 = sp_ * sp_ + sm_ * sm_;
        const double mu = M_ + D / kSqrt2Pi;
        const double V = S2 / 2 - D * D / (2 * std::numbers::pi);
        const double g =
            (2 * (sp_ * sp_ * sp_ - sm_ * sm_ * sm_) - 1.5 * D * S2 + D * D * D / std::numbers::pi) /
            kSqrt2Pi;
        return {mu, V, g};
    }
    QuantileTriple compute_quantiles() const override { return {M_, sp_, sm_}; }

protected:
    double center_hint() const override { return M_; }
    double width_hint() const override { return (sp_ + sm_) / 2; }

private:
    double M_, sp_, sm_;
};

// ---- distorted ----

class Distorted final : public TransformImpl {
public:
    Distorted(double M, double a, double b) : M_(M), a_(a), b_(b) { build_segments(); }

    PdfFamily family() const override { return PdfFamily::Distorted; }
    std::vector<double> params() const override { return {M_, a_, b_}; }
    std::vector<std::string> param_names() const override { return {"M", "a", "b"}; }

    double R(double nu) const override { return M_ + (a_ + b_ * nu) * nu; }
    double dR(double nu) const override { return a_ + 2 * b_ * nu; }

    MomentTriple compute_moments() const override {
        return {M_ + b_, a_ * a_ + 2 * b_ * b_, 2 * b_ * (3 * a_ * a_ + 4 * b_ * b_)};
    }

protected:
    std::vector<double> breakpoints() const override {
        if (b_ == 0.0) return {};
        return {-a_ / (2 * b_)};
    }

private:
    double M_, a_, b_;
};

// ---- railway ----

class Railway final : public TransformImpl {
public:
    Railway(double M, double a, double b, double hl, double hr)
        : M_(M), a_(a), b_(b), hl_(hl), hr_(hr) {
        build_segments();
    }

    PdfFamily family() const override { return PdfFamily::Railway; }
    std::vector<double> params() const override { return {M_, a_, b_, hl_, hr_}; }
    std::vector<std::string> param_names() const override {
        return {"M", "a", "b", "h_l", "h_r"};
    }

    double R(double nu) const override {
        if (nu > 1) return side(nu - 1, M_ + a_ + b_, a_ + 2 * b_, hr_, false);
        if (nu < -1) return side(nu + 1, M_ - a_ + b_, a_ - 2 * b_, -hl_, false);
        return M_ + (a_ + b_ * nu) * nu;
    }
    double dR(double nu) const override {
        if (nu > 1) return side(nu - 1, M_ + a_ + b_, a_ + 2 * b_, hr_, true);
        if (nu < -1) return side(nu + 1, M_ - a_ + b_, a_ - 2 * b_, -hl_, true);
        return a_ + 2 * b_ * nu;
    }

protected:
    std::vector<double> breakpoints() const override {
        std::vector<double> b{-1 - hl_, -1.0, 1.0, 1 + hr_};
        quadratic_roots_in(0.0, 2 * b_, a_, -1.0, 1.0, b);
        // T'(t) = f''(t - t^2/(2h)) + f'
        const double f2 = 2 * b_;
        std::vector<double> t;
        quadratic_roots_in(-f2 / (2 * hr_), f2, a_ + 2 * b_, 0.0, hr_, t);
        for (double x : t) b.push_back(1 + x);
        t.clear();
        quadratic_roots_in(f2 / (2 * hl_), f2, a_ - 2 * b_, -hl_, 0.0, t);
        for (double x : t) b.push_back(-1 + x);
        return b;
    }

private:
    // transition polynomial past a junction, then a straight line
    double side(double t, double f, double f1, double h, bool deriv) const {
        const double f2 = 2 * b_;
        const bool inside = h > 0 ? t <= h : t >= h;
        if (inside) {
            if (deriv) return f2 * (t - t * t / (2 * h)) + f1;
            return (f2 / 2 * (1 - t / (3 * h)) * t + f1) * t + f;
        }
        const double slope = f2 * h / 2 + f1;
        if (deriv) return slope;
        return f2 * h * h / 3 + f1 * h + f + slope * (t - h);
    }

    double M_, a_, b_, hl_, hr_;
};

// ---- double cubic ----

class DoubleCubic final : public TransformImpl {
public:
    DoubleCubic(double M, double sp, double sm) : M_(M), sp_(sp), sm_(sm) { build_segments(); }

    PdfFamily family() const override { return PdfFamily::DoubleCubic; }
    std::vector<double> params() const override { return {M_, sp_, sm_}; }
    std::vector<std::string> param_names() const override {
        return {"M", "sigma_plus", "sigma_minus"};
    }

    double R(double nu) const override {
        const double c = sp_ - sm_;
        if (nu <= -1) return M_ - sm_ + (5 * sm_ - sp_) / 4 * (nu + 1);
        if (nu >= 1) return M_ + sp_ + (5 * sp_ - sm_) / 4 * (nu - 1);
        if (nu < 0) return M_ + nu * ((nu * nu + 3 * nu + 2) * c / 4 + sm_);
        return M_ + nu * ((nu * nu - 3 * nu + 2) * (-c) / 4 + sp_);
    }
    double dR(double nu) const override {
        const double c = sp_ - sm_;
        if (nu <= -1) return (5 * sm_ - sp_) / 4;
        if (nu >= 1) return (5 * sp_ - sm_) / 4;
        if (nu < 0) return c / 4 * (3 * nu * nu + 6 * nu + 2) + sm_;
        return -c / 4 * (3 * nu * nu - 6 * nu + 2) + sp_;
    }

protected:
    std::vector<double> breakpoints() const override {
        const double c = sp_ - sm_;
        std::vector<double> b{-1.0, 0.0, 1.0};
        quadratic_roots_in(3 * c, 6 * c, 2 * c + 4 * sm_, -1.0, 0.0, b);
        quadratic_roots_in(-3 * c, 6 * c, -2 * c + 4 * sp_, 0.0, 1.0, b);
        return b;
    }

private:
    double M_, sp_, sm_;
};

// ---- symmetric beta ----

// integral of (1-t^2)^p from 0 to u
double beta_integral(int p, double u) {
    double I = u;
    const double w = 1 - u * u;
    double wp = 1.0;
    for (int k = 1; k <= p; ++k) {
        wp *= w;
        I = (u * wp + 2 * k * I) / (2 * k + 1);
    }
    return I;
}

class SymmetricBeta final : public TransformImpl {
public:
    SymmetricBeta(double M, double sp, double sm, int p, double h) : M_(M), p_(p), h_(h) {
        k_ = (sp + sm) / 2;
        A_ = (sp - sm) / (2 * G(1.0));
        build_segments();
    }

    PdfFamily family() const override { return PdfFamily::SymmetricBeta; }
    std::vector<double> params() const override { return {M_, A_, k_, double(p_), h_}; }
    std::vector<std::string> param_names() const override { return {"M", "A", "k", "p", "h"}; }

    double R(double nu) const override { return M_ + A_ * G(nu) + k_ * nu; }
    double dR(double nu) const override { return A_ * dG(nu) + k_; }

protected:
    std::vector<double> breakpoints() const override {
        std::vector<double> b{-h_, h_};
        const double lo = dR(-h_), hi = dR(h_);
        if ((lo < 0 && hi > 0) || (lo > 0 && hi < 0))
            b.push_back(find_root([&](double nu) { return dR(nu); }, -h_, h_, 1e-15).value);
        return b;
    }

private:
    // even kernel: h^2 [u I(u) - (1 - (1-u^2)^(p+1)) / (2(p+1))], linear beyond |u| = 1
    double G(double nu) const {
        const double an = std::abs(nu);
        if (an >= h_) {
            const double edge = h_ * h_ * (beta_integral(p_, 1.0) - 1.0 / (2 * (p_ + 1)));
            return edge + h_ * beta_integral(p_, 1.0) * (an - h_);
        }
        const double u = an / h_;
        return h_ * h_ *
               (u * beta_integral(p_, u) - (1 - std::pow(1 - u * u, p_ + 1)) / (2 * (p_ + 1)));
    }
    double dG(double nu) const {
        const double u = std::clamp(nu / h_, -1.0, 1.0);
        return h_ * beta_integral(p_, u);
    }

    double M_, A_ = 0, k_ = 0;
    int p_;
    double h_;
};

// ---- QVW ----

const double kM11 = 1 / (2 * std::sqrt(std::numbers::pi));
const double kM22 = (std::sqrt(3.0) + 2 * std::numbers::pi) / (6 * std::numbers::pi);
const double kM31 = 5 / (4 * std::sqrt(std::numbers::pi));
const double kM32 = kM31;
constexpr double kM33 = 0.6751064260945980674284983;

double qvw_gamma_unit(double a) {
    const double m = kM11;
    return a / 4 *
           (8 * a * a * m * m * m - 3 * m * (4 + a * a * (4 * kM22 - 1)) + 3 * (a - 2) * (a - 2) * kM31 -
            6 * (a - 2) * a * kM32 + 4 * a * a * kM33);
}

double qvw_var_unit(double a) { return 1 + a * a * (kM22 - kM11 * kM11 - 0.25); }

class QVW final : public TransformImpl {
public:
    QVW(double mu0, double s0, double a) : mu0_(mu0), s0_(s0), a_(a) { build_segments(); }

    PdfFamily family() const override { return PdfFamily::QVW; }
    std::vector<double> params() const override { return {mu0_, s0_, a_}; }
    std::vector<std::string> param_names() const override { return {"mu0", "sigma0", "a"}; }

    double R(double z) const override { return mu0_ + s0_ * z * (1 + a_ * (gauss_cdf(z) - 0.5)); }
    double dR(double z) const override {
        return s0_ * (1 + a_ * (gauss_cdf(z) - 0.5) + a_ * z * gauss_pdf(z));
    }
    MomentTriple compute_moments() const override {
        return {mu0_ + s0_ * a_ * kM11, s0_ * s0_ * qvw_var_unit(a_),
                s0_ * s0_ * s0_ * qvw_gamma_unit(a_)};
    }

protected:
    std::vector<double> breakpoints() const override { return {}; }

private:
    double mu0_, s0_, a_;
};

double clamp_h(double fp, double fpp) {
    if (fpp == 0.0) return 10.0;
    return std::clamp(std::abs(fp / fpp), 0.1, 10.0);
}

} // namespace

PdfModel make_dimidiated(double M, double sp, double sm, std::string warning) {
    auto impl = std::make_shared<Dimidiated>(M, sp, sm);
    impl->set_warning(std::move(warning));
    return finish(impl);
}

PdfModel make_distorted(double M, double a, double b) {
    return finish(std::make_shared<Distorted>(M, a, b));
}

PdfModel make_railway(double M, double a, double b, std::optional<double> hl,
                      std::optional<double> hr) {
    const double l = hl ? *hl : clamp_h(a - 2 * b, 2 * b);
    const double r = hr ? *hr : clamp_h(a + 2 * b, 2 * b);
    return finish(std::make_shared<Railway>(M, a, b, l, r));
}

PdfModel make_double_cubic(double M, double sp, double sm) {
    return finish(std::make_shared<DoubleCubic>(M, sp, sm));
}

PdfModel make_symmetric_beta(double M, double sp, double sm, int p, double h) {
    return finish(std::make_shared<SymmetricBeta>(M, sp, sm, p, h));
}

PdfModel make_qvw(double mu0, double sigma0, double a) {
    return finish(std::make_shared<QVW>(mu0, sigma0, a));
}

double qvw_max_a() {
    const double z = -std::sqrt(2.0);
    return -1 / (gauss_cdf(z) - 0.5 + z * gauss_pdf(z));
}

double qvw_skewness(double a) { return qvw_gamma_unit(a) / std::pow(qvw_var_unit(a), 1.5); }

double dimidiated_max_skewness() {
    const double pi = std::numbers::pi;
    return (pi + 2) / std::sqrt((pi - 1) * (pi - 1) * (pi - 1));
}

} // namespace asymerr::detail
