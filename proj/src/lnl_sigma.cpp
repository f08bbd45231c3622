#include "lnl_impl.hpp"

#include <algorithm>
#include <cmath>

namespace asymerr::detail {

namespace {

class LinearSigma final : public LnLImpl {
public:
    LinearSigma(double sp, double sm)
        : s_(2 * sp * sm / (sp + sm)), ds_((sp - sm) / (sp + sm)) {}
    LnLFamily family() const override { return LnLFamily::LinearSigma; }
    std::vector<double> params() const override { return {s_, ds_}; }
    std::vector<std::string> param_names() const override { return {"sigma", "sigma_prime"}; }
    double eval(double x) const override {
        const double r = x / (s_ + ds_ * x);
        return -0.5 * r * r;
    }
    double slope(double x) const override {
        const double d = s_ + ds_ * x;
        return -x * s_ / (d * d * d);
    }
    std::pair<double, double> domain() const override {
        if (ds_ > 0) return {-s_ / ds_, kInf};
        if (ds_ < 0) return {-kInf, -s_ / ds_};
        return {-kInf, kInf};
    }

private:
    double s_, ds_;
};

class LinearVariance final : public LnLImpl {
public:
    LinearVariance(double sp, double sm) : V_(sp * sm), dV_(sp - sm) {}
    LnLFamily family() const override { return LnLFamily::LinearVariance; }
    std::vector<double> params() const override { return {V_, dV_}; }
    std::vector<std::string> param_names() const override { return {"V", "V_prime"}; }
    double eval(double x) const override { return -0.5 * x * x / (V_ + dV_ * x); }
    double slope(double x) const override {
        const double d = V_ + dV_ * x;
        return -x * (2 * V_ + dV_ * x) / (2 * d * d);
    }
    std::pair<double, double> domain() const override {
        if (dV_ > 0) return {-V_ / dV_, kInf};
        if (dV_ < 0) return {-kInf, -V_ / dV_};
        return {-kInf, kInf};
    }

private:
    double V_, dV_;
};

// -(x / sigma(x))^2 / 2 for a positive width sigma(x)
class VariableWidth : public LnLImpl {
public:
    double eval(double x) const override {
        const double r = x / width(x);
        return -0.5 * r * r;
    }

protected:
    virtual double width(double x) const = 0;
};

class PDG final : public VariableWidth {
public:
    PDG(double sp, double sm)
        : sp_(sp), sm_(sm), s_(2 * sp * sm / (sp + sm)), ds_((sp - sm) / (sp + sm)) {}
    LnLFamily family() const override { return LnLFamily::PDG; }
    std::vector<double> params() const override { return {s_, ds_}; }
    std::vector<std::string> param_names() const override { return {"sigma", "sigma_prime"}; }
    bool c2() const override { return sp_ == sm_; }

protected:
    double width(double x) const override {
        if (x > sp_) return sp_;
        if (x < -sm_) return sm_;
        return s_ + ds_ * x;
    }

private:
    double sp_, sm_, s_, ds_;
};

// Fechner cdf with mode 0, s1 below and s2 above
double fechner_cdf(double x, double s1, double s2) {
    if (x < 0) return 2 * s1 / (s1 + s2) * gauss_cdf(x / s1);
    return (s1 + s2 * (2 * gauss_cdf(x / s2) - 1)) / (s1 + s2);
}

class LinearSigmaLog final : public VariableWidth {
public:
    LinearSigmaLog(double sp, double sm) : sp_(sp), sm_(sm) {
        const double y1 = fechner_cdf(-sm, sm, sp);
        const double y2 = fechner_cdf(sp, sm, sp);
        alpha_ = (std::log(sp) - std::log(sm)) / (y2 - y1);
        beta_ = std::log(sm) - alpha_ * y1;
    }
    LnLFamily family() const override { return LnLFamily::LinearSigmaLog; }
    std::vector<double> params() const override { return {alpha_, beta_}; }
    std::vector<std::string> param_names() const override { return {"alpha", "beta"}; }

protected:
    double width(double x) const override {
        return std::exp(alpha_ * fechner_cdf(x, sm_, sp_) + beta_);
    }

private:
    double sp_, sm_, alpha_, beta_;
};

// ln sigma: cubic from ln s0 at zero to ln s at distance s, flat beyond
class DoubleCubicLogSigma final : public VariableWidth {
public:
    DoubleCubicLogSigma(double sp, double sm, double s0)
        : sp_(sp), sm_(sm), s0_(s0), lp_(std::log(sp)), lm_(std::log(sm)), l0_(std::log(s0)) {}
    LnLFamily family() const override { return LnLFamily::DoubleCubicLogSigma; }
    std::vector<double> params() const override { return {s0_}; }
    std::vector<std::string> param_names() const override { return {"sigma0"}; }

protected:
    double width(double x) const override {
        if (x >= sp_) return sp_;
        if (x <= -sm_) return sm_;
        if (x >= 0) {
            const double u = 1 - x / sp_;
            return std::exp(lp_ + (l0_ - lp_) * u * u * u);
        }
        const double u = 1 + x / sm_;
        return std::exp(lm_ + (l0_ - lm_) * u * u * u);
    }

private:
    double sp_, sm_, s0_, lp_, lm_, l0_;
};

// ln sigma: smoothstep between ln sm at -sm and ln sp at sp
class QuinticLogSigma final : public VariableWidth {
public:
    QuinticLogSigma(double sp, double sm) : sp_(sp), sm_(sm), lp_(std::log(sp)), lm_(std::log(sm)) {}
    LnLFamily family() const override { return LnLFamily::QuinticLogSigma; }
    std::vector<double> params() const override {
        // ln sigma = sum c_k t^k with t = (a - a_hat + sm)/(sp + sm)
        const double d = lp_ - lm_;
        return {lm_, 10 * d, -15 * d, 6 * d};
    }
    std::vector<std::string> param_names() const override { return {"c0", "c3", "c4", "c5"}; }

protected:
    double width(double x) const override {
        const double t = std::clamp((x + sm_) / (sp_ + sm_), 0.0, 1.0);
        const double S = t * t * t * (10 + t * (-15 + 6 * t));
        return std::exp(lm_ + (lp_ - lm_) * S);
    }

private:
    double sp_, sm_, lp_, lm_;
};

double broken(double x, double sp, double sm) {
    const double s = x >= 0 ? sp : sm;
    return -0.5 * x * x / (s * s);
}

// (1/sm) int_{-sm}^0 (lnL - g)^2 + (1/sp) int_0^{sp} (lnL - g)^2
double molding(const LnLImpl& c, double sp, double sm) {
    auto sq = [&](double x) {
        const double d = c.eval(x) - broken(x, sp, sm);
        return d * d;
    };
    // absolute floor: near the optimum the squared deviation is close to zero
    return integrate(sq, -sm, 0.0, 1e-10, 1e-14 * sm) / sm + integrate(sq, 0.0, sp, 1e-10, 1e-14 * sp) / sp;
}

} // namespace

ImplPtr make_linear_sigma(double sp, double sm) { return std::make_shared<LinearSigma>(sp, sm); }

ImplPtr make_linear_variance(double sp, double sm) {
    return std::make_shared<LinearVariance>(sp, sm);
}

ImplPtr make_pdg(double sp, double sm) { return std::make_shared<PDG>(sp, sm); }

ImplPtr make_linear_sigma_log(double sp, double sm) {
    return std::make_shared<LinearSigmaLog>(sp, sm);
}

ImplPtr make_quintic_log_sigma(double sp, double sm) {
    return std::make_shared<QuinticLogSigma>(sp, sm);
}

ImplPtr make_double_cubic_log_sigma(double sp, double sm) {
    if (sp == sm) return std::make_shared<DoubleCubicLogSigma>(sp, sm, sp);
    auto J = [&](double l0) { return -molding(DoubleCubicLogSigma(sp, sm, std::exp(l0)), sp, sm); };
    // coarse scan, then golden section around the best point
    const double lo = std::log(std::min(sp, sm)) - 0.5;
    const double hi = std::log(std::max(sp, sm)) + 0.5;
    constexpr int n = 24;
    int best = 0;
    double bv = -kInf;
    for (int i = 0; i <= n; ++i) {
        const double v = J(lo + (hi - lo) * i / n);
        if (v > bv) {
            bv = v;
            best = i;
        }
    }
    const double a = lo + (hi - lo) * std::max(best - 1, 0) / n;
    const double b = lo + (hi - lo) * std::min(best + 1, n) / n;
    const auto m = maximize(J, a, b, 1e-12);
    return std::make_shared<DoubleCubicLogSigma>(sp, sm, std::exp(m.x));
}

} // namespace asymerr::detail
