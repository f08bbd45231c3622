#include "lnl_impl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace asymerr::detail {

namespace {

// -x^2/(2 s^2) with s = sp above zero, sm below
double broken(double x, double sp, double sm) {
    const double s = x >= 0 ? sp : sm;
    return -0.5 * x * x / (s * s);
}

class Cubic final : public LnLImpl {
public:
    Cubic(double sp, double sm) {
        const double k = sp * sp * sm * sm * (sp + sm);
        a_ = (sp * sp * sp + sm * sm * sm) / k;
        b_ = (sm * sm - sp * sp) / k;
        tp_ = b_ != 0 ? -2 * a_ / (3 * b_) : kInf;
    }
    LnLFamily family() const override { return LnLFamily::Cubic; }
    std::vector<double> params() const override { return {a_, b_}; }
    std::vector<std::string> param_names() const override { return {"alpha", "beta"}; }
    double eval(double x) const override { return -0.5 * (a_ * x * x + b_ * x * x * x); }
    double slope(double x) const override { return -0.5 * (2 * a_ * x + 3 * b_ * x * x); }
    // cut at the second turning point
    std::pair<double, double> domain() const override {
        if (b_ > 0) return {tp_, kInf};
        if (b_ < 0) return {-kInf, tp_};
        return {-kInf, kInf};
    }

private:
    double a_, b_, tp_;
};

class Broken final : public LnLImpl {
public:
    Broken(double sp, double sm) : sp_(sp), sm_(sm) {}
    LnLFamily family() const override { return LnLFamily::BrokenParabola; }
    std::vector<double> params() const override { return {sp_, sm_}; }
    std::vector<std::string> param_names() const override {
        return {"sigma_plus", "sigma_minus"};
    }
    double eval(double x) const override { return broken(x, sp_, sm_); }
    double slope(double x) const override {
        const double s = x >= 0 ? sp_ : sm_;
        return -x / (s * s);
    }
    bool c2() const override { return sp_ == sm_; }

private:
    double sp_, sm_;
};

// Gaussian with the mean and width of the Fechner density of the broken parabola
class Symmetrized final : public LnLImpl {
public:
    Symmetrized(double sp, double sm) {
        const double d = sp - sm;
        mu_ = std::sqrt(2 / std::numbers::pi) * d;
        V_ = (1 - 2 / std::numbers::pi) * d * d + sp * sm;
    }
    LnLFamily family() const override { return LnLFamily::SymmetrizedParabola; }
    std::vector<double> params() const override { return {mu_, std::sqrt(V_)}; }
    std::vector<std::string> param_names() const override { return {"shift", "sigma"}; }
    double eval(double x) const override { return -0.5 * (x - mu_) * (x - mu_) / V_; }
    double slope(double x) const override { return -(x - mu_) / V_; }
    double peak() const override { return mu_; }

private:
    double mu_, V_;
};

// -(c2 x^2 + c3 x^3 + ... ) / 2, coefficients from degree 2 upward
class Polynomial : public LnLImpl {
public:
    explicit Polynomial(std::vector<double> c) : c_(std::move(c)) {}

protected:
    double poly(double x) const {
        double v = 0;
        for (std::size_t i = c_.size(); i-- > 0;) v = v * x + c_[i];
        return -0.5 * v * x * x;
    }
    double dpoly(double x) const {
        double v = 0;
        for (std::size_t i = c_.size(); i-- > 0;) v = v * x + (i + 2) * c_[i];
        return -0.5 * v * x;
    }
    std::vector<double> c_;
};

class ConstrainedQuartic final : public LnLImpl {
public:
    ConstrainedQuartic(double a, double b) : a_(a), b_(b) {}
    LnLFamily family() const override { return LnLFamily::ConstrainedQuartic; }
    std::vector<double> params() const override { return {a_, b_}; }
    std::vector<std::string> param_names() const override { return {"alpha", "beta"}; }
    double eval(double x) const override {
        return -0.5 * x * x * (a_ * a_ / 2 + a_ * b_ * x / 3 + b_ * b_ * x * x / 12);
    }
    double slope(double x) const override {
        return -0.5 * x * (a_ * a_ + a_ * b_ * x + b_ * b_ * x * x / 3);
    }

private:
    double a_, b_;
};

class MoldedQuartic final : public Polynomial {
public:
    using Polynomial::Polynomial;
    LnLFamily family() const override { return LnLFamily::MoldedQuartic; }
    // stored low to high, reported as the alpha a^4 + beta a^3 + gamma a^2 form
    std::vector<double> params() const override { return {c_[2], c_[1], c_[0]}; }
    std::vector<std::string> param_names() const override { return {"alpha", "beta", "gamma"}; }
    double eval(double x) const override { return poly(x); }
    double slope(double x) const override { return dpoly(x); }
};

// polynomial on [-sm, sp], continued outside by a parabola of curvature
// -1/s^2 that matches value and slope at the join
class Joined : public Polynomial {
public:
    Joined(LnLFamily f, std::vector<double> c, double sp, double sm)
        : Polynomial(std::move(c)), f_(f), sp_(sp), sm_(sm),
          dp_(dpoly(sp)), dm_(dpoly(-sm)), vp_(poly(sp)), vm_(poly(-sm)) {}
    LnLFamily family() const override { return f_; }
    std::vector<double> params() const override {
        return std::vector<double>(c_.rbegin(), c_.rend());
    }
    std::vector<std::string> param_names() const override {
        static const char* greek[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};
        return {greek, greek + c_.size()};
    }
    double eval(double x) const override {
        if (x > sp_) {
            const double d = x - sp_;
            return vp_ + dp_ * d - 0.5 * d * d / (sp_ * sp_);
        }
        if (x < -sm_) {
            const double d = x + sm_;
            return vm_ + dm_ * d - 0.5 * d * d / (sm_ * sm_);
        }
        return poly(x);
    }
    double slope(double x) const override {
        if (x > sp_) return dp_ - (x - sp_) / (sp_ * sp_);
        if (x < -sm_) return dm_ - (x + sm_) / (sm_ * sm_);
        return dpoly(x);
    }
    bool c2() const override { return f_ == LnLFamily::MatchedQuintic || f_ == LnLFamily::Interpolated7th; }

private:
    LnLFamily f_;
    double sp_, sm_, dp_, dm_, vp_, vm_;
};

// per-side polynomial in u = |x|/s with quadratic continuation past u = 1
class DoublePoly final : public LnLImpl {
public:
    struct Side {
        double s;
        std::array<double, 4> d; // coefficients of u^2 .. u^5
        double end_slope;        // dP/du at u = 1
        double eval(double u) const {
            if (u > 1) {
                const double w = u - 1;
                return -0.5 + end_slope * w - 0.5 * w * w;
            }
            return u * u * (d[0] + u * (d[1] + u * (d[2] + u * d[3])));
        }
        double deriv(double u) const {
            if (u > 1) return end_slope - (u - 1);
            return u * (2 * d[0] + u * (3 * d[1] + u * (4 * d[2] + u * 5 * d[3])));
        }
    };

    DoublePoly(LnLFamily f, double s0, Side plus, Side minus)
        : f_(f), s0_(s0), p_(plus), m_(minus) {}
    LnLFamily family() const override { return f_; }
    std::vector<double> params() const override { return {s0_}; }
    std::vector<std::string> param_names() const override { return {"sigma0"}; }
    double eval(double x) const override {
        return x >= 0 ? p_.eval(x / p_.s) : m_.eval(-x / m_.s);
    }
    double slope(double x) const override {
        return x >= 0 ? p_.deriv(x / p_.s) / p_.s : -m_.deriv(-x / m_.s) / m_.s;
    }

private:
    LnLFamily f_;
    double s0_;
    Side p_, m_;
};

DoublePoly::Side double_side(double s, double s0, bool quintic) {
    const double r = (s / s0) * (s / s0);
    const double e = r - 1;
    DoublePoly::Side side{s, {-r / 2, 0, 0, 0}, 0};
    if (quintic) {
        side.d[1] = 1.5 * e;
        side.d[2] = -1.5 * e;
        side.d[3] = 0.5 * e;
    } else {
        side.d[1] = 5 * e / 6;
        side.d[2] = -e / 3;
    }
    side.end_slope = 2 * side.d[0] + 3 * side.d[1] + 4 * side.d[2] + 5 * side.d[3];
    return side;
}

// Conservative spline, built with the smaller error s on the positive side:
// curvature -1/(kappa m^2) left of -L, -kappa/s^2 right of R, linear between.
struct SplineFit {
    double L, R;
};

struct SplineGeom {
    double s, m, kappa;
    double cl() const { return -1 / (kappa * m * m); }
    double cr() const { return -kappa / (s * s); }

    double at_plus(double L, double R) const {
        const double k = (cr() - cl()) / (R + L);
        return cl() * (s * R - R * R / 2) + k * (L * (s * R - R * R / 2) + s * R * R / 2 - R * R * R / 3) +
               cr() * (s - R) * (s - R) / 2;
    }
    double at_minus(double L, double R) const {
        const double k = (cr() - cl()) / (R + L);
        return cl() * (m - L) * (m - L) / 2 + cl() * (L * L / 2 + (m - L) * L) +
               k * (L * L * L / 3 + (m - L) * L * L / 2);
    }
};

std::optional<SplineFit> spline_solve(const SplineGeom& g) {
    // at_minus falls with L and rises with R; at_plus rises with R
    auto L_for = [&](double R) -> std::optional<double> {
        auto f = [&](double L) { return g.at_minus(L, R) + 0.5; };
        const double lo = 1e-300, hi = g.m;
        if (f(lo) < 0 || f(hi) > 0) return std::nullopt;
        return find_root(f, lo, hi, 1e-15 * g.m).value;
    };
    auto G = [&](double R) -> std::optional<double> {
        auto L = L_for(R);
        if (!L) return std::nullopt;
        return g.at_plus(*L, R) + 0.5;
    };
    constexpr int n = 64;
    double prevR = 0;
    std::optional<double> prev;
    for (int i = 1; i <= n; ++i) {
        const double R = g.s * i / n;
        const auto v = G(R);
        if (v && prev && (*prev) * (*v) <= 0) {
            auto h = [&](double r) {
                auto w = G(r);
                return w ? *w : (*prev < 0 ? 1.0 : -1.0);
            };
            const double Rs = find_root(h, prevR, R, 1e-15 * g.s).value;
            if (auto L = L_for(Rs)) return SplineFit{*L, Rs};
            return std::nullopt;
        }
        if (v) {
            prev = v;
            prevR = R;
        }
    }
    return std::nullopt;
}

class ConservativeSpline final : public LnLImpl {
public:
    ConservativeSpline(double sp, double sm, double kappa, bool flip, SplineGeom g, SplineFit fit)
        : sp_(sp), sm_(sm), kappa_(kappa), flip_(flip), L_(fit.L), R_(fit.R),
          cl_(g.cl()), cr_(g.cr()) {
        alpha_ = (cr_ - cl_) / (6 * (R_ + L_));
        beta_ = (cr_ - 6 * alpha_ * R_) / 2;
        vR_ = cubic(R_);
        dR_ = dcubic(R_);
        vL_ = cubic(-L_);
        dL_ = dcubic(-L_);
    }
    LnLFamily family() const override { return LnLFamily::ConservativeSpline; }
    std::vector<double> params() const override {
        if (flip_) return {-R_, L_, -alpha_, beta_, kappa_};
        return {-L_, R_, alpha_, beta_, kappa_};
    }
    std::vector<std::string> param_names() const override {
        return {"a_left", "a_right", "alpha", "beta", "kappa"};
    }
    double eval(double x) const override { return local(flip_ ? -x : x); }
    double slope(double x) const override { return flip_ ? -dlocal(-x) : dlocal(x); }

private:
    double cubic(double x) const { return x * x * (alpha_ * x + beta_); }
    double dcubic(double x) const { return x * (3 * alpha_ * x + 2 * beta_); }
    double local(double x) const {
        if (x >= R_) {
            const double d = x - R_;
            return vR_ + dR_ * d + 0.5 * cr_ * d * d;
        }
        if (x <= -L_) {
            const double d = x + L_;
            return vL_ + dL_ * d + 0.5 * cl_ * d * d;
        }
        return cubic(x);
    }
    double dlocal(double x) const {
        if (x >= R_) return dR_ + cr_ * (x - R_);
        if (x <= -L_) return dL_ + cl_ * (x + L_);
        return dcubic(x);
    }

    double sp_, sm_, kappa_;
    bool flip_;
    double L_, R_, cl_, cr_;
    double alpha_ = 0, beta_ = 0, vR_ = 0, dR_ = 0, vL_ = 0, dL_ = 0;
};

// kappa = 1: the spline points meet at zero and the broken parabola remains
class FlatSpline final : public LnLImpl {
public:
    FlatSpline(double sp, double sm) : sp_(sp), sm_(sm) {}
    LnLFamily family() const override { return LnLFamily::ConservativeSpline; }
    std::vector<double> params() const override { return {0, 0, 0, 0, 1}; }
    std::vector<std::string> param_names() const override {
        return {"a_left", "a_right", "alpha", "beta", "kappa"};
    }
    double eval(double x) const override { return broken(x, sp_, sm_); }
    double slope(double x) const override { return -x / (x >= 0 ? sp_ * sp_ : sm_ * sm_); }
    bool c2() const override { return sp_ == sm_; }

private:
    double sp_, sm_;
};

double molded_s0(double sp, double sm) {
    return std::sqrt((sp * sp * sp * sp + sm * sm * sm * sm) / (sp * sp + sm * sm));
}

} // namespace

ImplPtr make_cubic(double sp, double sm) {
    if (std::max(sp, sm) >= 2 * std::min(sp, sm))
        fail(ErrorCode::UnrepresentableAsymmetry, "lnl_from_triple",
             "cubic needs sigma ratio below 2, got " + fmt(std::max(sp, sm) / std::min(sp, sm)));
    return std::make_shared<Cubic>(sp, sm);
}

ImplPtr make_broken_parabola(double sp, double sm) { return std::make_shared<Broken>(sp, sm); }

ImplPtr make_symmetrized_parabola(double sp, double sm) {
    return std::make_shared<Symmetrized>(sp, sm);
}

ImplPtr make_constrained_quartic(double sp, double sm) {
    const double s = sp, m = sm;
    const double inner = 4 * s * m * m * m + 4 * m * s * s * s - 2 * s * s * s * s - 2 * m * m * m * m;
    if (inner < 0)
        fail(ErrorCode::UnrepresentableAsymmetry, "lnl_from_triple",
             "constrained-quartic has no single-peak solution for ratio " +
                 fmt(std::max(s, m) / std::min(s, m)));
    // 12(s+m)^2 - 24 sqrt(inner), rationalized against cancellation
    const double num = 144 * (s - m) * (s - m) * (9 * s * s + 6 * s * m + 9 * m * m) /
                       (12 * (s + m) * (s + m) + 24 * std::sqrt(inner));
    const double beta = std::sqrt(num / (3 * m * m + 2 * s * m + 3 * s * s)) / (s * m);

    auto resid = [&](double a, double b) {
        const double rp = a * a * s * s / 2 + a * b * s * s * s / 3 + b * b * s * s * s * s / 12 - 1;
        const double rm = a * a * m * m / 2 - a * b * m * m * m / 3 + b * b * m * m * m * m / 12 - 1;
        return std::max(std::abs(rp), std::abs(rm));
    };
    const double qp = std::sqrt(std::max(0.0, 72 - 2 * beta * beta * s * s * s * s)) / (6 * s);
    const double qm = std::sqrt(std::max(0.0, 72 - 2 * beta * beta * m * m * m * m)) / (6 * m);
    const double cand[] = {-beta * s / 3 + qp, -beta * s / 3 - qp, beta * m / 3 + qm, beta * m / 3 - qm};
    double best_a = 0, best_r = kInf;
    for (double a : cand) {
        const double r = resid(a, beta);
        if (r < best_r) {
            best_r = r;
            best_a = a;
        }
    }
    if (best_r > 1e-9)
        fail(ErrorCode::NonConvergent, "lnl_from_triple",
             "constrained-quartic roots disagree by " + fmt(best_r));
    // (alpha, beta) and (-alpha, -beta) give the same curve
    if (best_a < 0) return std::make_shared<ConstrainedQuartic>(-best_a, -beta);
    return std::make_shared<ConstrainedQuartic>(best_a, beta);
}

ImplPtr make_molded_quartic(double sp, double sm) {
    const double s = sp, m = sm;
    const double s2 = s * s, m2 = m * m;
    const double eta = 2 * m2 * s2 * std::pow(m + s, 4) *
                       (5 * m2 * m2 - 10 * m2 * m * s + 12 * m2 * s2 - 10 * m * s2 * s + 5 * s2 * s2);
    const double alpha = 3 * (m - s) * (m - s) *
                         (5 * std::pow(m, 6) + 8 * std::pow(m, 5) * s + 5 * std::pow(m, 4) * s2 +
                          8 * std::pow(m, 3) * std::pow(s, 3) + 5 * m2 * std::pow(s, 4) +
                          8 * m * std::pow(s, 5) + 5 * std::pow(s, 6)) /
                         eta;
    const double beta =
        (m - s) *
        (25 * (std::pow(m, 8) + std::pow(s, 8)) +
         14 * (std::pow(m, 7) * s - std::pow(m, 6) * s2 + std::pow(m, 5) * std::pow(s, 3) -
               std::pow(m, 4) * std::pow(s, 4) + std::pow(m, 3) * std::pow(s, 5) -
               m2 * std::pow(s, 6) + m * std::pow(s, 7))) /
        eta;
    const double gamma =
        (10 * std::pow(m, 10) - 5 * std::pow(m, 9) * s + 30 * std::pow(m, 7) * std::pow(s, 3) -
         6 * std::pow(m, 6) * std::pow(s, 4) + 6 * std::pow(m, 5) * std::pow(s, 5) -
         6 * std::pow(m, 4) * std::pow(s, 6) + 30 * std::pow(m, 3) * std::pow(s, 7) -
         5 * m * std::pow(s, 9) + 10 * std::pow(s, 10)) /
        eta;
    return std::make_shared<MoldedQuartic>(std::vector<double>{gamma, beta, alpha});
}

ImplPtr make_matched_quintic(double sp, double sm) {
    const double s = sp, m = sm;
    const double eta = m * m * s * s * (8 * m * m + 19 * m * s + 8 * s * s);
    const double alpha = -10 * (m - s) / eta;
    const double beta = -18 * (m - s) * (m - s) / eta;
    const double gamma = 45 * m * s * (m - s) / eta;
    const double delta = (8 * std::pow(m, 4) + 19 * std::pow(m, 3) * s - 19 * m * m * s * s +
                          19 * m * std::pow(s, 3) + 8 * std::pow(s, 4)) /
                         eta;
    return std::make_shared<Joined>(LnLFamily::MatchedQuintic,
                                    std::vector<double>{delta, gamma, beta, alpha}, sp, sm);
}

ImplPtr make_interpolated_7th(double sp, double sm) {
    const double s = sp, m = sm;
    const double eta = m * m * s * s * std::pow(m + s, 4);
    const double d = m - s;
    const double c7 = 6 * d / eta;
    const double c6 = 15 * d * d / eta;
    const double c5 = 10 * d * (m * m - 4 * m * s + s * s) / eta;
    const double c4 = -30 * m * s * d * d / eta;
    const double c3 = 30 * m * m * s * s * d / eta;
    const double c2 = (std::pow(m, 6) + 4 * std::pow(m, 5) * s + 6 * std::pow(m, 4) * s * s -
                       6 * std::pow(m, 3) * std::pow(s, 3) + 6 * m * m * std::pow(s, 4) +
                       4 * m * std::pow(s, 5) + std::pow(s, 6)) /
                      eta;
    return std::make_shared<Joined>(LnLFamily::Interpolated7th,
                                    std::vector<double>{c2, c3, c4, c5, c6, c7}, sp, sm);
}

ImplPtr make_double_poly(LnLFamily f, double sp, double sm) {
    const bool molded = f == LnLFamily::MoldedDoubleQuartic || f == LnLFamily::MoldedDoubleQuintic;
    const bool quintic = f == LnLFamily::SimpleDoubleQuintic || f == LnLFamily::MoldedDoubleQuintic;
    const double s0 = molded ? molded_s0(sp, sm) : std::sqrt(sp * sm);
    return std::make_shared<DoublePoly>(f, s0, double_side(sp, s0, quintic),
                                        double_side(sm, s0, quintic));
}

double spline_kappa_max(double sp, double sm) {
    const double s = std::min(sp, sm), m = std::max(sp, sm);
    if (s == m) return 1.0;
    auto feasible = [&](double k) { return spline_solve({s, m, k}).has_value(); };
    double lo = 1.0, hi = 2.0;
    while (feasible(hi)) {
        lo = hi;
        hi *= 2;
        if (hi > 1e6) fail(ErrorCode::NonConvergent, "conservative_kappa_max", "no upper limit found");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

ImplPtr make_conservative_spline(double sp, double sm, std::optional<double> kappa) {
    if (kappa && !(*kappa >= 1.0))
        fail(ErrorCode::InvalidArgument, "lnl_from_triple",
             "conservative-spline kappa must be >= 1, got " + fmt(*kappa));
    const double kmax = spline_kappa_max(sp, sm);
    const double k = kappa ? std::min(*kappa, kmax) : kmax;
    const bool flip = sp > sm;
    const SplineGeom g{std::min(sp, sm), std::max(sp, sm), k};
    if (k == 1.0) return std::make_shared<FlatSpline>(sp, sm);
    auto fit = spline_solve(g);
    if (!fit) {
        // kmax sits on the feasibility edge; step inside it
        fit = spline_solve({g.s, g.m, k * (1 - 1e-12)});
        if (!fit)
            fail(ErrorCode::NonConvergent, "lnl_from_triple",
                 "conservative-spline found no spline points for kappa " + fmt(k));
    }
    return std::make_shared<ConservativeSpline>(sp, sm, k, flip, g, *fit);
}

} // namespace asymerr::detail
