#include "lnl_impl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace asymerr {

using detail::LnLImpl;

const std::vector<LnLFamily>& all_lnl_families() {
    static const std::vector<LnLFamily> all = {
        LnLFamily::LinearSigma, LnLFamily::LinearVariance, LnLFamily::Cubic,
        LnLFamily::BrokenParabola, LnLFamily::SymmetrizedParabola,
        LnLFamily::ConstrainedQuartic, LnLFamily::MoldedQuartic, LnLFamily::MatchedQuintic,
        LnLFamily::Interpolated7th, LnLFamily::SimpleDoubleQuartic,
        LnLFamily::MoldedDoubleQuartic, LnLFamily::SimpleDoubleQuintic,
        LnLFamily::MoldedDoubleQuintic, LnLFamily::ConservativeSpline,
        LnLFamily::LogLogisticBeta, LnLFamily::Logarithmic, LnLFamily::GeneralizedPoisson,
        LnLFamily::LinearSigmaLog, LnLFamily::DoubleCubicLogSigma, LnLFamily::QuinticLogSigma,
        LnLFamily::PDG, LnLFamily::Edgeworth, LnLFamily::SkewNormal};
    return all;
}

std::string lnl_family_name(LnLFamily f) {
    switch (f) {
    case LnLFamily::LinearSigma: return "linear-sigma";
    case LnLFamily::LinearVariance: return "linear-variance";
    case LnLFamily::Cubic: return "cubic";
    case LnLFamily::BrokenParabola: return "broken-parabola";
    case LnLFamily::SymmetrizedParabola: return "symmetrized-parabola";
    case LnLFamily::ConstrainedQuartic: return "constrained-quartic";
    case LnLFamily::MoldedQuartic: return "molded-quartic";
    case LnLFamily::MatchedQuintic: return "matched-quintic";
    case LnLFamily::Interpolated7th: return "interpolated-7th";
    case LnLFamily::SimpleDoubleQuartic: return "simple-double-quartic";
    case LnLFamily::MoldedDoubleQuartic: return "molded-double-quartic";
    case LnLFamily::SimpleDoubleQuintic: return "simple-double-quintic";
    case LnLFamily::MoldedDoubleQuintic: return "molded-double-quintic";
    case LnLFamily::ConservativeSpline: return "conservative-spline";
    case LnLFamily::LogLogisticBeta: return "log-logistic-beta";
    case LnLFamily::Logarithmic: return "logarithmic";
    case LnLFamily::GeneralizedPoisson: return "generalized-poisson";
    case LnLFamily::LinearSigmaLog: return "linear-sigma-log";
    case LnLFamily::DoubleCubicLogSigma: return "double-cubic-log-sigma";
    case LnLFamily::QuinticLogSigma: return "quintic-log-sigma";
    case LnLFamily::PDG: return "pdg";
    case LnLFamily::Edgeworth: return "edgeworth";
    case LnLFamily::SkewNormal: return "skew-normal";
    }
    return "unknown";
}

std::optional<LnLFamily> parse_lnl_family(const std::string& name) {
    std::string n;
    for (char c : name) {
        if (c == '_' || c == ' ') c = '-';
        n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    for (auto f : all_lnl_families())
        if (lnl_family_name(f) == n) return f;
    if (n == "variable-sigma" || n == "bartlett-sigma") return LnLFamily::LinearSigma;
    if (n == "variable-variance" || n == "bartlett-variance") return LnLFamily::LinearVariance;
    if (n == "truncated-cubic") return LnLFamily::Cubic;
    if (n == "variable-log-sigma") return LnLFamily::LinearSigmaLog;
    if (n == "molded-cubic-log-sigma") return LnLFamily::DoubleCubicLogSigma;
    if (n == "conservative-sigma") return LnLFamily::ConservativeSpline;
    if (n == "poisson") return LnLFamily::GeneralizedPoisson;
    if (n == "interpolated-seventh") return LnLFamily::Interpolated7th;
    if (n == "skewnormal") return LnLFamily::SkewNormal;
    return std::nullopt;
}

LnLModel::LnLModel(std::shared_ptr<const LnLImpl> impl, LnLTriple t)
    : impl_(std::move(impl)), t_(t) {}

LnLFamily LnLModel::family() const { return impl_->family(); }
std::vector<double> LnLModel::params() const { return impl_->params(); }
std::vector<std::string> LnLModel::param_names() const { return impl_->param_names(); }

std::pair<double, double> LnLModel::domain() const {
    auto [lo, hi] = impl_->domain();
    return {t_.a_hat + lo, t_.a_hat + hi};
}

bool LnLModel::in_domain(double a) const {
    auto [lo, hi] = impl_->domain();
    const double x = a - t_.a_hat;
    return x > lo && x < hi;
}

double LnLModel::operator()(double a) const {
    if (!in_domain(a)) {
        auto [lo, hi] = domain();
        const double edge = a <= lo ? lo : hi;
        fail(ErrorCode::OutOfDomain, "log_likelihood",
             family_name() + " undefined at a=" + detail::fmt(a) + ", boundary " +
                 detail::fmt(edge));
    }
    return impl_->eval(a - t_.a_hat);
}

double LnLModel::derivative(double a) const {
    if (!in_domain(a))
        fail(ErrorCode::OutOfDomain, "derivative",
             family_name() + " undefined at a=" + detail::fmt(a));
    return impl_->slope(a - t_.a_hat);
}

double LnLModel::peak() const { return t_.a_hat + impl_->peak(); }
bool LnLModel::c2() const { return impl_->c2(); }

namespace detail {

double LnLImpl::slope(double x) const {
    auto [lo, hi] = domain();
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    if (x + h >= hi) return (eval(x) - eval(x - h)) / h;
    if (x - h <= lo) return (eval(x + h) - eval(x)) / h;
    return (eval(x + h) - eval(x - h)) / (2 * h);
}

void check_ratio(LnLFamily f, double sp, double sm, double bound) {
    const double r = std::max(sp, sm) / std::min(sp, sm);
    if (r > bound)
        fail(ErrorCode::UnrepresentableAsymmetry, "lnl_from_triple",
             lnl_family_name(f) + " needs sigma ratio <= " + fmt(bound) + ", got " + fmt(r));
}

} // namespace detail

namespace {

double to_ratio(double A) { return (1 + A) / (1 - A); }

detail::ImplPtr build(LnLFamily f, double sp, double sm, const LnLOptions& opts) {
    using namespace detail;
    const double bound = lnl_max_ratio(f);
    if (std::isfinite(bound)) check_ratio(f, sp, sm, bound);
    switch (f) {
    case LnLFamily::LinearSigma: return make_linear_sigma(sp, sm);
    case LnLFamily::LinearVariance: return make_linear_variance(sp, sm);
    case LnLFamily::Cubic: return make_cubic(sp, sm);
    case LnLFamily::BrokenParabola: return make_broken_parabola(sp, sm);
    case LnLFamily::SymmetrizedParabola: return make_symmetrized_parabola(sp, sm);
    case LnLFamily::ConstrainedQuartic: return make_constrained_quartic(sp, sm);
    case LnLFamily::MoldedQuartic: return make_molded_quartic(sp, sm);
    case LnLFamily::MatchedQuintic: return make_matched_quintic(sp, sm);
    case LnLFamily::Interpolated7th: return make_interpolated_7th(sp, sm);
    case LnLFamily::SimpleDoubleQuartic:
    case LnLFamily::MoldedDoubleQuartic:
    case LnLFamily::SimpleDoubleQuintic:
    case LnLFamily::MoldedDoubleQuintic: return make_double_poly(f, sp, sm);
    case LnLFamily::ConservativeSpline: return make_conservative_spline(sp, sm, opts.kappa);
    case LnLFamily::LogLogisticBeta: return make_log_logistic_beta(sp, sm);
    case LnLFamily::Logarithmic: return make_logarithmic(sp, sm);
    case LnLFamily::GeneralizedPoisson: return make_generalized_poisson(sp, sm);
    case LnLFamily::LinearSigmaLog: return make_linear_sigma_log(sp, sm);
    case LnLFamily::DoubleCubicLogSigma: return make_double_cubic_log_sigma(sp, sm);
    case LnLFamily::QuinticLogSigma: return make_quintic_log_sigma(sp, sm);
    case LnLFamily::PDG: return make_pdg(sp, sm);
    case LnLFamily::Edgeworth: return make_lnl_edgeworth(sp, sm);
    case LnLFamily::SkewNormal: return make_lnl_skew_normal(sp, sm);
    }
    fail(ErrorCode::InvalidArgument, "lnl_from_triple", "unknown family");
}

// first point beyond the crossing, walking from the peak in direction dir
double crossing(const Fn& f, double peak, double target, int dir, double scale, double bound) {
    double inner = peak;
    double step = scale;
    for (int k = 0; k < 400; ++k) {
        double x = peak + dir * step;
        if (std::isfinite(bound) && dir * (x - bound) >= 0) {
            x = inner + 0.5 * (bound - inner);
            if (x == inner) break;
        } else {
            step *= 2;
        }
        const double v = f(x);
        if (v < target) {
            const auto r = find_root([&](double y) { return f(y) - target; },
                                     std::min(inner, x), std::max(inner, x), 1e-14);
            return r.value;
        }
        inner = x;
        if (std::abs(inner - peak) > 1e12 * scale) break;
    }
    fail(ErrorCode::NoCrossing, "solve_delta_half",
         std::string("curve never drops by 1/2 on the ") + (dir > 0 ? "upper" : "lower") + " side");
}

} // namespace

LnLModel lnl_from_triple(LnLFamily family, const LnLTriple& t, const LnLOptions& opts) {
    if (!(t.sigma_plus > 0) || !(t.sigma_minus > 0) || !std::isfinite(t.sigma_plus) ||
        !std::isfinite(t.sigma_minus) || !std::isfinite(t.a_hat))
        fail(ErrorCode::InvalidArgument, "lnl_from_triple",
             "errors must be positive and finite, got +" + detail::fmt(t.sigma_plus) + " -" +
                 detail::fmt(t.sigma_minus));
    return LnLModel(build(family, t.sigma_plus, t.sigma_minus, opts), t);
}

DeltaHalf solve_delta_half(const Fn& f, double peak, double scale, double lower, double upper) {
    if (!(scale > 0)) fail(ErrorCode::InvalidArgument, "solve_delta_half", "scale must be positive");
    const double target = f(peak) - 0.5;
    const double hi = crossing(f, peak, target, +1, scale, upper);
    const double lo = crossing(f, peak, target, -1, scale, lower);
    return {hi - peak, peak - lo};
}

DeltaHalf solve_delta_half(const LnLModel& lm) {
    const auto& t = lm.triple();
    auto [lo, hi] = lm.domain();
    const double scale = 0.25 * std::min(t.sigma_plus, t.sigma_minus);
    return solve_delta_half([&](double a) { return lm(a); }, lm.peak(), scale, lo, hi);
}

double lnl_max_ratio(LnLFamily family) {
    switch (family) {
    case LnLFamily::Cubic: return 2.0;
    case LnLFamily::ConstrainedQuartic:
        return (1 + std::pow(12.0, 0.25) + std::sqrt(3.0)) / 2;
    case LnLFamily::MoldedQuartic: return 3.40804;
    case LnLFamily::MatchedQuintic: return 2.426419;
    case LnLFamily::Interpolated7th: return 2.744405;
    case LnLFamily::SimpleDoubleQuartic: return 68.0 / 11.0;
    case LnLFamily::SimpleDoubleQuintic: return 13.5;
    case LnLFamily::LinearSigmaLog: return 5.338453;
    case LnLFamily::QuinticLogSigma: return 4.107184572;
    case LnLFamily::Edgeworth: return to_ratio(detail::lnl_edgeworth_max_asymmetry());
    case LnLFamily::SkewNormal: return to_ratio(detail::lnl_skew_normal_max_asymmetry());
    default: return kInf;
    }
}

double conservative_kappa_max(double sigma_plus, double sigma_minus) {
    if (!(sigma_plus > 0) || !(sigma_minus > 0))
        fail(ErrorCode::InvalidArgument, "conservative_kappa_max", "errors must be positive");
    return detail::spline_kappa_max(sigma_plus, sigma_minus);
}

} // namespace asymerr
