#pragma once

#include "asymerr/numeric.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace asymerr {

struct LnLTriple {
    double a_hat = 0.0;
    double sigma_plus = 1.0;
    double sigma_minus = 1.0;
};

enum class LnLFamily {
    LinearSigma,
    LinearVariance,
    Cubic,
    BrokenParabola,
    SymmetrizedParabola,
    ConstrainedQuartic,
    MoldedQuartic,
    MatchedQuintic,
    Interpolated7th,
    SimpleDoubleQuartic,
    MoldedDoubleQuartic,
    SimpleDoubleQuintic,
    MoldedDoubleQuintic,
    ConservativeSpline,
    LogLogisticBeta,
    Logarithmic,
    GeneralizedPoisson,
    LinearSigmaLog,
    DoubleCubicLogSigma,
    QuinticLogSigma,
    PDG,
    Edgeworth,
    SkewNormal,
};

const std::vector<LnLFamily>& all_lnl_families();
std::string lnl_family_name(LnLFamily f);
std::optional<LnLFamily> parse_lnl_family(const std::string& name);

struct LnLOptions {
    // Conservative spline curvature bound, >= 1. Empty means the largest
    // value keeping both spline points inside [-sigma_minus, sigma_plus];
    // larger requests are capped there.
    std::optional<double> kappa;
};

namespace detail {
class LnLImpl;
}

class LnLModel {
public:
    explicit LnLModel(std::shared_ptr<const detail::LnLImpl> impl, LnLTriple t);

    LnLFamily family() const;
    std::string family_name() const { return lnl_family_name(family()); }
    const LnLTriple& triple() const { return t_; }
    std::vector<double> params() const;
    std::vector<std::string> param_names() const;

    // open interval of a where the curve is defined
    std::pair<double, double> domain() const;
    bool in_domain(double a) const;

    // Delta ln L, zero at the peak. Throws OutOfDomain outside domain().
    double operator()(double a) const;
    double derivative(double a) const;

    // position of the maximum; a_hat except for the symmetrized parabola
    double peak() const;

    // true when ln L has two continuous derivatives everywhere
    bool c2() const;

    const detail::LnLImpl& impl() const { return *impl_; }

private:
    std::shared_ptr<const detail::LnLImpl> impl_;
    LnLTriple t_;
};

LnLModel lnl_from_triple(LnLFamily family, const LnLTriple& t, const LnLOptions& opts = {});

inline double log_likelihood(const LnLModel& lm, double a) { return lm(a); }

struct DeltaHalf {
    double sigma_plus;
    double sigma_minus;
};

// Distances from the peak to where the curve drops by 1/2.
DeltaHalf solve_delta_half(const LnLModel& lm);

// Same for an arbitrary curve f with its maximum at `peak`. `scale` seeds the
// outward search; f is only called inside (lower, upper).
DeltaHalf solve_delta_half(const Fn& f, double peak, double scale,
                           double lower = -kInf, double upper = kInf);

// Largest accepted max(sigma+, sigma-)/min(sigma+, sigma-), infinite when
// any ratio is fine.
double lnl_max_ratio(LnLFamily family);

// Largest conservative spline kappa for the given errors.
double conservative_kappa_max(double sigma_plus, double sigma_minus);

} // namespace asymerr
