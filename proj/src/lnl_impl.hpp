#pragma once

#include "asymerr/errors.hpp"
#include "asymerr/lnl.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace asymerr::detail {

// Curves are written in x = a - a_hat.
class LnLImpl {
public:
    virtual ~LnLImpl() = default;

    virtual LnLFamily family() const = 0;
    virtual std::vector<double> params() const = 0;
    virtual std::vector<std::string> param_names() const = 0;

    virtual double eval(double x) const = 0;
    // central difference unless overridden
    virtual double slope(double x) const;
    virtual std::pair<double, double> domain() const { return {-kInf, kInf}; }
    virtual double peak() const { return 0.0; }
    virtual bool c2() const { return true; }
};

using ImplPtr = std::shared_ptr<const LnLImpl>;

// Ratio of the larger to the smaller error, refused above `bound`.
void check_ratio(LnLFamily f, double sp, double sm, double bound);

ImplPtr make_linear_sigma(double sp, double sm);
ImplPtr make_linear_variance(double sp, double sm);
ImplPtr make_pdg(double sp, double sm);
ImplPtr make_linear_sigma_log(double sp, double sm);
ImplPtr make_double_cubic_log_sigma(double sp, double sm);
ImplPtr make_quintic_log_sigma(double sp, double sm);

ImplPtr make_cubic(double sp, double sm);
ImplPtr make_broken_parabola(double sp, double sm);
ImplPtr make_symmetrized_parabola(double sp, double sm);
ImplPtr make_constrained_quartic(double sp, double sm);
ImplPtr make_molded_quartic(double sp, double sm);
ImplPtr make_matched_quintic(double sp, double sm);
ImplPtr make_interpolated_7th(double sp, double sm);
ImplPtr make_double_poly(LnLFamily f, double sp, double sm);
ImplPtr make_conservative_spline(double sp, double sm, std::optional<double> kappa);
double spline_kappa_max(double sp, double sm);

ImplPtr make_log_logistic_beta(double sp, double sm);
ImplPtr make_logarithmic(double sp, double sm);
ImplPtr make_generalized_poisson(double sp, double sm);
ImplPtr make_lnl_edgeworth(double sp, double sm);
ImplPtr make_lnl_skew_normal(double sp, double sm);
double lnl_edgeworth_max_asymmetry();
double lnl_skew_normal_max_asymmetry();

std::string fmt(double x);

} // namespace asymerr::detail
