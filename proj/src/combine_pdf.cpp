#include "asymerr/combine.hpp"

#include "asymerr/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace asymerr {

namespace {

void check_terms(const std::vector<PdfTerm>& terms, const char* where) {
    if (terms.empty()) fail(ErrorCode::InvalidArgument, where, "no terms");
    for (const auto& t : terms)
        if (!std::isfinite(t.coefficient) || t.coefficient == 0)
            fail(ErrorCode::InvalidArgument, where, "coefficients must be finite and nonzero");
}

// s|N1| + t|N2|, z >= 0
double same_side(double z, double s, double t) {
    if (z < 0) return 0;
    const double R = std::hypot(s, t);
    return 4 * gauss_pdf(z / R) / R * (gauss_cdf(z * t / (s * R)) + gauss_cdf(z * s / (t * R)) - 1);
}

// s|N1| - t|N2|
double opposite_sides(double z, double s, double t) {
    const double R = std::hypot(s, t);
    const double u = z >= 0 ? -z * t / (s * R) : z * s / (t * R);
    return 4 * gauss_pdf(z / R) / R * gauss_cdf(u);
}

} // namespace

PdfCombination combine_pdf_errors(const std::vector<PdfTerm>& terms, PdfFamily output,
                                  const ShapeOptions& opts) {
    check_terms(terms, "combine_pdf_errors");
    MomentTriple m{0, 0, 0};
    double medians = 0;
    for (const auto& t : terms) {
        const double c = t.coefficient;
        const auto& mi = t.model.moments();
        m.mu += c * mi.mu;
        m.V += c * c * mi.V;
        m.gamma += c * c * c * mi.gamma;
        medians += c * t.model.quantiles().M;
    }
    auto out = pdf_from_moments(output, m, opts);
    PdfCombination r;
    r.result = out.quantiles();
    r.moments = m;
    r.mean = m.mu;
    r.median_shift = r.result.M - medians;
    r.model = std::move(out);
    return r;
}

QuantileTriple naive_quadrature_combination(const std::vector<PdfTerm>& terms) {
    check_terms(terms, "naive_quadrature_combination");
    double M = 0, p2 = 0, m2 = 0;
    for (const auto& t : terms) {
        const double c = t.coefficient;
        const auto& q = t.model.quantiles();
        M += c * q.M;
        // a negative coefficient sends the upper error downwards
        const double up = c > 0 ? c * q.sigma_plus : -c * q.sigma_minus;
        const double dn = c > 0 ? c * q.sigma_minus : -c * q.sigma_plus;
        p2 += up * up;
        m2 += dn * dn;
    }
    return {M, std::sqrt(p2), std::sqrt(m2)};
}

PdfCombination combine_pdf_results(const std::vector<PdfModel>& inputs, bool allow_mixed,
                                   std::optional<PdfFamily> output, const ShapeOptions& opts) {
    if (inputs.size() < 2)
        fail(ErrorCode::InvalidArgument, "combine_pdf_results", "need at least two results");
    const PdfFamily fam = inputs.front().family();
    if (!allow_mixed)
        for (const auto& m : inputs)
            if (m.family() != fam)
                fail(ErrorCode::MixedFamilies, "combine_pdf_results",
                     "inputs mix " + pdf_family_name(fam) + " and " + m.family_name() +
                         "; convert first or allow mixing");
    double sum_inv = 0;
    for (const auto& m : inputs) sum_inv += 1 / m.moments().V;
    PdfCombination r;
    MomentTriple c{0, 0, 0};
    for (const auto& m : inputs) {
        const auto& mi = m.moments();
        const double w = (1 / mi.V) / sum_inv;
        r.weights.push_back(w);
        c.mu += w * mi.mu;
        c.V += w * w * mi.V;
        c.gamma += w * w * w * mi.gamma;
    }
    auto out = pdf_from_moments(output.value_or(fam), c, opts);
    r.result = out.quantiles();
    r.moments = c;
    r.mean = c.mu;
    double medians = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) medians += r.weights[i] * inputs[i].quantiles().M;
    r.median_shift = r.result.M - medians;
    r.model = std::move(out);
    return r;
}

Compatibility pdf_compatibility(const PdfModel& measurement, double reference) {
    const double F = measurement.cdf(reference);
    const double tail = std::min(F, 1 - F);
    if (!(tail < 0.5)) return {1.0, 0.0};
    const double p = 2 * tail;
    return {p, -gauss_quantile(tail)};
}

GoodnessOfFit set_compatibility(const std::vector<PdfModel>& measurements, double reference) {
    if (measurements.empty()) fail(ErrorCode::InvalidArgument, "set_compatibility", "no measurements");
    GoodnessOfFit g;
    for (const auto& m : measurements) {
        const double z = pdf_compatibility(m, reference).equivalent_sigma;
        g.chi2 += z * z;
    }
    g.ndof = static_cast<int>(measurements.size()) - 1;
    g.p_value = g.ndof > 0 ? chi2_sf(g.chi2, g.ndof) : 1.0;
    return g;
}

DimidiatedSum::DimidiatedSum(double M, double s1p, double s1m, double s2p, double s2m)
    : M_(M), s1p_(s1p), s1m_(s1m), s2p_(s2p), s2m_(s2m) {
    // each input: mean M + (sp - sm)/sqrt(2 pi), moments then add
    auto one = [](double sp, double sm) {
        const double k = 1 / std::sqrt(2 * std::numbers::pi);
        const double d = sp - sm;
        const double mu = k * d;
        const double V = 0.5 * (sp * sp + sm * sm) - mu * mu;
        const double raw3 = 2 * k * (sp * sp * sp - sm * sm * sm);
        const double raw2 = 0.5 * (sp * sp + sm * sm);
        return MomentTriple{mu, V, raw3 - 3 * raw2 * mu + 2 * mu * mu * mu};
    };
    const auto a = one(s1p, s1m), b = one(s2p, s2m);
    moments_ = {M + a.mu + b.mu, a.V + b.V, a.gamma + b.gamma};
}

double DimidiatedSum::density(double z) const {
    const double x = z - M_;
    return 0.25 * (same_side(x, s1p_, s2p_) + same_side(-x, s1m_, s2m_) +
                   opposite_sides(x, s1p_, s2m_) + opposite_sides(x, s2p_, s1m_));
}

DimidiatedSum convolve_dimidiated_exact(const PdfModel& m1, const PdfModel& m2) {
    if (m1.family() != PdfFamily::Dimidiated || m2.family() != PdfFamily::Dimidiated)
        fail(ErrorCode::InvalidArgument, "convolve_dimidiated_exact", "both inputs must be dimidiated");
    const auto& a = m1.quantiles();
    const auto& b = m2.quantiles();
    return DimidiatedSum(a.M + b.M, a.sigma_plus, a.sigma_minus, b.sigma_plus, b.sigma_minus);
}

} // namespace asymerr
