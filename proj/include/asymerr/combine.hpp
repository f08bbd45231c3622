#pragma once

#include "asymerr/lnl.hpp"
#include "asymerr/numeric.hpp"
#include "asymerr/pdf.hpp"

#include <optional>
#include <vector>

namespace asymerr {

// A model scaled by the partial derivative of the output with respect to it.
struct PdfTerm {
    PdfModel model;
    double coefficient = 1.0;
};

struct GoodnessOfFit {
    double chi2 = 0.0;
    int ndof = 0;
    double p_value = 1.0;
};

struct PdfCombination {
    QuantileTriple result;
    MomentTriple moments;
    double mean = 0.0;         // combined mean
    double median_shift = 0.0; // combined median minus sum of scaled input medians
    std::vector<double> weights; // result combination only
    std::optional<PdfModel> model;
};

// Moments add under convolution; the output family is fitted to the sum.
PdfCombination combine_pdf_errors(const std::vector<PdfTerm>& terms, PdfFamily output,
                                  const ShapeOptions& opts = {});

// Positive errors in quadrature, negative errors in quadrature. Not recommended;
// kept to show how far off it is.
QuantileTriple naive_quadrature_combination(const std::vector<PdfTerm>& terms);

// Inverse-variance weighted combination of results. Inputs must share a family
// unless allow_mixed; the output uses the first input's family unless given.
PdfCombination combine_pdf_results(const std::vector<PdfModel>& inputs, bool allow_mixed = false,
                                   std::optional<PdfFamily> output = std::nullopt,
                                   const ShapeOptions& opts = {});

struct Compatibility {
    double p_value = 1.0;
    double equivalent_sigma = 0.0;
};

// Two-sided tail probability of the measurement's own pdf at the reference.
Compatibility pdf_compatibility(const PdfModel& measurement, double reference);

// Sum of per-measurement chi^2 equivalents with N-1 degrees of freedom.
GoodnessOfFit set_compatibility(const std::vector<PdfModel>& measurements, double reference);

// Exact density of the sum of two dimidiated Gaussians.
class DimidiatedSum {
public:
    DimidiatedSum(double M, double s1p, double s1m, double s2p, double s2m);
    double density(double z) const;
    MomentTriple moments() const { return moments_; }

private:
    double M_, s1p_, s1m_, s2p_, s2m_;
    MomentTriple moments_;
};

// Both models must be dimidiated.
DimidiatedSum convolve_dimidiated_exact(const PdfModel& m1, const PdfModel& m2);

// Any log-likelihood curve in a, with its maximum at `peak`.
struct LnLCurve {
    Fn value;
    Fn slope;
    double peak = 0.0;
    double lower = -kInf;
    double upper = kInf;
    double scale = 1.0; // typical width, sets search steps
};

LnLCurve as_curve(const LnLModel& lm);

struct LnLCombination {
    LnLTriple result;
    std::vector<double> weights;
    GoodnessOfFit gof;
    bool fast_path = false;
    int iterations = 0;
};

struct LnLCombineOptions {
    // iterate the weight equation when every input is linear sigma (or every
    // input is linear variance)
    bool fast_path = true;
    int ndof_offset = 1; // ndof = n - ndof_offset
};

LnLCombination combine_lnl_results(const std::vector<LnLModel>& inputs,
                                   const LnLCombineOptions& opts = {});
LnLCombination combine_lnl_results(const std::vector<LnLCurve>& inputs,
                                   const LnLCombineOptions& opts = {});

struct LnLTerm {
    LnLCurve curve;
    double coefficient = 1.0;
};

struct ProfilePoint {
    double u, value;
};

struct LnLErrorCombination {
    LnLTriple result; // a_hat = sum of c_i a_hat_i
    std::vector<ProfilePoint> profile; // traced points, both sides
};

// Profile of sum_i ln L_i subject to sum_i c_i (a_i - a_hat_i) = u, by the
// weight iteration a_i = u c_i w_i / sum c_j^2 w_j with w_i = -x_i / ln L_i'(x_i).
LnLErrorCombination combine_lnl_errors(const std::vector<LnLTerm>& terms);
LnLErrorCombination combine_lnl_errors(const std::vector<LnLModel>& models,
                                       const std::vector<double>& coefficients);

inline GoodnessOfFit goodness_of_fit(const LnLCombination& c) { return c.gof; }

} // namespace asymerr
