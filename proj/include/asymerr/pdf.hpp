#pragma once

#include "asymerr/numeric.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace asymerr {

struct QuantileTriple {
    double M = 0.0;
    double sigma_plus = 1.0;
    double sigma_minus = 1.0;
};

struct MomentTriple {
    double mu = 0.0;
    double V = 1.0;
    double gamma = 0.0; // third central moment, not normalized

    double skewness() const;
};

enum class PdfFamily {
    Dimidiated,
    Distorted,
    Railway,
    DoubleCubic,
    SymmetricBeta,
    QVW,
    Fechner,
    Edgeworth,
    SkewNormal,
    JohnsonSU,
    LogNormal,
};

const std::vector<PdfFamily>& all_pdf_families();
std::string pdf_family_name(PdfFamily f);
std::optional<PdfFamily> parse_pdf_family(const std::string& name);

struct ShapeOptions {
    int beta_p = 2;       // symmetric beta power
    double beta_h = 1.0;  // symmetric beta half width in nu
    std::optional<double> railway_hl;
    std::optional<double> railway_hr;
};

struct FlippedSpec {
    double extreme = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    int direction = +1;
};

namespace detail {
class PdfImpl;
}

class PdfModel {
public:
    explicit PdfModel(std::shared_ptr<const detail::PdfImpl> impl);

    PdfFamily family() const;
    std::string family_name() const { return pdf_family_name(family()); }
    // Family parameters in the order listed by param_names().
    std::vector<double> params() const;
    std::vector<std::string> param_names() const;

    const QuantileTriple& quantiles() const;
    const MomentTriple& moments() const;

    double density(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;
    double sample(RandomSource& rs) const;
    std::pair<double, double> support() const;

    // Edgeworth only: density dips below zero inside [mu - 6 sigma, mu + 6 sigma]
    bool goes_negative() const;
    // Set when construction landed exactly on the family's skewness limit
    const std::string& warning() const;

    const detail::PdfImpl& impl() const { return *impl_; }

private:
    std::shared_ptr<const detail::PdfImpl> impl_;
};

PdfModel pdf_from_quantiles(PdfFamily family, const QuantileTriple& q,
                            const ShapeOptions& opts = {});
PdfModel pdf_from_moments(PdfFamily family, const MomentTriple& m,
                          const ShapeOptions& opts = {});

// Transform families built directly from R(-1), R(0), R(1). Unlike
// pdf_from_quantiles either side may be zero, or negative for a flipped
// pair; only Dimidiated, Distorted, Railway, DoubleCubic and SymmetricBeta.
PdfModel pdf_from_anchors(PdfFamily family, double M, double sigma_plus, double sigma_minus,
                          const ShapeOptions& opts = {});

MomentTriple flipped_moments(const FlippedSpec& fs);
PdfModel flipped_to_dimidiated(const FlippedSpec& fs);

inline double density(const PdfModel& pm, double x) { return pm.density(x); }
inline double cdf(const PdfModel& pm, double x) { return pm.cdf(x); }
inline double quantile(const PdfModel& pm, double p) { return pm.quantile(p); }
inline MomentTriple moments(const PdfModel& pm) { return pm.moments(); }
inline double sample(const PdfModel& pm, RandomSource& rs) { return pm.sample(rs); }

// Largest |(sigma_plus - sigma_minus)/(sigma_plus + sigma_minus)| accepted by
// pdf_from_quantiles, and largest |gamma|/V^1.5 accepted by pdf_from_moments.
double max_asymmetry(PdfFamily family, const ShapeOptions& opts = {});
double max_skewness(PdfFamily family, const ShapeOptions& opts = {});

} // namespace asymerr
