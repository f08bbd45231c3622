#pragma once

#include "asymerr/errors.hpp"
#include "asymerr/pdf.hpp"

#include <string>
#include <utility>
#include <vector>

namespace asymerr::detail {

class PdfImpl {
public:
    virtual ~PdfImpl() = default;

    virtual PdfFamily family() const = 0;
    virtual std::vector<double> params() const = 0;
    virtual std::vector<std::string> param_names() const = 0;

    virtual double density(double x) const = 0;
    virtual double cdf(double x) const = 0;
    virtual double quantile(double p) const;
    virtual double sample(RandomSource& rs) const;
    virtual std::pair<double, double> support() const { return {-kInf, kInf}; }

    virtual MomentTriple compute_moments() const = 0;
    virtual QuantileTriple compute_quantiles() const;

    // fills the cached triples; called once by the factories
    void finalize();

    const QuantileTriple& cached_quantiles() const { return q_; }
    const MomentTriple& cached_moments() const { return m_; }
    bool goes_negative() const { return negative_; }
    const std::string& warning() const { return warning_; }

    void set_warning(std::string w) { warning_ = std::move(w); }

protected:
    // rough location and width, used to bracket cdf inversions
    virtual double center_hint() const = 0;
    virtual double width_hint() const = 0;

    bool negative_ = false;

private:
    QuantileTriple q_;
    MomentTriple m_;
    std::string warning_;
};

// Distribution of R(nu) for a standard normal nu. Subclasses provide R, its
// derivative, and the nu values splitting the real line into monotone pieces.
class TransformImpl : public PdfImpl {
public:
    double density(double x) const override;
    double cdf(double x) const override;
    double quantile(double p) const override;
    double sample(RandomSource& rs) const override;
    std::pair<double, double> support() const override;
    MomentTriple compute_moments() const override;
    QuantileTriple compute_quantiles() const override;

    virtual double R(double nu) const = 0;
    virtual double dR(double nu) const = 0;

    // must be called by subclass constructors once parameters are set
    void build_segments();

protected:
    double center_hint() const override { return R(0.0); }
    double width_hint() const override;

    virtual std::vector<double> breakpoints() const = 0;

private:
    struct Segment {
        double lo, hi;   // in nu
        double rlo, rhi; // R at the ends
        int dir;         // +1 increasing, -1 decreasing, 0 flat
    };
    double solve_in(const Segment& s, double x) const;

    std::vector<Segment> segments_;
    bool monotone_ = true;
};

inline constexpr double kNuLimit = 40.0;

// factories per family, defined in the family sources
PdfModel make_dimidiated(double M, double sp, double sm, std::string warning = {});
PdfModel make_distorted(double M, double a, double b);
PdfModel make_railway(double M, double a, double b, std::optional<double> hl,
                      std::optional<double> hr);
PdfModel make_double_cubic(double M, double sp, double sm);
PdfModel make_symmetric_beta(double M, double sp, double sm, int p, double h);
PdfModel make_qvw(double mu0, double sigma0, double a);
PdfModel make_fechner(double m, double s1, double s2);
PdfModel make_edgeworth(double mu, double sigma, double gamma);
PdfModel make_skew_normal(double xi, double omega, double alpha);
PdfModel make_johnson_su(double xi, double lambda, double gamma, double delta);
PdfModel make_gaussian_limit(PdfFamily family, double mu, double sigma);
PdfModel make_log_normal(double xi, double gamma, double delta, int sign);

PdfModel finish(std::shared_ptr<PdfImpl> impl);

double qvw_max_a();
double qvw_skewness(double a);

PdfModel fechner_from_quantiles(const QuantileTriple& q);
PdfModel fechner_from_moments(const MomentTriple& m);
PdfModel edgeworth_from_quantiles(const QuantileTriple& q);
PdfModel edgeworth_from_moments(const MomentTriple& m);
PdfModel skew_normal_from_quantiles(const QuantileTriple& q);
PdfModel skew_normal_from_moments(const MomentTriple& m);
PdfModel log_normal_from_quantiles(const QuantileTriple& q);
PdfModel log_normal_from_moments(const MomentTriple& m);
PdfModel johnson_from_quantiles(const QuantileTriple& q);
PdfModel johnson_from_moments(const MomentTriple& m);
double johnson_max_skewness();
double johnson_max_asymmetry();
double edgeworth_max_asymmetry();

// Largest normalized skewness of the dimidiated family, reached when one
// half-width vanishes: (pi+2)/sqrt((pi-1)^3) = 1.6403.
double dimidiated_max_skewness();

std::string fmt(double x);

} // namespace asymerr::detail
