#include "asymerr/numeric.hpp"

#include "asymerr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

namespace asymerr {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

std::string fmt_num(double x)
{
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

} // namespace

const char* error_code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Domain: return "Domain";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::UnrepresentableAsymmetry: return "UnrepresentableAsymmetry";
    case ErrorCode::UnrepresentableSkewness: return "UnrepresentableSkewness";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::NoMaximum: return "NoMaximum";
    case ErrorCode::DomainExhausted: return "DomainExhausted";
    case ErrorCode::MixedFamilies: return "MixedFamilies";
    }
    return "Unknown";
}

void fail(ErrorCode code, const std::string& where, const std::string& what)
{
    throw Error(code, "In asymerr::" + where + ": " + what);
}

double gauss_pdf(const double z)
{
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double gauss_cdf(const double z)
{
    return 0.5 * std::erfc(-z / kSqrt2);
}

double gauss_quantile(const double p)
{
    if (!(p > 0.0 && p < 1.0))
        fail(ErrorCode::Domain, "gauss_quantile",
             "probability " + fmt_num(p) + " is outside (0, 1)");
    if (p == 0.5)
        return 0.0;
    return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double log_gauss_sf(const double z)
{
    if (z < 30.0)
        return std::log(0.5 * std::erfc(z / kSqrt2));
    // asymptotic Mills ratio
    const double r = 1.0 / (z * z);
    const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
    return -0.5 * z * z - kLogSqrt2Pi - std::log(z) + std::log(series);
}

double log_gauss_cdf(const double z)
{
    return log_gauss_sf(-z);
}

double owens_t(const double z, const double alpha)
{
    if (alpha == 0.0)
        return 0.0;
    if (alpha < 0.0)
        return -owens_t(z, -alpha);
    const double hz = 0.5 * z * z;
    const auto integrand = [hz](const double y) {
        const double w = 1.0 + y * y;
        return std::exp(-hz * w) / w;
    };
    return integrate(integrand, 0.0, alpha, 1e-13, 1e-300) / (2.0 * M_PI);
}

std::vector<double> solve_cubic_real(const double c3, const double c2, const double c1,
                                     const double c0)
{
    const double scale = std::max({std::fabs(c3), std::fabs(c2), std::fabs(c1), std::fabs(c0)});
    if (scale == 0.0 || (c3 == 0.0 && c2 == 0.0 && c1 == 0.0))
        fail(ErrorCode::Degenerate, "solve_cubic_real", "all non-constant coefficients are zero");

    const auto poly = [&](const double x) { return ((c3 * x + c2) * x + c1) * x + c0; };
    const auto dpoly = [&](const double x) { return (3.0 * c3 * x + 2.0 * c2) * x + c1; };

    std::vector<double> roots;
    const double lead = std::max({std::fabs(c2), std::fabs(c1), std::fabs(c0)});
    if (std::fabs(c3) <= 1e-14 * lead) {
        if (std::fabs(c2) <= 1e-14 * std::max(std::fabs(c1), std::fabs(c0))) {
            if (c1 == 0.0)
                fail(ErrorCode::Degenerate, "solve_cubic_real", "equation has no unknown");
            roots.push_back(-c0 / c1);
        } else {
            const double disc = c1 * c1 - 4.0 * c2 * c0;
            if (disc >= 0.0) {
                const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
                if (q != 0.0) {
                    roots.push_back(q / c2);
                    roots.push_back(c0 / q);
                } else {
                    roots.push_back(0.0);
                }
            }
        }
    } else {
        // depressed cubic t^3 + p t + q with x = t - b/3
        const double b = c2 / c3, c = c1 / c3, d = c0 / c3;
        const double shift = b / 3.0;
        const double p = c - b * b / 3.0;
        const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        const double disc = q * q / 4.0 + p * p * p / 27.0;
        if (p == 0.0 && q == 0.0) {
            roots.push_back(-shift);
        } else if (disc > 0.0) {
            const double s = std::sqrt(disc);
            const double u = std::cbrt(-q / 2.0 + s);
            const double v = std::cbrt(-q / 2.0 - s);
            roots.push_back(u + v - shift);
        } else {
            const double r = std::sqrt(-p / 3.0);
            const double arg = std::clamp(3.0 * q / (2.0 * p * r), -1.0, 1.0);
            const double phi = std::acos(arg) / 3.0;
            for (int k = 0; k < 3; ++k)
                roots.push_back(2.0 * r * std::cos(phi - 2.0 * M_PI * k / 3.0) - shift);
        }
    }

    for (double& r : roots) {
        for (int it = 0; it < 4; ++it) {
            const double d = dpoly(r);
            if (d == 0.0)
                break;
            const double step = poly(r) / d;
            if (!std::isfinite(step))
                break;
            const double next = r - step;
            if (std::fabs(poly(next)) >= std::fabs(poly(r)))
                break;
            r = next;
        }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (const double r : roots) {
        if (!unique.empty() && std::fabs(r - unique.back()) <= 1e-12 * std::max(1.0, std::fabs(r)))
            continue;
        unique.push_back(r);
    }
    return unique;
}

BracketedRoot find_root(const Fn& f, double lo, double hi, const double tol)
{
    if (lo > hi)
        std::swap(lo, hi);
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0)
        return {lo, lo, lo, 0.0};
    if (fhi == 0.0)
        return {hi, hi, hi, 0.0};
    if (!(std::signbit(flo) != std::signbit(fhi)) || std::isnan(flo) || std::isnan(fhi))
        fail(ErrorCode::NoSignChange, "find_root",
             "f(" + fmt_num(lo) + ") = " + fmt_num(flo) + " and f(" + fmt_num(hi) +
                 ") = " + fmt_num(fhi) + " have the same sign");

    const double xtol = tol * std::max(1.0, hi - lo);
    bool bisect_next = false;
    for (int it = 0; it < 400; ++it) {
        const double width = hi - lo;
        if (width <= xtol)
            break;
        double x = 0.5 * (lo + hi);
        if (!bisect_next) {
            const double s = hi - fhi * (hi - lo) / (fhi - flo);
            if (s > lo && s < hi && std::isfinite(s))
                x = s;
        }
        if (x <= lo || x >= hi)
            break;
        const double fx = f(x);
        if (fx == 0.0)
            return {x, x, x, 0.0};
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        // pure bisection whenever the accelerated step failed to halve the bracket
        bisect_next = !bisect_next && (hi - lo) > 0.5 * width;
    }
    const bool use_lo = std::fabs(flo) <= std::fabs(fhi);
    return {lo, hi, use_lo ? lo : hi, use_lo ? flo : fhi};
}

BracketedRoot find_root_expanding(const Fn& f, const double anchor, double step,
                                  const double limit, const double tol)
{
    const double f0 = f(anchor);
    if (f0 == 0.0)
        return {anchor, anchor, anchor, 0.0};
    const double dir = limit > anchor ? 1.0 : -1.0;
    step = std::fabs(step);
    double prev = anchor;
    for (int it = 0; it < 200; ++it) {
        double x = anchor + dir * step;
        bool at_limit = false;
        if ((x - limit) * dir >= 0.0) {
            x = limit;
            at_limit = true;
        }
        const double fx = f(x);
        if (std::isnan(fx))
            break;
        if (fx == 0.0 || std::signbit(fx) != std::signbit(f0))
            return find_root(f, std::min(prev, x), std::max(prev, x), tol);
        if (at_limit)
            break;
        prev = x;
        step *= 2.0;
    }
    fail(ErrorCode::NoSignChange, "find_root_expanding",
         "no sign change between " + fmt_num(anchor) + " and " + fmt_num(limit));
}

double integrate(const Fn& f, const double lo, const double hi, const double rel_tol,
                 const double abs_tol)
{
    if (lo == hi)
        return 0.0;
    double err = 0.0, l1 = 0.0;
    // boost's error estimate is meaningless on intervals near the ulp scale
    if (std::fabs(hi - lo) < 1e-7 * std::max({1.0, std::fabs(lo), std::fabs(hi)}))
        return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 0, rel_tol);
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, lo, hi, 25, rel_tol, &err, &l1);
    if (!std::isfinite(value) || err > std::max(rel_tol * std::max(l1, std::fabs(value)), abs_tol) * 10.0)
        fail(ErrorCode::NonConvergent, "integrate",
             "estimated error " + fmt_num(err) + " exceeds tolerance on [" + fmt_num(lo) + ", " +
                 fmt_num(hi) + "]");
    return value;
}

Extremum maximize(const Fn& f, const double lo, const double hi, const double tol)
{
    // Brent cannot locate a smooth extremum better than sqrt(epsilon)
    const int bits = std::clamp(static_cast<int>(std::ceil(-std::log2(tol))) + 1, 8, 26);
    std::uintmax_t iters = 500;
    const auto r = boost::math::tools::brent_find_minima(
        [&f](const double x) { return -f(x); }, lo, hi, bits, iters);
    return {r.first, -r.second};
}

double chi2_sf(const double chi2, const double ndof)
{
    if (ndof <= 0.0)
        return 1.0;
    if (chi2 <= 0.0)
        return 1.0;
    return boost::math::gamma_q(0.5 * ndof, 0.5 * chi2);
}

RandomSource::RandomSource(const std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomSource::next_uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::next_gaussian()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_uniform() - 1.0;
        v = 2.0 * next_uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

long RandomSource::next_poisson(const double mean)
{
    if (!(mean >= 0.0))
        fail(ErrorCode::Domain, "RandomSource::next_poisson", "negative mean");
    if (mean == 0.0)
        return 0;
    const double u = next_uniform();
    long k = static_cast<long>(std::floor(mean));
    double pk = std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
    double cdf = boost::math::gamma_q(k + 1.0, mean);
    if (u < cdf) {
        while (k > 0 && u < cdf - pk) {
            cdf -= pk;
            pk *= k / mean;
            --k;
        }
    } else {
        while (u >= cdf) {
            ++k;
            pk *= mean / k;
            cdf += pk;
            if (pk == 0.0)
                break;
        }
    }
    return k;
}

} // namespace asymerr
