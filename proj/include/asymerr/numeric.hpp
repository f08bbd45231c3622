#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace asymerr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Levels of the "one sigma" central interval, Phi(-1) and Phi(1).
inline constexpr double kLowerLevel = 0.15865525393145705;
inline constexpr double kUpperLevel = 0.84134474606854293;

inline constexpr double kRootTol = 1e-10;
inline constexpr double kQuadTol = 1e-9;

double gauss_pdf(double z);
double gauss_cdf(double z);
double gauss_quantile(double p);
// log of the upper tail 1 - Phi(z), accurate far into the tail
double log_gauss_sf(double z);
double log_gauss_cdf(double z);

double owens_t(double z, double alpha);

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending. Lower degree is
// handled when the leading coefficients vanish.
std::vector<double> solve_cubic_real(double c3, double c2, double c1, double c0);

struct BracketedRoot {
    double lo;
    double hi;
    double value;
    double residual;
};

using Fn = std::function<double(double)>;

BracketedRoot find_root(const Fn& f, double lo, double hi, double tol = kRootTol);

// Expands [lo, hi] geometrically away from `anchor` until f changes sign,
// never crossing the hard limits. Throws NoSignChange when it cannot.
BracketedRoot find_root_expanding(const Fn& f, double anchor, double step,
                                  double limit, double tol = kRootTol);

double integrate(const Fn& f, double lo, double hi, double rel_tol = kQuadTol,
                 double abs_tol = 1e-15);

struct Extremum {
    double x;
    double value;
};

// Golden-section search for the maximum of a unimodal f on [lo, hi].
Extremum maximize(const Fn& f, double lo, double hi, double tol = 1e-10);

double chi2_sf(double chi2, double ndof);

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return engine_(); }
    double next_uniform();
    double next_gaussian();
    // Poisson variate by sequential inversion of the cdf
    long next_poisson(double mean);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline double next_uniform(RandomSource& rs) { return rs.next_uniform(); }
inline double next_gaussian(RandomSource& rs) { return rs.next_gaussian(); }

} // namespace asymerr
