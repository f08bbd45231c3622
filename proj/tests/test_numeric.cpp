#include "doctest.h"

#include "asymerr/errors.hpp"
#include "asymerr/numeric.hpp"

#include <boost/math/special_functions/owens_t.hpp>

#include <cmath>
#include <vector>

using namespace asymerr;

namespace {

// Plain Maclaurin series for erf in long double; independent of std::erfc.
long double erf_series(long double x)
{
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-22L)
            break;
    }
    return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

double series_quantile(double p)
{
    long double lo = -5, hi = 5;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        const long double c = 0.5L * (1 + erf_series(mid / std::sqrt(2.0L)));
        (c < p ? lo : hi) = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

double cubic(double c3, double c2, double c1, double c0, double x)
{
    return ((c3 * x + c2) * x + c1) * x + c0;
}

} // namespace

TEST_CASE("gaussian special functions")
{
    CHECK(gauss_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gauss_cdf(1.0) - gauss_cdf(-1.0) == doctest::Approx(0.6826894921370859).epsilon(1e-13));
    CHECK(std::fabs(gauss_quantile(0.84134) - 1.0) < 1e-4);
    CHECK(std::fabs(gauss_quantile(0.84134) - series_quantile(0.84134)) < 1e-12);
    CHECK(std::fabs(gauss_quantile(0.16) - series_quantile(0.16)) < 1e-12);
    CHECK(gauss_cdf(1.0) == doctest::Approx(kUpperLevel).epsilon(1e-15));
    CHECK(gauss_cdf(-1.0) == doctest::Approx(kLowerLevel).epsilon(1e-15));

    CHECK_THROWS_AS(gauss_quantile(0.0), Error);
    CHECK_THROWS_AS(gauss_quantile(1.0), Error);
    try {
        gauss_quantile(1.5);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Domain);
    }

    // Above the median the round trip is limited by the spacing of doubles near 1.
    for (double z = -6.0; z <= 6.0; z += 0.01) {
        const double tol = z <= 0 ? 1e-12 : std::max(1e-12, 4 * 0x1.0p-53 / gauss_pdf(z));
        CHECK(std::fabs(gauss_quantile(gauss_cdf(z)) - z) < tol);
    }
}

TEST_CASE("gaussian cdf is monotone and differentiates to the pdf")
{
    RandomSource rs(7);
    double prev = gauss_cdf(-8.0);
    for (double z = -8.0; z <= 8.0; z += 0.001) {
        const double c = gauss_cdf(z);
        CHECK(c >= prev);
        prev = c;
    }
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const double z = -5.0 + 10.0 * rs.next_uniform();
        const double fd = (gauss_cdf(z + h) - gauss_cdf(z - h)) / (2 * h);
        CHECK(std::fabs(fd - gauss_pdf(z)) < 1e-6);
    }
}

TEST_CASE("log tail functions")
{
    for (double z : {-3.0, 0.0, 2.0, 10.0, 25.0})
        CHECK(log_gauss_sf(z) == doctest::Approx(std::log(0.5 * std::erfc(z / std::sqrt(2.0)))).epsilon(1e-12));
    // continuity across the switch to the asymptotic series
    CHECK(log_gauss_sf(30.0 - 1e-9) == doctest::Approx(log_gauss_sf(30.0)).epsilon(1e-10));
    CHECK(std::isfinite(log_gauss_cdf(-200.0)));
    CHECK(log_gauss_cdf(-200.0) == doctest::Approx(-20000.0 - 0.9189385332 - std::log(200.0)).epsilon(1e-8));
}

TEST_CASE("owens_t")
{
    CHECK(owens_t(0.0, 1.0) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(owens_t(1.3, 0.0) == 0.0);

    // dense trapezoid oracle on the defining integral
    const int n = 1000000;
    const double alpha = 2.0, z = 1.0, step = alpha / n;
    long double sum = 0;
    for (int i = 0; i <= n; ++i) {
        const double y = i * step;
        const long double f = std::exp(-0.5 * z * z * (1 + y * y)) / (1 + y * y);
        sum += (i == 0 || i == n) ? 0.5L * f : f;
    }
    const double oracle = static_cast<double>(sum * step / (2 * 3.14159265358979323846L));
    CHECK(std::fabs(owens_t(1.0, 2.0) - oracle) < 1e-10);
    CHECK(std::fabs(owens_t(1.0, 2.0) - boost::math::owens_t(1.0, 2.0)) < 1e-12);

    RandomSource rs(11);
    for (int i = 0; i < 50; ++i) {
        const double zz = -4 + 8 * rs.next_uniform();
        const double a = -10 + 20 * rs.next_uniform();
        CHECK(owens_t(zz, -a) == doctest::Approx(-owens_t(zz, a)).epsilon(1e-14));
        CHECK(std::fabs(owens_t(zz, a) - boost::math::owens_t(zz, a)) < 1e-12);
    }
}

TEST_CASE("solve_cubic_real")
{
    auto r = solve_cubic_real(1, 0, 0, -1);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-14));

    r = solve_cubic_real(1, 0, -1, 0);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(-1.0));
    CHECK(std::fabs(r[1]) < 1e-14);
    CHECK(r[2] == doctest::Approx(1.0));

    CHECK_THROWS_AS(solve_cubic_real(0, 0, 0, 3), Error);

    // dimidiated D equation (5/pi - 2) D^3 + 6 V D - 2 sqrt(2 pi) gamma = 0 at V=2, gamma=-1
    const double c3 = 5.0 / M_PI - 2.0, c1 = 12.0, c0 = 2.0 * std::sqrt(2.0 * M_PI);
    r = solve_cubic_real(c3, 0.0, c1, c0);
    std::vector<double> scan;
    const double step = 1e-6;
    for (double x = -20.0; x < 20.0; x += step) {
        const double f0 = cubic(c3, 0, c1, c0, x), f1 = cubic(c3, 0, c1, c0, x + step);
        if ((f0 < 0) != (f1 < 0)) {
            double lo = x, hi = x + step;
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (lo + hi);
                ((cubic(c3, 0, c1, c0, mid) < 0) == (f0 < 0) ? lo : hi) = mid;
            }
            scan.push_back(0.5 * (lo + hi));
        }
    }
    REQUIRE(r.size() == scan.size());
    for (size_t i = 0; i < r.size(); ++i)
        CHECK(std::fabs(r[i] - scan[i]) < 1e-9);
}

TEST_CASE("cubic roots agree with a sign-change scan")
{
    RandomSource rs(3);
    for (int trial = 0; trial < 200; ++trial) {
        double c[4];
        for (double& ci : c)
            ci = -3 + 6 * rs.next_uniform();
        const auto roots = solve_cubic_real(c[0], c[1], c[2], c[3]);
        const double scale = std::max({std::fabs(c[0]), std::fabs(c[1]), std::fabs(c[2]), std::fabs(c[3])});
        for (double x : roots)
            CHECK(std::fabs(cubic(c[0], c[1], c[2], c[3], x)) < 1e-9 * scale * std::max(1.0, x * x * std::fabs(x)));
        // all real roots of such a cubic lie within the Cauchy bound
        const double bound = 1 + std::max({std::fabs(c[1]), std::fabs(c[2]), std::fabs(c[3])}) / std::fabs(c[0]);
        int changes = 0;
        const int n = 10000;
        double prev = cubic(c[0], c[1], c[2], c[3], -bound);
        for (int i = 1; i <= n; ++i) {
            const double x = -bound + 2 * bound * i / n;
            const double v = cubic(c[0], c[1], c[2], c[3], x);
            if ((v < 0) != (prev < 0))
                ++changes;
            prev = v;
        }
        // near-double roots can hide inside one grid cell
        bool close_pair = false;
        for (size_t i = 1; i < roots.size(); ++i)
            close_pair |= roots[i] - roots[i - 1] < 4 * bound / n;
        if (!close_pair)
            CHECK(changes == static_cast<int>(roots.size()));
    }
}

TEST_CASE("find_root")
{
    auto r = find_root([](double x) { return x * x - 2; }, 1, 2, 1e-12);
    CHECK(std::fabs(r.value - std::sqrt(2.0)) < 1e-9);
    CHECK(r.lo <= r.value);
    CHECK(r.value <= r.hi);

    r = find_root([](double x) { return gauss_cdf(x) - 0.16; }, -3, 0);
    CHECK(std::fabs(r.value - series_quantile(0.16)) < 1e-9);
    CHECK(std::fabs(r.value + 0.99446) < 1e-4);

    const auto poisson = [](double a) { return -(a - 5) + 5 * std::log(a / 5) + 0.5; };
    r = find_root(poisson, 5, 10);
    CHECK(std::fabs(r.value - 7.5811) < 1e-3);

    try {
        find_root([](double x) { return x * x + 1; }, -1, 1);
        FAIL("expected NoSignChange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoSignChange);
    }

    // the bracket is never left
    RandomSource rs(5);
    for (int i = 0; i < 100; ++i) {
        const double root = -2 + 4 * rs.next_uniform();
        const double lo = root - 3 * rs.next_uniform() - 1e-3, hi = root + 3 * rs.next_uniform() + 1e-3;
        bool outside = false;
        find_root(
            [&](double x) {
                outside |= x < lo || x > hi;
                return std::tanh(5 * (x - root)) + 0.01 * (x - root);
            },
            lo, hi);
        CHECK_FALSE(outside);
    }
}

TEST_CASE("integrate")
{
    CHECK(integrate(gauss_pdf, -6, 6) == doctest::Approx(1.0 - 2 * gauss_cdf(-6)).epsilon(1e-12));
    CHECK(std::fabs(integrate(gauss_pdf, -6, 6) - 1.0) < 1e-8);
    CHECK(std::fabs(integrate([](double z) { return z * z * gauss_pdf(z); }, -6, 6) - 1.0) < 1e-7);
    const auto dimidiated = [](double x) {
        const double s = x < 0 ? 0.5 : 1.5;
        return gauss_pdf(x / s) / s;
    };
    CHECK(std::fabs(integrate(dimidiated, -kInf, 0) + integrate(dimidiated, 0, kInf) - 1.0) < 1e-9);
    CHECK(std::fabs(integrate(gauss_pdf, -kInf, kInf) - 1.0) < 1e-9);
    CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(std::fabs(x - 0.3)) * std::sin(1 / (x - 0.3)); }, 0, 1, 1e-14, 0),
                    Error);
}

TEST_CASE("maximize and chi2 tail")
{
    const auto m = maximize([](double x) { return -(x - 1.25) * (x - 1.25) + 3; }, -4, 4);
    CHECK(m.x == doctest::Approx(1.25).epsilon(1e-7));
    CHECK(m.value == doctest::Approx(3.0));
    CHECK(chi2_sf(0.0, 3) == 1.0);
    CHECK(chi2_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(chi2_sf(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("random source")
{
    RandomSource a(42), b(42);
    CHECK(a.next_uniform() == b.next_uniform());
    CHECK(a.next_uniform() == b.next_uniform());

    RandomSource rs(2024);
    const int n = 1000000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rs.next_uniform();
        CHECK_UNARY(u >= 0.0);
        CHECK_UNARY(u < 1.0);
        const double g = rs.next_gaussian();
        s1 += g;
        s2 += g * g;
    }
    const double mean = s1 / n;
    CHECK(std::fabs(mean) < 0.004);
    CHECK(std::fabs(s2 / n - mean * mean - 1.0) < 0.006);

    RandomSource p(9);
    double ps = 0, ps2 = 0;
    const int np = 200000;
    for (int i = 0; i < np; ++i) {
        const double k = p.next_poisson(5.0);
        ps += k;
        ps2 += k * k;
    }
    CHECK(std::fabs(ps / np - 5.0) < 5 * std::sqrt(5.0 / np));
    CHECK(std::fabs(ps2 / np - (ps / np) * (ps / np) - 5.0) < 0.1);
}
