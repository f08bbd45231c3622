#include "doctest.h"

#include "asymerr/errors.hpp"
#include "asymerr/pdf.hpp"
#include "pdf_impl.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace asymerr;

namespace {

constexpr double kPi = std::numbers::pi;

// Largest |A| used for random round trips; keeps transform families monotone
// and the others inside their representable range.
double test_asym_limit(PdfFamily f)
{
    switch (f) {
    case PdfFamily::Dimidiated: return 0.9;
    case PdfFamily::Distorted: return 0.09;
    case PdfFamily::Railway: return 0.45;
    case PdfFamily::DoubleCubic: return 0.6;
    case PdfFamily::SymmetricBeta: return 0.6;
    case PdfFamily::QVW: return 0.5;
    case PdfFamily::Fechner: return 0.2;
    case PdfFamily::Edgeworth: return 0.38;
    case PdfFamily::SkewNormal: return 0.2;
    case PdfFamily::JohnsonSU: return 0.18;
    case PdfFamily::LogNormal: return 0.9;
    }
    return 0;
}

double test_skew_limit(PdfFamily f)
{
    if (f == PdfFamily::LogNormal) return 4.0;
    return 0.95 * max_skewness(f);
}

// Independent quadrature of the density; tanh-sinh copes with the Jacobian
// spikes of the non-monotone transforms when they sit on a split point.
double density_integral(const PdfModel& pm, std::vector<double> splits)
{
    boost::math::quadrature::tanh_sinh<double> ts;
    // test configurations have unit-scale widths; the tails past 60 are negligible
    auto [lo, hi] = pm.support();
    lo = std::max(lo, -60.0);
    hi = std::min(hi, 60.0);
    splits.push_back(lo);
    splits.push_back(hi);
    std::erase_if(splits, [&](double x) { return x < lo || x > hi; });
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
    double sum = 0;
    for (std::size_t i = 0; i + 1 < splits.size(); ++i)
        sum += ts.integrate(
            [&](double x) {
                // a Jacobian spike is infinite only on a set of measure zero
                const double d = pm.density(x);
                return std::isfinite(d) ? d : 0.0;
            },
            splits[i], splits[i + 1]);
    return sum;
}

struct SampleMoments {
    double mean, var, m3, se_mean, se_var, se_m3;
};

SampleMoments sample_moments(const PdfModel& pm, long n, std::uint64_t seed)
{
    RandomSource rs(seed);
    std::vector<double> xs(n);
    double s = 0;
    for (auto& x : xs) {
        x = pm.sample(rs);
        s += x;
    }
    const double mean = s / n;
    double m2 = 0, m3 = 0, m4 = 0, m6 = 0;
    for (double x : xs) {
        const double d = x - mean, d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        m6 += d2 * d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m6 /= n;
    return {mean, m2, m3, std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n),
            std::sqrt((m6 - m3 * m3 - 6 * m4 * m2 + 9 * m2 * m2 * m2) / n)};
}

double ks_statistic(const PdfModel& pm, long n, std::uint64_t seed)
{
    RandomSource rs(seed);
    std::vector<double> xs(n);
    for (auto& x : xs) x = pm.sample(rs);
    std::sort(xs.begin(), xs.end());
    double d = 0;
    for (long i = 0; i < n; ++i) {
        const double c = pm.cdf(xs[i]);
        d = std::max({d, c - double(i) / n, double(i + 1) / n - c});
    }
    return d;
}

} // namespace

TEST_CASE("family names parse back")
{
    for (auto f : all_pdf_families())
        CHECK(parse_pdf_family(pdf_family_name(f)) == f);
    CHECK(parse_pdf_family("Johnson_SU") == PdfFamily::JohnsonSU);
    CHECK_FALSE(parse_pdf_family("cauchy").has_value());
}

TEST_CASE("closed-form quantile constructions")
{
    const QuantileTriple q{5, 1.1, 0.9};
    auto dim = pdf_from_quantiles(PdfFamily::Dimidiated, q);
    CHECK(dim.params() == std::vector<double>{5, 1.1, 0.9});

    auto dis = pdf_from_quantiles(PdfFamily::Distorted, q);
    CHECK(dis.params()[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dis.params()[2] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("symmetric input gives the Gaussian for every family")
{
    const double M = 1.3, s = 0.7;
    for (auto f : all_pdf_families()) {
        CAPTURE(pdf_family_name(f));
        auto pm = pdf_from_quantiles(f, {M, s, s});
        for (int i = 0; i < 50; ++i) {
            const double x = M - 4 * s + 8 * s * i / 49.0;
            CHECK(std::abs(pm.density(x) - gauss_pdf((x - M) / s) / s) < 1e-8);
        }
    }
}

TEST_CASE("moment constructions")
{
    SUBCASE("distorted round trip")
    {
        const double a = 1, b = 0.1, mu = 2.0;
        auto pm = pdf_from_moments(PdfFamily::Distorted, {mu, a * a + 2 * b * b, 2 * b * (3 * a * a + 4 * b * b)});
        CHECK(pm.params()[1] == doctest::Approx(a).epsilon(1e-12));
        CHECK(pm.params()[2] == doctest::Approx(b).epsilon(1e-12));
        CHECK(pm.params()[0] == doctest::Approx(mu - b).epsilon(1e-12));
    }
    SUBCASE("dimidiated (5, 2, -1) against a grid scan")
    {
        auto pm = pdf_from_moments(PdfFamily::Dimidiated, {5, 2, -1});
        // oracle: scan sigma_minus, fix sigma_plus by the variance, and
        // bisect on the skewness residual, all from integrated densities
        auto integrated = [](double sp, double sm) {
            auto d = [&](double x) {
                return x < 0 ? gauss_pdf(x / sm) / sm : gauss_pdf(x / sp) / sp;
            };
            const double lo = -12 * sm, hi = 12 * sp;
            const double m1 = integrate([&](double x) { return x * d(x); }, lo, 0) +
                              integrate([&](double x) { return x * d(x); }, 0, hi);
            auto central = [&](int k) {
                auto g = [&](double x) { return std::pow(x - m1, k) * d(x); };
                return integrate(g, lo, 0) + integrate(g, 0, hi);
            };
            return std::array<double, 3>{m1, central(2), central(3)};
        };
        auto sp_for = [&](double sm) {
            double lo = 1e-3, hi = 5;
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (lo + hi);
                (integrated(mid, sm)[1] < 2 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };
        double prev = 0, prev_sm = 0, root = 0;
        for (double sm = 1.0; sm <= 2.0; sm += 1e-2) {
            const double r = integrated(sp_for(sm), sm)[2] + 1;
            if (sm > 1.0 && prev * r <= 0) {
                double a = prev_sm, b = sm, fa = prev;
                for (int i = 0; i < 40; ++i) {
                    const double mid = 0.5 * (a + b);
                    const double fm = integrated(sp_for(mid), mid)[2] + 1;
                    if (fa * fm <= 0) b = mid;
                    else { a = mid; fa = fm; }
                }
                root = 0.5 * (a + b);
                break;
            }
            prev = r;
            prev_sm = sm;
        }
        REQUIRE(root > 0);
        const auto q = pm.quantiles();
        CHECK(q.sigma_minus == doctest::Approx(root).epsilon(1e-6));
        CHECK(q.sigma_plus == doctest::Approx(sp_for(root)).epsilon(1e-6));
        const auto m = integrated(q.sigma_plus, q.sigma_minus);
        CHECK(q.M + m[0] == doctest::Approx(5).epsilon(1e-8));
    }
    SUBCASE("edgeworth with zero skewness")
    {
        auto pm = pdf_from_moments(PdfFamily::Edgeworth, {3, 4, 0});
        CHECK(pm.params()[1] == doctest::Approx(2));
        CHECK(pm.quantiles().M == doctest::Approx(3));
        CHECK(pm.quantiles().sigma_plus == doctest::Approx(pm.quantiles().sigma_minus));
        CHECK_FALSE(pm.goes_negative());
    }
    SUBCASE("dimidiated skewness bound")
    {
        const double smax = (kPi + 2) / std::pow(kPi - 1, 1.5);
        CHECK(max_skewness(PdfFamily::Dimidiated) == doctest::Approx(smax));
        CHECK(smax == doctest::Approx(1.6403).epsilon(1e-4));
        auto edge = pdf_from_moments(PdfFamily::Dimidiated, {0, 1, smax});
        CHECK_FALSE(edge.warning().empty());
        CHECK(edge.quantiles().sigma_minus == doctest::Approx(0).epsilon(1e-6));
        try {
            pdf_from_moments(PdfFamily::Dimidiated, {0, 1, 1.01 * smax});
            FAIL("accepted skewness beyond the bound");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnrepresentableSkewness);
            CHECK(std::string(e.what()).find("1.64") != std::string::npos);
        }
    }
}

TEST_CASE("representable ranges")
{
    auto code_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(max_asymmetry(PdfFamily::Fechner) == doctest::Approx(0.21564027).epsilon(1e-7));
    CHECK(code_of([] { pdf_from_quantiles(PdfFamily::Fechner, {0, 1.3, 0.7}); }) ==
          ErrorCode::UnrepresentableAsymmetry);
    CHECK(code_of([] { pdf_from_quantiles(PdfFamily::SkewNormal, {0, 1.3, 0.7}); }) ==
          ErrorCode::UnrepresentableAsymmetry);
    CHECK(code_of([] { pdf_from_quantiles(PdfFamily::Edgeworth, {0, 1.5, 0.5}); }) ==
          ErrorCode::UnrepresentableAsymmetry);
    CHECK_NOTHROW(pdf_from_quantiles(PdfFamily::Edgeworth, {0, 1.2, 0.8}));
    CHECK(code_of([] { pdf_from_moments(PdfFamily::Distorted, {0, 1, 3}); }) ==
          ErrorCode::UnrepresentableSkewness);
    CHECK(code_of([] { pdf_from_quantiles(PdfFamily::Dimidiated, {0, -1, 1}); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("density shapes")
{
    auto dim = pdf_from_quantiles(PdfFamily::Dimidiated, {0, 2, 1});
    CHECK(dim.density(std::nextafter(0.0, -1.0)) == doctest::Approx(0.39894228).epsilon(1e-8));
    CHECK(dim.density(0.0) == doctest::Approx(0.19947114).epsilon(1e-8));

    // Jacobian peak at the bottom of the parabola
    auto dis = pdf_from_quantiles(PdfFamily::Distorted, {0, 1.5, 0.5});
    const double a = 1, b = 0.5, xmin = -a * a / (4 * b);
    CHECK(dis.support().first == doctest::Approx(xmin).epsilon(1e-12));
    CHECK(dis.density(xmin - 1e-9) == 0.0);
    CHECK(dis.density(xmin + 1e-8) > 50 * dis.density(xmin + 0.1));

    for (auto f : {PdfFamily::Dimidiated, PdfFamily::Railway, PdfFamily::DoubleCubic,
                   PdfFamily::SymmetricBeta, PdfFamily::QVW}) {
        CAPTURE(pdf_family_name(f));
        CHECK(pdf_from_quantiles(f, {2, 1.3, 0.8}).cdf(2.0) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("closed moments")
{
    auto sym = pdf_from_quantiles(PdfFamily::Dimidiated, {0, 1.5, 1.5});
    CHECK(sym.moments().mu == doctest::Approx(0));
    CHECK(sym.moments().V == doctest::Approx(2.25));
    CHECK(sym.moments().gamma == doctest::Approx(0));

    auto dis = pdf_from_anchors(PdfFamily::Distorted, 0, 1.1, 0.9);
    CHECK(dis.moments().mu == doctest::Approx(0.1));
    CHECK(dis.moments().V == doctest::Approx(1.02));
    CHECK(dis.moments().gamma == doctest::Approx(0.608));
}

TEST_CASE("quantile round trip, 200 random triples per family")
{
    RandomSource rs(7);
    for (auto f : all_pdf_families()) {
        CAPTURE(pdf_family_name(f));
        const int n = (f == PdfFamily::SkewNormal || f == PdfFamily::JohnsonSU) ? 60 : 200;
        for (int i = 0; i < n; ++i) {
            const double A = test_asym_limit(f) * (2 * rs.next_uniform() - 1);
            const double w = 0.1 + 3 * rs.next_uniform();
            const QuantileTriple q{10 * rs.next_gaussian(), w * (1 + A), w * (1 - A)};
            CAPTURE(A);
            auto pm = pdf_from_quantiles(f, q);
            const double tol = 1e-6 * 2 * w;
            const double M = pm.quantile(0.5);
            CHECK(std::abs(M - q.M) < tol);
            CHECK(std::abs(pm.quantile(kUpperLevel) - M - q.sigma_plus) < tol);
            CHECK(std::abs(M - pm.quantile(kLowerLevel) - q.sigma_minus) < tol);
            CHECK(std::abs(pm.quantiles().sigma_plus - q.sigma_plus) < tol);
            // cdf inverts quantile inside the support
            for (double p : {0.01, 0.3, 0.77}) {
                const double x = pm.quantile(p);
                CHECK(std::abs(pm.quantile(pm.cdf(x)) - x) < 1e-8 * std::max(1.0, w));
            }
        }
    }
}

TEST_CASE("moment round trip, random admissible moments")
{
    RandomSource rs(11);
    for (auto f : all_pdf_families()) {
        CAPTURE(pdf_family_name(f));
        const int n = (f == PdfFamily::Railway || f == PdfFamily::DoubleCubic ||
                       f == PdfFamily::SymmetricBeta)
                          ? 40
                          : 200;
        for (int i = 0; i < n; ++i) {
            const double s = test_skew_limit(f) * (2 * rs.next_uniform() - 1);
            const double V = std::pow(0.1 + 3 * rs.next_uniform(), 2);
            const MomentTriple m{5 * rs.next_gaussian(), V, s * std::pow(V, 1.5)};
            CAPTURE(s);
            auto pm = pdf_from_moments(f, m);
            const auto r = pm.moments();
            CHECK(std::abs(r.mu - m.mu) < 1e-6 * std::sqrt(V));
            CHECK(std::abs(r.V - m.V) < 1e-6 * V);
            CHECK(std::abs(r.gamma - m.gamma) < 1e-6 * std::pow(V, 1.5));
        }
    }
}

TEST_CASE("normalization")
{
    for (auto f : all_pdf_families()) {
        for (const QuantileTriple q : {QuantileTriple{0, 1.1, 0.9}, QuantileTriple{0, 0.85, 1.15}}) {
            CAPTURE(pdf_family_name(f));
            auto pm = pdf_from_quantiles(f, q);
            CHECK(density_integral(pm, {-1, 0, 1}) == doctest::Approx(1).epsilon(1e-6));
        }
    }
    // non-monotone transforms, split at the Jacobian spikes
    auto dis = pdf_from_quantiles(PdfFamily::Distorted, {0, 1.5, 0.5});
    CHECK(density_integral(dis, {-0.5}) == doctest::Approx(1).epsilon(1e-6));
    auto dc = pdf_from_quantiles(PdfFamily::DoubleCubic, {0, 3, 0.5});
    CHECK(density_integral(dc, {-0.5, 0, 3}) == doctest::Approx(1).epsilon(1e-5));
}

TEST_CASE("change of variables for the transform families")
{
    RandomSource rs(3);
    for (auto f : {PdfFamily::Distorted, PdfFamily::Railway, PdfFamily::DoubleCubic,
                   PdfFamily::SymmetricBeta, PdfFamily::QVW}) {
        CAPTURE(pdf_family_name(f));
        auto pm = pdf_from_quantiles(f, {1, 1.2, 0.7});
        const auto& t = dynamic_cast<const detail::TransformImpl&>(pm.impl());
        for (int i = 0; i < 100; ++i) {
            const double nu = 3 * rs.next_gaussian();
            const double x = t.R(nu);
            double expect = gauss_pdf(nu) / std::abs(t.dR(nu));
            if (f == PdfFamily::Distorted) {
                // other arm of the parabola
                const double a = pm.params()[1], b = pm.params()[2];
                const double nu2 = -a / b - nu;
                expect += gauss_pdf(nu2) / std::abs(t.dR(nu2));
            }
            CHECK(pm.density(x) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

namespace {

struct LimitGap {
    double max_dev, peak;
};

LimitGap limit_gap(const PdfModel& a, const PdfModel& b)
{
    LimitGap g{0, 0};
    const int n = 7000;
    const double lo = -3, hi = 4, dx = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + dx * i;
        const double pa = a.density(x), pb = b.density(x);
        if (!std::isfinite(pa) || !std::isfinite(pb)) continue;
        g.max_dev = std::max(g.max_dev, std::abs(pa - pb));
        g.peak = std::max(g.peak, pb);
    }
    return g;
}

PdfModel symbeta(double h)
{
    ShapeOptions o;
    o.beta_h = h;
    return pdf_from_quantiles(PdfFamily::SymmetricBeta, {0, 1, 0.6}, o);
}

} // namespace

TEST_CASE("symmetric beta approaches dimidiated and distorted in cdf distance")
{
    auto dim = pdf_from_quantiles(PdfFamily::Dimidiated, {0, 1, 0.6});
    auto dis = pdf_from_quantiles(PdfFamily::Distorted, {0, 1, 0.6});
    auto cdf_gap = [](const PdfModel& a, const PdfModel& b) {
        double d = 0;
        for (int i = 0; i <= 7000; ++i) {
            const double x = -3 + 7e-3 * i;
            d = std::max(d, std::abs(a.cdf(x) - b.cdf(x)));
        }
        return d;
    };
    const double n = cdf_gap(symbeta(0.1), dim), w = cdf_gap(symbeta(10), dis);
    CHECK(n < 0.02);
    CHECK(w < 0.02);
    CHECK(n < cdf_gap(symbeta(0.5), dim));
    CHECK(cdf_gap(symbeta(0.5), dim) < cdf_gap(symbeta(1), dim));
    CHECK(w < cdf_gap(symbeta(3), dis));
    CHECK(cdf_gap(symbeta(3), dis) < cdf_gap(symbeta(1), dis));
}

TEST_CASE("symmetric beta limits, pointwise within 5% of the peak")
{
    auto dim = pdf_from_quantiles(PdfFamily::Dimidiated, {0, 1, 0.6});
    auto dis = pdf_from_quantiles(PdfFamily::Distorted, {0, 1, 0.6});
    const auto n = limit_gap(symbeta(0.1), dim);
    const auto w = limit_gap(symbeta(10), dis);
    CHECK(n.max_dev < 0.05 * n.peak);
    CHECK(w.max_dev < 0.05 * w.peak);
}

TEST_CASE("edgeworth central interval does not depend on the skewness")
{
    const double mu = 1, sigma = 2;
    const double ref = gauss_cdf(1) - gauss_cdf(-1);
    for (double g : {-20.0, -3.0, 0.0, 0.5, 7.0, 20.0}) {
        auto pm = pdf_from_moments(PdfFamily::Edgeworth, {mu, sigma * sigma, g});
        CHECK(std::abs(pm.cdf(mu + sigma) - pm.cdf(mu - sigma) - ref) < 1e-10);
    }
    auto neg = pdf_from_moments(PdfFamily::Edgeworth, {0, 1, 0.5});
    CHECK(neg.goes_negative());
    RandomSource rs(1);
    CHECK_THROWS_AS(neg.sample(rs), Error);
}

TEST_CASE("monte carlo moments, 1e7 draws")
{
    const ShapeOptions opts;
    std::uint64_t seed = 100;
    for (auto f : all_pdf_families()) {
        CAPTURE(pdf_family_name(f));
        // Edgeworth samples by cdf inversion and must stay non-negative
        const bool edge = f == PdfFamily::Edgeworth;
        auto pm = edge ? pdf_from_moments(f, {0, 1, 0.02})
                       : pdf_from_quantiles(f, {0, 1, f == PdfFamily::Fechner || f == PdfFamily::SkewNormal ||
                                                          f == PdfFamily::JohnsonSU
                                                      ? 0.75
                                                      : 0.6}, opts);
        const auto m = pm.moments();
        const auto s = sample_moments(pm, edge ? 1000000 : 10000000, ++seed);
        CHECK(std::abs(s.mean - m.mu) < 5 * s.se_mean);
        CHECK(std::abs(s.var - m.V) < 5 * s.se_var);
        CHECK(std::abs(s.m3 - m.gamma) < 5 * s.se_m3);
    }
}

TEST_CASE("sampling")
{
    SUBCASE("kolmogorov distance of 1e6 draws")
    {
        std::uint64_t seed = 500;
        for (auto f : all_pdf_families()) {
            if (f == PdfFamily::Edgeworth) continue;
            CAPTURE(pdf_family_name(f));
            auto pm = pdf_from_quantiles(f, {0, 1, 0.8});
            CHECK(ks_statistic(pm, 1000000, ++seed) < 0.002);
        }
        auto dis = pdf_from_quantiles(PdfFamily::Distorted, {0, 1.5, 0.5});
        CHECK(ks_statistic(dis, 1000000, 77) < 0.002);
    }
    SUBCASE("symmetric mean")
    {
        auto pm = pdf_from_quantiles(PdfFamily::Railway, {3, 2, 2});
        RandomSource rs(9);
        double s = 0;
        for (int i = 0; i < 1000000; ++i) s += pm.sample(rs);
        CHECK(std::abs(s / 1e6 - 3) < 5 * 2 / 1e3);
    }
    SUBCASE("dimidiated halves")
    {
        auto pm = pdf_from_quantiles(PdfFamily::Dimidiated, {0, 1.5, 0.5});
        RandomSource rs(10);
        int above = 0;
        for (int i = 0; i < 1000000; ++i) above += pm.sample(rs) > 0;
        CHECK(std::abs(above / 1e6 - 0.5) < 0.002);
    }
    SUBCASE("flipped distorted stays on one side of the extremum")
    {
        auto pm = pdf_from_anchors(PdfFamily::Distorted, 0, 1.0, -0.5);
        const double a = 0.25, b = 0.75, xmin = -a * a / (4 * b);
        CHECK(pm.support().first == doctest::Approx(xmin));
        RandomSource rs(12);
        double lowest = 1e300;
        for (int i = 0; i < 1000000; ++i) lowest = std::min(lowest, pm.sample(rs));
        CHECK(lowest >= xmin);
    }
}

TEST_CASE("flipped results")
{
    const double s = 0.8, M = 2;
    const auto m = flipped_moments({M, s, s, +1});
    CHECK(m.mu == doctest::Approx(M + 2 * s / std::sqrt(2 * kPi)));
    CHECK(m.V == doctest::Approx(s * s * (1 - 2 / kPi)));
    // half-normal third central moment
    CHECK(m.gamma == doctest::Approx(s * s * s * std::sqrt(2 / kPi) * (4 / kPi - 1)));

    const FlippedSpec up{M, 0.5, 1.2, +1}, down{M, 0.5, 1.2, -1};
    const auto mu = flipped_moments(up), md = flipped_moments(down);
    CHECK(md.gamma == doctest::Approx(-mu.gamma));
    CHECK(md.V == doctest::Approx(mu.V));
    CHECK(md.mu - M == doctest::Approx(-(mu.mu - M)));

    // discrete alternatives: both deviations equal
    auto pm = flipped_to_dimidiated({10, 3, 3, -1});
    CHECK(pm.moments().mu == doctest::Approx(10 - 6 / std::sqrt(2 * kPi)));
    CHECK(pm.moments().gamma < 0);
    auto pu = flipped_to_dimidiated(up);
    CHECK(pu.moments().V == doctest::Approx(mu.V));
    CHECK(pu.moments().gamma == doctest::Approx(mu.gamma));
}
