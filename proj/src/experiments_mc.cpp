#include "asymerr/combine.hpp"
#include "asymerr/errors.hpp"
#include "asymerr/experiments.hpp"
#include "experiments_impl.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace asymerr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Delta ln L = -1/2 errors of a Poisson observation n; n = 0 peaks on the
// boundary and only has an upper error.
DeltaHalf poisson_errors(long n) {
    if (n == 0) return {0.5, 0.0};
    const double x = static_cast<double>(n);
    auto f = [x](double a) { return x * std::log(a / x) - (a - x); };
    return solve_delta_half(f, x, 0.25 * std::sqrt(x), 0.0, kInf);
}

// ---- Wilks ---------------------------------------------------------------

constexpr int kBins = 20;

struct WilksAcc {
    std::array<long, kBins> hist{};
    long replicas = 0, with_zero = 0, failed = 0;
    double sum_chi2 = 0;

    WilksAcc& operator+=(const WilksAcc& o) {
        for (int i = 0; i < kBins; ++i) hist[i] += o.hist[i];
        replicas += o.replicas;
        with_zero += o.with_zero;
        failed += o.failed;
        sum_chi2 += o.sum_chi2;
        return *this;
    }
};

class PoissonLnL {
public:
    PoissonLnL(double mean) {
        const long top = static_cast<long>(mean + 12 * std::sqrt(mean) + 20);
        for (long n = 0; n <= top; ++n) cache_.push_back(make(n));
    }

    // linear variance model of the encoded triple; n = 0 is the exact -a,
    // which is the same model's limit as sigma- -> 0
    LnLCurve curve(long n) const {
        if (n < static_cast<long>(cache_.size())) return cache_[n];
        return make(n);
    }

private:
    static LnLCurve make(long n) {
        if (n == 0)
            return {[](double a) { return -a; }, [](double) { return -1.0; }, 0.0, 0.0, kInf, 0.5};
        const auto d = poisson_errors(n);
        const double x = static_cast<double>(n);
        return as_curve(lnl_from_triple(LnLFamily::LinearVariance, {x, d.sigma_plus, d.sigma_minus}));
    }
    std::vector<LnLCurve> cache_;
};

} // namespace

ExperimentOutcome run_wilks_flatness(const ExperimentSpec& spec) {
    auto out = detail::start(spec, "wilks");
    const double mean = detail::param(spec, "poisson_mean");
    const int group = static_cast<int>(detail::param(spec, "group_size"));
    if (!(mean > 0 && mean <= 1e4)) fail(ErrorCode::InvalidArgument, "wilks", "poisson_mean must be in (0, 1e4]");
    if (group < 1 || group > 1000) fail(ErrorCode::InvalidArgument, "wilks", "group_size must be in [1, 1000]");

    const PoissonLnL models(mean);
    auto acc = detail::run_chunked<WilksAcc>(spec, [&](RandomSource& rs, long count) {
        WilksAcc a;
        std::vector<long> n(group);
        for (long r = 0; r < count; ++r) {
            bool zero = false, all_zero = true;
            for (auto& v : n) {
                v = rs.next_poisson(mean);
                zero = zero || v == 0;
                all_zero = all_zero && v == 0;
            }
            ++a.replicas;
            if (zero) ++a.with_zero;
            double p = 1, chi2 = 0;
            if (group > 1 && !all_zero) {
                try {
                    std::vector<LnLCurve> cs;
                    for (long v : n) cs.push_back(models.curve(v));
                    const auto c = combine_lnl_results(cs);
                    p = c.gof.p_value;
                    chi2 = c.gof.chi2;
                } catch (const Error&) {
                    ++a.failed;
                    continue;
                }
            }
            a.sum_chi2 += chi2;
            a.hist[std::min(kBins - 1, static_cast<int>(p * kBins))]++;
        }
        return a;
    });

    const long used = acc.replicas - acc.failed;
    const double expect = static_cast<double>(used) / kBins;
    double u2 = 0;
    Table h{"p-value histogram", {"bin", "lo", "hi", "count", "ratio"}, {}, {}};
    for (int i = 0; i < kBins; ++i) {
        const double o = static_cast<double>(acc.hist[i]);
        u2 += (o - expect) * (o - expect) / expect;
        h.add(std::to_string(i), {double(i) / kBins, double(i + 1) / kBins, o, o / expect});
    }
    const double up = chi2_sf(u2, kBins - 1);
    Table s{"summary", {"quantity", "value"}, {}, {}};
    s.add("uniformity chi2", {u2});
    s.add("uniformity p", {up});
    s.add("mean -2 dlnL", {acc.sum_chi2 / std::max(1L, used)});
    s.add("ideal mean", {double(group - 1)});
    s.add("replicas with a zero", {double(acc.with_zero)});
    s.add("combinations failed", {double(acc.failed)});
    out.tables = {h, s};

    if (group == 1)
        out.check("fraction_p_equal_one", double(acc.hist[kBins - 1]) / std::max(1L, used), Relation::Near, 1, 0);
    else if (mean <= 5)
        out.check("uniformity_p", up, Relation::Below, 0.01);
    else if (mean >= 20)
        out.check("uniformity_p", up, Relation::Above, 0.01);
    out.check("combinations_failed", double(acc.failed), Relation::Near, 0, 0);
    return out;
}

// ---- combination of pdf results --------------------------------------------

namespace {

struct MomentAcc {
    long n = 0;
    double s1 = 0, s2 = 0, s3 = 0; // powers of y - centre

    MomentAcc& operator+=(const MomentAcc& o) {
        n += o.n;
        s1 += o.s1;
        s2 += o.s2;
        s3 += o.s3;
        return *this;
    }
};

struct FamilyCase {
    std::string label;
    PdfFamily family;
    ShapeOptions opts;
    double paper_V; // NaN when not printed
};

std::vector<FamilyCase> corcomp_cases() {
    auto sb = [](int p, double h) {
        ShapeOptions o;
        o.beta_p = p;
        o.beta_h = h;
        return o;
    };
    auto sb_label = [](int p, double h) {
        return "symmetric-beta(" + std::to_string(p) + "," + std::to_string(int(std::lround(10 * h))) + ")";
    };
    std::vector<FamilyCase> v = {
        {"dimidiated", PdfFamily::Dimidiated, {}, 25.045},
        {"distorted", PdfFamily::Distorted, {}, 25.250},
        {"double-cubic", PdfFamily::DoubleCubic, {}, 25.083},
        {"edgeworth", PdfFamily::Edgeworth, {}, 25.000},
        {"fechner", PdfFamily::Fechner, {}, 25.016},
        {"johnson-su", PdfFamily::JohnsonSU, {}, 26.555},
        {"log-normal", PdfFamily::LogNormal, {}, 25.593},
        {"qvw", PdfFamily::QVW, {}, 25.103},
        {"railway", PdfFamily::Railway, {}, 25.249},
        {"skew-normal", PdfFamily::SkewNormal, {}, 25.583},
        {"symmetric-beta", PdfFamily::SymmetricBeta, {}, kNaN},
    };
    for (auto [p, h, V] : {std::tuple{1, 1.0, 25.090}, {1, 3.0, 25.206}, {4, 1.0, 25.071}, {4, 3.0, 25.150}})
        v.push_back({sb_label(p, h), PdfFamily::SymmetricBeta, sb(p, h), V});
    return v;
}

} // namespace

ExperimentOutcome run_pdf_result_combination_mc(const ExperimentSpec& spec) {
    auto out = detail::start(spec, "pdf-result-mc");
    const bool square = detail::param(spec, "transform") == 0;
    const double mu = detail::param(spec, "x_mean");
    const double sig = detail::param(spec, "x_sigma");
    if (!(sig > 0)) fail(ErrorCode::InvalidArgument, "pdf-result-mc", "x_sigma must be positive");
    if (square && !(mu - sig > 0))
        fail(ErrorCode::InvalidArgument, "pdf-result-mc", "x_mean - x_sigma must be positive for r = x^2");
    auto g = [square](double x) { return square ? x * x : x; };

    // the same errors go with every measurement, from the quantiles at the true x
    const double M = g(mu), sp = g(mu + sig) - M, sm = M - g(mu - sig);
    out.tables.push_back({"quantiles of r", {"quantity", "value"}, {"M", "sigma+", "sigma-"}, {{M}, {sp}, {sm}}});
    if (square && mu == 5 && std::abs(sig - 1 / std::numbers::sqrt2) < 1e-12) {
        out.check("r_M", M, Relation::Near, 25, 1e-3);
        out.check("r_sigma_plus", sp, Relation::Near, 7.571, 1e-3);
        out.check("r_sigma_minus", sm, Relation::Near, 6.571, 1e-3);
    }

    // every pair shares errors, so the weights are 1/2 and the combined mean is
    // (r1 + r2)/2 plus a fixed model offset: one MC serves every family
    auto acc = detail::run_chunked<MomentAcc>(spec, [&](RandomSource& rs, long count) {
        MomentAcc a;
        for (long i = 0; i < count; ++i) {
            const double r1 = g(mu + sig * rs.next_gaussian());
            const double r2 = g(mu + sig * rs.next_gaussian());
            const double y = 0.5 * (r1 + r2) - M;
            a.n++;
            a.s1 += y;
            a.s2 += y * y;
            a.s3 += y * y * y;
        }
        return a;
    });
    const double n = static_cast<double>(acc.n);
    const double m1 = acc.s1 / n;
    const double V_mc = acc.s2 / n - m1 * m1;
    const double g_mc = acc.s3 / n - 3 * m1 * acc.s2 / n + 2 * m1 * m1 * m1;
    const double mean_mc = M + m1;

    Table t{"predicted against MC",
            {"model", "V_pred", "(V_pred-V_MC)/V_MC", "gamma_pred", "(g_pred-g_MC)/g_MC", "mean_pred"}, {}, {}};
    Table mc{"MC", {"quantity", "value"}, {}, {}};
    mc.add("replicas", {n});
    mc.add("mean of combined", {mean_mc});
    mc.add("V_MC", {V_mc});
    mc.add("gamma_MC", {g_mc});

    Table coe{"combined results",
              {"model", "inputs", "M", "sigma+", "sigma-"}, {}, {}};
    const double alt_hi = g(mu + 2 * sig), alt_lo = g(mu - 2 * sig);

    for (const auto& fc : corcomp_cases()) {
        try {
            const auto a = pdf_from_quantiles(fc.family, {M + sp, sp, sm}, fc.opts);
            const auto b = pdf_from_quantiles(fc.family, {M - sm, sp, sm}, fc.opts);
            const auto c = combine_pdf_results({a, b}, false, std::nullopt, fc.opts);
            const double gp = c.moments.gamma;
            t.add(fc.label, {c.moments.V, (c.moments.V - V_mc) / V_mc, gp,
                             g_mc != 0 ? (gp - g_mc) / g_mc : kNaN, c.mean});
            coe.add(fc.label, {1, c.result.M, c.result.sigma_plus, c.result.sigma_minus});
            out.check("V_agreement_" + fc.label, (c.moments.V - V_mc) / V_mc, Relation::Near, 0, 0.02);
            if (square && !std::isnan(fc.paper_V))
                out.check("V_pred_" + fc.label, c.moments.V, Relation::Near, fc.paper_V, 2e-3);
            const auto a2 = pdf_from_quantiles(fc.family, {alt_hi, sp, sm}, fc.opts);
            const auto b2 = pdf_from_quantiles(fc.family, {alt_lo, sp, sm}, fc.opts);
            const auto c2 = combine_pdf_results({a2, b2}, false, std::nullopt, fc.opts);
            coe.add(fc.label, {2, c2.result.M, c2.result.sigma_plus, c2.result.sigma_minus});
            if (square && mu == 5 && (fc.family == PdfFamily::Dimidiated || fc.family == PdfFamily::Distorted) &&
                fc.label == pdf_family_name(fc.family)) {
                const bool dim = fc.family == PdfFamily::Dimidiated;
                const double want_sp = dim ? 5.252 : 5.262, want_sm = dim ? 4.752 : 4.763;
                const double want_M1 = dim ? 25.700 : 25.750, want_M2 = dim ? 27.200 : 27.250;
                for (auto [blk, cc, wm] : {std::tuple{"1", &c, want_M1}, {"2", &c2, want_M2}}) {
                    const std::string k = "combined" + std::string(blk) + "_" + fc.label;
                    out.check(k + "_M", cc->result.M, Relation::Near, wm, 2e-3);
                    out.check(k + "_sigma_plus", cc->result.sigma_plus, Relation::Near, want_sp, 2e-3);
                    out.check(k + "_sigma_minus", cc->result.sigma_minus, Relation::Near, want_sm, 2e-3);
                }
            }
        } catch (const Error&) {
            t.add(fc.label, {kNaN, kNaN, kNaN, kNaN, kNaN});
        }
    }
    if (!square) {
        // symmetric errors: every model is the Gaussian, unbiased
        const double se = sig / std::sqrt(2 * n);
        out.check("identity_mean", mean_mc, Relation::Near, mu, 5 * se);
    }
    out.tables.push_back(mc);
    out.tables.push_back(t);
    out.tables.push_back(coe);
    return out;
}

// ---- coverage of a final stat + syst result ----------------------------------

namespace {

struct CoverAcc {
    long n = 0, cover1 = 0, cover2 = 0, fixed1 = 0, fixed2 = 0, gauss = 0;

    CoverAcc& operator+=(const CoverAcc& o) {
        n += o.n;
        cover1 += o.cover1;
        cover2 += o.cover2;
        fixed1 += o.fixed1;
        fixed2 += o.fixed2;
        gauss += o.gauss;
        return *this;
    }
};

} // namespace

ExperimentOutcome run_coverage_study(const ExperimentSpec& spec) {
    auto out = detail::start(spec, "coverage");
    const double rad = detail::param(spec, "radius");
    const double x0 = detail::param(spec, "distance");
    const double sx = detail::param(spec, "distance_sigma");
    const double counts = detail::param(spec, "counts");
    if (!(rad > 0 && x0 > 0 && sx > 0 && x0 - 5 * sx > 0 && counts >= 1))
        fail(ErrorCode::InvalidArgument, "coverage", "need radius, counts >= 1 and distance > 5 distance_sigma > 0");
    const bool paper = rad == 1 && x0 == 5 && sx == 0.3 && counts == 50;

    // 4 pi / solid angle of a disc
    auto A = [rad](double x) { return 2 / (1 - x / std::hypot(rad, x)); };
    const double A0 = A(x0), Ap = A(x0 + sx) - A0, Am = A0 - A(x0 - sx);
    const long n0 = std::lround(counts);
    const auto pe = poisson_errors(n0);
    const double R0 = A0 * counts;
    const double stp = A0 * pe.sigma_plus, stm = A0 * pe.sigma_minus;
    const double syp = counts * Ap, sym = counts * Am;
    const auto tot1 = linear_sigma_pair(stp, stm, syp, sym);
    const auto tot2 = linear_sigma_pair(stp, stm, sym, syp);

    // likelihood reading: the vertical cut of the joint density of the
    // measured and true A, density taken in the true A
    const double xm = x0;
    auto x_of = [&](double a) {
        return find_root([&](double x) { return A(x) - a; }, 1e-6 * rad, 1e3 * rad + 100 * x0, 1e-14).value;
    };
    auto lnl = [&](double a) {
        const double x = x_of(a), h = 1e-6 * a;
        const double jac = (x_of(a + h) - x_of(a - h)) / (2 * h);
        return -0.5 * ((xm - x) / sx) * ((xm - x) / sx) + std::log(jac);
    };
    const double lo = A(x0 - 6 * sx), hi = A(x0 + 6 * sx);
    const auto pk = maximize(lnl, lo, hi, 1e-12);
    const double top = lnl(pk.x);
    const double like_hi = find_root([&](double a) { return lnl(a) - top + 0.5; }, pk.x, hi, 1e-12).value;
    const double like_lo = find_root([&](double a) { return lnl(a) - top + 0.5; }, lo, pk.x, 1e-12).value;
    const double lsp = counts * (like_hi - A0), lsm = counts * (A0 - like_lo);

    Table q{"quoted result", {"quantity", "value", "+", "-"}, {}, {}};
    q.add("A", {A0, Ap, Am});
    q.add("R stat", {R0, stp, stm});
    q.add("R syst (pdf)", {R0, syp, sym});
    q.add("R syst (likelihood reading)", {R0, lsp, lsm});
    q.add("total, linear sigma", {R0, tot1.sigma_plus, tot1.sigma_minus});
    q.add("total, syst interchanged", {R0, tot2.sigma_plus, tot2.sigma_minus});
    out.tables.push_back(q);

    if (paper) {
        out.check("A", A0, Relation::Near, 103.0, 0.1);
        out.check("A_sigma_plus", Ap, Relation::Near, 12.4, 0.1);
        out.check("A_sigma_minus", Am, Relation::Near, 11.6, 0.1);
        out.check("R", R0, Relation::Near, 5149.5, 0.1);
        out.check("stat_sigma_plus", stp, Relation::Near, 763.0, 0.1);
        out.check("stat_sigma_minus", stm, Relation::Near, 694.3, 0.1);
        out.check("syst_sigma_plus", syp, Relation::Near, 618.1, 0.1);
        out.check("syst_sigma_minus", sym, Relation::Near, 582.1, 0.1);
        out.check("likelihood_syst_sigma_plus", lsp, Relation::Near, 582.1, 0.5);
        out.check("likelihood_syst_sigma_minus", lsm, Relation::Near, 618.0, 0.5);
        out.check("total_sigma_plus", tot1.sigma_plus, Relation::Near, 971.1, 0.1);
        out.check("total_sigma_minus", tot1.sigma_minus, Relation::Near, 915.6, 0.1);
        out.check("interchanged_sigma_plus", tot2.sigma_plus, Relation::Near, 957.8, 0.1);
        out.check("interchanged_sigma_minus", tot2.sigma_minus, Relation::Near, 931.4, 0.1);
    }

    // toys: each quotes its own errors from its own n and x, exactly as above
    const long top_n = static_cast<long>(counts + 12 * std::sqrt(counts) + 20);
    std::vector<DeltaHalf> perr;
    for (long k = 0; k <= top_n; ++k) perr.push_back(poisson_errors(k));
    const double R_true = R0;
    auto acc = detail::run_chunked<CoverAcc>(spec, [&](RandomSource& rs, long count) {
        CoverAcc a;
        for (long i = 0; i < count; ++i) {
            const long k = rs.next_poisson(counts);
            const double x = x0 + sx * rs.next_gaussian();
            ++a.n;
            if (std::abs(x - x0) <= sx) ++a.gauss;
            const double Ax = A(x), R = Ax * k;
            if (R - tot1.sigma_minus <= R_true && R_true <= R + tot1.sigma_plus) ++a.fixed1;
            if (R - tot2.sigma_minus <= R_true && R_true <= R + tot2.sigma_plus) ++a.fixed2;
            if (k == 0) continue;
            const auto e = k < static_cast<long>(perr.size()) ? perr[k] : poisson_errors(k);
            const double p = Ax * e.sigma_plus, m = Ax * e.sigma_minus;
            const double up = k * (A(x + sx) - Ax), dn = k * (Ax - A(x - sx));
            const auto t1 = linear_sigma_pair(p, m, up, dn);
            const auto t2 = linear_sigma_pair(p, m, dn, up);
            if (R - t1.sigma_minus <= R_true && R_true <= R + t1.sigma_plus) ++a.cover1;
            if (R - t2.sigma_minus <= R_true && R_true <= R + t2.sigma_plus) ++a.cover2;
        }
        return a;
    });
    const double N = static_cast<double>(acc.n);
    Table c{"coverage", {"interval", "coverage"}, {}, {}};
    c.add("per-toy total, linear sigma", {acc.cover1 / N});
    c.add("per-toy total, syst interchanged", {acc.cover2 / N});
    c.add("fixed quoted total", {acc.fixed1 / N});
    c.add("fixed quoted total, interchanged", {acc.fixed2 / N});
    c.add("distance alone, +-1 sigma", {acc.gauss / N});
    c.add("ideal", {std::erf(1 / std::numbers::sqrt2)});
    out.tables.push_back(c);

    const double pg = std::erf(1 / std::numbers::sqrt2);
    out.check("gaussian_coverage", acc.gauss / N, Relation::Near, pg, 4 * std::sqrt(pg * (1 - pg) / N));
    if (paper) {
        out.check("coverage_linear_sigma", acc.cover1 / N, Relation::Near, 0.6786, 0.0015);
        out.check("coverage_interchanged", acc.cover2 / N, Relation::Near, 0.6799, 0.0015);
        out.check("interchange_gain", (acc.cover2 - acc.cover1) / N, Relation::Above, 0);
    }
    return out;
}

} // namespace asymerr
