// One line per acceptance criterion; exit status 1 if any fails.
#include "asymerr/combine.hpp"
#include "asymerr/errors.hpp"
#include "asymerr/experiments.hpp"
#include "asymerr/numeric.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace asymerr;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void need(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

bool near(double x, double target, double tol)
{
    return std::abs(x - target) <= tol;
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string triple(double a, double sp, double sm)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.5g +%.5g -%.5g", a, sp, sm);
    return buf;
}

void need_checks(Verdict& v, const ExperimentOutcome& o, const std::function<bool(const std::string&)>& pick)
{
    int n = 0;
    for (const auto& c : o.checks) {
        if (!pick(c.name)) continue;
        ++n;
        v.need(c.pass, c.name + " = " + std::to_string(c.value));
    }
    v.need(n > 0, "no checks selected");
}

double poisson_lnl(double n, double a)
{
    return n * std::log(a / n) - (a - n);
}

LnLCurve poisson_curve(double n)
{
    return {[n](double a) { return poisson_lnl(n, a); }, [n](double a) { return n / a - 1; }, n, 0.0, kInf,
            std::sqrt(n)};
}

LnLModel poisson_model(double n, LnLFamily f)
{
    const auto d = solve_delta_half([n](double a) { return poisson_lnl(n, a); }, n, 0.25, 0.0, kInf);
    return lnl_from_triple(f, {n, d.sigma_plus, d.sigma_minus});
}

PdfModel q(PdfFamily f, double M, double sp, double sm)
{
    return pdf_from_quantiles(f, {M, sp, sm});
}

// ---- criteria ----------------------------------------------------------------

void poisson_anchor(Verdict& v)
{
    auto f = [](double a) { return poisson_lnl(5, a); };
    auto d = solve_delta_half(f, 5.0, 1.0, 0.0, kInf);
    const int reps = 200;
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) d = solve_delta_half(f, 5.0, 1.0, 0.0, kInf);
    const double ms = 1e3 * seconds_since(t0) / reps;
    v.detail << "+" << d.sigma_plus << " -" << d.sigma_minus << ", " << ms << " ms per call";
    v.need(near(d.sigma_plus, 2.5811, 1e-3) && near(d.sigma_minus, 1.9159, 1e-3), "errors");
    v.need(ms < 1, "runtime");
}

void background_sum(Verdict& v)
{
    const auto lv = combine_lnl_errors({lnl_from_triple(LnLFamily::LinearVariance, {4, 2.346, 1.682}),
                                        lnl_from_triple(LnLFamily::LinearVariance, {5, 2.581, 1.916})},
                                       {1, 1});
    const auto exact = combine_lnl_errors(std::vector<LnLTerm>{{poisson_curve(4), 1}, {poisson_curve(5), 1}});
    const auto p3 = poisson_model(3, LnLFamily::LinearVariance);
    const auto s3 = combine_lnl_errors({p3, p3, p3}, {1, 1, 1});
    const auto s1 = combine_lnl_errors(std::vector<LnLModel>(9, poisson_model(1, LnLFamily::LinearVariance)),
                                       std::vector<double>(9, 1.0));
    v.detail << "4+5 " << triple(lv.result.a_hat, lv.result.sigma_plus, lv.result.sigma_minus) << ", exact "
             << triple(exact.result.a_hat, exact.result.sigma_plus, exact.result.sigma_minus) << ", 3+3+3 "
             << triple(s3.result.a_hat, s3.result.sigma_plus, s3.result.sigma_minus) << ", nine 1s "
             << triple(s1.result.a_hat, s1.result.sigma_plus, s1.result.sigma_minus);
    v.need(near(lv.result.sigma_plus, 3.333, 2e-3) && near(lv.result.sigma_minus, 2.668, 2e-3), "4+5");
    v.need(near(exact.result.sigma_plus, 3.342, 1e-3) && near(exact.result.sigma_minus, 2.676, 1e-3), "exact");
    v.need(near(s3.result.sigma_plus, 3.323, 2e-3) && near(s3.result.sigma_minus, 2.659, 2e-3), "3+3+3");
    v.need(near(s1.result.sigma_plus, 3.269, 2e-3) && near(s1.result.sigma_minus, 2.610, 2e-3), "nine 1s");
}

void lifetime(Verdict& v)
{
    const auto o = run_experiment(default_spec("lifetime"));
    need_checks(v, o, [](const std::string&) { return true; });
    v.detail << o.checks.size() << " values checked";
}

void three_results(Verdict& v)
{
    struct Row {
        LnLFamily f;
        double a, sp, sm;
    };
    const Row rows[] = {{LnLFamily::LinearVariance, 2.754, 0.286, 0.263},
                        {LnLFamily::LinearSigma, 2.758, 0.293, 0.272},
                        {LnLFamily::BrokenParabola, 2.703, 0.301, 0.301},
                        {LnLFamily::Logarithmic, 2.755, 0.288, 0.266},
                        {LnLFamily::GeneralizedPoisson, 2.753, 0.283, 0.258},
                        {LnLFamily::PDG, 2.726, 0.273, 0.309}};
    const LnLTriple in[] = {{1.9, 0.7, 0.5}, {2.4, 0.6, 0.8}, {3.1, 0.5, 0.4}};
    for (const auto& r : rows) {
        std::vector<LnLModel> ms;
        for (const auto& t : in) ms.push_back(lnl_from_triple(r.f, t));
        const auto c = combine_lnl_results(ms).result;
        const auto name = lnl_family_name(r.f);
        v.detail << name << " " << triple(c.a_hat, c.sigma_plus, c.sigma_minus) << "; ";
        v.need(near(c.a_hat, r.a, 2e-3) && near(c.sigma_plus, r.sp, 2e-3) && near(c.sigma_minus, r.sm, 2e-3), name);
    }
}

void pdf_errors(Verdict& v)
{
    struct Row {
        PdfFamily f;
        double sm, sp, delta;
    };
    const Row rows[] = {{PdfFamily::Dimidiated, 1.32, 1.52, 0.080},
                        {PdfFamily::Distorted, 1.33, 1.54, 0.098},
                        {PdfFamily::Fechner, 1.30, 1.52, 0.092}};
    for (const auto& r : rows) {
        const auto c = combine_pdf_errors({{q(r.f, 0, 1, 1)}, {q(r.f, 0, 1.2, 0.8)}}, r.f);
        const auto name = pdf_family_name(r.f);
        v.detail << name << " (" << c.result.sigma_minus << ", " << c.result.sigma_plus << ", " << c.median_shift
                 << "); ";
        v.need(near(c.result.sigma_minus, r.sm, 0.01) && near(c.result.sigma_plus, r.sp, 0.01) &&
                   near(c.median_shift, r.delta, 0.01),
               name);
    }
    const auto d = q(PdfFamily::Dimidiated, 0, 1.5, 0.5);
    const auto c = combine_pdf_errors({{d}, {d}}, PdfFamily::Dimidiated);
    v.detail << "bottom (" << c.result.sigma_minus << ", " << c.result.sigma_plus << ", " << c.median_shift << ")";
    v.need(near(c.result.sigma_minus, 0.97, 0.01) && near(c.result.sigma_plus, 1.93, 0.01) &&
               near(c.median_shift, 0.413, 0.01),
           "bottom block");
    for (auto f : {PdfFamily::Fechner, PdfFamily::Edgeworth}) {
        bool refused = false;
        try {
            q(f, 0, 1.5, 0.5);
        } catch (const Error&) {
            refused = true;
        }
        v.need(refused, pdf_family_name(f) + " accepted (+1.5, -0.5)");
    }
}

// direct sum on a 2^-12 lattice, jumps at the medians on cell edges
double grid_convolution(const PdfModel& a, const PdfModel& b, double z)
{
    const double h = std::ldexp(1.0, -12);
    double s = 0;
    for (int k = -12 * 4096; k < 12 * 4096; ++k) {
        const double x = (k + 0.5) * h;
        s += a.density(x) * b.density(z - x);
    }
    return s * h;
}

void dimidiated_convolution(Verdict& v)
{
    const auto a = q(PdfFamily::Dimidiated, 0, 1.5, 0.5);
    const auto b = q(PdfFamily::Dimidiated, 0, 0.7, 1.2);
    double worst = 0;
    for (const auto& [m1, m2] : std::vector<std::pair<PdfModel, PdfModel>>{{a, a}, {a, b}}) {
        const auto ex = convolve_dimidiated_exact(m1, m2);
        for (double z = -4; z <= 6; z += 0.25)
            worst = std::max(worst, std::abs(ex.density(z) - grid_convolution(m1, m2, z)));
    }
    const auto fit = pdf_from_moments(PdfFamily::Dimidiated, convolve_dimidiated_exact(a, a).moments()).quantiles();
    v.detail << "max density difference " << worst << ", refit (" << fit.sigma_plus << ", " << fit.sigma_minus << ")";
    v.need(worst < 1e-6, "pointwise");
    v.need(near(fit.sigma_plus, 1.93, 0.01) && near(fit.sigma_minus, 0.97, 0.01), "refit");
}

void x_squared(Verdict& v)
{
    const auto o = run_experiment(default_spec("pdf-result-mc"));
    need_checks(v, o, [](const std::string& n) { return n.rfind("combined", 0) == 0; });
    for (const char* k : {"combined1_dimidiated_M", "combined1_distorted_M", "combined2_dimidiated_M"})
        v.detail << k << " " << o.summaries.at(k) << "; ";
}

void lhcb(Verdict& v)
{
    const auto o = run_experiment(default_spec("lhcb"));
    need_checks(v, o, [](const std::string& n) {
        return n.rfind("dimidiated_", 0) == 0 || n.rfind("distorted_", 0) == 0;
    });
    v.detail << "dimidiated (" << o.summaries.at("dimidiated_sigma_plus") << ", "
             << o.summaries.at("dimidiated_sigma_minus") << "), distorted (" << o.summaries.at("distorted_sigma_plus")
             << ", " << o.summaries.at("distorted_sigma_minus") << ")";
}

void product(Verdict& v)
{
    // N = L F sigma, L = 1000; the combination linearizes about the quoted values
    const double L = 1000, F = 12.3, sigma = 0.12;
    v.detail << "N " << L * F * sigma << "; ";
    struct Row {
        LnLFamily f;
        double sp, sm;
    };
    for (const auto& r : {Row{LnLFamily::LinearSigma, 136, 250}, Row{LnLFamily::LinearVariance, 137, 251}}) {
        const auto n = combine_lnl_errors({lnl_from_triple(r.f, {F, 0.4, 0.5}), lnl_from_triple(r.f, {sigma, 0.01, 0.02})},
                                          {L * sigma, L * F})
                           .result;
        v.detail << lnl_family_name(r.f) << " +" << n.sigma_plus << " -" << n.sigma_minus << "; ";
        v.need(near(n.sigma_plus, r.sp, 1) && near(n.sigma_minus, r.sm, 1), lnl_family_name(r.f));
    }
    v.need(near(L * F * sigma, 1476, 1), "central value");
}

void coverage(Verdict& v)
{
    const auto t0 = Clock::now();
    const auto o = run_experiment(default_spec("coverage", Tier::Full));
    const double s = seconds_since(t0);
    need_checks(v, o, [](const std::string& n) {
        return n == "coverage_linear_sigma" || n == "coverage_interchanged" || n.rfind("A", 0) == 0;
    });
    v.detail << o.spec.replicas << " replicas, coverage " << 100 * o.summaries.at("coverage_linear_sigma") << "% and "
             << 100 * o.summaries.at("coverage_interchanged") << "%, A " << o.summaries.at("A") << " +"
             << o.summaries.at("A_sigma_plus") << " -" << o.summaries.at("A_sigma_minus") << ", " << s << " s";
    v.need(s < 60, "runtime");
}

// ---- properties ----

double asym_limit(PdfFamily f)
{
    switch (f) {
    case PdfFamily::Distorted: return 0.09;
    case PdfFamily::Railway: return 0.45;
    case PdfFamily::Fechner:
    case PdfFamily::SkewNormal: return 0.2;
    case PdfFamily::JohnsonSU: return 0.18;
    case PdfFamily::Edgeworth: return 0.38;
    case PdfFamily::QVW: return 0.5;
    case PdfFamily::DoubleCubic:
    case PdfFamily::SymmetricBeta: return 0.6;
    default: return 0.9;
    }
}

double ratio_limit(LnLFamily f)
{
    const double b = lnl_max_ratio(f);
    return std::isfinite(b) ? 1 + 0.95 * (b - 1) : 5.0;
}

LnLTriple random_triple(RandomSource& rs, LnLFamily f)
{
    const double a = -5 + 10 * rs.next_uniform();
    const double s = std::exp(std::log(0.1) + std::log(30.0) * rs.next_uniform());
    double r = std::exp(std::log(ratio_limit(f)) * rs.next_uniform());
    if (f == LnLFamily::Logarithmic) r = std::max(r, 1.0 + 1e-6);
    return rs.next_uniform() < 0.5 ? LnLTriple{a, s * r, s} : LnLTriple{a, s, s * r};
}

int quantile_round_trips(RandomSource& rs)
{
    int bad = 0;
    for (auto f : all_pdf_families())
        for (int i = 0; i < 40; ++i) {
            const double A = asym_limit(f) * (2 * rs.next_uniform() - 1);
            const double w = 0.1 + 3 * rs.next_uniform();
            const QuantileTriple t{10 * rs.next_gaussian(), w * (1 + A), w * (1 - A)};
            const auto back = pdf_from_quantiles(f, t).quantiles();
            const double tol = 2e-6 * w;
            if (!near(back.M, t.M, tol) || !near(back.sigma_plus, t.sigma_plus, tol) ||
                !near(back.sigma_minus, t.sigma_minus, tol))
                ++bad;
        }
    return bad;
}

int moment_round_trips(RandomSource& rs)
{
    int bad = 0;
    for (auto f : all_pdf_families())
        for (int i = 0; i < 20; ++i) {
            const double lim = f == PdfFamily::LogNormal ? 4.0 : 0.95 * max_skewness(f);
            const double s = lim * (2 * rs.next_uniform() - 1);
            const double V = std::pow(0.1 + 3 * rs.next_uniform(), 2);
            const MomentTriple m{5 * rs.next_gaussian(), V, s * std::pow(V, 1.5)};
            const auto r = pdf_from_moments(f, m).moments();
            if (!near(r.mu, m.mu, 1e-6 * std::sqrt(V)) || !near(r.V, m.V, 1e-6 * V) ||
                !near(r.gamma, m.gamma, 1e-6 * std::pow(V, 1.5)))
                ++bad;
        }
    return bad;
}

int lnl_anchoring(RandomSource& rs)
{
    int bad = 0;
    for (auto f : all_lnl_families())
        for (int i = 0; i < 100; ++i) {
            const auto t = random_triple(rs, f);
            const auto m = lnl_from_triple(f, t);
            double a = t.a_hat, up = t.sigma_plus, dn = t.sigma_minus;
            if (f == LnLFamily::SymmetrizedParabola) {
                // anchored at the Fechner mean with the symmetric width
                const double d = t.sigma_plus - t.sigma_minus;
                a = m.peak();
                up = dn = std::sqrt((1 - 2 / std::numbers::pi) * d * d + t.sigma_plus * t.sigma_minus);
            }
            if (std::abs(m(a)) > 1e-9 || std::abs(m(a + up) + 0.5) > 1e-9 || std::abs(m(a - dn) + 0.5) > 1e-9) ++bad;
        }
    return bad;
}

int unimodality(RandomSource& rs)
{
    int bad = 0;
    for (auto f : all_lnl_families())
        for (int i = 0; i < 10; ++i) {
            const auto t = i == 0 ? LnLTriple{0, ratio_limit(f), 1} : random_triple(rs, f);
            const auto m = lnl_from_triple(f, t);
            auto [lo, hi] = m.domain();
            const double w = 5 * (t.sigma_plus + t.sigma_minus);
            lo = std::max(t.a_hat - 5 * t.sigma_minus, lo + 1e-9 * w);
            hi = std::min(t.a_hat + 5 * t.sigma_plus, hi - 1e-9 * w);
            int changes = 0, last = 0;
            double prev = m(lo);
            for (int k = 1; k < 10000; ++k) {
                const double y = m(lo + (hi - lo) * k / 9999);
                const int s = y > prev ? 1 : (y < prev ? -1 : 0);
                if (s != 0 && last != 0 && s != last) ++changes;
                if (s != 0) last = s;
                prev = y;
            }
            if (changes != 1) ++bad;
        }
    return bad;
}

double skewness_decay()
{
    const auto d = q(PdfFamily::Dimidiated, 0, 1.5, 0.5);
    const double s1 = d.moments().skewness();
    double worst = 0;
    for (int n : {4, 16, 64}) {
        const auto c = combine_pdf_errors(std::vector<PdfTerm>(n, {d}), PdfFamily::Dimidiated);
        worst = std::max(worst, std::abs(c.model->moments().skewness() * std::sqrt(double(n)) / s1 - 1));
    }
    return worst;
}

double parabola_limit()
{
    const double s = 1.7, a = 2.0;
    double worst = 0;
    for (auto f : all_lnl_families()) {
        if (f == LnLFamily::Logarithmic) continue;
        const auto m = lnl_from_triple(f, {a, s, s});
        for (int k = 0; k <= 600; ++k) {
            const double x = a - 3 * s + 6 * s * k / 600;
            worst = std::max(worst, std::abs(m(x) + 0.5 * (x - a) * (x - a) / (s * s)));
        }
    }
    return worst;
}

void properties(Verdict& v)
{
    RandomSource rs(20240611);
    const auto t0 = Clock::now();
    const int qb = quantile_round_trips(rs), mb = moment_round_trips(rs), ab = lnl_anchoring(rs), ub = unimodality(rs);
    const double clt = skewness_decay(), par = parabola_limit();
    const double s = seconds_since(t0);
    v.need(qb == 0, std::to_string(qb) + " quantile round trips");
    v.need(mb == 0, std::to_string(mb) + " moment round trips");
    v.need(ab == 0, std::to_string(ab) + " lnL anchors");
    v.need(ub == 0, std::to_string(ub) + " unimodality grids");
    v.need(clt < 0.05, "skewness decay off by " + std::to_string(clt));
    v.need(par < 1e-6, "parabola limit off by " + std::to_string(par));
    v.need(s < 600, "runtime");

    auto w = default_spec("wilks");
    w.parameters["group_size"] = 2;
    w.parameters["poisson_mean"] = 5;
    const double p5 = run_experiment(w).summaries.at("uniformity_p");
    w.parameters["poisson_mean"] = 30;
    const double p30 = run_experiment(w).summaries.at("uniformity_p");
    v.need(p5 < 0.01 && p30 > 0.01, "Wilks transition");
    v.detail << "skewness decay within " << clt << ", parabola limit within " << par << ", Wilks uniformity p "
             << p5 << " (mean 5) and " << p30 << " (mean 30, group 2), properties " << s << " s";
}

} // namespace

int main()
{
    struct Entry {
        int id;
        const char* title;
        void (*run)(Verdict&);
    };
    const Entry entries[] = {{1, "Poisson anchor", poisson_anchor},
                             {2, "background sum", background_sum},
                             {3, "lifetime", lifetime},
                             {4, "three-result combination", three_results},
                             {5, "pdf error combination", pdf_errors},
                             {6, "dimidiated convolution", dimidiated_convolution},
                             {7, "x squared result combination", x_squared},
                             {8, "LHCb systematics", lhcb},
                             {9, "product example", product},
                             {10, "coverage study", coverage},
                             {11, "property suites", properties}};
    int failed = 0;
    for (const auto& e : entries) {
        Verdict v;
        v.detail.precision(6);
        try {
            e.run(v);
        } catch (const std::exception& ex) {
            v.pass = false;
            v.detail << " [threw: " << ex.what() << "]";
        }
        if (!v.pass) ++failed;
        std::printf("criterion %2d %s  %s: %s\n", e.id, v.pass ? "PASS" : "FAIL", e.title, v.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of 11 criteria passed\n", 11 - failed);
    return failed ? 1 : 0;
}
