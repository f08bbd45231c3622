#include "asymerr/combine.hpp"
#include "asymerr/errors.hpp"
#include "asymerr/experiments.hpp"
#include "experiments_impl.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace asymerr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// exponential decay times: ln L(tau) = -sum t / tau - n ln tau
LnLTriple lifetime_triple(const std::vector<double>& t) {
    const double n = static_cast<double>(t.size());
    const double sum = std::accumulate(t.begin(), t.end(), 0.0);
    auto f = [n, sum](double tau) { return -sum / tau - n * std::log(tau); };
    const double tau = sum / n;
    const auto d = solve_delta_half(f, tau, 0.25 * tau / std::sqrt(n), 0.0, kInf);
    return {tau, d.sigma_plus, d.sigma_minus};
}

void check_triple(ExperimentOutcome& out, const std::string& key, const LnLTriple& t,
                  double a, double sp, double sm, double tol) {
    out.check(key + "_value", t.a_hat, Relation::Near, a, tol);
    out.check(key + "_sigma_plus", t.sigma_plus, Relation::Near, sp, tol);
    out.check(key + "_sigma_minus", t.sigma_minus, Relation::Near, sm, tol);
}

} // namespace

ExperimentOutcome run_lifetime_case(const ExperimentSpec& spec) {
    auto out = detail::start(spec, "lifetime");
    const std::vector<double> first{1.241, 0.592, 0.988}, second{0.834, 2.964, 0.176};
    std::vector<double> all = first;
    all.insert(all.end(), second.begin(), second.end());
    const auto t1 = lifetime_triple(first), t2 = lifetime_triple(second), t6 = lifetime_triple(all);

    Table in{"exact likelihood", {"data", "tau", "sigma+", "sigma-"}, {}, {}};
    in.add("first three", {t1.a_hat, t1.sigma_plus, t1.sigma_minus});
    in.add("next three", {t2.a_hat, t2.sigma_plus, t2.sigma_minus});
    in.add("all six", {t6.a_hat, t6.sigma_plus, t6.sigma_minus});
    out.tables.push_back(in);
    check_triple(out, "first_three", t1, 0.940, 0.841, 0.385, 1e-3);
    check_triple(out, "next_three", t2, 1.325, 1.184, 0.542, 1e-3);
    check_triple(out, "all_six", t6, 1.1325, 0.6225, 0.3598, 1e-3);

    Table c{"combination of the two results", {"model", "tau", "sigma+", "sigma-"}, {}, {}};
    c.add("exact (all six)", {t6.a_hat, t6.sigma_plus, t6.sigma_minus});
    for (auto f : all_lnl_families()) {
        const auto name = lnl_family_name(f);
        try {
            const auto r = combine_lnl_results(std::vector<LnLModel>{lnl_from_triple(f, t1), lnl_from_triple(f, t2)});
            c.add(name, {r.result.a_hat, r.result.sigma_plus, r.result.sigma_minus});
            if (f == LnLFamily::LinearSigma) check_triple(out, "linear_sigma", r.result, 1.1323, 0.6213, 0.3604, 1e-3);
            if (f == LnLFamily::LinearVariance)
                check_triple(out, "linear_variance", r.result, 1.1318, 0.6249, 0.3577, 1e-3);
        } catch (const Error&) {
            c.add(name, {kNaN, kNaN, kNaN});
        }
    }
    // mean of the two, each side in quadrature: the wrong way
    c.add("wrong", {0.5 * (t1.a_hat + t2.a_hat), 0.5 * std::hypot(t1.sigma_plus, t2.sigma_plus),
                    0.5 * std::hypot(t1.sigma_minus, t2.sigma_minus)});
    out.tables.push_back(c);
    return out;
}

ExperimentOutcome run_lhcb_systematics(const ExperimentSpec& spec) {
    auto out = detail::start(spec, "lhcb");
    struct Row {
        const char* source;
        double sp, sm;
    };
    const std::vector<Row> rows = {{"fix res", 0.059, 0.029},  {"amp model", 0.001, 0.008},
                                   {"res", 0.008, 0.015},      {"finite acc", 0.003, 0.003},
                                   {"acc model", 0.001, 0.001}, {"kin", 0.001, 0.001},
                                   {"sWt pg", 0.006, 0.0},      {"massfit comb", 0.004, 0.0}};
    Table in{"sources", {"source", "sigma+", "sigma-"}, {}, {}};
    for (const auto& r : rows) in.add(r.source, {r.sp, r.sm});
    out.tables.push_back(in);

    // transform families take a zero side as it stands; the others get it
    // clamped to 1e-6 of the other side
    auto build = [](PdfFamily f, double sp, double sm) {
        switch (f) {
        case PdfFamily::Dimidiated:
        case PdfFamily::Distorted:
        case PdfFamily::Railway:
        case PdfFamily::DoubleCubic:
        case PdfFamily::SymmetricBeta: return pdf_from_anchors(f, 0, sp, sm);
        default:
            return pdf_from_quantiles(f, {0, sp > 0 ? sp : 1e-6 * sm, sm > 0 ? sm : 1e-6 * sp});
        }
    };
    auto total = [&](PdfFamily f, std::size_t nrows) {
        std::vector<PdfTerm> terms;
        for (std::size_t i = 0; i < nrows; ++i) terms.push_back({build(f, rows[i].sp, rows[i].sm), 1.0});
        return combine_pdf_errors(terms, f);
    };

    Table t{"total", {"model", "sigma+", "sigma-", "shift"}, {}, {}};
    for (auto f : all_pdf_families()) {
        try {
            const auto c = total(f, rows.size());
            t.add(pdf_family_name(f), {c.result.sigma_plus, c.result.sigma_minus, c.median_shift});
            if (f == PdfFamily::Dimidiated) {
                out.check("dimidiated_sigma_plus", c.result.sigma_plus, Relation::Near, 0.05965, 5e-5);
                out.check("dimidiated_sigma_minus", c.result.sigma_minus, Relation::Near, 0.03294, 5e-5);
                const auto only = total(f, 1);
                out.check("dominance_sigma_plus", std::abs(only.result.sigma_plus / c.result.sigma_plus - 1),
                          Relation::Below, 0.15);
                out.check("dominance_sigma_minus", std::abs(only.result.sigma_minus / c.result.sigma_minus - 1),
                          Relation::Below, 0.15);
            }
            if (f == PdfFamily::Distorted) {
                out.check("distorted_sigma_plus", c.result.sigma_plus, Relation::Near, 0.06098, 5e-5);
                out.check("distorted_sigma_minus", c.result.sigma_minus, Relation::Near, 0.03485, 5e-5);
            }
        } catch (const Error&) {
            t.add(pdf_family_name(f), {kNaN, kNaN, kNaN});
        }
    }
    std::vector<PdfTerm> terms;
    for (const auto& r : rows) terms.push_back({pdf_from_anchors(PdfFamily::Dimidiated, 0, r.sp, r.sm), 1.0});
    const auto naive = naive_quadrature_combination(terms);
    t.add("quadrature (not recommended)", {naive.sigma_plus, naive.sigma_minus, kNaN});
    out.tables.push_back(t);
    return out;
}

ExperimentOutcome run_model_interchange_study(const ExperimentSpec& spec) {
    auto out = detail::start(spec, "interchange");
    const double sp = detail::param(spec, "sigma_plus"), sm = detail::param(spec, "sigma_minus");
    if (!(sp > 0 && sm > 0)) fail(ErrorCode::InvalidArgument, "interchange", "errors must be positive");

    struct Sums {
        double p = 0, m = 0;
        int n = 0;
        double worst_sym = 0;
    };
    // both terms share a model; the symmetric pair must give sqrt(2) sigma
    auto run = [&](Table& t, Sums& s, const std::string& name, auto combine) {
        try {
            const auto r = combine(sp, sm);
            t.add(name, {r.sigma_plus, r.sigma_minus});
            s.p += r.sigma_plus;
            s.m += r.sigma_minus;
            ++s.n;
        } catch (const Error&) {
            t.add(name, {kNaN, kNaN});
        }
        try {
            const auto r = combine(1.0, 1.0);
            s.worst_sym = std::max({s.worst_sym, std::abs(r.sigma_plus - std::sqrt(2.0)),
                                    std::abs(r.sigma_minus - std::sqrt(2.0))});
        } catch (const Error&) {
        }
    };

    Table tp{"pdf models", {"model", "sigma+", "sigma-"}, {}, {}};
    Table tl{"likelihood models", {"model", "sigma+", "sigma-"}, {}, {}};
    Sums pdf, lnl;
    for (auto f : all_pdf_families())
        run(tp, pdf, pdf_family_name(f), [f](double a, double b) {
            const auto m = pdf_from_quantiles(f, {0, a, b});
            return combine_pdf_errors({{m, 1.0}, {m, 1.0}}, f).result;
        });
    for (auto f : all_lnl_families())
        run(tl, lnl, lnl_family_name(f), [f](double a, double b) {
            const auto m = lnl_from_triple(f, {0, a, b});
            return combine_lnl_errors({m, m}, {1.0, 1.0}).result;
        });
    Table s{"cluster means", {"kind", "sigma+", "sigma-", "models"}, {}, {}};
    s.add("pdf", {pdf.p / pdf.n, pdf.m / pdf.n, double(pdf.n)});
    s.add("likelihood", {lnl.p / lnl.n, lnl.m / lnl.n, double(lnl.n)});
    out.tables = {tp, tl, s};

    out.check("pdf_minus_lnl_sigma_plus", pdf.p / pdf.n - lnl.p / lnl.n, Relation::Above, 0);
    out.check("pdf_minus_lnl_sigma_minus", pdf.m / pdf.n - lnl.m / lnl.n, Relation::Above, 0);
    out.check("symmetric_pair_deviation", std::max(pdf.worst_sym, lnl.worst_sym), Relation::Near, 0, 1e-6);
    return out;
}

} // namespace asymerr
