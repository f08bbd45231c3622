#include "records.hpp"

#include "asymerr/combine.hpp"
#include "asymerr/errors.hpp"
#include "asymerr/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

using namespace asymerr;
using namespace asymerr::cli;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kModel = 2, kNonConvergent = 3, kChecksFailed = 4 };

int digits = 6;
std::string out_path;

std::string num(double v) {
    if (std::isnan(v)) return "--";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

int exit_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidArgument: return kUsage;
    case ErrorCode::NonConvergent:
    case ErrorCode::NoSignChange:
    case ErrorCode::DomainExhausted: return kNonConvergent;
    default: return kModel;
    }
}

int report_error(const std::string& code, int status, const std::string& sentence) {
    std::cerr << "error: code=" << code << " exit=" << status << "\n" << sentence << "\n";
    return status;
}

void write_json(const json& j) {
    if (out_path.empty()) return;
    std::ofstream f(out_path);
    if (!f) throw ParseError(0, "cannot write '" + out_path + "'");
    f << j.dump(2) << "\n";
}

json triple_json(double v, double sp, double sm) { return {{"value", v}, {"sigma_plus", sp}, {"sigma_minus", sm}}; }

std::string triple_text(double v, double sp, double sm) { return num(v) + " +" + num(sp) + " -" + num(sm); }

// record tokens from the command line: [kind] family value +sp -sm [k=v ...]
// one quoted record or separate words; a leading label as in files is allowed
std::vector<std::string> split_words(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (const auto& a : args) {
        std::istringstream ss(a);
        for (std::string t; ss >> t;) out.push_back(t);
    }
    if (out.size() > 1 && out[0] != "pdf" && out[0] != "lnl" && (out[1] == "pdf" || out[1] == "lnl"))
        out.erase(out.begin());
    return out;
}

MeasurementRecord record_from_args(std::vector<std::string> toks, const std::string& kind) {
    toks = split_words(toks);
    std::string k = kind;
    if (!toks.empty() && (toks[0] == "pdf" || toks[0] == "lnl")) {
        k = toks[0];
        toks.erase(toks.begin());
    }
    std::string line = "input " + k;
    for (const auto& t : toks) line += " " + t;
    return parse_record_line(line);
}

// ---- convert -------------------------------------------------------------

int cmd_convert(const std::vector<std::string>& toks, const std::string& kind, bool from_moments,
                const std::string& target) {
    json j;
    std::ostringstream os;
    const auto words = split_words(toks);
    if (kind == "lnl" || (!words.empty() && words[0] == "lnl")) {
        const auto r = record_from_args(toks, "lnl");
        const auto m = to_lnl(r);
        const auto d = solve_delta_half(m);
        const auto [lo, hi] = m.domain();
        os << "family " << m.family_name() << "\n";
        os << "triple " << triple_text(r.value, r.sigma_plus, r.sigma_minus) << "\n";
        os << "params";
        json params;
        const auto pv = m.params();
        const auto pn = m.param_names();
        for (std::size_t i = 0; i < pv.size(); ++i) {
            os << " " << pn[i] << "=" << num(pv[i]);
            params[pn[i]] = pv[i];
        }
        os << "\ndomain " << num(lo) << " " << num(hi) << "\n";
        os << "peak " << num(m.peak()) << "\n";
        os << "delta-half " << num(d.sigma_plus) << " " << num(d.sigma_minus) << "\n";
        os << "residuals " << num(d.sigma_plus - r.sigma_plus) << " " << num(d.sigma_minus - r.sigma_minus) << "\n";
        j = {{"family", m.family_name()}, {"triple", triple_json(r.value, r.sigma_plus, r.sigma_minus)},
             {"params", params}, {"domain", {lo, hi}}, {"peak", m.peak()},
             {"delta_half", {{"sigma_plus", d.sigma_plus}, {"sigma_minus", d.sigma_minus}}}};
        std::cout << os.str();
        write_json(j);
        return kOk;
    }

    std::optional<PdfModel> model;
    if (from_moments) {
        auto mt = words;
        if (!mt.empty() && mt[0] == "pdf") mt.erase(mt.begin());
        if (mt.size() != 4) throw ParseError(0, "expected: [pdf] family mu V gamma");
        const auto f = parse_pdf_family(mt[0]);
        if (!f) throw ParseError(0, "unknown pdf family '" + mt[0] + "'");
        double v[3];
        for (int i = 0; i < 3; ++i) {
            try {
                std::size_t used = 0;
                v[i] = std::stod(mt[i + 1], &used);
                if (used != mt[i + 1].size() || !std::isfinite(v[i])) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError(0, "'" + mt[i + 1] + "' is not a number");
            }
        }
        model = pdf_from_moments(*f, {v[0], v[1], v[2]});
    } else {
        model = to_pdf(record_from_args(toks, "pdf"));
    }
    const auto& q = model->quantiles();
    const auto& m = model->moments();
    // round trip through the other parameterization
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    QuantileTriple back_q{nan, nan, nan};
    MomentTriple back_m{nan, nan, nan};
    try {
        back_q = pdf_from_moments(model->family(), m).quantiles();
        back_m = pdf_from_quantiles(model->family(), q).moments();
    } catch (const Error&) {
        // flipped inputs have no quantile form
    }
    json params;
    const auto pv = model->params();
    const auto pn = model->param_names();
    for (std::size_t i = 0; i < pv.size(); ++i) params[pn[i]] = pv[i];

    const bool all = target == "all";
    os << "family " << model->family_name() << "\n";
    if (all || target == "quantiles") os << "quantiles M=" << num(q.M) << " sigma+=" << num(q.sigma_plus)
                                         << " sigma-=" << num(q.sigma_minus) << "\n";
    if (all || target == "moments") os << "moments mu=" << num(m.mu) << " V=" << num(m.V) << " gamma="
                                       << num(m.gamma) << " skewness=" << num(m.skewness()) << "\n";
    if (all || target == "params") {
        os << "params";
        for (std::size_t i = 0; i < pv.size(); ++i) os << " " << pn[i] << "=" << num(pv[i]);
        os << "\n";
    }
    os << "round-trip quantiles " << num(back_q.M - q.M) << " " << num(back_q.sigma_plus - q.sigma_plus) << " "
       << num(back_q.sigma_minus - q.sigma_minus) << "\n";
    os << "round-trip moments " << num(back_m.mu - m.mu) << " " << num(back_m.V - m.V) << " "
       << num(back_m.gamma - m.gamma) << "\n";
    if (!model->warning().empty()) std::cerr << "warning: " << model->warning() << "\n";
    std::cout << os.str();
    j = {{"family", model->family_name()},
         {"quantiles", {{"M", q.M}, {"sigma_plus", q.sigma_plus}, {"sigma_minus", q.sigma_minus}}},
         {"moments", {{"mu", m.mu}, {"V", m.V}, {"gamma", m.gamma}}},
         {"params", params},
         {"round_trip",
          {{"quantiles", {back_q.M - q.M, back_q.sigma_plus - q.sigma_plus, back_q.sigma_minus - q.sigma_minus}},
           {"moments", {back_m.mu - m.mu, back_m.V - m.V, back_m.gamma - m.gamma}}}}};
    write_json(j);
    return kOk;
}

// ---- combine -------------------------------------------------------------

int cmd_combine(const std::string& file, const std::string& mode, const std::string& family_out,
                bool also_naive, bool allow_mixed, const std::string& format) {
    std::ifstream in(file);
    if (!in) throw ParseError(0, "cannot read '" + file + "'");
    const auto recs = parse_records(in, format);
    if (recs.empty()) throw ParseError(0, "no records in '" + file + "'");
    const bool pdf_mode = mode == "pdf-errors" || mode == "pdf-results";
    for (const auto& r : recs)
        if ((r.kind == "pdf") != pdf_mode)
            throw ParseError(r.line, "mode " + mode + " needs " + (pdf_mode ? "pdf" : "lnl") + " records, '" +
                                         r.label + "' is " + r.kind);

    json j = {{"mode", mode}, {"inputs", json::array()}};
    for (const auto& r : recs)
        j["inputs"].push_back({{"label", r.label}, {"family", r.family}, {"coefficient", r.coefficient},
                               {"triple", triple_json(r.value, r.sigma_plus, r.sigma_minus)}});
    std::ostringstream os;
    os << "mode " << mode << "  inputs " << recs.size() << "\n";

    if (recs.size() == 1 && recs[0].coefficient == 1) {
        const auto& r = recs[0];
        os << "result " << triple_text(r.value, r.sigma_plus, r.sigma_minus) << "  (single input)\n";
        j["result"] = triple_json(r.value, r.sigma_plus, r.sigma_minus);
        std::cout << os.str();
        write_json(j);
        return kOk;
    }

    if (pdf_mode) {
        std::vector<PdfModel> models;
        for (const auto& r : recs) models.push_back(to_pdf(r));
        std::optional<PdfFamily> fo;
        if (!family_out.empty()) {
            fo = parse_pdf_family(family_out);
            if (!fo) throw ParseError(0, "unknown pdf family '" + family_out + "'");
        }
        PdfCombination c;
        if (mode == "pdf-errors") {
            std::vector<PdfTerm> terms;
            for (std::size_t i = 0; i < recs.size(); ++i) terms.push_back({models[i], recs[i].coefficient});
            c = combine_pdf_errors(terms, fo.value_or(models[0].family()), shape_options(recs[0]));
        } else {
            c = combine_pdf_results(models, allow_mixed, fo, shape_options(recs[0]));
        }
        os << "family " << c.model->family_name() << "\n";
        os << "result " << triple_text(c.result.M, c.result.sigma_plus, c.result.sigma_minus) << "\n";
        os << "moments mu=" << num(c.moments.mu) << " V=" << num(c.moments.V) << " gamma=" << num(c.moments.gamma)
           << "\n";
        os << "shift " << num(c.median_shift) << "\n";
        j["family"] = c.model->family_name();
        j["result"] = triple_json(c.result.M, c.result.sigma_plus, c.result.sigma_minus);
        j["moments"] = {{"mu", c.moments.mu}, {"V", c.moments.V}, {"gamma", c.moments.gamma}};
        j["shift"] = c.median_shift;
        if (!c.weights.empty()) {
            os << "weights";
            for (double w : c.weights) os << " " << num(w);
            os << "\n";
            j["weights"] = c.weights;
            const auto g = set_compatibility(models, c.result.M);
            os << "chi2 " << num(g.chi2) << "  ndof " << g.ndof << "  p " << num(g.p_value) << "\n";
            j["gof"] = {{"chi2", g.chi2}, {"ndof", g.ndof}, {"p_value", g.p_value}};
        }
        if (also_naive && mode == "pdf-errors") {
            std::vector<PdfTerm> terms;
            for (std::size_t i = 0; i < recs.size(); ++i) terms.push_back({models[i], recs[i].coefficient});
            const auto n = naive_quadrature_combination(terms);
            os << "naive " << triple_text(n.M, n.sigma_plus, n.sigma_minus) << "  NOT RECOMMENDED\n";
            j["naive"] = triple_json(n.M, n.sigma_plus, n.sigma_minus);
        }
    } else {
        std::vector<LnLModel> models;
        std::vector<double> coeffs;
        for (const auto& r : recs) {
            models.push_back(to_lnl(r));
            coeffs.push_back(r.coefficient);
        }
        if (mode == "lnl-results") {
            for (const auto& r : recs)
                if (r.coefficient != 1) throw ParseError(r.line, "coeff has no meaning for lnl-results");
            const auto c = combine_lnl_results(models);
            os << "result " << triple_text(c.result.a_hat, c.result.sigma_plus, c.result.sigma_minus) << "\n";
            os << "weights";
            for (double w : c.weights) os << " " << num(w);
            os << "\nchi2 " << num(c.gof.chi2) << "  ndof " << c.gof.ndof << "  p " << num(c.gof.p_value) << "\n";
            os << "method " << (c.fast_path ? "weight iteration" : "direct maximum") << "\n";
            j["result"] = triple_json(c.result.a_hat, c.result.sigma_plus, c.result.sigma_minus);
            j["weights"] = c.weights;
            j["gof"] = {{"chi2", c.gof.chi2}, {"ndof", c.gof.ndof}, {"p_value", c.gof.p_value}};
        } else if (mode == "lnl-errors") {
            const auto c = combine_lnl_errors(models, coeffs);
            os << "result " << triple_text(c.result.a_hat, c.result.sigma_plus, c.result.sigma_minus) << "\n";
            j["result"] = triple_json(c.result.a_hat, c.result.sigma_plus, c.result.sigma_minus);
            if (also_naive) {
                double v = 0, p2 = 0, m2 = 0;
                for (const auto& r : recs) {
                    const double c0 = r.coefficient;
                    v += c0 * r.value;
                    const double up = c0 > 0 ? c0 * r.sigma_plus : -c0 * r.sigma_minus;
                    const double dn = c0 > 0 ? c0 * r.sigma_minus : -c0 * r.sigma_plus;
                    p2 += up * up;
                    m2 += dn * dn;
                }
                os << "naive " << triple_text(v, std::sqrt(p2), std::sqrt(m2)) << "  NOT RECOMMENDED\n";
                j["naive"] = triple_json(v, std::sqrt(p2), std::sqrt(m2));
            }
        } else {
            throw ParseError(0, "unknown mode '" + mode + "'");
        }
    }
    if (also_naive && (mode == "pdf-results" || mode == "lnl-results"))
        std::cerr << "warning: --also-naive applies to error combination only\n";
    std::cout << os.str();
    write_json(j);
    return kOk;
}

// ---- curve ---------------------------------------------------------------

int cmd_curve(const std::vector<std::string>& toks, const std::string& kind, double lo, double hi, int points) {
    if (points < 2) throw ParseError(0, "points must be at least 2");
    const auto r = record_from_args(toks, kind);
    // default range: four errors either side
    const double w = std::max(r.sigma_plus, r.sigma_minus);
    if (std::isnan(lo)) lo = r.value - 4 * (r.options.count("flipped") ? w : r.sigma_minus);
    if (std::isnan(hi)) hi = r.value + 4 * (r.options.count("flipped") ? w : r.sigma_plus);
    if (!(lo < hi)) throw ParseError(0, "need lo < hi");
    json meta = {{"kind", r.kind}, {"family", r.family}};
    std::function<double(double)> f;
    double dlo, dhi;
    std::optional<PdfModel> pm;
    std::optional<LnLModel> lm;
    json params;
    if (r.kind == "pdf") {
        pm = to_pdf(r);
        std::tie(dlo, dhi) = pm->support();
        f = [&](double x) { return pm->density(x); };
        const auto pv = pm->params();
        const auto pn = pm->param_names();
        for (std::size_t i = 0; i < pv.size(); ++i) params[pn[i]] = pv[i];
    } else {
        lm = to_lnl(r);
        std::tie(dlo, dhi) = lm->domain();
        f = [&](double a) { return (*lm)(a); };
        const auto pv = lm->params();
        const auto pn = lm->param_names();
        for (std::size_t i = 0; i < pv.size(); ++i) params[pn[i]] = pv[i];
        // open domain: keep the grid strictly inside
        const double in = 1e-9 * (hi - lo);
        if (std::isfinite(dlo)) dlo += in;
        if (std::isfinite(dhi)) dhi -= in;
    }
    meta["params"] = params;
    const double a = std::max(lo, dlo), b = std::min(hi, dhi);
    if (!(a < b))
        return report_error("EmptyDomain", kModel,
                            "range [" + num(lo) + ", " + num(hi) + "] misses the model domain (" + num(dlo) + ", " +
                                num(dhi) + ")");
    if (a != lo || b != hi) std::cerr << "warning: range clipped to [" << num(a) << ", " << num(b) << "]\n";
    std::vector<double> xs, ys;
    std::ostringstream os;
    os << "# " << r.kind << " " << r.family << " " << triple_text(r.value, r.sigma_plus, r.sigma_minus) << "\n";
    os << "# " << (r.kind == "pdf" ? "x density" : "a delta_lnL") << "\n";
    for (int i = 0; i < points; ++i) {
        const double x = i + 1 == points ? b : a + (b - a) * i / (points - 1);
        const double y = f(x);
        xs.push_back(x);
        ys.push_back(y);
        os << num(x) << " " << num(y) << "\n";
    }
    std::cout << os.str();
    write_json({{"abscissa", xs}, {"ordinate", ys}, {"meta", meta}});
    return kOk;
}

// ---- experiment ----------------------------------------------------------

json outcome_json(const ExperimentOutcome& o) {
    json j = {{"name", o.name}, {"seed", o.spec.seed}, {"replicas", o.spec.replicas},
              {"parameters", o.spec.parameters}, {"passed", o.passed()}};
    j["tables"] = json::array();
    for (const auto& t : o.tables) {
        json rows = json::array();
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            json vals = json::array();
            for (double v : t.rows[i]) vals.push_back(std::isnan(v) ? json(nullptr) : json(v));
            rows.push_back({{"label", t.labels[i]}, {"values", vals}});
        }
        j["tables"].push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
    }
    j["summaries"] = o.summaries;
    j["checks"] = json::array();
    for (const auto& c : o.checks) {
        const char* rel = c.relation == Relation::Near ? "near" : c.relation == Relation::Below ? "below" : "above";
        j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"relation", rel}, {"target", c.target},
                               {"tolerance", c.tolerance}, {"pass", c.pass}});
    }
    return j;
}

int cmd_experiment(const std::string& name, std::uint64_t seed, const std::string& tier, long replicas,
                   const std::vector<std::string>& params, std::optional<double> mean, std::optional<int> group,
                   unsigned threads) {
    if (!find_experiment(name)) {
        std::string names;
        for (const auto& e : experiment_registry()) names += " " + e.name;
        return report_error("UnknownExperiment", kUsage, "no experiment '" + name + "'; known:" + names);
    }
    auto spec = default_spec(name, tier == "full" ? Tier::Full : Tier::Fast, seed);
    if (replicas > 0) spec.replicas = replicas;
    spec.threads = threads;
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw ParseError(0, "expected key=value, got '" + p + "'");
        try {
            spec.parameters[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
        } catch (const std::exception&) {
            throw ParseError(0, "'" + p.substr(eq + 1) + "' is not a number");
        }
    }
    if (mean) spec.parameters["poisson_mean"] = *mean;
    if (group) spec.parameters["group_size"] = *group;
    const auto o = run_experiment(spec);
    std::cout << format_outcome(o, digits);
    write_json(outcome_json(o));
    return o.passed() ? kOk : kChecksFailed;
}

// ---- list-models ---------------------------------------------------------

int cmd_list() {
    std::cout << "pdf families (max |asymmetry|, max |skewness|)\n";
    json j;
    for (auto f : all_pdf_families()) {
        const double a = max_asymmetry(f), s = max_skewness(f);
        std::cout << "  " << pdf_family_name(f) << "  " << num(a) << "  " << num(s) << "\n";
        j["pdf"].push_back({{"name", pdf_family_name(f)}, {"max_asymmetry", a}, {"max_skewness", s}});
    }
    std::cout << "lnl families (max sigma ratio)\n";
    for (auto f : all_lnl_families()) {
        const double r = lnl_max_ratio(f);
        std::cout << "  " << lnl_family_name(f) << "  " << (std::isinf(r) ? std::string("any") : num(r)) << "\n";
        j["lnl"].push_back({{"name", lnl_family_name(f)}, {"max_ratio", std::isinf(r) ? json(nullptr) : json(r)}});
    }
    std::cout << "experiments\n";
    for (const auto& e : experiment_registry()) {
        std::cout << "  " << e.name << "  " << e.summary << "\n";
        j["experiments"].push_back({{"name", e.name}, {"summary", e.summary}});
    }
    write_json(j);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymmetric errors: conversion, combination, curves and experiments"};
    app.require_subcommand(1);
    app.add_option("--digits", digits, "significant digits in text output")->check(CLI::Range(1, 17));
    app.add_option("--out", out_path, "also write a JSON document here");

    std::vector<std::string> toks;
    std::string kind = "pdf", target = "all";
    bool from_moments = false;
    auto* conv = app.add_subcommand("convert", "show a model in quantiles, moments and parameters");
    conv->add_option("record", toks, "[pdf|lnl] family value +sigma_plus -sigma_minus [k=v ...]")->required();
    conv->add_option("--kind", kind)->check(CLI::IsMember({"pdf", "lnl"}));
    conv->add_option("--target", target)->check(CLI::IsMember({"all", "quantiles", "moments", "params"}));
    conv->add_flag("--moments", from_moments, "record is: [pdf] family mu V gamma");

    std::string file, mode, family_out, format = "line";
    bool also_naive = false, allow_mixed = false;
    auto* comb = app.add_subcommand("combine", "combine the records of a file");
    comb->add_option("file", file)->required();
    comb->add_option("--mode", mode)
        ->required()
        ->check(CLI::IsMember({"pdf-errors", "pdf-results", "lnl-results", "lnl-errors"}));
    comb->add_option("--family-out", family_out, "output pdf family");
    comb->add_flag("--also-naive", also_naive, "add the quadrature row");
    comb->add_flag("--allow-mixed", allow_mixed, "allow pdf results of different families");
    comb->add_option("--format", format)->check(CLI::IsMember({"line", "json"}));

    double lo = std::nan(""), hi = std::nan("");
    int points = 201;
    auto* curve = app.add_subcommand("curve", "tabulate a density or Delta ln L");
    curve->add_option("record", toks)->required();
    curve->add_option("--kind", kind)->check(CLI::IsMember({"pdf", "lnl"}));
    curve->add_option("--lo", lo, "default value - 4 sigma-");
    curve->add_option("--hi", hi, "default value + 4 sigma+");
    curve->add_option("--points", points);

    std::string name, tier = "fast";
    std::uint64_t seed = 1;
    long replicas = 0;
    unsigned threads = 0;
    std::vector<std::string> params;
    std::optional<double> mean;
    std::optional<int> group;
    auto* exp = app.add_subcommand("experiment", "run a registered experiment");
    exp->add_option("name", name)->required();
    exp->add_option("--seed", seed);
    exp->add_option("--tier", tier)->check(CLI::IsMember({"fast", "full"}));
    exp->add_option("--replicas", replicas)->check(CLI::PositiveNumber);
    exp->add_option("--param", params, "key=value");
    exp->add_option("--mean", mean, "wilks poisson_mean");
    exp->add_option("--group", group, "wilks group_size");
    exp->add_option("--threads", threads);

    auto* list = app.add_subcommand("list-models", "list families and experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("Usage", kUsage, e.what());
    }

    try {
        if (*conv) return cmd_convert(toks, conv->count("--kind") ? kind : "", from_moments, target);
        if (*comb) return cmd_combine(file, mode, family_out, also_naive, allow_mixed, format);
        if (*curve) return cmd_curve(toks, kind, lo, hi, points);
        if (*exp) return cmd_experiment(name, seed, tier, replicas, params, mean, group, threads);
        if (*list) return cmd_list();
    } catch (const ParseError& e) {
        return report_error("ParseError", kUsage, e.what());
    } catch (const Error& e) {
        return report_error(error_code_name(e.code()), exit_for(e.code()), e.what());
    }
    return kUsage;
}
