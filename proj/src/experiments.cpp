#include "asymerr/experiments.hpp"

#include "asymerr/errors.hpp"
#include "asymerr/numeric.hpp"
#include "experiments_impl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace asymerr {

void Table::add(std::string label, std::vector<double> row) {
    labels.push_back(std::move(label));
    rows.push_back(std::move(row));
}

bool ExperimentOutcome::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void ExperimentOutcome::check(const std::string& name, double value, Relation rel, double target,
                              double tol) {
    Check c{name, value, rel, target, tol, false};
    switch (rel) {
    case Relation::Near: c.pass = std::abs(value - target) <= tol; break;
    case Relation::Below: c.pass = value < target; break;
    case Relation::Above: c.pass = value > target; break;
    }
    checks.push_back(c);
    summaries[name] = value;
}

PairErrors linear_sigma_pair(double p1, double m1, double p2, double m2) {
    if (!(p1 > 0 && m1 > 0 && p2 > 0 && m2 > 0))
        fail(ErrorCode::InvalidArgument, "linear_sigma_pair", "errors must be positive");
    const double s1 = 2 * p1 * m1 / (p1 + m1), d1 = (p1 - m1) / (p1 + m1);
    const double s2 = 2 * p2 * m2 / (p2 + m2), d2 = (p2 - m2) / (p2 + m2);
    // On the contour t1^2 + t2^2 = 1, t = a / (s + d a), the extreme of
    // a1 + a2 has equal slopes t (1 - d t)^2 / s.
    auto a = [](double t, double s, double d) { return s * t / (1 - d * t); };
    auto edge = [&](double lo, double hi) {
        auto g = [&](double th) {
            const double t1 = std::cos(th), t2 = std::sin(th);
            return t1 * (1 - d1 * t1) * (1 - d1 * t1) / s1 - t2 * (1 - d2 * t2) * (1 - d2 * t2) / s2;
        };
        const double th = find_root(g, lo, hi, 1e-15).value;
        return a(std::cos(th), s1, d1) + a(std::sin(th), s2, d2);
    };
    const double pi = std::numbers::pi;
    return {edge(0, pi / 2), -edge(pi, 1.5 * pi)};
}

namespace {

const std::vector<ExperimentInfo> kRegistry = {
    {"wilks", "goodness-of-fit p-values of Poisson pairs against Wilks' theorem", 10000, 1000000,
     {{"poisson_mean", 5}, {"group_size", 2}}, run_wilks_flatness},
    {"pdf-result-mc", "toy MC of combined x^2 results against model moments", 100000, 1000000,
     {{"transform", 0}, {"x_mean", 5}, {"x_sigma", 1 / std::numbers::sqrt2}},
     run_pdf_result_combination_mc},
    {"lifetime", "exponential lifetime, two sets of three decays", 1, 1, {}, run_lifetime_case},
    {"lhcb", "LHCb Lambda(1800) systematic sum", 1, 1, {}, run_lhcb_systematics},
    {"coverage", "coverage of stat+syst totals for a counting source strength", 100000, 1000000,
     {{"radius", 1}, {"distance", 5}, {"distance_sigma", 0.3}, {"counts", 50}}, run_coverage_study},
    {"interchange", "pdf against likelihood combination of two equal asymmetric errors", 1, 1,
     {{"sigma_plus", 2}, {"sigma_minus", 1}}, run_model_interchange_study},
};

std::string fmt(double v, int digits) {
    if (std::isnan(v)) return "--";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

const char* relation_text(Relation r) {
    switch (r) {
    case Relation::Near: return "~";
    case Relation::Below: return "<";
    case Relation::Above: return ">";
    }
    return "?";
}

} // namespace

const std::vector<ExperimentInfo>& experiment_registry() { return kRegistry; }

const ExperimentInfo* find_experiment(const std::string& name) {
    for (const auto& e : kRegistry)
        if (e.name == name) return &e;
    return nullptr;
}

ExperimentSpec default_spec(const std::string& name, Tier tier, std::uint64_t seed) {
    const auto* e = find_experiment(name);
    if (!e) fail(ErrorCode::InvalidArgument, "default_spec", "unknown experiment '" + name + "'");
    return {name, seed, tier == Tier::Fast ? e->fast_replicas : e->full_replicas, e->defaults, 0};
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
    const auto* e = find_experiment(spec.name);
    if (!e) fail(ErrorCode::InvalidArgument, "run_experiment", "unknown experiment '" + spec.name + "'");
    if (spec.replicas < 1) fail(ErrorCode::InvalidArgument, "run_experiment", "replicas must be >= 1");
    for (const auto& [k, v] : spec.parameters) {
        if (!e->defaults.count(k))
            fail(ErrorCode::InvalidArgument, "run_experiment",
                 "experiment '" + spec.name + "' has no parameter '" + k + "'");
        if (!std::isfinite(v))
            fail(ErrorCode::InvalidArgument, "run_experiment", "parameter '" + k + "' is not finite");
    }
    return e->run(spec);
}

namespace detail {

double param(const ExperimentSpec& spec, const std::string& key) {
    if (auto it = spec.parameters.find(key); it != spec.parameters.end()) return it->second;
    const auto* e = find_experiment(spec.name);
    if (e)
        if (auto it = e->defaults.find(key); it != e->defaults.end()) return it->second;
    fail(ErrorCode::InvalidArgument, spec.name, "missing parameter '" + key + "'");
}

ExperimentOutcome start(const ExperimentSpec& spec, const char* name) {
    ExperimentOutcome out;
    out.name = name;
    out.spec = spec;
    out.spec.name = name;
    const auto* e = find_experiment(name);
    if (e)
        for (const auto& [k, v] : e->defaults) out.spec.parameters.emplace(k, v);
    return out;
}

} // namespace detail

std::string format_outcome(const ExperimentOutcome& out, int digits) {
    std::string s = "experiment " + out.name + "  seed " + std::to_string(out.spec.seed) + "  replicas " +
                    std::to_string(out.spec.replicas) + "\n";
    for (const auto& [k, v] : out.spec.parameters) s += "  " + k + " = " + fmt(v, digits) + "\n";
    for (const auto& t : out.tables) {
        s += "\n[" + t.name + "]\n";
        std::vector<std::vector<std::string>> cells;
        cells.push_back(t.columns);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            std::vector<std::string> line{t.labels[i]};
            for (double v : t.rows[i]) line.push_back(fmt(v, digits));
            cells.push_back(std::move(line));
        }
        std::vector<std::size_t> w;
        for (const auto& line : cells)
            for (std::size_t j = 0; j < line.size(); ++j) {
                if (w.size() <= j) w.push_back(0);
                w[j] = std::max(w[j], line[j].size());
            }
        for (const auto& line : cells) {
            std::string row;
            for (std::size_t j = 0; j < line.size(); ++j) {
                const std::string pad(w[j] - line[j].size(), ' ');
                row += j == 0 ? line[j] + pad : "  " + pad + line[j];
            }
            while (!row.empty() && row.back() == ' ') row.pop_back();
            s += row + "\n";
        }
    }
    s += "\n[checks]\n";
    for (const auto& c : out.checks) {
        std::string rule = std::string(relation_text(c.relation)) + " " + fmt(c.target, digits);
        if (c.relation == Relation::Near) rule += " +- " + fmt(c.tolerance, 3);
        s += (c.pass ? "PASS  " : "FAIL  ") + c.name + "  " + fmt(c.value, digits) + "  (" + rule + ")\n";
    }
    s += out.passed() ? "all checks passed\n" : "some checks failed\n";
    return s;
}

} // namespace asymerr
