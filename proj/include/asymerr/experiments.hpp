#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace asymerr {

struct ExperimentSpec {
    std::string name;
    std::uint64_t seed = 1;
    long replicas = 100000;
    std::map<std::string, double> parameters; // missing entries take the defaults
    unsigned threads = 0;                     // 0: one per hardware thread
};

// Rows of numbers with a label each; NaN marks a model that refused the input.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;

    void add(std::string label, std::vector<double> row);
};

enum class Relation { Near, Below, Above };

struct Check {
    std::string name;
    double value = 0.0;
    Relation relation = Relation::Near;
    double target = 0.0;
    double tolerance = 0.0; // Near only
    bool pass = false;
};

struct ExperimentOutcome {
    std::string name;
    ExperimentSpec spec;
    std::vector<Table> tables;
    std::map<std::string, double> summaries; // one per check, same name
    std::vector<Check> checks;

    bool passed() const;
    void check(const std::string& name, double value, Relation rel, double target, double tol = 0.0);
};

ExperimentOutcome run_wilks_flatness(const ExperimentSpec& spec);
ExperimentOutcome run_pdf_result_combination_mc(const ExperimentSpec& spec);
ExperimentOutcome run_lifetime_case(const ExperimentSpec& spec);
ExperimentOutcome run_lhcb_systematics(const ExperimentSpec& spec);
ExperimentOutcome run_coverage_study(const ExperimentSpec& spec);
ExperimentOutcome run_model_interchange_study(const ExperimentSpec& spec);

enum class Tier { Fast, Full };

struct ExperimentInfo {
    std::string name;
    std::string summary;
    long fast_replicas;
    long full_replicas;
    std::map<std::string, double> defaults;
    ExperimentOutcome (*run)(const ExperimentSpec&);
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo* find_experiment(const std::string& name);

// Registry defaults for the tier. Throws InvalidArgument on an unknown name.
ExperimentSpec default_spec(const std::string& name, Tier tier = Tier::Fast, std::uint64_t seed = 1);

// Validates the spec against the registry and runs it.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

// Aligned plain-text rendering, `digits` significant figures.
std::string format_outcome(const ExperimentOutcome& out, int digits = 6);

// Sigma of the linear sigma likelihood for the sum of two independent
// quantities with errors (p1, m1) and (p2, m2); exact profile, no iteration
// over the curve. Used where millions of combinations are needed.
struct PairErrors {
    double sigma_plus, sigma_minus;
};
PairErrors linear_sigma_pair(double p1, double m1, double p2, double m2);

} // namespace asymerr
