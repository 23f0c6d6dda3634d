#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flipscore/dataset.hpp"
#include "flipscore/simulate.hpp"

namespace flipscore {

/// One coefficient row: Estimate, Score, Std. Error, z value, Part. Cor, Pr(>z).
struct SummaryRow {
    std::string coefficient;
    double estimate = 0.0;
    double score = 0.0;
    double std_error = 0.0;
    double z_value = 0.0;
    double partial_cor = 0.0;
    double p_value = 1.0;
};

/// One term row: Df, Score, Pr(>Score).
struct AnovaRow {
    std::string term;
    std::size_t df = 0;
    double score = 0.0;
    double p_value = 1.0;
};

struct TestReport {
    std::string family;
    std::string alternative;
    std::size_t n = 0;
    std::size_t clusters = 0;
    std::size_t flips = 0;
    std::uint64_t seed = 0;
    std::size_t rows_dropped = 0;
    bool full_model_converged = true;
    std::size_t degenerate_flips = 0;
    std::vector<SummaryRow> summary;
    std::vector<AnovaRow> anova;
};

inline const std::vector<std::string> kSummaryColumns{"Estimate",  "Score",     "Std. Error",
                                                      "z value",   "Part. Cor", "Pr(>z)"};
inline const std::vector<std::string> kAnovaColumns{"Df", "Score", "Pr(>Score)"};

TestReport run_test_analysis(const ParsedDataset& parsed, const AnalysisSpec& spec);
TestReport cmd_test(const AnalysisSpec& spec);

nlohmann::ordered_json report_to_json(const TestReport& report);
std::string render_report(const TestReport& report, const std::string& format);

/// Scenario grid read from a JSON object of lists (scalars are accepted
/// as one-element lists).
struct SimulationConfig {
    std::vector<Scenario> scenarios;
    std::string format = "tsv";
};

SimulationConfig parse_simulation_config(const std::string& text);
SimulationConfig read_simulation_config(const std::string& path);

inline const std::vector<std::string> kSimulationColumns{
    "N",    "n_per_cluster", "beta",  "gamma", "random_sd", "random_slope", "mode",
    "method", "reps",        "rejections", "rate", "lower", "upper", "failures", "limitation"};

std::string render_simulation(const std::vector<SimResult>& results, const std::string& format);

/// Runs every scenario of the config; progress lines go to `log`.
std::vector<SimResult> cmd_simulate(const SimulationConfig& config, std::ostream& log);

}  // namespace flipscore
