#include "flipscore/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "flipscore/baselines.hpp"
#include "flipscore/error.hpp"
#include "flipscore/flip_test.hpp"

namespace flipscore {

namespace {

std::string fmt_num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

using json = nlohmann::ordered_json;

// Accepts a scalar or a list; each element goes through `convert`.
template <typename T, typename Convert>
std::vector<T> grid_values(const nlohmann::json& cfg, const std::string& key, std::vector<T> fallback,
                           Convert convert)
{
    if (!cfg.contains(key)) {
        return fallback;
    }
    const auto& node = cfg.at(key);
    std::vector<T> out;
    try {
        if (node.is_array()) {
            for (const auto& item : node) {
                out.push_back(convert(item));
            }
        } else {
            out.push_back(convert(node));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config key '" + key + "': " + e.what());
    } catch (const InputError& e) {
        throw InputError("config key '" + key + "': " + e.what());
    }
    if (out.empty()) {
        throw InputError("config key '" + key + "': list is empty");
    }
    return out;
}

template <typename T>
T scalar_value(const nlohmann::json& cfg, const std::string& key, T fallback)
{
    if (!cfg.contains(key)) {
        return fallback;
    }
    try {
        return cfg.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config key '" + key + "': " + e.what());
    }
}

std::size_t to_count(const nlohmann::json& v)
{
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw InputError("expected a nonnegative integer, got " + v.dump());
    }
    return v.get<std::size_t>();
}

double to_real(const nlohmann::json& v)
{
    if (!v.is_number()) {
        throw InputError("expected a number, got " + v.dump());
    }
    return v.get<double>();
}

bool to_bool(const nlohmann::json& v)
{
    if (!v.is_boolean()) {
        throw InputError("expected true or false, got " + v.dump());
    }
    return v.get<bool>();
}

}  // namespace

TestReport run_test_analysis(const ParsedDataset& parsed, const AnalysisSpec& spec)
{
    const ModelData& data = parsed.data;
    const Family family = Family::from_name(spec.family);

    FlipPlan plan;
    plan.num_flips = spec.flips;
    plan.seed = spec.seed;
    plan.blocks = block_structure(data.cluster);

    TestReport report;
    report.family = family.name();
    report.alternative = to_string(spec.alternative);
    report.n = static_cast<std::size_t>(data.rows());
    report.clusters = parsed.num_clusters;
    report.flips = spec.flips;
    report.seed = spec.seed;
    report.rows_dropped = parsed.rows_dropped;

    for (Eigen::Index k = 0; k < data.x.cols(); ++k) {
        const auto res = flip_test(data, family, plan, spec.alternative, k);
        report.degenerate_flips += res.degenerate_flips;
        SummaryRow row;
        row.coefficient = data.x_name(k);
        row.score = res.score[0];
        row.std_error = res.std_error[0];
        row.z_value = res.z_value[0];
        row.partial_cor = res.partial_cor[0];
        row.p_value = res.p_values[0];
        report.summary.push_back(row);
    }
    const GlmFit full = fit_glm(full_design(data), data.y, data.offset_or_zero(), family);
    report.full_model_converged = full.converged;
    for (std::size_t k = 0; k < report.summary.size(); ++k) {
        report.summary[k].estimate = full.coefficients[static_cast<Eigen::Index>(k)];
    }
    for (const auto& term : parsed.terms) {
        const auto res = multi_df_test(data, family, plan, term.columns);
        report.degenerate_flips += res.degenerate_flips;
        report.anova.push_back({term.name, term.columns.size(), *res.combined_statistic,
                                *res.combined_p});
    }
    return report;
}

TestReport cmd_test(const AnalysisSpec& spec)
{
    return run_test_analysis(parse_dataset(spec), spec);
}

nlohmann::ordered_json report_to_json(const TestReport& report)
{
    json out;
    out["family"] = report.family;
    out["alternative"] = report.alternative;
    out["n"] = report.n;
    out["clusters"] = report.clusters;
    out["flips"] = report.flips;
    out["seed"] = report.seed;
    out["rows_dropped"] = report.rows_dropped;

    json rows = json::array();
    for (const auto& r : report.summary) {
        json row;
        row["coefficient"] = r.coefficient;
        row["Estimate"] = r.estimate;
        row["Score"] = r.score;
        row["Std. Error"] = r.std_error;
        row["z value"] = r.z_value;
        row["Part. Cor"] = r.partial_cor;
        row["Pr(>z)"] = r.p_value;
        rows.push_back(std::move(row));
    }
    out["summary"] = {{"columns", kSummaryColumns}, {"rows", std::move(rows)}};

    json anova = json::array();
    for (const auto& r : report.anova) {
        json row;
        row["term"] = r.term;
        row["Df"] = r.df;
        row["Score"] = r.score;
        row["Pr(>Score)"] = r.p_value;
        anova.push_back(std::move(row));
    }
    out["anova"] = {{"columns", kAnovaColumns}, {"rows", std::move(anova)}};
    out["diagnostics"] = {{"full_model_converged", report.full_model_converged},
                          {"degenerate_flips", report.degenerate_flips}};
    return out;
}

std::string render_report(const TestReport& report, const std::string& format)
{
    if (format == "json") {
        return report_to_json(report).dump(2) + "\n";
    }
    if (format != "tsv") {
        throw InputError("unknown output format '" + format + "'");
    }
    std::ostringstream out;
    out << "coefficient";
    for (const auto& c : kSummaryColumns) {
        out << '\t' << c;
    }
    out << '\n';
    for (const auto& r : report.summary) {
        out << r.coefficient << '\t' << fmt_num(r.estimate) << '\t' << fmt_num(r.score) << '\t'
            << fmt_num(r.std_error) << '\t' << fmt_num(r.z_value) << '\t'
            << fmt_num(r.partial_cor) << '\t' << fmt_num(r.p_value) << '\n';
    }
    out << "\nterm";
    for (const auto& c : kAnovaColumns) {
        out << '\t' << c;
    }
    out << '\n';
    for (const auto& r : report.anova) {
        out << r.term << '\t' << r.df << '\t' << fmt_num(r.score) << '\t' << fmt_num(r.p_value)
            << '\n';
    }
    return out.str();
}

SimulationConfig parse_simulation_config(const std::string& text)
{
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("simulation config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) {
        throw InputError("simulation config must be a JSON object");
    }
    static const std::vector<std::string> known{
        "N",     "n_per_cluster", "beta",  "gamma", "random_sd", "random_slope", "modes",
        "methods", "reps",        "alpha", "flips", "seed",      "family",       "format",
        "nuisance_correlation"};
    for (const auto& [key, value] : cfg.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw InputError("config key '" + key + "' is not recognized");
        }
    }

    const auto ns = grid_values<std::size_t>(cfg, "N", {10}, to_count);
    const auto per = grid_values<std::size_t>(cfg, "n_per_cluster", {5}, to_count);
    const auto betas = grid_values<double>(cfg, "beta", {0.0}, to_real);
    const auto gammas = grid_values<double>(cfg, "gamma", {2.0}, to_real);
    const auto sds = grid_values<double>(cfg, "random_sd", {5.0}, to_real);
    const auto slopes = grid_values<bool>(cfg, "random_slope", {true}, to_bool);
    const auto modes = grid_values<NuisanceMode>(cfg, "modes", {NuisanceMode::ClusterLevel},
                                                 [](const nlohmann::json& v) {
                                                     return nuisance_mode_from_name(v.get<std::string>());
                                                 });
    const auto methods = grid_values<Method>(
        cfg, "methods", {Method::FlipScores, Method::GlmWald, Method::Gee},
        [](const nlohmann::json& v) { return method_from_name(v.get<std::string>()); });

    Scenario base;
    base.methods = methods;
    base.reps = scalar_value<std::size_t>(cfg, "reps", 500);
    base.alpha = scalar_value<double>(cfg, "alpha", 0.05);
    base.flips = scalar_value<std::size_t>(cfg, "flips", 400);
    base.seed = scalar_value<std::uint64_t>(cfg, "seed", 1);
    base.nuisance_correlation = scalar_value<double>(cfg, "nuisance_correlation", 0.5);
    try {
        base.family = Family::from_name(scalar_value<std::string>(cfg, "family", "binomial"));
    } catch (const InputError& e) {
        throw InputError(std::string("config key 'family': ") + e.what());
    }

    SimulationConfig out;
    out.format = scalar_value<std::string>(cfg, "format", "tsv");
    if (out.format != "tsv" && out.format != "json") {
        throw InputError("config key 'format': expected tsv or json");
    }
    for (auto n : ns) {
        for (auto m : per) {
            for (double b : betas) {
                for (double g : gammas) {
                    for (double sd : sds) {
                        for (bool slope : slopes) {
                            for (auto mode : modes) {
                                Scenario sc = base;
                                sc.clusters = n;
                                sc.per_cluster = m;
                                sc.beta = b;
                                sc.gamma = g;
                                sc.random_sd = sd;
                                sc.random_slope = slope;
                                sc.mode = mode;
                                sc.validate();
                                out.scenarios.push_back(sc);
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

SimulationConfig read_simulation_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_simulation_config(buf.str());
}

std::string render_simulation(const std::vector<SimResult>& results, const std::string& format)
{
    if (format == "json") {
        json rows = json::array();
        for (const auto& res : results) {
            const Scenario& sc = res.scenario;
            for (const auto& m : res.methods) {
                json row;
                row["N"] = sc.clusters;
                row["n_per_cluster"] = sc.per_cluster;
                row["beta"] = sc.beta;
                row["gamma"] = sc.gamma;
                row["random_sd"] = sc.random_sd;
                row["random_slope"] = sc.random_slope;
                row["mode"] = to_string(sc.mode);
                row["method"] = to_string(m.method);
                row["reps"] = m.reps;
                row["rejections"] = m.rejections;
                row["rate"] = m.rate;
                row["lower"] = m.lower;
                row["upper"] = m.upper;
                row["failures"] = m.failures;
                row["limitation"] = res.documented_limitation;
                rows.push_back(std::move(row));
            }
        }
        return rows.dump(2) + "\n";
    }
    std::ostringstream out;
    for (std::size_t c = 0; c < kSimulationColumns.size(); ++c) {
        out << (c ? "\t" : "") << kSimulationColumns[c];
    }
    out << '\n';
    for (const auto& res : results) {
        const Scenario& sc = res.scenario;
        for (const auto& m : res.methods) {
            out << sc.clusters << '\t' << sc.per_cluster << '\t' << fmt_num(sc.beta) << '\t'
                << fmt_num(sc.gamma) << '\t' << fmt_num(sc.random_sd) << '\t'
                << (sc.random_slope ? "true" : "false") << '\t' << to_string(sc.mode) << '\t'
                << to_string(m.method) << '\t' << m.reps << '\t' << m.rejections << '\t'
                << fmt_num(m.rate) << '\t' << fmt_num(m.lower) << '\t' << fmt_num(m.upper)
                << '\t' << m.failures << '\t'
                << (res.documented_limitation ? "documented-limitation" : "-") << '\n';
        }
    }
    return out.str();
}

std::vector<SimResult> cmd_simulate(const SimulationConfig& config, std::ostream& log)
{
    std::vector<SimResult> results;
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        const Scenario& sc = config.scenarios[s];
        results.push_back(run_scenario(sc));
        log << "scenario " << (s + 1) << "/" << config.scenarios.size() << ": N=" << sc.clusters
            << " n_j=" << sc.per_cluster << " beta=" << sc.beta << " mode=" << to_string(sc.mode)
            << " slope=" << (sc.random_slope ? "yes" : "no");
        for (const auto& m : results.back().methods) {
            log << ' ' << to_string(m.method) << '=' << fmt_num(m.rate);
        }
        if (results.back().documented_limitation) {
            log << " [documented limitation]";
        }
        log << '\n';
    }
    return results;
}

}  // namespace flipscore
