#include "flipscore/cli.hpp"

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flipscore/dataset.hpp"
#include "flipscore/error.hpp"
#include "flipscore/report.hpp"

namespace flipscore {

namespace {

void write_output(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw InputError("cannot open output file '" + path + "'");
    }
    file << text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Block sign-flip score tests for clustered GLM data"};
    app.require_subcommand(1);

    AnalysisSpec spec;
    std::string alternative = "two-sided";
    std::vector<std::string> terms;
    auto* test = app.add_subcommand("test", "Test coefficients of a GLM on a CSV dataset");
    test->add_option("--input", spec.input, "CSV file with a header row")->required();
    test->add_option("--response", spec.response, "Response column")->required();
    test->add_option("--family", spec.family, "binomial, poisson or gaussian")
        ->check(CLI::IsMember({"binomial", "poisson", "gaussian"}));
    test->add_option("--test", spec.tested, "Tested columns (comma separated)")->delimiter(',');
    test->add_option("--term", terms, "Multi-column term, name=col1,col2");
    test->add_option("--nuisance", spec.nuisance, "Nuisance columns (comma separated)")
        ->delimiter(',');
    test->add_option("--id", spec.id, "Cluster id column");
    test->add_option("--flips", spec.flips, "Number of sign flips, identity included");
    test->add_option("--seed", spec.seed, "Flip seed");
    test->add_option("--alternative", alternative, "two-sided, greater or less")
        ->check(CLI::IsMember({"two-sided", "greater", "less"}));
    test->add_option("--format", spec.format, "json or tsv")->check(CLI::IsMember({"json", "tsv"}));
    test->add_option("--out", spec.out, "Output path (default stdout)");

    std::string config_path;
    std::string sim_out;
    std::string sim_format;
    auto* simulate = app.add_subcommand("simulate", "Run a simulation grid from a JSON config");
    simulate->add_option("--config", config_path, "Scenario grid (JSON)")->required();
    simulate->add_option("--out", sim_out, "Results path (default stdout)");
    simulate->add_option("--format", sim_format, "tsv or json (overrides the config)")
        ->check(CLI::IsMember({"json", "tsv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (test->parsed()) {
            spec.alternative = alternative_from_name(alternative);
            for (const auto& t : terms) {
                spec.terms.push_back(parse_term(t));
            }
            const ParsedDataset parsed = parse_dataset(spec);
            if (parsed.rows_dropped > 0) {
                err << "dropped " << parsed.rows_dropped << " rows with missing values\n";
            }
            const TestReport report = run_test_analysis(parsed, spec);
            write_output(render_report(report, spec.format), spec.out, out);
        } else {
            SimulationConfig config = read_simulation_config(config_path);
            if (!sim_format.empty()) {
                config.format = sim_format;
            }
            const auto results = cmd_simulate(config, err);
            write_output(render_simulation(results, config.format), sim_out, out);
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace flipscore
