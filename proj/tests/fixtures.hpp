#pragma once

// Synthetic CSV inputs and an in-process runner for the command-line tool.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flipscore/cli.hpp"
#include "flipscore/simulate.hpp"

namespace fixture {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliRun run(std::vector<std::string> args)
{
    args.insert(args.begin(), "flipscore");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    CliRun r;
    r.code = flipscore::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("flipscore-" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path);
    f << text;
}

/// y, x, z, id columns of a simulated replicate.
inline std::string simulated_csv(const flipscore::Scenario& sc, std::size_t rep)
{
    const auto d = flipscore::simulate_cluster_dataset(sc, rep);
    std::ostringstream csv;
    csv.precision(17);
    csv << "y,x,z,id\n";
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        csv << d.y[i] << ',' << d.x(i, 0) << ',' << d.z(i, 1) << ",c"
            << d.cluster[static_cast<std::size_t>(i)] << '\n';
    }
    return csv.str();
}

/// Binary response with a numeric covariate, an 8-level country factor
/// constant within respondents, and repeated measures per respondent.
inline std::string categorical_csv(std::uint64_t seed, int respondents = 120, int per = 4)
{
    const char* countries[] = {"AT", "CZ", "DE", "FR", "HU", "IT", "PL", "SK"};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::ostringstream csv;
    csv.precision(10);
    csv << "y,age,country,id\n";
    for (int j = 0; j < respondents; ++j) {
        const char* country = countries[j % 8];
        const double u = normal(rng);
        const double age = normal(rng);
        for (int i = 0; i < per; ++i) {
            const double eta = 0.3 * age + 0.2 * (j % 8 - 3.5) + u;
            const double y = normal(rng) < eta ? 1.0 : 0.0;
            csv << y << ',' << age << ',' << country << ",r" << j << '\n';
        }
    }
    return csv.str();
}

}  // namespace fixture
