#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flipscore/model_data.hpp"
#include "flipscore/score.hpp"

namespace flipscore {

/// Header plus raw string cells of a comma-separated file.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header; throws InputError naming the column.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

/// A named group of tested columns reported as one anova row.
struct TermSpec {
    std::string name;
    std::vector<std::string> columns;
};

/// Everything `flipscore test` needs to run one analysis.
struct AnalysisSpec {
    std::string input;
    std::string response;
    std::string family = "binomial";
    std::vector<std::string> tested;
    std::vector<TermSpec> terms;
    std::vector<std::string> nuisance;
    std::string id;  ///< empty: every row is its own cluster
    std::size_t flips = 500;
    std::uint64_t seed = 0;
    Alternative alternative = Alternative::TwoSided;
    std::string format = "json";
    std::string out;

    void validate() const;
    /// Tested columns in order: --test columns, then term columns not already listed.
    std::vector<std::string> all_tested() const;
};

/// Parses "name=col1,col2".
TermSpec parse_term(const std::string& text);

/// A term's coefficient columns inside ModelData::x.
struct TermColumns {
    std::string name;
    std::vector<Eigen::Index> columns;
};

struct ParsedDataset {
    ModelData data;
    std::vector<TermColumns> terms;
    std::size_t rows_dropped = 0;
    std::size_t num_clusters = 0;
};

/// Numeric columns are used as is; string columns become reference-coded
/// indicators ("col:level") with the alphabetically first level as the
/// reference. An intercept always leads the nuisance design.
ParsedDataset parse_dataset(const CsvTable& table, const AnalysisSpec& spec);
ParsedDataset parse_dataset(const AnalysisSpec& spec);

}  // namespace flipscore
