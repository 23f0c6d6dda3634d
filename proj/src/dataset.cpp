#include "flipscore/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "flipscore/error.hpp"
#include "flipscore/family.hpp"

namespace flipscore {

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no)
{
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    if (quoted) {
        throw InputError("unterminated quote on line " + std::to_string(line_no));
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::optional<double> parse_number(const std::string& s)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) {
        return std::nullopt;
    }
    return v;
}

bool is_missing(const std::string& s)
{
    return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

// One source column expanded into design columns.
struct Expanded {
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> columns;
};

Expanded expand_column(const CsvTable& table, std::size_t col, const std::vector<std::size_t>& rows)
{
    const std::string& name = table.header[col];
    const auto n = static_cast<Eigen::Index>(rows.size());
    Expanded out;

    Eigen::VectorXd numeric(n);
    bool all_numeric = true;
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto v = parse_number(table.rows[rows[static_cast<std::size_t>(r)]][col]);
        if (!v) {
            all_numeric = false;
            break;
        }
        numeric[r] = *v;
    }
    if (all_numeric) {
        out.names.push_back(name);
        out.columns.push_back(std::move(numeric));
        return out;
    }

    std::set<std::string> levels;
    for (std::size_t r : rows) {
        levels.insert(table.rows[r][col]);
    }
    // std::set is ordered, so the first level is the alphabetical reference.
    for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
        Eigen::VectorXd ind(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            ind[r] = table.rows[rows[static_cast<std::size_t>(r)]][col] == *it ? 1.0 : 0.0;
        }
        out.names.push_back(name + ":" + *it);
        out.columns.push_back(std::move(ind));
    }
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw InputError("column '" + name + "' not found in CSV header");
    }
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text)
{
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto cells = split_line(line, line_no);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw InputError("line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " fields, header has " +
                             std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) {
        throw InputError("CSV input is empty (header row required)");
    }
    return table;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open input file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

TermSpec parse_term(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw InputError("term '" + text + "' must look like name=col1,col2");
    }
    TermSpec term;
    term.name = text.substr(0, eq);
    term.columns = split_list(text.substr(eq + 1));
    if (term.columns.empty()) {
        throw InputError("term '" + term.name + "' lists no columns");
    }
    return term;
}

std::vector<std::string> AnalysisSpec::all_tested() const
{
    std::vector<std::string> out = tested;
    for (const auto& term : terms) {
        for (const auto& c : term.columns) {
            if (std::find(out.begin(), out.end(), c) == out.end()) {
                out.push_back(c);
            }
        }
    }
    return out;
}

void AnalysisSpec::validate() const
{
    if (response.empty()) {
        throw InputError("--response is required");
    }
    const auto tested_cols = all_tested();
    if (tested_cols.empty()) {
        throw InputError("at least one --test column or --term is required");
    }
    for (const auto& c : tested_cols) {
        if (std::find(nuisance.begin(), nuisance.end(), c) != nuisance.end()) {
            throw InputError("column '" + c + "' is both tested and nuisance");
        }
        if (c == response) {
            throw InputError("response column '" + c + "' cannot be tested");
        }
    }
    for (const auto& c : nuisance) {
        if (c == response) {
            throw InputError("response column '" + c + "' cannot be a nuisance covariate");
        }
    }
    if (flips < 2) {
        throw InputError("--flips must be at least 2");
    }
    if (format != "json" && format != "tsv") {
        throw InputError("--format must be json or tsv");
    }
    Family::from_name(family);
}

ParsedDataset parse_dataset(const AnalysisSpec& spec)
{
    return parse_dataset(read_csv(spec.input), spec);
}

ParsedDataset parse_dataset(const CsvTable& table, const AnalysisSpec& spec)
{
    spec.validate();
    const auto tested_names = spec.all_tested();
    const std::size_t response_col = table.column(spec.response);
    std::vector<std::size_t> tested_cols;
    for (const auto& c : tested_names) {
        tested_cols.push_back(table.column(c));
    }
    std::vector<std::size_t> nuisance_cols;
    for (const auto& c : spec.nuisance) {
        nuisance_cols.push_back(table.column(c));
    }
    std::optional<std::size_t> id_col;
    if (!spec.id.empty()) {
        id_col = table.column(spec.id);
    }

    std::vector<std::size_t> used{response_col};
    used.insert(used.end(), tested_cols.begin(), tested_cols.end());
    used.insert(used.end(), nuisance_cols.begin(), nuisance_cols.end());
    if (id_col) {
        used.push_back(*id_col);
    }

    ParsedDataset out;
    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const bool missing =
            std::any_of(used.begin(), used.end(), [&](std::size_t c) { return is_missing(row[c]); });
        if (missing) {
            ++out.rows_dropped;
            continue;
        }
        kept.push_back(r);
    }
    if (kept.empty()) {
        throw InputError("no complete rows remain after dropping " +
                         std::to_string(out.rows_dropped) + " rows with missing values");
    }

    const auto n = static_cast<Eigen::Index>(kept.size());
    ModelData& data = out.data;
    data.y.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t src = kept[static_cast<std::size_t>(r)];
        const auto v = parse_number(table.rows[src][response_col]);
        if (!v) {
            throw InputError("non-numeric response '" + table.rows[src][response_col] +
                             "' at row " + std::to_string(src + 1));
        }
        data.y[r] = *v;
    }

    // Tested design and the term -> column map.
    std::map<std::string, std::vector<Eigen::Index>> source_to_x;
    std::vector<Eigen::VectorXd> x_cols;
    for (std::size_t k = 0; k < tested_cols.size(); ++k) {
        auto expanded = expand_column(table, tested_cols[k], kept);
        if (expanded.columns.empty()) {
            throw InputError("tested column '" + tested_names[k] + "' has a single level");
        }
        auto& idx = source_to_x[tested_names[k]];
        for (std::size_t e = 0; e < expanded.columns.size(); ++e) {
            idx.push_back(static_cast<Eigen::Index>(x_cols.size()));
            data.x_names.push_back(expanded.names[e]);
            x_cols.push_back(std::move(expanded.columns[e]));
        }
    }
    data.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
    for (std::size_t k = 0; k < x_cols.size(); ++k) {
        data.x.col(static_cast<Eigen::Index>(k)) = x_cols[k];
    }

    for (const auto& name : spec.tested) {
        const bool in_term = std::any_of(spec.terms.begin(), spec.terms.end(), [&](const TermSpec& t) {
            return t.columns.size() == 1 && t.columns[0] == name;
        });
        if (!in_term) {
            out.terms.push_back({name, source_to_x[name]});
        }
    }
    for (const auto& term : spec.terms) {
        TermColumns tc{term.name, {}};
        for (const auto& c : term.columns) {
            const auto& idx = source_to_x[c];
            tc.columns.insert(tc.columns.end(), idx.begin(), idx.end());
        }
        out.terms.push_back(std::move(tc));
    }

    std::vector<Eigen::VectorXd> z_cols{Eigen::VectorXd::Ones(n)};
    data.z_names.push_back("(Intercept)");
    for (std::size_t k = 0; k < nuisance_cols.size(); ++k) {
        auto expanded = expand_column(table, nuisance_cols[k], kept);
        for (std::size_t e = 0; e < expanded.columns.size(); ++e) {
            data.z_names.push_back(expanded.names[e]);
            z_cols.push_back(std::move(expanded.columns[e]));
        }
    }
    data.z.resize(n, static_cast<Eigen::Index>(z_cols.size()));
    for (std::size_t k = 0; k < z_cols.size(); ++k) {
        data.z.col(static_cast<Eigen::Index>(k)) = z_cols[k];
    }

    data.cluster.resize(kept.size());
    std::unordered_map<std::string, std::int64_t> codes;
    for (std::size_t r = 0; r < kept.size(); ++r) {
        if (id_col) {
            const auto [it, inserted] = codes.try_emplace(
                table.rows[kept[r]][*id_col], static_cast<std::int64_t>(codes.size()));
            data.cluster[r] = it->second;
        } else {
            data.cluster[r] = static_cast<std::int64_t>(r);
        }
    }
    out.num_clusters = id_col ? codes.size() : kept.size();

    data.validate(Family::from_name(spec.family));
    return out;
}

}  // namespace flipscore
