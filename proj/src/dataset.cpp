#include "xaudit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xaudit/rng.hpp"

namespace xaudit {

void Dataset::validate() const {
    schema.validate();
    const std::size_t d = dim();
    if (labels.empty()) throw InvalidArgument("dataset is empty");
    if (rows.size() != labels.size() * d) throw InvalidArgument("dataset row/label size mismatch");
    if (!group.empty() && group.size() != labels.size())
        throw InvalidArgument("group vector size mismatch");
    for (std::size_t i = 0; i < n(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = row(i)[j];
            if (!std::isfinite(v)) throw InvalidArgument("non-finite cell at row " + std::to_string(i));
            if (!schema.is_continuous(j)) {
                const auto card = schema.features[j].cardinality();
                if (v != std::floor(v) || v < 0 || static_cast<std::size_t>(v) >= card)
                    throw InvalidArgument("categorical code out of range at row " + std::to_string(i) +
                                          ", feature " + schema.features[j].name);
            }
        }
        if (labels[i] != 0 && labels[i] != 1) throw InvalidArgument("labels must be 0/1");
    }
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.schema = schema;
    const std::size_t d = dim();
    out.rows.reserve(idx.size() * d);
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) {
        const auto r = row(i);
        out.rows.insert(out.rows.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
        if (has_group()) out.group.push_back(group[i]);
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_double_cell(const std::string& cell, std::size_t line_no, const std::string& col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first < last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("cannot parse '" + cell + "' in column " + col, line_no);
    return v;
}

std::string format_double(double v) {
    char buf[32];
    // shortest representation that round-trips
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

Dataset load_csv(const std::string& path, const FeatureSchema& schema,
                 const std::string& label_column, const std::optional<std::string>& group_column) {
    // relaxed upfront check: a categorical feature may arrive with no
    // declared levels, to be filled by first appearance below
    {
        FeatureSchema probe = schema;
        for (auto& f : probe.features)
            if (f.kind == FeatureKind::Categorical && f.categories.size() < 2)
                f.categories = {"_a", "_b"};
        probe.validate();
    }
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw InvalidArgument("empty input file: " + path);

    const auto header = split_csv_line(line);
    const std::size_t d = schema.dim();
    std::vector<std::size_t> col_of_feature(d);
    auto find_column = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw SchemaError("missing column: " + name);
    };
    for (std::size_t j = 0; j < d; ++j) col_of_feature[j] = find_column(schema.features[j].name);
    const std::size_t label_col = find_column(label_column);
    std::size_t group_col = 0;
    if (group_column) group_col = find_column(*group_column);

    Dataset out;
    out.schema = schema;
    // categorical code maps start from any categories the schema already declares
    std::vector<std::vector<std::string>> cats(d);
    for (std::size_t j = 0; j < d; ++j) cats[j] = schema.features[j].categories;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()),
                             line_no);
        for (std::size_t j = 0; j < d; ++j) {
            const std::string& cell = cells[col_of_feature[j]];
            if (schema.is_continuous(j)) {
                out.rows.push_back(parse_double_cell(cell, line_no, schema.features[j].name));
            } else {
                auto& levels = cats[j];
                auto it = std::find(levels.begin(), levels.end(), cell);
                std::size_t code;
                if (it == levels.end()) {
                    levels.push_back(cell);
                    code = levels.size() - 1;
                } else {
                    code = static_cast<std::size_t>(it - levels.begin());
                }
                out.rows.push_back(static_cast<double>(code));
            }
        }
        const double y = parse_double_cell(cells[label_col], line_no, label_column);
        if (y != 0.0 && y != 1.0) throw ParseError("label must be 0 or 1", line_no);
        out.labels.push_back(static_cast<int>(y));
        if (group_column) {
            const double g = parse_double_cell(cells[group_col], line_no, *group_column);
            out.group.push_back(static_cast<int>(g));
        }
    }
    if (out.labels.empty()) throw InvalidArgument("empty input file: " + path);
    for (std::size_t j = 0; j < d; ++j) {
        if (!out.schema.is_continuous(j)) {
            out.schema.features[j].categories = cats[j];
            if (cats[j].size() < 2)
                throw SchemaError("categorical feature " + schema.features[j].name +
                                  " has fewer than 2 observed levels");
        }
    }
    out.validate();
    return out;
}

void write_csv(const Dataset& d, const std::string& path, const std::string& label_column,
               const std::string& group_column) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot open file for writing: " + path);
    const std::size_t dim = d.dim();
    for (std::size_t j = 0; j < dim; ++j) out << d.schema.features[j].name << ',';
    out << label_column;
    if (d.has_group()) out << ',' << group_column;
    out << '\n';
    for (std::size_t i = 0; i < d.n(); ++i) {
        const auto r = d.row(i);
        for (std::size_t j = 0; j < dim; ++j) {
            if (d.schema.is_continuous(j)) {
                out << format_double(r[j]);
            } else {
                const auto code = static_cast<std::size_t>(r[j]);
                const auto& cats = d.schema.features[j].categories;
                out << (code < cats.size() ? cats[code] : std::to_string(code));
            }
            out << ',';
        }
        out << d.labels[i];
        if (d.has_group()) out << ',' << d.group[i];
        out << '\n';
    }
}

std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (d.n() < 2) throw InvalidArgument("split: need at least 2 rows");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw InvalidArgument("split: test_fraction must be in (0,1)");
    const std::size_t n = d.n();
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test == n)
        throw InvalidArgument("split: degenerate partition (empty train or test)");

    // Shuffle canonical row order so that permuting the input rows yields
    // the same multiset of test rows for a fixed seed.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(derive_seed(seed, "data.split"));
    rng.shuffle(idx);
    std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    return {d.subset(train_idx), d.subset(test_idx)};
}

}  // namespace xaudit
