#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xaudit/schema.hpp"

namespace xaudit {

// In-memory tabular dataset. Rows are stored row-major; categorical cells
// hold integer codes (see schema for the code -> label mapping). Immutable
// after construction by convention: nothing in the library mutates a
// Dataset it did not just build.
struct Dataset {
    FeatureSchema schema;
    std::vector<double> rows;       // n * d, row-major
    std::vector<int> labels;        // n, values in {0,1}
    std::vector<int> group;         // empty or size n

    std::size_t n() const { return labels.size(); }
    std::size_t dim() const { return schema.dim(); }
    bool has_group() const { return !group.empty(); }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(rows.data() + i * dim(), dim());
    }

    std::vector<double> row_vec(std::size_t i) const {
        const auto r = row(i);
        return std::vector<double>(r.begin(), r.end());
    }

    void validate() const;

    // Row subset by index (copies). Keeps schema; carries labels/group along.
    Dataset subset(const std::vector<std::size_t>& idx) const;

    double positive_rate() const {
        double s = 0.0;
        for (int y : labels) s += y;
        return labels.empty() ? 0.0 : s / static_cast<double>(labels.size());
    }
};

// Reads a CSV file (UTF-8, comma separated, header row, '.' decimal
// separator) against a declared schema. Categorical strings are mapped to
// integer codes in first-appearance order when the schema does not already
// carry categories; the mapping is recorded in the returned dataset's
// schema.
Dataset load_csv(const std::string& path, const FeatureSchema& schema,
                 const std::string& label_column,
                 const std::optional<std::string>& group_column = std::nullopt);

// Writes the dataset in the same CSV dialect load_csv reads.
void write_csv(const Dataset& d, const std::string& path,
               const std::string& label_column = "label",
               const std::string& group_column = "group");

// Deterministic shuffled train/test partition. Test size = round(n * fraction).
std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::uint64_t seed);

}  // namespace xaudit
