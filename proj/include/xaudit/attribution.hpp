#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "xaudit/error.hpp"

namespace xaudit {

// Per-feature attribution for one explained instance.  degenerate marks
// vacuous results (constant model, zero vector, empty evidence).
struct Attribution {
    std::vector<double> values;
    double base_value = 0.0;
    std::vector<double> instance;
    std::string method_tag;
    bool degenerate = false;

    std::size_t dim() const { return values.size(); }

    void check_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) throw InvalidArgument("attribution has non-finite value");
        if (!std::isfinite(base_value)) throw InvalidArgument("attribution base is non-finite");
    }
};

// Index of the largest |values| entry; ties resolve to the lowest index.
inline std::size_t argmax_abs(const std::vector<double>& v) {
    if (v.empty()) throw InvalidArgument("argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (std::fabs(v[j]) > std::fabs(v[best])) best = j;
    return best;
}

// Scales values to unit L1 norm.  The zero vector is returned unchanged
// with the degenerate flag set.
inline Attribution normalize_l1(const Attribution& a) {
    Attribution out = a;
    double norm = 0.0;
    for (double v : out.values) norm += std::fabs(v);
    if (norm == 0.0) {
        out.degenerate = true;
        return out;
    }
    for (double& v : out.values) v /= norm;
    return out;
}

}  // namespace xaudit
