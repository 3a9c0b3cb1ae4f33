#pragma once

#include <vector>

#include "xaudit/dataset.hpp"

namespace xaudit {

// Per-feature statistics frozen from a training set.  Categorical features
// keep identity scaling (mean 0, std 1) plus the empirical level frequencies
// so samplers can draw from the observed marginal.
struct StandardScaler {
    FeatureSchema schema;
    std::vector<double> mean;
    std::vector<double> stddev;       // population std; 1.0 where constant
    std::vector<double> median;
    std::vector<double> mad;          // median absolute deviation; falls back to 0.6745*std
    std::vector<double> min_value;    // observed range, used for plausibility boxes
    std::vector<double> max_value;
    std::vector<bool> is_constant;
    // level frequencies per categorical feature (empty vector for continuous)
    std::vector<std::vector<double>> category_freq;

    std::size_t dim() const { return mean.size(); }

    // (x - mean) / stddev for continuous features; categorical passed through.
    std::vector<double> standardize(const std::vector<double>& x) const;
    std::vector<double> unstandardize(const std::vector<double>& z) const;
};

StandardScaler fit_scaler(const Dataset& d);

}  // namespace xaudit
