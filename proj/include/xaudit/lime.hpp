#pragma once

#include <cstdint>

#include "xaudit/attribution.hpp"
#include "xaudit/linalg.hpp"
#include "xaudit/model.hpp"
#include "xaudit/scaler.hpp"

namespace xaudit {

struct SurrogateConfig {
    std::size_t n_perturbations = 5000;
    double bandwidth = 0.0;  // <= 0 means the 0.75 * sqrt(d) default
    std::size_t top_k = 0;   // 0 means d for d <= 12, else 10
    double ridge = 1e-6;
    std::uint64_t seed = 0;

    double effective_bandwidth(std::size_t d) const;
    std::size_t effective_top_k(std::size_t d) const;
    void validate(std::size_t d) const;
};

// Perturbation cloud around x; row 0 is x itself.  Continuous features get
// standard-normal noise in standardized space; categorical features are
// resampled from the training marginal with probability one half.
Matrix perturb(const std::vector<double>& x, const StandardScaler& scaler, std::size_t n,
               std::uint64_t seed);

// exp(-D^2 / b^2) on standardized Euclidean distance; categorical
// coordinates contribute 0/1 mismatch terms.
double kernel_weight(const std::vector<double>& x, const std::vector<double>& z, double bandwidth,
                     const StandardScaler& scaler);

struct LimeResult {
    Attribution attribution;
    double weighted_r2 = 0.0;
    std::vector<std::size_t> selected;  // forward-selection order
};

// Weighted ridge fit of the score on standardized coordinates, restricted
// to top_k forward-selected features.  Coefficients for categorical
// features sit on a same-level-as-x indicator.
LimeResult explain_lime_detailed(const DecisionFunction& f, const std::vector<double>& x,
                                 const SurrogateConfig& cfg, const StandardScaler& scaler);

Attribution explain_lime(const DecisionFunction& f, const std::vector<double>& x,
                         const SurrogateConfig& cfg, const StandardScaler& scaler);

}  // namespace xaudit
