#pragma once

#include <cstdint>
#include <optional>

#include "xaudit/attribution.hpp"
#include "xaudit/model.hpp"
#include "xaudit/scaler.hpp"

namespace xaudit {

enum class CfMetric { mad_l1, l2 };

std::string to_string(CfMetric m);

// Search region and distance weights shared by all counterfactual ops:
// plausibility box = observed range widened by 20%, MAD weights for the
// default metric, schema precision for rounding and distinctness.
struct CfContext {
    FeatureSchema schema;
    std::vector<double> mad;
    std::vector<double> stddev;
    std::vector<double> lo;
    std::vector<double> hi;

    static CfContext from_scaler(const StandardScaler& s);

    // distance from x to z: continuous |delta|/mad (or squared standardized
    // for l2), categorical 0/1 mismatch
    double distance(const std::vector<double>& x, const std::vector<double>& z, CfMetric m) const;

    // pairwise separation in measurement units: |delta|/precision for
    // continuous, |code delta| for categorical; L-infinity over features
    double separation_units(const std::vector<double>& a, const std::vector<double>& b) const;

    // snaps continuous coordinates to schema precision and clamps into the box
    std::vector<double> conform(std::vector<double> z) const;
};

struct Counterfactual {
    std::vector<double> point;
    std::vector<double> original;
    double distance = 0.0;
    double flipped_score = 0.0;
};

struct CounterfactualSet {
    std::vector<Counterfactual> items;
    double distinctness_radius = 1.0;
    bool shortfall = false;
    CfMetric metric = CfMetric::mad_l1;
    std::size_t queries_used = 0;
};

// Best-of-search closest flip: random restarts, then per-feature bisection
// toward x, then coordinate descent; none when the budget finds no flip.
std::optional<Counterfactual> closest_counterfactual(const DecisionFunction& f,
                                                     const std::vector<double>& x, CfMetric metric,
                                                     std::size_t budget, std::uint64_t seed,
                                                     const CfContext& ctx);

// Up to k flips pairwise separated by at least distinctness_radius
// measurement units, chosen by farthest-point selection over sampled flips
// and lightly tightened toward x.
CounterfactualSet diverse_counterfactuals(const DecisionFunction& f, const std::vector<double>& x,
                                          std::size_t k, double sampler_width, std::size_t budget,
                                          std::uint64_t seed, const CfContext& ctx);

// Line search over one feature inside its plausibility interval; none when
// no value of that feature alone flips the label.
std::optional<Counterfactual> single_feature_counterfactual(const DecisionFunction& f,
                                                            const std::vector<double>& x,
                                                            std::size_t feature, std::size_t budget,
                                                            const CfContext& ctx);

struct TransferReport {
    double rate = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;  // originals whose label disagrees under g
};

TransferReport transfer_rate(const CounterfactualSet& cf_set, const DecisionFunction& g);

// Per-feature change frequency over the set, L1-normalized.
Attribution counterfactual_attribution(const std::vector<double>& x, const CounterfactualSet& cf_set,
                                       const CfContext& ctx);

}  // namespace xaudit
