#pragma once

#include <cstdint>
#include <string>

#include "xaudit/attribution.hpp"
#include "xaudit/counterfactual.hpp"
#include "xaudit/dataset.hpp"
#include "xaudit/lime.hpp"
#include "xaudit/model.hpp"
#include "xaudit/shap.hpp"

namespace xaudit {

enum class ExplainMethod { shap_exact, shap_kernel, lime, counterfactual };

std::string to_string(ExplainMethod m);
ExplainMethod explain_method_from_string(const std::string& s);

// One explainer invocation, fully specified: the method plus every knob a
// provider could turn.  Reports carry tag() so a record names its config.
struct ExplainerConfig {
    ExplainMethod method = ExplainMethod::shap_exact;
    std::uint64_t seed = 0;

    // shapley value function
    ValueFunctionSpec::Kind value_kind = ValueFunctionSpec::Kind::interventional;
    std::size_t n_reference_samples = 128;
    std::vector<double> baseline;  // empty: medians/modes of the reference

    // kernel estimator
    std::size_t n_coalitions = 2000;
    double ridge = 1e-6;

    // surrogate (bandwidth/top_k zero means module defaults)
    std::size_t lime_samples = 5000;
    double lime_bandwidth = 0.0;
    std::size_t lime_top_k = 0;

    // counterfactual frequency attribution
    std::size_t cf_k = 20;
    double cf_width = 1.0;
    std::size_t cf_budget = 20000;

    std::string tag() const;
};

// Median/mode point of the training distribution: the default baseline.
std::vector<double> typical_point(const StandardScaler& s);

// Dispatches one explanation. reference doubles as the value-function
// reference (shap), the scaler's training data (lime, counterfactual) and
// the source of baseline defaults.  An empty counterfactual set yields a
// zero attribution with the degenerate flag.
Attribution explain(const DecisionFunction& f, const std::vector<double>& x,
                    const ExplainerConfig& cfg, const Dataset& reference,
                    const StandardScaler& scaler);

}  // namespace xaudit
