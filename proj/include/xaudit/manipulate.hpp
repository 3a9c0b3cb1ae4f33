#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "xaudit/dataset.hpp"
#include "xaudit/explainers.hpp"
#include "xaudit/scaffold.hpp"

namespace xaudit {

// The provider-side levers: which degree of freedom produced the before/after
// pair.  boundary_choice records come from contrasting two independently
// trained models (see run_boundary_experiment); the other levers have
// dedicated demos below.
enum class ManipulationLever {
    reference_swap,
    method_choice,
    parameter_choice,
    boundary_choice,
    scaffold
};

std::string to_string(ManipulationLever lever);

// Before/after demonstration for one lever.  Both attributions explain the
// same instance; configs carry enough detail (including seeds) to regenerate
// the attributions bit-identically.
struct ManipulationRecord {
    ManipulationLever lever = ManipulationLever::reference_swap;
    std::string config_before;
    std::string config_after;
    Attribution attribution_before;
    Attribution attribution_after;
    bool argmax_changed = false;
    std::string narrative;
};

enum class SwapDirection { group1_to_full, full_to_group1, group1_to_group1 };

// Self-contained reference-dataset swap: builds the two-group toy, trains a
// gbt, finds a Group-1 instance near the feature-1 boundary whose exact
// interventional Shapley argmax moves from feature 1 (Group-1 reference) to
// feature 2 (full reference).  Candidates are widened once before giving up;
// exhaustion throws (it signals toy misconstruction).
ManipulationRecord reference_swap_demo(std::uint64_t seed,
                                       SwapDirection direction = SwapDirection::group1_to_full);

struct ShoppingObjective {
    enum class Kind { minimize_feature, move_argmax_away };
    Kind kind = Kind::minimize_feature;
    std::size_t feature = 0;
};

struct CandidateOutcome {
    std::string tag;
    double objective_value = 0.0;
    Attribution attribution;  // L1-normalized
};

struct MethodShoppingResult {
    ManipulationRecord record;  // objective-worst candidate vs objective-best
    std::vector<CandidateOutcome> log;
    std::size_t selected = 0;
    std::size_t worst = 0;
};

// Evaluates every candidate config on (f, x) and publishes the objective
// minimizer; the full sweep is logged.  Callers are expected to pre-screen
// candidates with the examiner's sanity filter.  minimize_feature scores
// |phi_j| of the L1-normalized attribution; move_argmax_away adds 1 whenever
// the argmax still sits on feature j, so any candidate that moved it wins.
MethodShoppingResult method_shopping(const DecisionFunction& f, const std::vector<double>& x,
                                     const std::vector<ExplainerConfig>& candidates,
                                     const ShoppingObjective& objective, const Dataset& reference);

struct ScaffoldDemoResult {
    ManipulationRecord record;  // surrogate explanation, unscaffolded vs scaffolded
    Attribution kernel_before;  // shap-kernel pair for the same instance
    Attribution kernel_after;
    double suppression = 0.0;          // relative drop of |phi_j| under lime
    double real_row_agreement = 0.0;   // scaffold vs inner_real on held-out rows
    double detector_accuracy = 0.0;
    bool detector_warning = false;
    std::shared_ptr<ScaffoldedFunction> scaffolded;
    std::shared_ptr<DecisionFunction> inner_real;
};

// Plants a biased sigmoid on the label-correlated feature j, a decoy that
// mimics the biased model's decisions without ever reading feature j, and
// hides the pair behind an OOD detector.  Deployment behavior is preserved
// on real rows while perturbation-based explainers see the decoy.
ScaffoldDemoResult scaffold_demo(const Dataset& train, std::size_t biased_feature,
                                 std::uint64_t seed);

}  // namespace xaudit
