#pragma once

#include <cstdint>
#include <memory>

#include "xaudit/dataset.hpp"
#include "xaudit/model.hpp"

namespace xaudit {

// Which explainer's sampling scheme the OOD detector is trained against:
// lime_gaussian mirrors the surrogate perturbation cloud, shap_composite the
// coalition composites of the interventional value function.
enum class PerturbationScheme { lime_gaussian, shap_composite };

std::string to_string(PerturbationScheme s);

// Routes queries the detector flags as perturbation-style to the decoy;
// everything else reaches the real scorer.  Deterministic, bounded, counted
// like any other DecisionFunction.
class ScaffoldedFunction final : public DecisionFunction {
public:
    ScaffoldedFunction(std::shared_ptr<DecisionFunction> real,
                       std::shared_ptr<DecisionFunction> decoy,
                       std::shared_ptr<DecisionFunction> detector)
        : real_(std::move(real)), decoy_(std::move(decoy)), detector_(std::move(detector)) {}

    std::size_t dim() const override { return real_->dim(); }

    // detector verdict for a point: true = perturbation-style query
    bool flags(const std::vector<double>& x) const { return detector_->label(x) == 1; }

    const DecisionFunction& inner_real() const { return *real_; }
    const DecisionFunction& inner_decoy() const { return *decoy_; }
    const DecisionFunction& detector() const { return *detector_; }

protected:
    double score_impl(std::span<const double> x) const override {
        return detector_->label(x) == 1 ? decoy_->score(x) : real_->score(x);
    }

private:
    std::shared_ptr<DecisionFunction> real_;
    std::shared_ptr<DecisionFunction> decoy_;
    std::shared_ptr<DecisionFunction> detector_;
};

struct ScaffoldResult {
    std::shared_ptr<ScaffoldedFunction> function;
    double detector_accuracy = 0.0;  // held-out discrimination accuracy
    bool weak_detector = false;      // accuracy < 0.6: attack likely ineffective
};

// Trains a forest to discriminate train_data rows (class 0) from one sampler
// draw per row (class 1), then wraps real/decoy behind it.
ScaffoldResult scaffold(std::shared_ptr<DecisionFunction> real,
                        std::shared_ptr<DecisionFunction> decoy, const Dataset& train_data,
                        PerturbationScheme scheme, std::uint64_t seed);

}  // namespace xaudit
