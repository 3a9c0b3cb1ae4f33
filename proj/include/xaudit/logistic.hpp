#pragma once

#include "xaudit/model.hpp"

namespace xaudit {

// Logistic regression on standardized continuous features plus full one-hot
// categorical indicators.  Fitted by damped Newton iterations; the
// least-squares variant solves one ridge system and clamps the affine score.
class LogisticModel final : public DecisionFunction {
public:
    FeatureSchema schema;
    std::vector<double> col_shift;   // per raw feature: mean (continuous) or 0
    std::vector<double> col_scale;   // per raw feature: std (continuous) or 1
    std::vector<double> weights;     // over encoded columns
    double intercept = 0.0;
    bool least_squares = false;

    std::size_t dim() const override { return schema.dim(); }
    std::size_t encoded_dim() const;
    // raw x -> standardized/one-hot vector (no intercept column)
    std::vector<double> encode(std::span<const double> x) const;
    double logit(std::span<const double> x) const;

protected:
    double score_impl(std::span<const double> x) const override;
};

TrainOutput train_logistic(const Dataset& d, const LogisticParams& p);

}  // namespace xaudit
