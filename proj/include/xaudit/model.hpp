#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xaudit/dataset.hpp"

namespace xaudit {

// Opaque scorer f: R^d -> [0,1].  Every score() call bumps the query
// counter, which is how audit cost gets measured; label thresholds at 0.5.
class DecisionFunction {
public:
    virtual ~DecisionFunction() = default;

    double score(std::span<const double> x) const {
        query_count_.fetch_add(1, std::memory_order_relaxed);
        return score_impl(x);
    }
    double score(const std::vector<double>& x) const { return score(std::span<const double>(x)); }

    int label(std::span<const double> x) const { return score(x) >= threshold_ ? 1 : 0; }
    int label(const std::vector<double>& x) const { return label(std::span<const double>(x)); }

    double threshold() const { return threshold_; }
    std::uint64_t query_count() const { return query_count_.load(std::memory_order_relaxed); }

    virtual std::size_t dim() const = 0;

protected:
    virtual double score_impl(std::span<const double> x) const = 0;

private:
    double threshold_ = 0.5;
    mutable std::atomic<std::uint64_t> query_count_{0};
};

class ConstantFunction final : public DecisionFunction {
public:
    ConstantFunction(std::size_t dim, double value) : dim_(dim), value_(value) {}
    std::size_t dim() const override { return dim_; }

protected:
    double score_impl(std::span<const double>) const override { return value_; }

private:
    std::size_t dim_;
    double value_;
};

// Raw affine score clamped to [0,1].  With weights small enough that the
// clamp never binds on the test domain this is exactly additive, which the
// attribution axioms rely on.
class LinearScoreFunction final : public DecisionFunction {
public:
    LinearScoreFunction(std::vector<double> weights, double intercept)
        : w_(std::move(weights)), b_(intercept) {}
    std::size_t dim() const override { return w_.size(); }
    const std::vector<double>& weights() const { return w_; }
    double intercept() const { return b_; }

protected:
    double score_impl(std::span<const double> x) const override;

private:
    std::vector<double> w_;
    double b_;
};

// sigmoid(w.x + b); the planted biased/decoy models in the scaffold demo.
class SigmoidLinearFunction final : public DecisionFunction {
public:
    SigmoidLinearFunction(std::vector<double> weights, double intercept)
        : w_(std::move(weights)), b_(intercept) {}
    std::size_t dim() const override { return w_.size(); }

protected:
    double score_impl(std::span<const double> x) const override;

private:
    std::vector<double> w_;
    double b_;
};

// Arbitrary callable, clamped to [0,1]; test scaffolding for planted shapes.
class CallableFunction final : public DecisionFunction {
public:
    CallableFunction(std::size_t dim, std::function<double(std::span<const double>)> fn)
        : dim_(dim), fn_(std::move(fn)) {}
    std::size_t dim() const override { return dim_; }

protected:
    double score_impl(std::span<const double> x) const override;

private:
    std::size_t dim_;
    std::function<double(std::span<const double>)> fn_;
};

enum class ModelKind { logistic, forest, gbt };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct LogisticParams {
    double l2 = 1e-4;
    int iterations = 500;
    double learning_rate = 1.0;  // damping on the update step
    bool least_squares = false;  // thresholded least-squares variant
};

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unlimited
    int min_leaf = 2;
};

struct GbtParams {
    int n_rounds = 100;
    int max_depth = 3;
    double shrinkage = 0.1;
};

struct TrainConfig {
    ModelKind kind = ModelKind::gbt;
    LogisticParams logistic;
    ForestParams forest;
    GbtParams gbt;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainOutput {
    std::shared_ptr<DecisionFunction> model;
    double train_accuracy = 0.0;
    std::optional<double> test_accuracy;
    std::vector<std::string> warnings;
};

TrainOutput train(const Dataset& d, const TrainConfig& cfg, const Dataset* test = nullptr);

double accuracy(const DecisionFunction& f, const Dataset& d);
double agreement_rate(const DecisionFunction& f, const DecisionFunction& g, const Dataset& d);

}  // namespace xaudit
