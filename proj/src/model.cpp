#include "xaudit/model.hpp"

#include <algorithm>
#include <cmath>

#include "xaudit/logistic.hpp"
#include "xaudit/trees.hpp"

namespace xaudit {

double LinearScoreFunction::score_impl(std::span<const double> x) const {
    if (x.size() != w_.size()) throw InvalidArgument("linear function: dimension mismatch");
    double t = b_;
    for (std::size_t j = 0; j < w_.size(); ++j) t += w_[j] * x[j];
    return std::clamp(t, 0.0, 1.0);
}

double SigmoidLinearFunction::score_impl(std::span<const double> x) const {
    if (x.size() != w_.size()) throw InvalidArgument("sigmoid function: dimension mismatch");
    double t = b_;
    for (std::size_t j = 0; j < w_.size(); ++j) t += w_[j] * x[j];
    return 1.0 / (1.0 + std::exp(-t));
}

double CallableFunction::score_impl(std::span<const double> x) const {
    if (x.size() != dim_) throw InvalidArgument("callable function: dimension mismatch");
    return std::clamp(fn_(x), 0.0, 1.0);
}

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::logistic: return "logistic";
        case ModelKind::forest: return "forest";
        case ModelKind::gbt: return "gbt";
    }
    throw InvalidArgument("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "logistic") return ModelKind::logistic;
    if (s == "forest") return ModelKind::forest;
    if (s == "gbt") return ModelKind::gbt;
    throw InvalidArgument("unknown model kind: " + s);
}

void TrainConfig::validate() const {
    if (logistic.l2 < 0) throw InvalidArgument("train config: l2 must be >= 0");
    if (logistic.iterations < 1) throw InvalidArgument("train config: iterations must be >= 1");
    if (logistic.learning_rate <= 0) throw InvalidArgument("train config: learning rate must be > 0");
    if (forest.n_trees < 1) throw InvalidArgument("train config: n_trees must be >= 1");
    if (forest.min_leaf < 1) throw InvalidArgument("train config: min_leaf must be >= 1");
    if (forest.max_depth < 0) throw InvalidArgument("train config: forest max_depth must be >= 0");
    if (gbt.n_rounds < 1) throw InvalidArgument("train config: n_rounds must be >= 1");
    if (gbt.max_depth < 1) throw InvalidArgument("train config: gbt max_depth must be >= 1");
    if (!(gbt.shrinkage > 0.0 && gbt.shrinkage <= 1.0))
        throw InvalidArgument("train config: shrinkage must be in (0,1]");
}

TrainOutput train(const Dataset& d, const TrainConfig& cfg, const Dataset* test) {
    cfg.validate();
    d.validate();
    const bool has_pos = std::find(d.labels.begin(), d.labels.end(), 1) != d.labels.end();
    const bool has_neg = std::find(d.labels.begin(), d.labels.end(), 0) != d.labels.end();
    if (!has_pos || !has_neg) throw InvalidArgument("train: labels contain a single class");

    TrainOutput out;
    switch (cfg.kind) {
        case ModelKind::logistic: out = train_logistic(d, cfg.logistic); break;
        case ModelKind::forest: out = train_forest(d, cfg.forest, cfg.seed); break;
        case ModelKind::gbt: out = train_gbt(d, cfg.gbt, cfg.seed); break;
    }
    out.train_accuracy = accuracy(*out.model, d);
    if (test != nullptr) out.test_accuracy = accuracy(*out.model, *test);
    return out;
}

double accuracy(const DecisionFunction& f, const Dataset& d) {
    if (d.n() == 0) throw InvalidArgument("accuracy: empty dataset");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < d.n(); ++i)
        if (f.label(d.row(i)) == d.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(d.n());
}

double agreement_rate(const DecisionFunction& f, const DecisionFunction& g, const Dataset& d) {
    if (d.n() == 0) throw InvalidArgument("agreement_rate: empty dataset");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < d.n(); ++i)
        if (f.label(d.row(i)) == g.label(d.row(i))) ++hits;
    return static_cast<double>(hits) / static_cast<double>(d.n());
}

}  // namespace xaudit
