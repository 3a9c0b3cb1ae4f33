#pragma once

#include "xaudit/model.hpp"

namespace xaudit {

// One node of a binary tree stored in a flat array.  feature < 0 marks a
// leaf; otherwise rows with x[feature] < threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double eval(std::span<const double> x) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold ? nodes[i].left
                                                                                   : nodes[i].right;
        return nodes[i].value;
    }
};

// Bagged CART trees grown on Gini impurity; score is the mean leaf
// positive fraction across trees.
class ForestModel final : public DecisionFunction {
public:
    std::size_t input_dim = 0;
    std::vector<Tree> trees;

    std::size_t dim() const override { return input_dim; }

protected:
    double score_impl(std::span<const double> x) const override;
};

// Boosted depth-limited regression trees on logistic loss; leaf values
// already include shrinkage, so score = sigmoid(base + sum of trees).
class GbtModel final : public DecisionFunction {
public:
    std::size_t input_dim = 0;
    double base_score = 0.0;  // log-odds of the training positive rate
    std::vector<Tree> trees;

    std::size_t dim() const override { return input_dim; }
    double logit(std::span<const double> x) const;

protected:
    double score_impl(std::span<const double> x) const override;
};

TrainOutput train_forest(const Dataset& d, const ForestParams& p, std::uint64_t seed);
TrainOutput train_gbt(const Dataset& d, const GbtParams& p, std::uint64_t seed);

}  // namespace xaudit
