#include "xaudit/trees.hpp"

#include <algorithm>
#include <cmath>

#include "xaudit/rng.hpp"

namespace xaudit {

double ForestModel::score_impl(std::span<const double> x) const {
    if (x.size() != input_dim) throw InvalidArgument("forest: dimension mismatch");
    double s = 0.0;
    for (const auto& t : trees) s += t.eval(x);
    return s / static_cast<double>(trees.size());
}

double GbtModel::logit(std::span<const double> x) const {
    if (x.size() != input_dim) throw InvalidArgument("gbt: dimension mismatch");
    double f = base_score;
    for (const auto& t : trees) f += t.eval(x);
    return f;
}

double GbtModel::score_impl(std::span<const double> x) const {
    return 1.0 / (1.0 + std::exp(-logit(x)));
}

namespace {

struct BestSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// rows: indices into d; targets: per-row objective payload.
// For Gini the payload is the 0/1 label; for least squares the gradient.
// Candidate features must arrive in ascending order so ties resolve to the
// lowest feature index.

BestSplit best_gini_split(const Dataset& d, const std::vector<std::size_t>& rows,
                          const std::vector<int>& features, int min_leaf,
                          std::vector<std::pair<double, int>>& scratch) {
    BestSplit best;
    const double m = static_cast<double>(rows.size());
    double total_pos = 0.0;
    for (std::size_t i : rows) total_pos += d.labels[i];
    const double p = total_pos / m;
    const double parent = 1.0 - p * p - (1.0 - p) * (1.0 - p);

    for (int j : features) {
        scratch.clear();
        for (std::size_t i : rows)
            scratch.emplace_back(d.row(i)[static_cast<std::size_t>(j)], d.labels[i]);
        std::sort(scratch.begin(), scratch.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double left_pos = 0.0;
        for (std::size_t k = 0; k + 1 < scratch.size(); ++k) {
            left_pos += scratch[k].second;
            if (scratch[k].first == scratch[k + 1].first) continue;
            const double nl = static_cast<double>(k + 1);
            const double nr = m - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double pl = left_pos / nl;
            const double pr = (total_pos - left_pos) / nr;
            const double gl = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
            const double gr = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
            const double gain = parent - (nl * gl + nr * gr) / m;
            if (gain > best.gain + 1e-15) {
                best = {j, 0.5 * (scratch[k].first + scratch[k + 1].first), gain};
            }
        }
    }
    return best;
}

BestSplit best_lsq_split(const Dataset& d, const std::vector<std::size_t>& rows,
                         const std::vector<double>& grad, const std::vector<int>& features,
                         int min_leaf, std::vector<std::pair<double, double>>& scratch) {
    BestSplit best;
    const double m = static_cast<double>(rows.size());
    double total = 0.0;
    for (std::size_t i : rows) total += grad[i];
    const double parent_score = total * total / m;

    for (int j : features) {
        scratch.clear();
        for (std::size_t i : rows) scratch.emplace_back(d.row(i)[static_cast<std::size_t>(j)], grad[i]);
        std::sort(scratch.begin(), scratch.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double left = 0.0;
        for (std::size_t k = 0; k + 1 < scratch.size(); ++k) {
            left += scratch[k].second;
            if (scratch[k].first == scratch[k + 1].first) continue;
            const double nl = static_cast<double>(k + 1);
            const double nr = m - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double right = total - left;
            const double gain = left * left / nl + right * right / nr - parent_score;
            if (gain > best.gain + 1e-12) {
                best = {j, 0.5 * (scratch[k].first + scratch[k + 1].first), gain};
            }
        }
    }
    return best;
}

std::vector<int> sample_features(std::size_t d, std::size_t k, Rng& rng) {
    std::vector<int> all(d);
    for (std::size_t j = 0; j < d; ++j) all[j] = static_cast<int>(j);
    if (k >= d) return all;
    // partial Fisher-Yates, then sorted so tie-breaking is index-ordered
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t r = i + rng.uniform_index(d - i);
        std::swap(all[i], all[r]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

struct GiniBuilder {
    const Dataset& d;
    int min_leaf;
    int max_depth;  // 0 = unlimited
    std::size_t n_candidates;
    Rng& rng;
    Tree& tree;
    std::vector<std::pair<double, int>> scratch;

    int build(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        double pos = 0.0;
        for (std::size_t i : rows) pos += d.labels[i];
        const double frac = pos / static_cast<double>(rows.size());
        tree.nodes[static_cast<std::size_t>(id)].value = frac;

        const bool pure = frac == 0.0 || frac == 1.0;
        const bool depth_capped = max_depth > 0 && depth >= max_depth;
        if (pure || depth_capped || rows.size() < static_cast<std::size_t>(2 * min_leaf))
            return id;

        const auto features = sample_features(d.dim(), n_candidates, rng);
        const auto split = best_gini_split(d, rows, features, min_leaf, scratch);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : rows) {
            if (d.row(i)[static_cast<std::size_t>(split.feature)] < split.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

struct LsqBuilder {
    const Dataset& d;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    int max_depth;
    double shrinkage;
    Tree& tree;
    std::vector<std::pair<double, double>> scratch;
    std::vector<int> all_features;

    int build(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        double g = 0.0, h = 0.0;
        for (std::size_t i : rows) {
            g += grad[i];
            h += hess[i];
        }
        // Newton leaf value, clipped so near-pure leaves stay bounded
        const double raw = g / (h + 1e-12);
        tree.nodes[static_cast<std::size_t>(id)].value =
            shrinkage * std::clamp(raw, -4.0, 4.0);

        if (depth >= max_depth || rows.size() < 2) return id;
        const auto split = best_lsq_split(d, rows, grad, all_features, 1, scratch);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : rows) {
            if (d.row(i)[static_cast<std::size_t>(split.feature)] < split.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

}  // namespace

TrainOutput train_forest(const Dataset& d, const ForestParams& p, std::uint64_t seed) {
    if (p.n_trees < 1) throw InvalidArgument("forest: n_trees must be >= 1");
    if (p.min_leaf < 1) throw InvalidArgument("forest: min_leaf must be >= 1");

    auto model = std::make_shared<ForestModel>();
    model->input_dim = d.dim();
    model->trees.resize(static_cast<std::size_t>(p.n_trees));

    const std::size_t n = d.n();
    const auto n_candidates =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d.dim()))));

    for (int t = 0; t < p.n_trees; ++t) {
        Rng rng(derive_seed(seed, "forest.tree." + std::to_string(t)));
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = rng.uniform_index(n);
        std::sort(rows.begin(), rows.end());
        GiniBuilder b{d, p.min_leaf, p.max_depth, n_candidates, rng,
                      model->trees[static_cast<std::size_t>(t)], {}};
        b.build(rows, 0);
    }

    TrainOutput out;
    out.model = std::move(model);
    return out;
}

TrainOutput train_gbt(const Dataset& d, const GbtParams& p, std::uint64_t /*seed*/) {
    if (p.n_rounds < 1) throw InvalidArgument("gbt: n_rounds must be >= 1");
    if (p.max_depth < 1) throw InvalidArgument("gbt: max_depth must be >= 1");
    if (!(p.shrinkage > 0.0 && p.shrinkage <= 1.0))
        throw InvalidArgument("gbt: shrinkage must be in (0,1]");

    auto model = std::make_shared<GbtModel>();
    model->input_dim = d.dim();

    const std::size_t n = d.n();
    double pos = 0.0;
    for (int y : d.labels) pos += y;
    const double p1 = pos / static_cast<double>(n);
    model->base_score = std::log(p1 / (1.0 - p1));

    std::vector<double> f(n, model->base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<int> all(static_cast<int>(d.dim()));
    for (std::size_t j = 0; j < d.dim(); ++j) all[j] = static_cast<int>(j);

    model->trees.resize(static_cast<std::size_t>(p.n_rounds));
    for (int round = 0; round < p.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = 1.0 / (1.0 + std::exp(-f[i]));
            grad[i] = static_cast<double>(d.labels[i]) - prob;
            hess[i] = std::max(prob * (1.0 - prob), 1e-9);
        }
        Tree& tree = model->trees[static_cast<std::size_t>(round)];
        LsqBuilder b{d, grad, hess, p.max_depth, p.shrinkage, tree, {}, all};
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        b.build(rows, 0);
        for (std::size_t i = 0; i < n; ++i) f[i] += tree.eval(d.row(i));
    }

    TrainOutput out;
    out.model = std::move(model);
    return out;
}

}  // namespace xaudit
