#include "xaudit/lime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xaudit/rng.hpp"

namespace xaudit {

double SurrogateConfig::effective_bandwidth(std::size_t d) const {
    return bandwidth > 0.0 ? bandwidth : 0.75 * std::sqrt(static_cast<double>(d));
}

std::size_t SurrogateConfig::effective_top_k(std::size_t d) const {
    if (top_k == 0) return d <= 12 ? d : 10;
    return top_k;
}

void SurrogateConfig::validate(std::size_t d) const {
    if (n_perturbations < d + 2)
        throw InvalidArgument("surrogate config: n_perturbations must be >= d + 2");
    if (bandwidth < 0.0) throw InvalidArgument("surrogate config: bandwidth must be positive");
    if (top_k > d) throw InvalidArgument("surrogate config: top_k must be <= d");
    if (ridge < 0.0) throw InvalidArgument("surrogate config: ridge must be >= 0");
}

Matrix perturb(const std::vector<double>& x, const StandardScaler& scaler, std::size_t n,
               std::uint64_t seed) {
    const std::size_t d = x.size();
    if (d != scaler.dim()) throw InvalidArgument("perturb: dimension mismatch");
    if (n < 1) throw InvalidArgument("perturb: n must be >= 1");
    Rng rng(derive_seed(seed, "lime.perturb"));
    Matrix out(n, d);
    for (std::size_t j = 0; j < d; ++j) out(0, j) = x[j];
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (scaler.schema.is_continuous(j)) {
                const double z = (x[j] - scaler.mean[j]) / scaler.stddev[j] + rng.normal();
                out(i, j) = z * scaler.stddev[j] + scaler.mean[j];
            } else {
                if (rng.uniform01() < 0.5) {
                    // resample from the training marginal (may redraw the
                    // original level)
                    double u = rng.uniform01();
                    const auto& freq = scaler.category_freq[j];
                    std::size_t code = freq.size() - 1;
                    for (std::size_t c = 0; c < freq.size(); ++c) {
                        if (u < freq[c]) {
                            code = c;
                            break;
                        }
                        u -= freq[c];
                    }
                    out(i, j) = static_cast<double>(code);
                } else {
                    out(i, j) = x[j];
                }
            }
        }
    }
    return out;
}

double kernel_weight(const std::vector<double>& x, const std::vector<double>& z, double bandwidth,
                     const StandardScaler& scaler) {
    if (!(bandwidth > 0.0)) throw InvalidArgument("kernel_weight: bandwidth must be positive");
    if (x.size() != z.size()) throw InvalidArgument("kernel_weight: dimension mismatch");
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (scaler.schema.is_continuous(j)) {
            const double delta = (x[j] - z[j]) / scaler.stddev[j];
            d2 += delta * delta;
        } else if (x[j] != z[j]) {
            d2 += 1.0;
        }
    }
    return std::exp(-d2 / (bandwidth * bandwidth));
}

LimeResult explain_lime_detailed(const DecisionFunction& f, const std::vector<double>& x,
                                 const SurrogateConfig& cfg, const StandardScaler& scaler) {
    const std::size_t d = x.size();
    if (d != scaler.dim()) throw InvalidArgument("explain_lime: dimension mismatch");
    cfg.validate(d);
    const double bw = cfg.effective_bandwidth(d);
    const std::size_t k = cfg.effective_top_k(d);
    const std::size_t n = cfg.n_perturbations;

    const Matrix cloud = perturb(x, scaler, n, cfg.seed);

    std::vector<double> y(n), w(n);
    std::vector<double> z(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) z[j] = cloud(i, j);
        y[i] = f.score(z);
        w[i] = kernel_weight(x, z, bw, scaler);
    }

    LimeResult res;
    res.attribution.values.assign(d, 0.0);
    res.attribution.instance = x;
    res.attribution.method_tag = "lime/b=" + std::to_string(bw) + "/n=" + std::to_string(n) +
                                 "/k=" + std::to_string(k) + "/seed=" + std::to_string(cfg.seed);

    double mean_y = 0.0, var_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    for (double v : y) var_y += (v - mean_y) * (v - mean_y);
    var_y /= static_cast<double>(n);
    if (var_y < 1e-12) {
        res.attribution.base_value = mean_y;
        res.attribution.degenerate = true;
        return res;
    }

    // interpretable coordinates: standardized value for continuous
    // features, same-level-as-x indicator for categorical ones
    Matrix coords(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (scaler.schema.is_continuous(j))
                coords(i, j) = (cloud(i, j) - scaler.mean[j]) / scaler.stddev[j];
            else
                coords(i, j) = cloud(i, j) == x[j] ? 1.0 : 0.0;
        }
    }

    double sw = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        swy += w[i] * y[i];
    }
    const double wmean_y = swy / sw;
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) sst += w[i] * (y[i] - wmean_y) * (y[i] - wmean_y);

    auto fit_sse = [&](const std::vector<std::size_t>& feats,
                       std::vector<double>* coef_out) -> double {
        Matrix design(n, feats.size() + 1);
        for (std::size_t i = 0; i < n; ++i) {
            design(i, 0) = 1.0;
            for (std::size_t c = 0; c < feats.size(); ++c) design(i, c + 1) = coords(i, feats[c]);
        }
        std::vector<double> beta;
        try {
            beta = weighted_ridge(design, y, w, std::max(cfg.ridge, 1e-10), false);
        } catch (const InvalidArgument&) {
            return std::numeric_limits<double>::infinity();
        }
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double pred = beta[0];
            for (std::size_t c = 0; c < feats.size(); ++c)
                pred += beta[c + 1] * design(i, c + 1);
            sse += w[i] * (y[i] - pred) * (y[i] - pred);
        }
        if (coef_out != nullptr) *coef_out = beta;
        return sse;
    };

    // greedy forward selection on weighted SSE; ties keep the lowest index
    std::vector<std::size_t> selected;
    std::vector<bool> in_model(d, false);
    for (std::size_t round = 0; round < k; ++round) {
        double best_sse = std::numeric_limits<double>::infinity();
        std::size_t best_j = d;
        for (std::size_t j = 0; j < d; ++j) {
            if (in_model[j]) continue;
            auto trial = selected;
            trial.push_back(j);
            const double sse = fit_sse(trial, nullptr);
            if (sse < best_sse - 1e-15) {
                best_sse = sse;
                best_j = j;
            }
        }
        if (best_j == d) break;
        selected.push_back(best_j);
        in_model[best_j] = true;
    }

    std::vector<double> beta;
    const double sse = fit_sse(selected, &beta);
    res.attribution.base_value = beta.empty() ? wmean_y : beta[0];
    for (std::size_t c = 0; c < selected.size(); ++c)
        res.attribution.values[selected[c]] = beta[c + 1];
    res.weighted_r2 = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    res.selected = std::move(selected);
    res.attribution.check_finite();
    return res;
}

Attribution explain_lime(const DecisionFunction& f, const std::vector<double>& x,
                         const SurrogateConfig& cfg, const StandardScaler& scaler) {
    return explain_lime_detailed(f, x, cfg, scaler).attribution;
}

}  // namespace xaudit
