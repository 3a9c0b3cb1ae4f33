#include "xaudit/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "xaudit/rng.hpp"

namespace xaudit {

std::string to_string(CfMetric m) { return m == CfMetric::mad_l1 ? "mad_l1" : "l2"; }

CfContext CfContext::from_scaler(const StandardScaler& s) {
    CfContext ctx;
    ctx.schema = s.schema;
    ctx.mad = s.mad;
    ctx.stddev = s.stddev;
    const std::size_t d = s.dim();
    ctx.lo.resize(d);
    ctx.hi.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (s.schema.is_continuous(j)) {
            const double range = s.max_value[j] - s.min_value[j];
            const double prec = s.schema.features[j].precision;
            // grid-aligned plausibility bounds so conform() stays inside
            ctx.lo[j] = std::ceil((s.min_value[j] - 0.2 * range) / prec) * prec;
            ctx.hi[j] = std::floor((s.max_value[j] + 0.2 * range) / prec) * prec;
        } else {
            ctx.lo[j] = 0.0;
            ctx.hi[j] = static_cast<double>(s.schema.features[j].cardinality() - 1);
        }
    }
    return ctx;
}

double CfContext::distance(const std::vector<double>& x, const std::vector<double>& z,
                           CfMetric m) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (schema.is_continuous(j)) {
            if (m == CfMetric::mad_l1) {
                acc += std::fabs(x[j] - z[j]) / mad[j];
            } else {
                const double delta = (x[j] - z[j]) / stddev[j];
                acc += delta * delta;
            }
        } else if (x[j] != z[j]) {
            acc += 1.0;
        }
    }
    return m == CfMetric::mad_l1 ? acc : std::sqrt(acc);
}

double CfContext::separation_units(const std::vector<double>& a,
                                   const std::vector<double>& b) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double units = schema.is_continuous(j)
                                 ? std::fabs(a[j] - b[j]) / schema.features[j].precision
                                 : std::fabs(a[j] - b[j]);
        worst = std::max(worst, units);
    }
    return worst;
}

std::vector<double> CfContext::conform(std::vector<double> z) const {
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (schema.is_continuous(j)) {
            z[j] = std::clamp(round_to_precision(z[j], schema.features[j].precision), lo[j], hi[j]);
        } else {
            z[j] = std::clamp(std::round(z[j]), lo[j], hi[j]);
        }
    }
    return z;
}

namespace {

// budget-capped query wrapper; throws nothing, reports exhaustion
struct QueryBudget {
    const DecisionFunction& f;
    std::size_t budget;
    std::size_t used = 0;

    bool spent() const { return used >= budget; }

    double score(const std::vector<double>& z) {
        ++used;
        return f.score(z);
    }
};

// per-feature bisection of z toward x along coordinate j, keeping the flip;
// returns the tightest verified flipping value of z[j]
double bisect_coordinate(QueryBudget& q, const CfContext& ctx, const std::vector<double>& x,
                         std::vector<double> z, std::size_t j, int want_label, double threshold) {
    const double prec = ctx.schema.features[j].precision;
    double flip_val = z[j];  // verified flipping
    double keep_val = x[j];  // verified (or assumed) non-flipping
    while (std::fabs(flip_val - keep_val) > prec && !q.spent()) {
        const double mid = round_to_precision(0.5 * (flip_val + keep_val), prec);
        if (mid == flip_val || mid == keep_val) break;
        z[j] = mid;
        const int lab = q.score(z) >= threshold ? 1 : 0;
        if (lab == want_label)
            flip_val = mid;
        else
            keep_val = mid;
    }
    return flip_val;
}

// shared tightening pass: snap changed coordinates back to x entirely when
// the flip survives, else bisect continuous ones toward x
void tighten(QueryBudget& q, const CfContext& ctx, const std::vector<double>& x,
             std::vector<double>& z, double& z_score, int want_label, double threshold,
             int max_passes) {
    for (int pass = 0; pass < max_passes; ++pass) {
        bool improved = false;
        for (std::size_t j = 0; j < x.size() && !q.spent(); ++j) {
            if (z[j] == x[j]) continue;
            auto trial = z;
            trial[j] = x[j];
            const double s = q.score(trial);
            if ((s >= threshold ? 1 : 0) == want_label) {
                z = std::move(trial);
                z_score = s;
                improved = true;
                continue;
            }
            if (!ctx.schema.is_continuous(j)) continue;
            const double tight = bisect_coordinate(q, ctx, x, z, j, want_label, threshold);
            if (tight != z[j]) {
                z[j] = tight;
                improved = true;
            }
        }
        if (!improved || q.spent()) break;
    }
    // the bisection path may leave z_score stale; re-verify once
    if (!q.spent()) z_score = q.score(z);
}

}  // namespace

std::optional<Counterfactual> closest_counterfactual(const DecisionFunction& f,
                                                     const std::vector<double>& x, CfMetric metric,
                                                     std::size_t budget, std::uint64_t seed,
                                                     const CfContext& ctx) {
    if (budget < 1) throw InvalidArgument("closest_counterfactual: budget must be >= 1");
    if (x.size() != ctx.schema.dim()) throw InvalidArgument("closest_counterfactual: dim mismatch");
    const std::size_t d = x.size();
    QueryBudget q{f, budget};
    const double threshold = f.threshold();
    const int base_label = q.score(x) >= threshold ? 1 : 0;
    const int want = 1 - base_label;

    Rng rng(derive_seed(seed, "cf.closest"));
    const std::size_t reserve = std::min(budget / 3, 200 + 40 * d);
    constexpr double widths[] = {0.25, 0.5, 1.0, 2.0, 4.0};
    constexpr double change_probs[] = {0.15, 0.4, 0.8};

    std::vector<double> best_point;
    double best_dist = 0.0, best_score = 0.0;
    std::size_t restart = 0;
    while (q.used + reserve < budget) {
        const double width = widths[restart % 5];
        const double p_change = change_probs[(restart / 5) % 3];
        const bool box_uniform = restart % 7 == 6;
        ++restart;

        std::vector<double> z = x;
        for (std::size_t j = 0; j < d; ++j) {
            if (ctx.lo[j] >= ctx.hi[j]) continue;
            if (rng.uniform01() >= p_change) continue;
            if (ctx.schema.is_continuous(j)) {
                z[j] = box_uniform ? rng.uniform(ctx.lo[j], ctx.hi[j])
                                   : x[j] + width * ctx.stddev[j] * rng.normal();
            } else {
                z[j] = static_cast<double>(
                    rng.uniform_index(ctx.schema.features[j].cardinality()));
            }
        }
        z = ctx.conform(std::move(z));
        if (z == x) continue;
        const double s = q.score(z);
        if ((s >= threshold ? 1 : 0) != want) continue;
        const double dist = ctx.distance(x, z, metric);
        if (best_point.empty() || dist < best_dist) {
            best_point = std::move(z);
            best_dist = dist;
            best_score = s;
        }
    }
    if (best_point.empty()) return std::nullopt;

    tighten(q, ctx, x, best_point, best_score, want, threshold, 4);

    Counterfactual cf;
    cf.point = best_point;
    cf.original = x;
    cf.distance = ctx.distance(x, best_point, metric);
    cf.flipped_score = best_score;
    return cf;
}

CounterfactualSet diverse_counterfactuals(const DecisionFunction& f, const std::vector<double>& x,
                                          std::size_t k, double sampler_width, std::size_t budget,
                                          std::uint64_t seed, const CfContext& ctx) {
    if (k < 1) throw InvalidArgument("diverse_counterfactuals: k must be >= 1");
    if (x.size() != ctx.schema.dim()) throw InvalidArgument("diverse_counterfactuals: dim mismatch");
    if (!(sampler_width > 0.0))
        throw InvalidArgument("diverse_counterfactuals: sampler width must be positive");
    const std::size_t d = x.size();

    CounterfactualSet out;
    out.metric = CfMetric::mad_l1;

    QueryBudget q{f, budget};
    const double threshold = f.threshold();
    const int base_label = q.score(x) >= threshold ? 1 : 0;
    const int want = 1 - base_label;

    Rng rng(derive_seed(seed, "cf.diverse"));

    // phase 1: sample flips with growing width
    std::map<std::vector<double>, double> flips;  // point -> score
    const std::size_t reserve = std::min(budget / 5, 50 * k);
    std::size_t attempt = 0;
    while (q.used + reserve < budget) {
        const double phase = static_cast<double>(attempt % 64) / 63.0;
        const double width = sampler_width * (0.5 + 1.5 * phase);
        ++attempt;
        std::vector<double> z = x;
        for (std::size_t j = 0; j < d; ++j) {
            if (ctx.lo[j] >= ctx.hi[j]) continue;
            if (rng.uniform01() >= 0.5) continue;
            if (ctx.schema.is_continuous(j))
                z[j] = x[j] + width * ctx.stddev[j] * rng.normal();
            else
                z[j] = static_cast<double>(rng.uniform_index(ctx.schema.features[j].cardinality()));
        }
        z = ctx.conform(std::move(z));
        if (z == x) continue;
        if (flips.count(z) != 0) continue;
        const double s = q.score(z);
        if ((s >= threshold ? 1 : 0) == want) flips.emplace(std::move(z), s);
    }

    if (flips.empty()) {
        out.shortfall = true;
        out.queries_used = q.used;
        return out;
    }

    // phase 2: farthest-point selection, seeded with the closest flip
    std::vector<const std::vector<double>*> pool;
    pool.reserve(flips.size());
    for (const auto& [p, s] : flips) pool.push_back(&p);

    std::vector<std::size_t> selected;
    std::vector<bool> taken(pool.size(), false);
    {
        std::size_t first = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const double dist = ctx.distance(x, *pool[i], CfMetric::mad_l1);
            if (dist < best) {
                best = dist;
                first = i;
            }
        }
        selected.push_back(first);
        taken[first] = true;
    }
    while (selected.size() < k) {
        std::size_t pick = pool.size();
        double best_minsep = -1.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (taken[i]) continue;
            double minsep = std::numeric_limits<double>::infinity();
            for (std::size_t s : selected)
                minsep = std::min(minsep, ctx.separation_units(*pool[i], *pool[s]));
            if (minsep > best_minsep) {
                best_minsep = minsep;
                pick = i;
            }
        }
        if (pick == pool.size() || best_minsep + 1e-9 < out.distinctness_radius) break;
        selected.push_back(pick);
        taken[pick] = true;
    }

    // phase 3: snap-tighten each pick without breaking pairwise separation
    std::vector<std::vector<double>> final_points;
    std::vector<double> final_scores;
    for (std::size_t s : selected) {
        auto z = *pool[s];
        double z_score = flips.at(z);
        for (std::size_t j = 0; j < d && !q.spent(); ++j) {
            if (z[j] == x[j]) continue;
            auto trial = z;
            trial[j] = x[j];
            bool clash = false;
            for (const auto& other : final_points) {
                if (ctx.separation_units(trial, other) + 1e-9 < out.distinctness_radius) {
                    clash = true;
                    break;
                }
            }
            if (clash) continue;
            const double sc = q.score(trial);
            if ((sc >= threshold ? 1 : 0) == want) {
                z = std::move(trial);
                z_score = sc;
            }
        }
        bool clash = false;
        for (const auto& other : final_points) {
            if (ctx.separation_units(z, other) + 1e-9 < out.distinctness_radius) {
                clash = true;
                break;
            }
        }
        if (clash) continue;
        final_points.push_back(std::move(z));
        final_scores.push_back(z_score);
    }

    for (std::size_t i = 0; i < final_points.size(); ++i) {
        Counterfactual cf;
        cf.point = final_points[i];
        cf.original = x;
        cf.distance = ctx.distance(x, final_points[i], CfMetric::mad_l1);
        cf.flipped_score = final_scores[i];
        out.items.push_back(std::move(cf));
    }
    out.shortfall = out.items.size() < k;
    out.queries_used = q.used;
    return out;
}

std::optional<Counterfactual> single_feature_counterfactual(const DecisionFunction& f,
                                                            const std::vector<double>& x,
                                                            std::size_t feature, std::size_t budget,
                                                            const CfContext& ctx) {
    if (feature >= x.size()) throw InvalidArgument("single_feature_counterfactual: bad feature");
    QueryBudget q{f, budget};
    const double threshold = f.threshold();
    const int base_label = q.score(x) >= threshold ? 1 : 0;
    const int want = 1 - base_label;
    const std::size_t j = feature;

    auto make_cf = [&](std::vector<double> z, double s) {
        Counterfactual cf;
        cf.distance = ctx.distance(x, z, CfMetric::mad_l1);
        cf.point = std::move(z);
        cf.original = x;
        cf.flipped_score = s;
        return cf;
    };

    if (!ctx.schema.is_continuous(j)) {
        const std::size_t card = ctx.schema.features[j].cardinality();
        for (std::size_t code = 0; code < card && !q.spent(); ++code) {
            if (static_cast<double>(code) == x[j]) continue;
            auto z = x;
            z[j] = static_cast<double>(code);
            const double s = q.score(z);
            if ((s >= threshold ? 1 : 0) == want) return make_cf(std::move(z), s);
        }
        return std::nullopt;
    }

    const double prec = ctx.schema.features[j].precision;
    if (ctx.lo[j] >= ctx.hi[j]) return std::nullopt;
    const double span = ctx.hi[j] - ctx.lo[j];
    const double step = std::max(prec, span / 1024.0);

    // outward-alternating scan finds the nearest flipping grid value first
    auto probe = [&](double v, double& score) -> bool {
        auto z = x;
        z[j] = round_to_precision(v, prec);
        if (z[j] < ctx.lo[j] || z[j] > ctx.hi[j] || z[j] == x[j]) return false;
        score = q.score(z);
        return (score >= threshold ? 1 : 0) == want;
    };

    const auto max_steps =
        static_cast<std::size_t>(std::ceil(span / step)) + 2;
    for (std::size_t t = 1; t <= max_steps && !q.spent(); ++t) {
        for (const double dir : {+1.0, -1.0}) {
            const double v = x[j] + dir * static_cast<double>(t) * step;
            double s = 0.0;
            if (!probe(v, s)) continue;
            // refine between the last non-flipping step and this one
            auto z = x;
            z[j] = round_to_precision(v, prec);
            double flip_val = z[j];
            double keep_val = x[j] + dir * static_cast<double>(t - 1) * step;
            double flip_score = s;
            while (std::fabs(flip_val - keep_val) > prec && !q.spent()) {
                const double mid = round_to_precision(0.5 * (flip_val + keep_val), prec);
                if (mid == flip_val || mid == keep_val) break;
                double ms = 0.0;
                if (probe(mid, ms)) {
                    flip_val = mid;
                    flip_score = ms;
                } else {
                    keep_val = mid;
                }
            }
            z[j] = flip_val;
            return make_cf(std::move(z), flip_score);
        }
    }
    return std::nullopt;
}

TransferReport transfer_rate(const CounterfactualSet& cf_set, const DecisionFunction& g) {
    if (cf_set.items.empty()) throw InvalidArgument("transfer_rate: empty counterfactual set");
    TransferReport rep;
    for (const auto& cf : cf_set.items) {
        const int f_label_point = cf.flipped_score >= 0.5 ? 1 : 0;
        const int f_label_original = 1 - f_label_point;
        const int g_orig = g.label(cf.original);
        if (g_orig != f_label_original) {
            ++rep.n_excluded;
            continue;
        }
        ++rep.n_used;
        if (g.label(cf.point) != g_orig) rep.rate += 1.0;
    }
    if (rep.n_used > 0) rep.rate /= static_cast<double>(rep.n_used);
    return rep;
}

Attribution counterfactual_attribution(const std::vector<double>& x,
                                       const CounterfactualSet& cf_set, const CfContext& ctx) {
    if (cf_set.items.empty())
        throw InvalidArgument("counterfactual_attribution: empty counterfactual set");
    const std::size_t d = x.size();
    Attribution out;
    out.values.assign(d, 0.0);
    out.instance = x;
    out.method_tag = "counterfactual-frequency/k=" + std::to_string(cf_set.items.size());
    for (const auto& cf : cf_set.items) {
        for (std::size_t j = 0; j < d; ++j) {
            const bool changed = ctx.schema.is_continuous(j)
                                     ? std::fabs(cf.point[j] - x[j]) >
                                           0.5 * ctx.schema.features[j].precision
                                     : cf.point[j] != x[j];
            if (changed) out.values[j] += 1.0;
        }
    }
    for (double& v : out.values) v /= static_cast<double>(cf_set.items.size());
    return normalize_l1(out);
}

}  // namespace xaudit
