#include "xaudit/examiner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "xaudit/error.hpp"
#include "xaudit/rng.hpp"
#include "xaudit/scaler.hpp"

namespace xaudit {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::size_t argmin_abs(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (std::fabs(v[j]) < std::fabs(v[best])) best = j;
    return best;
}

}  // namespace

OracleReply QueryOracle::decide(const std::vector<double>& x) {
    std::uint64_t cur = spent_.load(std::memory_order_relaxed);
    do {
        if (cur >= budget_) throw BudgetExhausted();
    } while (!spent_.compare_exchange_weak(cur, cur + 1, std::memory_order_relaxed));
    return decide_impl(x);
}

ProviderExplanation QueryOracle::explain(const std::vector<double>&) { return {}; }

std::uint64_t QueryOracle::remaining() const {
    const std::uint64_t s = spent();
    return s >= budget_ ? 0 : budget_ - s;
}

LocalOracle::LocalOracle(std::shared_ptr<const DecisionFunction> f, std::uint64_t budget)
    : QueryOracle(budget), f_(std::move(f)) {
    if (!f_) throw InvalidArgument("oracle needs a decision function");
}

LocalOracle::LocalOracle(std::shared_ptr<const DecisionFunction> f, ExplainProvider provider,
                         std::uint64_t budget)
    : QueryOracle(budget), f_(std::move(f)), provider_(std::move(provider)) {
    if (!f_) throw InvalidArgument("oracle needs a decision function");
}

OracleReply LocalOracle::decide_impl(const std::vector<double>& x) {
    if (x.size() != f_->dim())
        throw InvalidArgument("oracle query has dimension " + std::to_string(x.size()) +
                              ", decision function expects " + std::to_string(f_->dim()));
    const double s = f_->score(x);
    return OracleReply{s, s >= f_->threshold() ? 1 : 0};
}

ProviderExplanation LocalOracle::explain(const std::vector<double>& x) {
    if (!provider_) return {};
    return provider_(x);
}

std::string to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::pass: return "pass";
        case VerdictStatus::fail: return "fail";
        case VerdictStatus::inconclusive: return "inconclusive";
    }
    throw InvalidArgument("unknown verdict status");
}

ConsistencyVerdict check_counterfactual_validity(QueryOracle& o, const std::vector<double>& x) {
    ConsistencyVerdict v;
    v.name = "counterfactual_validity";
    const ProviderExplanation expl = o.explain(x);
    if (!expl.counterfactuals)
        throw InvalidArgument("counterfactual validity check: provider gave no counterfactual set");
    const CounterfactualSet& set = *expl.counterfactuals;
    v.total = set.items.size();
    if (set.items.empty()) {
        v.status = VerdictStatus::pass;
        v.evidence = "provider claims no counterfactuals; nothing to refute";
        return v;
    }

    // One query per claim, in claim order: the re-queried label must land on
    // the side of the threshold the provider's flipped_score asserted.
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        const Counterfactual& cf = set.items[i];
        OracleReply reply;
        try {
            reply = o.decide(cf.point);
        } catch (const BudgetExhausted&) {
            v.status = VerdictStatus::inconclusive;
            v.checked = i;
            v.evidence = "budget exhausted; " + std::to_string(i) + " of " +
                         std::to_string(set.items.size()) + " claims checked, none refuted";
            return v;
        }
        v.query_points.push_back(cf.point);
        v.checked = i + 1;
        const int claimed = cf.flipped_score >= 0.5 ? 1 : 0;
        if (reply.label != claimed) {
            v.status = VerdictStatus::fail;
            v.witness = cf.point;
            v.evidence = "claim " + std::to_string(i) + " asserts score " + fmt(cf.flipped_score) +
                         " (label " + std::to_string(claimed) + ") but decide returns " +
                         fmt(reply.score) + " (label " + std::to_string(reply.label) + ")";
            return v;
        }
    }

    // Claims are score-honest; one more query pins the original's label so
    // claims that never cross it are caught too.
    OracleReply orig;
    try {
        orig = o.decide(x);
    } catch (const BudgetExhausted&) {
        v.status = VerdictStatus::inconclusive;
        v.evidence = "all " + std::to_string(set.items.size()) +
                     " claims match their stated scores, but the budget ran out before the "
                     "original point could be re-queried";
        return v;
    }
    v.query_points.push_back(x);
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        const Counterfactual& cf = set.items[i];
        const int claimed = cf.flipped_score >= 0.5 ? 1 : 0;
        if (claimed == orig.label) {
            v.status = VerdictStatus::fail;
            v.witness = cf.point;
            v.evidence = "claim " + std::to_string(i) + " stays on the original's label " +
                         std::to_string(orig.label) + "; no flip occurred";
            return v;
        }
    }
    v.status = VerdictStatus::pass;
    v.evidence = std::to_string(set.items.size()) + " claims re-queried; every flip is real " +
                 "against original label " + std::to_string(orig.label);
    return v;
}

ConsistencyVerdict check_attribution_faithfulness(QueryOracle& o, const std::vector<double>& x,
                                                  const Dataset& reference, std::size_t m) {
    ConsistencyVerdict v;
    v.name = "attribution_faithfulness";
    if (m == 0) throw InvalidArgument("faithfulness check needs at least one reference draw");
    if (reference.n() == 0) throw InvalidArgument("faithfulness check needs a non-empty reference");
    if (reference.dim() != x.size())
        throw InvalidArgument("faithfulness check: reference dimension mismatch");
    const ProviderExplanation expl = o.explain(x);
    if (!expl.attribution)
        throw InvalidArgument("attribution faithfulness check: provider gave no attribution");
    const Attribution& a = *expl.attribution;
    if (a.values.size() != x.size())
        throw InvalidArgument("attribution faithfulness check: attribution dimension mismatch");

    const std::size_t top = argmax_abs(a.values);
    const std::size_t bottom = argmin_abs(a.values);
    v.total = 2 * m;

    OracleReply base;
    try {
        base = o.decide(x);
    } catch (const BudgetExhausted&) {
        v.status = VerdictStatus::inconclusive;
        v.evidence = "budget exhausted before the base query";
        return v;
    }
    v.query_points.push_back(x);

    // Mean |delta score| when one feature is replaced by reference draws;
    // draws are evenly spaced reference rows, so the check replays exactly.
    double mean_delta[2] = {0.0, 0.0};
    const std::size_t features[2] = {top, bottom};
    std::vector<double> worst_bottom_point;
    double worst_bottom_delta = -1.0;
    for (int which = 0; which < 2; ++which) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t row = (i * reference.n()) / m;
            std::vector<double> y = x;
            y[features[which]] = reference.row(row)[features[which]];
            OracleReply r;
            try {
                r = o.decide(y);
            } catch (const BudgetExhausted&) {
                v.status = VerdictStatus::inconclusive;
                v.evidence = "budget exhausted after " + std::to_string(v.checked) + " of " +
                             std::to_string(2 * m) + " ablation queries";
                return v;
            }
            v.query_points.push_back(y);
            ++v.checked;
            const double delta = std::fabs(r.score - base.score);
            sum += delta;
            if (which == 1 && delta > worst_bottom_delta) {
                worst_bottom_delta = delta;
                worst_bottom_point = y;
            }
        }
        mean_delta[which] = sum / static_cast<double>(m);
    }

    const std::string detail = "top feature " + std::to_string(top) + " mean |dscore| " +
                               fmt(mean_delta[0]) + ", bottom feature " + std::to_string(bottom) +
                               " mean |dscore| " + fmt(mean_delta[1]);
    if (mean_delta[0] < 1e-3 && mean_delta[1] < 1e-3) {
        v.status = VerdictStatus::inconclusive;
        v.evidence = "both ablations below the 1e-3 noise floor; " + detail;
        return v;
    }
    if (mean_delta[0] >= mean_delta[1]) {
        v.status = VerdictStatus::pass;
        v.evidence = detail;
    } else {
        v.status = VerdictStatus::fail;
        v.evidence = "claimed top feature moves the score less than the claimed bottom one; " + detail;
        v.witness = worst_bottom_point;
    }
    return v;
}

SanityProbes make_sanity_probes(const Dataset& train_like, std::uint64_t seed) {
    if (train_like.n() < 4) throw InvalidArgument("sanity probes need at least four rows");
    SanityProbes p;
    p.reference = train_like;

    const std::size_t d = train_like.dim();
    const StandardScaler scaler = fit_scaler(train_like);
    std::vector<double> w(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        const double scale = scaler.stddev[j] > 1e-9 ? scaler.stddev[j] : 1.0;
        w[j] = (j % 2 == 0 ? 0.4 : -0.4) / scale;
    }
    double b = 0.0;
    for (std::size_t j = 0; j < d; ++j) b -= w[j] * scaler.mean[j];
    p.linear = std::make_shared<SigmoidLinearFunction>(w, b);
    p.constant = std::make_shared<ConstantFunction>(d, 0.5);

    TrainConfig tc;
    tc.kind = ModelKind::gbt;
    tc.seed = derive_seed(seed, "sanity.trained");
    p.trained = train(train_like, tc).model;

    Dataset shuffled = train_like;
    Rng rng(derive_seed(seed, "sanity.shuffle"));
    rng.shuffle(shuffled.labels);
    TrainConfig tc2 = tc;
    tc2.seed = derive_seed(seed, "sanity.retrain");
    p.trained_shuffled = train(shuffled, tc2).model;

    const std::size_t n_probe = std::min<std::size_t>(8, train_like.n());
    for (std::size_t i = 0; i < n_probe; ++i)
        p.probe_points.push_back(train_like.row_vec((i * train_like.n()) / n_probe));
    return p;
}

bool sanity_filter(const ExplainFn& explainer, const SanityProbes& probes) {
    if (!probes.linear || !probes.constant || !probes.trained || !probes.trained_shuffled)
        throw InvalidArgument("sanity filter needs all four probe models");
    if (probes.probe_points.empty()) throw InvalidArgument("sanity filter needs probe points");
    if (!explainer) throw InvalidArgument("sanity filter needs an explainer");

    // Model-swap sensitivity: attributions for two genuinely different
    // trained models must differ somewhere.
    double sum_l1 = 0.0;
    for (const auto& x : probes.probe_points) {
        const Attribution a = explainer(*probes.trained, x);
        const Attribution b = explainer(*probes.trained_shuffled, x);
        if (a.values.size() != x.size() || b.values.size() != x.size())
            throw InvalidArgument("sanity filter: explainer returned wrong dimension");
        for (std::size_t j = 0; j < x.size(); ++j)
            sum_l1 += std::fabs(a.values[j] - b.values[j]);
    }
    if (sum_l1 / static_cast<double>(probes.probe_points.size()) < 1e-6) return false;

    // A constant model moves for no feature; any attribution mass is noise
    // the explainer invented. 1e-9 tolerates float dust only.
    for (const auto& x : probes.probe_points) {
        const Attribution c = explainer(*probes.constant, x);
        for (double val : c.values)
            if (std::fabs(val) > 1e-9) return false;
    }
    return true;
}

bool sanity_filter(const ExplainerConfig& cfg, const SanityProbes& probes) {
    if (probes.reference.n() == 0) throw InvalidArgument("sanity filter needs a reference dataset");
    const StandardScaler scaler = fit_scaler(probes.reference);
    const ExplainFn fn = [&](const DecisionFunction& f, const std::vector<double>& x) {
        return explain(f, x, cfg, probes.reference, scaler);
    };
    return sanity_filter(fn, probes);
}

namespace {

double probe_decide(QueryOracle& o, const std::vector<double>& x,
                    std::vector<std::vector<double>>& log) {
    const OracleReply r = o.decide(x);  // may throw BudgetExhausted
    log.push_back(x);
    return r.score;
}

}  // namespace

ScaffoldSuspicion scaffold_probe(QueryOracle& o, const Dataset& train_like, std::size_t n_pairs,
                                 std::uint64_t seed) {
    if (train_like.n() == 0) throw InvalidArgument("scaffold probe needs a non-empty data sample");
    ScaffoldSuspicion out;
    out.pairs_requested = n_pairs;
    if (n_pairs == 0) {
        out.note = "no pairs requested";
        return out;
    }
    const std::size_t d = train_like.dim();
    (void)seed;  // sampling is a deterministic spread; the seed is reserved for future variants

    // Phase 1: score an evenly spaced sample of real rows. These queries
    // serve double duty: score-driver estimation and anchor selection.
    const std::size_t n_sample = std::min<std::size_t>(train_like.n(), 64);
    std::vector<std::size_t> rows(n_sample);
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(n_sample);
    try {
        for (std::size_t i = 0; i < n_sample; ++i) {
            rows[i] = (i * train_like.n()) / n_sample;
            const OracleReply r = o.decide(train_like.row_vec(rows[i]));
            out.query_points.push_back(train_like.row_vec(rows[i]));
            scores.push_back(r.score);
            labels.push_back(r.label);
        }
    } catch (const BudgetExhausted&) {
        out.partial = true;
        out.note = "budget exhausted while scoring the row sample (" +
                   std::to_string(scores.size()) + " of " + std::to_string(n_sample) + " rows)";
        return out;
    }

    double mean_s = 0.0;
    for (double s : scores) mean_s += s;
    mean_s /= static_cast<double>(scores.size());
    double var_s = 0.0;
    for (double s : scores) var_s += (s - mean_s) * (s - mean_s);
    if (var_s / static_cast<double>(scores.size()) < 1e-12) {
        out.note = "scores are constant across the sample; nothing to probe";
        return out;
    }

    // Drivers: continuous features whose values track the score across the
    // sample. Composites keep one driver at the real row and defect the
    // rest, so at least two are needed for the geometry to mean anything.
    std::vector<std::pair<double, std::size_t>> rho;
    for (std::size_t j = 0; j < d; ++j) {
        if (!train_like.schema.is_continuous(j)) continue;
        double mx = 0.0;
        for (std::size_t i = 0; i < n_sample; ++i) mx += train_like.rows[rows[i] * d + j];
        mx /= static_cast<double>(n_sample);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < n_sample; ++i) {
            const double cx = train_like.rows[rows[i] * d + j] - mx;
            sxy += cx * (scores[i] - mean_s);
            sxx += cx * cx;
        }
        if (sxx < 1e-12) continue;
        rho.emplace_back(std::fabs(sxy) / std::sqrt(sxx * var_s), j);
    }
    std::sort(rho.begin(), rho.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (rho.size() < 2) {
        out.note = "fewer than two continuous score drivers; probe not applicable";
        return out;
    }
    const double rho_floor = 0.5 * rho[0].first;
    const std::size_t top_driver = rho[0].second;
    out.top_driver_correlation = rho[0].first;
    for (const auto& [r, j] : rho) {
        if (out.drivers.size() >= 3) break;
        if (out.drivers.size() >= 2 && r < rho_floor) break;
        out.drivers.push_back(j);
    }
    // Suppression only pays off against a feature the function visibly
    // tracks; without a dominant driver the composites' jumps are ordinary
    // interaction behavior, not evidence of routing.
    if (out.top_driver_correlation < 0.6) {
        out.note = "no dominant continuous score driver (max |correlation| " +
                   fmt(out.top_driver_correlation) + "); suppression probe not informative";
        return out;
    }

    // Phase 2: confident anchors on both sides of the threshold, most
    // extreme first. Pairs alternate sides so composites are probed in both
    // directions.
    std::vector<std::size_t> hi, lo;
    std::vector<std::size_t> order(n_sample);
    for (std::size_t i = 0; i < n_sample; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ea = std::fabs(scores[a] - 0.5), eb = std::fabs(scores[b] - 0.5);
        return ea != eb ? ea > eb : a < b;
    });
    for (std::size_t i : order) {
        if (std::fabs(scores[i] - 0.5) < 0.35) break;
        (scores[i] >= 0.5 ? hi : lo).push_back(i);
    }
    const std::size_t n_each = std::min(hi.size(), lo.size());
    if (n_each == 0) {
        out.note = hi.empty() && lo.empty() ? "no confidently scored rows to anchor on"
                                            : "confident rows all sit on one side of the threshold";
        return out;
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t p = 0; p < n_pairs && p / 2 < n_each; ++p) {
        const std::size_t a = hi[p / 2], b = lo[p / 2];
        pairs.emplace_back(p % 2 == 0 ? a : b, p % 2 == 0 ? b : a);
    }
    if (pairs.size() < n_pairs)
        out.note = "sample supports only " + std::to_string(pairs.size()) + " of " +
                   std::to_string(n_pairs) + " requested pairs";

    // Phase 3: the composite keeps the top driver at the real row and
    // defects the other drivers past the partner; the interpolates slide
    // the top driver across its observed range at that composite. An
    // honest model that tracks the top driver on real rows responds to the
    // slide; a scaffold routing perturbation-style queries to a decoy that
    // suppresses the driver holds still across the whole range.
    try {
        for (const auto& [ia, iq] : pairs) {
            const std::vector<double> r_vec = train_like.row_vec(rows[ia]);
            const std::vector<double> q_vec = train_like.row_vec(rows[iq]);
            const double s_r = scores[ia];
            const double span = q_vec[top_driver] - r_vec[top_driver];
            if (std::fabs(span) < 1e-9) continue;  // degenerate pair, no slide possible
            ScaffoldPair rec;
            rec.real_row = rows[ia];
            rec.partner_row = rows[iq];
            rec.kept_driver = top_driver;
            rec.real_score = s_r;
            std::vector<double> c = r_vec;
            for (std::size_t m : out.drivers)
                if (m != top_driver) c[m] = q_vec[m] + 0.5 * (q_vec[m] - r_vec[m]);
            rec.composite_score = probe_decide(o, c, out.query_points);
            if (std::fabs(s_r - rec.composite_score) > 0.5) {
                double mn = rec.composite_score, mx = rec.composite_score;
                for (int step = 1; step <= 8; ++step) {
                    std::vector<double> z = c;
                    z[top_driver] = r_vec[top_driver] + span * static_cast<double>(step) / 8.0;
                    const double s = probe_decide(o, z, out.query_points);
                    mn = std::min(mn, s);
                    mx = std::max(mx, s);
                }
                rec.slide_spread = mx - mn;
                rec.suspicious = rec.slide_spread < 0.1;
            }
            ++out.pairs_evaluated;
            if (rec.suspicious) ++out.pairs_suspicious;
            out.pairs.push_back(rec);
        }
    } catch (const BudgetExhausted&) {
        out.partial = true;
        out.note = "budget exhausted after " + std::to_string(out.pairs_evaluated) + " of " +
                   std::to_string(pairs.size()) + " pairs";
    }
    if (out.pairs_evaluated > 0)
        out.suspicion_score = static_cast<double>(out.pairs_suspicious) /
                              static_cast<double>(out.pairs_evaluated);
    return out;
}

FairnessRecord fairness_audit(QueryOracle& o, const Dataset& reference,
                              bool positive_is_favorable) {
    if (!reference.has_group()) throw InvalidArgument("fairness audit needs a grouped reference");
    std::set<int> distinct(reference.group.begin(), reference.group.end());
    if (distinct.size() < 2) throw InvalidArgument("fairness audit needs at least two groups");

    FairnessRecord rec;
    const int fav = positive_is_favorable ? 1 : 0;
    try {
        for (std::size_t i = 0; i < reference.n(); ++i) {
            const OracleReply r = o.decide(reference.row_vec(i));
            rec.decided_labels.push_back(r.label);
        }
    } catch (const BudgetExhausted&) {
        rec.partial = true;
    }
    rec.rows_decided = rec.decided_labels.size();
    if (rec.rows_decided == 0) return rec;

    for (int g : distinct) {
        GroupRate gr;
        gr.group = g;
        std::size_t fav_qualified = 0;
        for (std::size_t i = 0; i < rec.rows_decided; ++i) {
            if (reference.group[i] != g) continue;
            ++gr.size;
            const bool favored = rec.decided_labels[i] == fav;
            if (favored) ++gr.positives;
            if (reference.labels[i] == fav) {
                ++gr.qualified;
                if (favored) ++fav_qualified;
            }
        }
        if (gr.size > 0)
            gr.positive_rate = static_cast<double>(gr.positives) / static_cast<double>(gr.size);
        if (gr.qualified > 0)
            gr.true_positive_rate =
                static_cast<double>(fav_qualified) / static_cast<double>(gr.qualified);
        rec.group_rates.push_back(gr);
    }

    for (std::size_t a = 0; a < rec.group_rates.size(); ++a) {
        for (std::size_t b = a + 1; b < rec.group_rates.size(); ++b) {
            const GroupRate& ga = rec.group_rates[a];
            const GroupRate& gb = rec.group_rates[b];
            if (ga.size > 0 && gb.size > 0)
                rec.demographic_parity_gap = std::max(
                    rec.demographic_parity_gap, std::fabs(ga.positive_rate - gb.positive_rate));
            if (ga.true_positive_rate && gb.true_positive_rate) {
                const double gap = std::fabs(*ga.true_positive_rate - *gb.true_positive_rate);
                if (!rec.equal_opportunity_gap || gap > *rec.equal_opportunity_gap)
                    rec.equal_opportunity_gap = gap;
            } else {
                rec.eo_not_computable.emplace_back(ga.group, gb.group);
            }
        }
    }
    return rec;
}

AuditReport audit(QueryOracle& o, const Dataset& reference, const AuditSelection& sel) {
    AuditReport rep;
    const std::uint64_t spent_before = o.spent();
    if (o.remaining() == 0) return rep;
    if (reference.n() == 0) throw InvalidArgument("audit needs a non-empty reference");

    // Direct tests first: the decision function's behavior is checked
    // before any provider explanation is even looked at.
    if (sel.fairness && reference.has_group() && o.remaining() > 0) {
        const std::set<int> distinct(reference.group.begin(), reference.group.end());
        if (distinct.size() >= 2) {
            FairnessRecord rec = fairness_audit(o, reference, sel.positive_is_favorable);
            if (rec.rows_decided > 0) rep.fairness = std::move(rec);
        }
    }
    if (sel.scaffold && o.remaining() > 0)
        rep.scaffold = scaffold_probe(o, reference, sel.scaffold_pairs, sel.seed);

    if (sel.consistency && o.remaining() > 0) {
        std::vector<std::size_t> instances = sel.instances;
        if (instances.empty())
            for (std::size_t i = 0; i < std::min<std::size_t>(3, reference.n()); ++i)
                instances.push_back(i);
        for (std::size_t i : instances) {
            if (i >= reference.n())
                throw InvalidArgument("audit instance index " + std::to_string(i) +
                                      " out of range");
            const std::vector<double> x = reference.row_vec(i);
            const ProviderExplanation expl = o.explain(x);
            const std::string suffix = " [row " + std::to_string(i) + "]";
            if (!expl.attribution && !expl.counterfactuals) {
                ConsistencyVerdict v;
                v.name = "explanation_present" + suffix;
                v.status = VerdictStatus::inconclusive;
                v.evidence = "provider returned no explanation";
                rep.consistency_verdicts.push_back(std::move(v));
                continue;
            }
            if (expl.counterfactuals) {
                ConsistencyVerdict v = check_counterfactual_validity(o, x);
                v.name += suffix;
                rep.consistency_verdicts.push_back(std::move(v));
            }
            if (expl.attribution) {
                ConsistencyVerdict v =
                    check_attribution_faithfulness(o, x, reference, sel.faithfulness_draws);
                v.name += suffix;
                rep.consistency_verdicts.push_back(std::move(v));
            }
        }
    }
    rep.queries_spent = o.spent() - spent_before;
    return rep;
}

}  // namespace xaudit
