#include "xaudit/compare.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xaudit/error.hpp"
#include "xaudit/scaler.hpp"

namespace xaudit {

namespace {

// indices of the k largest magnitudes; ties by lowest index
std::vector<std::size_t> topk_indices(const std::vector<double>& v, std::size_t k) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return std::fabs(v[i]) > std::fabs(v[j]);
    });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

// average ranks of magnitudes, ascending
std::vector<double> magnitude_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return std::fabs(v[i]) < std::fabs(v[j]);
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::fabs(v[idx[j + 1]]) == std::fabs(v[idx[i]])) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    const bool const_a = saa < 1e-18, const_b = sbb < 1e-18;
    if (const_a || const_b) return const_a && const_b ? 1.0 : 0.0;
    return sab / std::sqrt(saa * sbb);
}

PairAggregate aggregate_records(const std::string& ma, const std::string& mb,
                                const std::vector<const DisagreementRecord*>& rs) {
    PairAggregate agg;
    agg.method_a = ma;
    agg.method_b = mb;
    agg.n = rs.size();
    if (rs.empty()) return agg;
    for (const auto* r : rs) {
        agg.top1_match_rate += r->top1_match ? 1.0 : 0.0;
        agg.mean_topk_overlap += r->topk_overlap;
        agg.mean_rank_corr += r->rank_corr;
        agg.mean_sign_agreement += r->sign_agreement;
        agg.mean_l1_delta += r->l1_delta;
    }
    const double n = static_cast<double>(rs.size());
    agg.top1_match_rate /= n;
    agg.mean_topk_overlap /= n;
    agg.mean_rank_corr /= n;
    agg.mean_sign_agreement /= n;
    agg.mean_l1_delta /= n;
    return agg;
}

}  // namespace

DisagreementRecord disagreement(const Attribution& a, const Attribution& b, std::size_t k) {
    if (a.dim() != b.dim()) throw InvalidArgument("disagreement: dimension mismatch");
    if (a.dim() == 0) throw InvalidArgument("disagreement: empty attributions");
    if (k == 0) throw InvalidArgument("disagreement: k must be positive");
    a.check_finite();
    b.check_finite();

    DisagreementRecord r;
    r.method_a = a.method_tag;
    r.method_b = b.method_tag;
    r.top1_match = argmax_abs(a.values) == argmax_abs(b.values);

    const std::size_t k_eff = std::min(k, a.dim());
    const auto ta = topk_indices(a.values, k_eff);
    const auto tb = topk_indices(b.values, k_eff);
    std::size_t shared = 0;
    for (std::size_t i : ta)
        if (std::find(tb.begin(), tb.end(), i) != tb.end()) ++shared;
    r.topk_overlap = static_cast<double>(shared) / static_cast<double>(k_eff);

    r.rank_corr = a.values == b.values
                      ? 1.0
                      : pearson(magnitude_ranks(a.values), magnitude_ranks(b.values));

    std::size_t both = 0, same_sign = 0;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        if (a.values[j] == 0.0 || b.values[j] == 0.0) continue;
        ++both;
        if ((a.values[j] > 0.0) == (b.values[j] > 0.0)) ++same_sign;
    }
    r.sign_agreement = both == 0 ? 1.0 : static_cast<double>(same_sign) / static_cast<double>(both);

    for (std::size_t j = 0; j < a.dim(); ++j) r.l1_delta += std::fabs(a.values[j] - b.values[j]);
    return r;
}

DisagreementReport run_disagreement_experiment(const DecisionFunction& f, const Dataset& test,
                                               const Dataset& reference,
                                               const std::vector<ExplainerConfig>& methods,
                                               std::size_t k) {
    if (methods.size() < 2) throw InvalidArgument("disagreement experiment needs >= 2 methods");
    if (test.n() == 0) throw InvalidArgument("disagreement experiment: empty test set");
    const StandardScaler scaler = fit_scaler(reference);

    DisagreementReport report;
    std::vector<std::vector<const DisagreementRecord*>> by_pair;

    for (std::size_t row = 0; row < test.n(); ++row) {
        const std::vector<double> x = test.row_vec(row);
        std::vector<Attribution> attrs;
        attrs.reserve(methods.size());
        bool failed = false;
        for (const auto& cfg : methods) {
            try {
                attrs.push_back(normalize_l1(explain(f, x, cfg, reference, scaler)));
            } catch (const std::exception& e) {
                report.failures.push_back({row, cfg.tag(), e.what()});
                failed = true;
                break;
            }
        }
        if (failed) {
            ++report.n_skipped;
            continue;
        }
        ++report.n_instances;
        for (std::size_t i = 0; i < methods.size(); ++i) {
            for (std::size_t j = i + 1; j < methods.size(); ++j) {
                DisagreementRecord r = disagreement(attrs[i], attrs[j], k);
                r.method_a = methods[i].tag();
                r.method_b = methods[j].tag();
                r.instance = row;
                report.records.push_back(r);
            }
        }
    }

    // aggregate per (i, j) pair; records are stored instance-major
    const std::size_t m = methods.size();
    const std::size_t n_pairs = m * (m - 1) / 2;
    by_pair.assign(n_pairs, {});
    for (std::size_t t = 0; t < report.records.size(); ++t)
        by_pair[t % n_pairs].push_back(&report.records[t]);
    std::size_t p = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            report.aggregates.push_back(
                aggregate_records(methods[i].tag(), methods[j].tag(), by_pair[p++]));
    return report;
}

BoundaryReport run_boundary_experiment(const DecisionFunction& f, const DecisionFunction& g,
                                       const Dataset& test, const Dataset& reference,
                                       const ExplainerConfig& cfg, std::size_t k) {
    if (test.n() == 0) throw InvalidArgument("boundary experiment: empty test set");
    const StandardScaler scaler = fit_scaler(reference);

    BoundaryReport report;
    report.n_total = test.n();
    std::vector<std::size_t> agreeing;
    for (std::size_t row = 0; row < test.n(); ++row) {
        const std::vector<double> x = test.row_vec(row);
        if (f.label(x) == g.label(x)) agreeing.push_back(row);
    }
    report.agreement = static_cast<double>(agreeing.size()) / static_cast<double>(test.n());
    report.n_agreeing = agreeing.size();
    if (agreeing.empty()) throw InvalidArgument("boundary experiment: no agreeing instances");

    const std::string tag_f = "f/" + cfg.tag();
    const std::string tag_g = "g/" + cfg.tag();
    for (std::size_t row : agreeing) {
        const std::vector<double> x = test.row_vec(row);
        try {
            Attribution af = normalize_l1(explain(f, x, cfg, reference, scaler));
            Attribution ag = normalize_l1(explain(g, x, cfg, reference, scaler));
            DisagreementRecord r = disagreement(af, ag, k);
            r.method_a = tag_f;
            r.method_b = tag_g;
            r.instance = row;
            report.records.push_back(r);
        } catch (const std::exception& e) {
            report.failures.push_back({row, cfg.tag(), e.what()});
        }
    }

    std::vector<const DisagreementRecord*> all;
    all.reserve(report.records.size());
    for (const auto& r : report.records) all.push_back(&r);
    report.aggregate = aggregate_records(tag_f, tag_g, all);
    return report;
}

}  // namespace xaudit
