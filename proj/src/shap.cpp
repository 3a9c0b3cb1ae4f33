#include "xaudit/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "xaudit/linalg.hpp"
#include "xaudit/rng.hpp"

namespace xaudit {

void ValueFunctionSpec::validate(std::size_t d) const {
    if (n_reference_samples < 1) throw InvalidArgument("value function: sample cap must be >= 1");
    if (kind == Kind::interventional) {
        if (reference.n() == 0) throw InvalidArgument("value function: empty reference dataset");
        if (reference.dim() != d) throw InvalidArgument("value function: reference dimension mismatch");
    } else {
        if (baseline.size() != d) throw InvalidArgument("value function: baseline dimension mismatch");
    }
}

std::vector<std::vector<double>> ValueFunctionSpec::effective_reference() const {
    if (kind == Kind::baseline) return {baseline};
    const std::size_t n = reference.n();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (n > n_reference_samples) {
        // fixed internal stream: every estimator must average the same rows
        Rng rng(derive_seed(0x9e3779b97f4a7c15ULL, "shap.reference_subsample"));
        rng.shuffle(idx);
        idx.resize(n_reference_samples);
        std::sort(idx.begin(), idx.end());
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(idx.size());
    for (std::size_t i : idx) rows.push_back(reference.row_vec(i));
    return rows;
}

namespace {

// Evaluates coalition values against materialized reference rows; one
// scratch composite avoids per-call allocation.
struct CoalitionEvaluator {
    const DecisionFunction& f;
    const std::vector<double>& x;
    const std::vector<std::vector<double>>& refs;
    std::vector<double> scratch;

    double value(std::uint64_t mask) {
        const std::size_t d = x.size();
        double total = 0.0;
        for (const auto& r : refs) {
            scratch = r;
            for (std::size_t j = 0; j < d; ++j)
                if (mask & (1ULL << j)) scratch[j] = x[j];
            total += f.score(scratch);
        }
        return total / static_cast<double>(refs.size());
    }
};

double binomial(std::size_t n, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

}  // namespace

double coalition_value(const DecisionFunction& f, const std::vector<double>& x,
                       const std::vector<std::size_t>& s, const ValueFunctionSpec& spec) {
    spec.validate(x.size());
    std::uint64_t mask = 0;
    for (std::size_t j : s) {
        if (j >= x.size()) throw InvalidArgument("coalition member out of range");
        mask |= 1ULL << j;
    }
    const auto refs = spec.effective_reference();
    CoalitionEvaluator ev{f, x, refs, {}};
    return ev.value(mask);
}

Attribution shapley_exact(const DecisionFunction& f, const std::vector<double>& x,
                          const ValueFunctionSpec& spec) {
    spec.validate(x.size());
    const std::size_t d = x.size();
    if (d > 15)
        throw InvalidArgument(
            "shapley_exact: dimension above 15 needs 2^d coalition values; use the kernel estimator");

    const auto refs = spec.effective_reference();
    CoalitionEvaluator ev{f, x, refs, {}};

    const std::uint64_t n_masks = 1ULL << d;
    std::vector<double> v(n_masks);
    for (std::uint64_t m = 0; m < n_masks; ++m) v[m] = ev.value(m);

    // phi_i = sum over S without i of |S|!(d-|S|-1)!/d! (v(S+i) - v(S))
    std::vector<double> size_weight(d);
    {
        std::vector<double> fact(d + 1, 1.0);
        for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
        for (std::size_t s = 0; s < d; ++s) size_weight[s] = fact[s] * fact[d - s - 1] / fact[d];
    }

    Attribution out;
    out.values.assign(d, 0.0);
    out.instance = x;
    out.base_value = v[0];
    out.method_tag = "shap-exact/" + spec.kind_tag();
    for (std::uint64_t m = 0; m < n_masks; ++m) {
        const auto s = static_cast<std::size_t>(std::popcount(m));
        for (std::size_t i = 0; i < d; ++i) {
            if (m & (1ULL << i)) continue;
            out.values[i] += size_weight[s] * (v[m | (1ULL << i)] - v[m]);
        }
    }
    out.check_finite();
    return out;
}

Attribution shapley_kernel(const DecisionFunction& f, const std::vector<double>& x,
                           const ValueFunctionSpec& spec, std::size_t n_coalitions, double ridge,
                           std::uint64_t seed) {
    spec.validate(x.size());
    const std::size_t d = x.size();
    if (d < 2) throw InvalidArgument("shapley_kernel: need at least 2 features");
    if (n_coalitions < d + 2) throw InvalidArgument("shapley_kernel: n_coalitions must be >= d + 2");
    if (d > 62) throw InvalidArgument("shapley_kernel: dimension above 62 unsupported");

    const auto refs = spec.effective_reference();
    CoalitionEvaluator ev{f, x, refs, {}};

    const double v0 = ev.value(0);
    const std::uint64_t full = d >= 64 ? ~0ULL : (1ULL << d) - 1;
    const double vf = ev.value(full);
    const double delta = vf - v0;

    // kernel mass of the size-s stratum: p(s) proportional to (d-1)/(s(d-s));
    // per-coalition analytic weight w(s) = p-mass / C(d,s)
    std::vector<double> stratum_mass(d, 0.0);
    double mass_total = 0.0;
    for (std::size_t s = 1; s <= d - 1; ++s) {
        stratum_mass[s] =
            static_cast<double>(d - 1) / (static_cast<double>(s) * static_cast<double>(d - s));
        mass_total += stratum_mass[s];
    }
    for (std::size_t s = 1; s <= d - 1; ++s) stratum_mass[s] /= mass_total;

    // coalition -> accumulated weight, in first-seen order for determinism
    std::vector<std::uint64_t> masks;
    std::vector<double> weights;
    std::map<std::uint64_t, std::size_t> seen;
    auto add = [&](std::uint64_t m, double w) {
        auto it = seen.find(m);
        if (it == seen.end()) {
            seen.emplace(m, masks.size());
            masks.push_back(m);
            weights.push_back(w);
        } else {
            weights[it->second] += w;
        }
    };

    const bool full_enumeration = d <= 25 && n_coalitions >= (1ULL << d) - 2;
    std::string tag_extra;
    if (full_enumeration) {
        for (std::uint64_t m = 1; m < full; ++m) {
            const auto s = static_cast<std::size_t>(std::popcount(m));
            add(m, stratum_mass[s] / binomial(d, s));
        }
        tag_extra = "/full";
    } else {
        Rng rng(derive_seed(seed, "shap.kernel.coalitions"));
        // pair complements so strata s and d-s fill together
        std::vector<std::size_t> order;
        for (std::size_t s = 1; s <= d / 2; ++s) order.push_back(s);
        std::vector<double> budget_share(d, 0.0);
        for (std::size_t s = 1; s <= d - 1; ++s)
            budget_share[s] = stratum_mass[s] * static_cast<double>(n_coalitions);

        std::vector<std::size_t> pool(d);
        for (std::size_t s : order) {
            const std::size_t partner = d - s;
            const bool self_paired = partner == s;
            const double want_d = budget_share[s] + (self_paired ? 0.0 : budget_share[partner]);
            auto want = static_cast<std::size_t>(std::llround(want_d));
            if (want == 0) want = 2;
            const double count = binomial(d, s);
            const double pair_total = self_paired ? count : 2.0 * count;
            if (pair_total <= static_cast<double>(want)) {
                // cheap stratum: enumerate every coalition of size s (and
                // complements), analytic weights
                std::vector<std::size_t> comb(s);
                for (std::size_t i = 0; i < s; ++i) comb[i] = i;
                while (true) {
                    std::uint64_t m = 0;
                    for (std::size_t i : comb) m |= 1ULL << i;
                    add(m, stratum_mass[s] / count);
                    if (!self_paired) add(full ^ m, stratum_mass[partner] / count);
                    std::size_t k = s;
                    while (k > 0 && comb[k - 1] == d - s + k - 1) --k;
                    if (k == 0) break;
                    ++comb[k - 1];
                    for (std::size_t i = k; i < s; ++i) comb[i] = comb[i - 1] + 1;
                }
            } else {
                const std::size_t draws = std::max<std::size_t>(1, self_paired ? want : want / 2);
                const double w_s = stratum_mass[s] / static_cast<double>(draws);
                const double w_p = stratum_mass[partner] / static_cast<double>(draws);
                for (std::size_t t = 0; t < draws; ++t) {
                    for (std::size_t j = 0; j < d; ++j) pool[j] = j;
                    std::uint64_t m = 0;
                    for (std::size_t i = 0; i < s; ++i) {
                        const std::size_t r = i + rng.uniform_index(d - i);
                        std::swap(pool[i], pool[r]);
                        m |= 1ULL << pool[i];
                    }
                    add(m, w_s);
                    if (!self_paired) add(full ^ m, w_p);
                }
            }
        }
        tag_extra = "/sampled:" + std::to_string(masks.size());
    }

    // sort by mask so the normal equations accumulate in a fixed order
    std::vector<std::size_t> perm(masks.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return masks[a] < masks[b]; });

    // regression with the efficiency constraint eliminated into feature d-1:
    //   target  t_S = v(S) - v0 - [d-1 in S] * delta
    //   columns a_i = [i in S] - [d-1 in S],  i < d-1
    const std::size_t cols = d - 1;
    Matrix design(masks.size(), cols);
    std::vector<double> target(masks.size());
    std::vector<double> wvec(masks.size());
    for (std::size_t r = 0; r < perm.size(); ++r) {
        const std::uint64_t m = masks[perm[r]];
        const double has_last = (m >> (d - 1)) & 1 ? 1.0 : 0.0;
        for (std::size_t i = 0; i < cols; ++i)
            design(r, i) = (((m >> i) & 1) ? 1.0 : 0.0) - has_last;
        target[r] = ev.value(m) - v0 - has_last * delta;
        wvec[r] = weights[perm[r]];
    }

    std::vector<double> coef;
    double used_ridge = ridge;
    bool escalated = false;
    while (true) {
        try {
            coef = weighted_ridge(design, target, wvec, used_ridge, true);
            break;
        } catch (const InvalidArgument&) {
            const double next = used_ridge <= 0.0 ? 1e-6 : used_ridge * 10.0;
            if (next > 1e-2) throw;
            used_ridge = next;
            escalated = true;
        }
    }

    Attribution out;
    out.values.assign(d, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < cols; ++i) {
        out.values[i] = coef[i];
        sum += coef[i];
    }
    out.values[d - 1] = delta - sum;
    out.base_value = v0;
    out.instance = x;
    out.method_tag = "shap-kernel/" + spec.kind_tag() + tag_extra;
    if (escalated)
        out.method_tag += "/ridge=" + std::to_string(used_ridge);
    out.check_finite();
    return out;
}

ReferenceSensitivity attribution_sensitivity_to_reference(const DecisionFunction& f,
                                                          const std::vector<double>& x,
                                                          const ValueFunctionSpec& spec_a,
                                                          const ValueFunctionSpec& spec_b) {
    ReferenceSensitivity r;
    r.phi_a = shapley_exact(f, x, spec_a);
    r.phi_b = shapley_exact(f, x, spec_b);
    r.argmax_a = argmax_abs(r.phi_a.values);
    r.argmax_b = argmax_abs(r.phi_b.values);
    r.argmax_changed = r.argmax_a != r.argmax_b;
    const auto na = normalize_l1(r.phi_a);
    const auto nb = normalize_l1(r.phi_b);
    double delta = 0.0;
    for (std::size_t j = 0; j < na.values.size(); ++j)
        delta += std::fabs(na.values[j] - nb.values[j]);
    r.l1_delta = delta;
    return r;
}

}  // namespace xaudit
