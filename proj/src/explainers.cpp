#include "xaudit/explainers.hpp"

#include <algorithm>
#include <cstdio>

#include "xaudit/error.hpp"
#include "xaudit/rng.hpp"

namespace xaudit {

std::string to_string(ExplainMethod m) {
    switch (m) {
        case ExplainMethod::shap_exact: return "shap-exact";
        case ExplainMethod::shap_kernel: return "shap-kernel";
        case ExplainMethod::lime: return "lime";
        case ExplainMethod::counterfactual: return "counterfactual";
    }
    throw InvalidArgument("unknown explain method");
}

ExplainMethod explain_method_from_string(const std::string& s) {
    if (s == "shap-exact") return ExplainMethod::shap_exact;
    if (s == "shap-kernel") return ExplainMethod::shap_kernel;
    if (s == "lime") return ExplainMethod::lime;
    if (s == "counterfactual") return ExplainMethod::counterfactual;
    throw InvalidArgument("unknown explain method: " + s);
}

namespace {

std::string trim_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::string ExplainerConfig::tag() const {
    std::string t = to_string(method);
    if (method == ExplainMethod::shap_exact || method == ExplainMethod::shap_kernel) {
        t += value_kind == ValueFunctionSpec::Kind::baseline ? "/baseline" : "/interventional";
        if (method == ExplainMethod::shap_kernel) t += "/m=" + std::to_string(n_coalitions);
    } else if (method == ExplainMethod::lime) {
        if (lime_bandwidth > 0.0) t += "/b=" + trim_real(lime_bandwidth);
        if (lime_samples != 5000) t += "/n=" + std::to_string(lime_samples);
        if (lime_top_k > 0) t += "/k=" + std::to_string(lime_top_k);
    } else if (method == ExplainMethod::counterfactual) {
        t += "/k=" + std::to_string(cf_k);
    }
    return t;
}

std::vector<double> typical_point(const StandardScaler& s) {
    std::vector<double> p(s.dim());
    for (std::size_t j = 0; j < s.dim(); ++j) {
        if (s.schema.is_continuous(j)) {
            p[j] = s.median[j];
        } else {
            const auto& freq = s.category_freq[j];
            std::size_t mode = 0;
            for (std::size_t c = 1; c < freq.size(); ++c)
                if (freq[c] > freq[mode]) mode = c;
            p[j] = static_cast<double>(mode);
        }
    }
    return p;
}

namespace {

ValueFunctionSpec make_value_spec(const ExplainerConfig& cfg, const Dataset& reference,
                                  const StandardScaler& scaler) {
    ValueFunctionSpec spec;
    spec.kind = cfg.value_kind;
    spec.n_reference_samples = cfg.n_reference_samples;
    if (spec.kind == ValueFunctionSpec::Kind::interventional) {
        spec.reference = reference;
    } else {
        spec.baseline = cfg.baseline.empty() ? typical_point(scaler) : cfg.baseline;
    }
    return spec;
}

}  // namespace

Attribution explain(const DecisionFunction& f, const std::vector<double>& x,
                    const ExplainerConfig& cfg, const Dataset& reference,
                    const StandardScaler& scaler) {
    switch (cfg.method) {
        case ExplainMethod::shap_exact:
            return shapley_exact(f, x, make_value_spec(cfg, reference, scaler));
        case ExplainMethod::shap_kernel:
            return shapley_kernel(f, x, make_value_spec(cfg, reference, scaler), cfg.n_coalitions,
                                  cfg.ridge, derive_seed(cfg.seed, "explain.kernel"));
        case ExplainMethod::lime: {
            SurrogateConfig sc;
            sc.n_perturbations = cfg.lime_samples;
            sc.bandwidth = cfg.lime_bandwidth;
            sc.top_k = cfg.lime_top_k;
            sc.ridge = cfg.ridge;
            sc.seed = derive_seed(cfg.seed, "explain.lime");
            return explain_lime(f, x, sc, scaler);
        }
        case ExplainMethod::counterfactual: {
            CfContext ctx = CfContext::from_scaler(scaler);
            CounterfactualSet set =
                diverse_counterfactuals(f, x, cfg.cf_k, cfg.cf_width, cfg.cf_budget,
                                        derive_seed(cfg.seed, "explain.cf"), ctx);
            if (set.items.empty()) {
                Attribution a;
                a.values.assign(x.size(), 0.0);
                a.base_value = 0.0;
                a.instance = x;
                a.method_tag = "counterfactual-frequency/empty";
                a.degenerate = true;
                return a;
            }
            return counterfactual_attribution(x, set, ctx);
        }
    }
    throw InvalidArgument("unknown explain method");
}

}  // namespace xaudit
