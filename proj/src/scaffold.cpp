#include "xaudit/scaffold.hpp"

#include "xaudit/error.hpp"
#include "xaudit/lime.hpp"
#include "xaudit/rng.hpp"
#include "xaudit/scaler.hpp"

namespace xaudit {

std::string to_string(PerturbationScheme s) {
    switch (s) {
        case PerturbationScheme::lime_gaussian: return "lime-gaussian";
        case PerturbationScheme::shap_composite: return "shap-composite";
    }
    throw InvalidArgument("unknown perturbation scheme");
}

ScaffoldResult scaffold(std::shared_ptr<DecisionFunction> real,
                        std::shared_ptr<DecisionFunction> decoy, const Dataset& train_data,
                        PerturbationScheme scheme, std::uint64_t seed) {
    if (!real || !decoy) throw InvalidArgument("scaffold: null inner function");
    if (train_data.n() == 0) throw InvalidArgument("scaffold: empty training data");
    const std::size_t d = train_data.dim();
    if (real->dim() != d || decoy->dim() != d)
        throw InvalidArgument("scaffold: dimension mismatch between inner functions and data");

    const StandardScaler scaler = fit_scaler(train_data);
    Rng rng(derive_seed(seed, "scaffold.sampler"));

    // discrimination task: each real row paired with one sampler draw
    Dataset disc;
    disc.schema = train_data.schema;
    const std::size_t n = train_data.n();
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> x = train_data.row_vec(i);
        for (double v : x) disc.rows.push_back(v);
        disc.labels.push_back(0);

        std::vector<double> z;
        if (scheme == PerturbationScheme::lime_gaussian) {
            Matrix cloud = perturb(x, scaler, 2, rng.next_u64());
            z.assign(d, 0.0);
            for (std::size_t j = 0; j < d; ++j) z[j] = cloud(1, j);
        } else {
            const auto partner = train_data.row(rng.uniform_index(n));
            z = x;
            for (std::size_t j = 0; j < d; ++j)
                if (rng.bernoulli(0.5)) z[j] = partner[j];
        }
        for (double v : z) disc.rows.push_back(v);
        disc.labels.push_back(1);
    }

    auto [fit_part, held_out] = split(disc, 0.2, derive_seed(seed, "scaffold.split"));
    TrainConfig det_cfg;
    det_cfg.kind = ModelKind::forest;
    det_cfg.seed = derive_seed(seed, "scaffold.detector");
    TrainOutput det = train(fit_part, det_cfg, &held_out);

    ScaffoldResult result;
    result.detector_accuracy = det.test_accuracy.value_or(0.0);
    result.weak_detector = result.detector_accuracy < 0.6;
    result.function =
        std::make_shared<ScaffoldedFunction>(std::move(real), std::move(decoy), det.model);
    return result;
}

}  // namespace xaudit
