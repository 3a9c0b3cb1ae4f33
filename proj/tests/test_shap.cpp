#include <cmath>
#include <memory>

#include "doctest.h"
#include "oracles.hpp"
#include "xaudit/model.hpp"
#include "xaudit/shap.hpp"
#include "xaudit/synth.hpp"

using namespace xaudit;

namespace {

FeatureSchema continuous_schema(std::size_t d) {
    FeatureSchema s;
    for (std::size_t j = 0; j < d; ++j)
        s.features.push_back(Feature::continuous("f" + std::to_string(j + 1)));
    return s;
}

Dataset dataset_from_rows(const std::vector<std::vector<double>>& rows) {
    Dataset d;
    d.schema = continuous_schema(rows.at(0).size());
    for (const auto& r : rows) {
        d.rows.insert(d.rows.end(), r.begin(), r.end());
        d.labels.push_back(0);
    }
    return d;
}

ValueFunctionSpec interventional(const Dataset& reference) {
    ValueFunctionSpec spec;
    spec.kind = ValueFunctionSpec::Kind::interventional;
    spec.reference = reference;
    return spec;
}

ValueFunctionSpec baseline_at(std::vector<double> point) {
    ValueFunctionSpec spec;
    spec.kind = ValueFunctionSpec::Kind::baseline;
    spec.baseline = std::move(point);
    return spec;
}

double l1_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double efficiency_gap(const DecisionFunction& f, const std::vector<double>& x,
                      const Attribution& phi) {
    double total = phi.base_value;
    for (double v : phi.values) total += v;
    return std::fabs(total - f.score(x));
}

}  // namespace

TEST_CASE("coalition value hand examples") {
    const Dataset ref = dataset_from_rows({{0.0, 0.0}, {2.0, 2.0}});
    LinearScoreFunction f({1.0, 0.0}, 0.0);  // reads only the first feature
    const std::vector<double> x = {5.0, 7.0};
    const auto spec = interventional(ref);

    // full set: composite equals x but the clamp caps the score at 1
    CHECK(coalition_value(f, x, {0, 1}, spec) == f.score(x));
    // empty set: mean of f over reference rows
    CHECK(coalition_value(f, x, {}, spec) == doctest::Approx(0.5).epsilon(1e-12));
    // {first feature}: composite first coordinate is 5 in both rows, clamped to 1
    CHECK(coalition_value(f, x, {0}, spec) == doctest::Approx(1.0).epsilon(1e-12));

    // unclamped check of the spec's arithmetic through a plain callable
    CallableFunction g(2, [](std::span<const double> z) { return z[0] / 10.0; });
    CHECK(coalition_value(g, x, {0}, spec) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("exact: constant function gets zero attribution") {
    const Dataset ref = dataset_from_rows({{0.0, 1.0, 2.0}, {1.0, 0.0, -1.0}});
    ConstantFunction f(3, 0.4);
    const auto phi = shapley_exact(f, {0.5, 0.5, 0.5}, interventional(ref));
    for (double v : phi.values) CHECK(std::fabs(v) < 1e-12);
    CHECK(phi.base_value == doctest::Approx(0.4));
    CHECK(phi.method_tag == "shap-exact/interventional");
}

TEST_CASE("exact: additive model gives w_j * (x_j - mean_ref_j)") {
    const Dataset ref =
        dataset_from_rows({{1.0, 2.0, 0.0}, {3.0, -2.0, 2.0}, {-1.0, 0.0, 4.0}});
    const std::vector<double> w = {0.05, -0.03, 0.02};
    LinearScoreFunction f(w, 0.5);
    const std::vector<double> x = {2.0, 1.0, -1.0};
    const std::vector<double> ref_mean = {1.0, 0.0, 2.0};

    const auto phi = shapley_exact(f, x, interventional(ref));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(phi.values[j] == doctest::Approx(w[j] * (x[j] - ref_mean[j])).epsilon(1e-9));
    CHECK(efficiency_gap(f, x, phi) < 1e-9);
}

TEST_CASE("exact: baseline kind uses the single composite") {
    const std::vector<double> w = {0.05, -0.03, 0.02};
    LinearScoreFunction f(w, 0.5);
    const std::vector<double> x = {2.0, 1.0, -1.0};
    const std::vector<double> b = {0.0, 0.5, 1.0};

    const auto phi = shapley_exact(f, x, baseline_at(b));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(phi.values[j] == doctest::Approx(w[j] * (x[j] - b[j])).epsilon(1e-9));
    CHECK(phi.method_tag == "shap-exact/baseline");
}

TEST_CASE("exact matches the independent enumeration oracle on a forest") {
    auto data = make_clinic_task(160, 11);
    // 3-feature slice keeps the oracle's recursion tiny
    std::vector<std::size_t> keep = {0, 1, 2};
    Dataset small;
    small.schema.features = {data.schema.features[0], data.schema.features[1],
                             data.schema.features[2]};
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto r = data.row(i);
        for (std::size_t j : keep) small.rows.push_back(r[j]);
        small.labels.push_back(data.labels[i]);
    }

    TrainConfig cfg;
    cfg.kind = ModelKind::forest;
    cfg.forest.n_trees = 20;
    cfg.seed = 5;
    const auto trained = train(small, cfg);

    const Dataset ref = small.subset({0, 1, 2, 3, 4, 5, 6, 7});
    const auto x = small.row_vec(9);
    const auto phi = shapley_exact(*trained.model, x, interventional(ref));

    std::vector<std::vector<double>> ref_rows;
    for (std::size_t i = 0; i < ref.n(); ++i) ref_rows.push_back(ref.row_vec(i));
    auto scorer = [&](const std::vector<double>& z) { return trained.model->score(z); };
    const auto expect = oracle::shapley(scorer, x, ref_rows);

    CHECK(max_abs_diff(phi.values, expect) < 1e-9);
    CHECK(efficiency_gap(*trained.model, x, phi) < 1e-9);
}

TEST_CASE("exact: oversized reference is subsampled to the cap, deterministically") {
    auto data = make_clinic_task(400, 3);
    ValueFunctionSpec spec = interventional(data);
    spec.n_reference_samples = 32;
    CHECK(spec.effective_reference().size() == 32);
    CHECK(spec.effective_reference() == spec.effective_reference());

    TrainConfig cfg;
    cfg.kind = ModelKind::forest;
    cfg.forest.n_trees = 10;
    cfg.seed = 2;
    const auto trained = train(data, cfg);

    // the enumeration oracle over the same effective rows must agree, which
    // pins the subsample as part of the value function definition
    std::vector<double> x;
    {
        const auto r = data.row_vec(17);
        x = {r[0], r[1], r[2]};
    }
    CallableFunction f3(3, [&](std::span<const double> z) {
        std::vector<double> full = data.row_vec(17);
        full[0] = z[0];
        full[1] = z[1];
        full[2] = z[2];
        return trained.model->score(full);
    });
    std::vector<std::vector<double>> eff;
    for (const auto& r : spec.effective_reference()) eff.push_back({r[0], r[1], r[2]});
    Dataset effset = dataset_from_rows(eff);
    const auto phi = shapley_exact(f3, x, interventional(effset));
    const auto expect = oracle::shapley([&](const std::vector<double>& z) { return f3.score(z); },
                                        x, eff);
    CHECK(max_abs_diff(phi.values, expect) < 1e-9);
}

TEST_CASE("exact: symmetry, dummy and linearity axioms") {
    const Dataset ref =
        dataset_from_rows({{1.0, 1.0, 0.0}, {-1.0, -1.0, 2.0}, {0.5, 0.5, -2.0}});

    SUBCASE("symmetric features with equal values get equal attribution") {
        CallableFunction f(3, [](std::span<const double> z) {
            return 0.1 * (z[0] + z[1]) + 0.02 * z[2] * z[2] + 0.3;
        });
        const auto phi = shapley_exact(f, {0.7, 0.7, 1.0}, interventional(ref));
        CHECK(std::fabs(phi.values[0] - phi.values[1]) < 1e-9);
    }

    SUBCASE("a feature the function never reads gets zero") {
        CallableFunction f(3, [](std::span<const double> z) { return 0.2 * z[0] + 0.1 * z[2]; });
        const auto phi = shapley_exact(f, {1.0, 5.0, 1.0}, interventional(ref));
        CHECK(std::fabs(phi.values[1]) < 1e-9);
    }

    SUBCASE("attribution is linear in the function") {
        // ranges chosen so the [0,1] clamp never binds on any composite
        CallableFunction f(3, [](std::span<const double> z) { return 0.1 * z[0] + 0.3; });
        CallableFunction g(3, [](std::span<const double> z) { return 0.5 + 0.1 * z[1] * z[2]; });
        CallableFunction h(3, [](std::span<const double> z) {
            return 0.4 * (0.1 * z[0] + 0.3) + 0.5 * (0.5 + 0.1 * z[1] * z[2]);
        });
        const auto spec = interventional(ref);
        const std::vector<double> x = {0.6, 0.8, 0.4};
        const auto pf = shapley_exact(f, x, spec);
        const auto pg = shapley_exact(g, x, spec);
        const auto ph = shapley_exact(h, x, spec);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(ph.values[j] == doctest::Approx(0.4 * pf.values[j] + 0.5 * pg.values[j])
                                      .epsilon(1e-9));
    }
}

TEST_CASE("exact refuses above 15 features and points at the kernel estimator") {
    ConstantFunction f(16, 0.5);
    Dataset ref = dataset_from_rows({std::vector<double>(16, 0.0)});
    bool threw = false;
    try {
        shapley_exact(f, std::vector<double>(16, 1.0), interventional(ref));
    } catch (const InvalidArgument& e) {
        threw = true;
        CHECK(std::string(e.what()).find("kernel") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("kernel with full enumeration matches exact") {
    auto data = make_correlated_task(300, 7);
    TrainConfig cfg;
    cfg.kind = ModelKind::gbt;
    cfg.gbt.n_rounds = 40;
    cfg.seed = 7;
    const auto trained = train(data, cfg);

    ValueFunctionSpec spec = interventional(data.subset({0, 1, 2, 3, 4, 5, 6, 7, 9, 11}));
    const auto x = data.row_vec(21);

    const auto exact = shapley_exact(*trained.model, x, spec);
    const std::size_t full = (std::size_t{1} << 6) - 2;
    const auto kernel = shapley_kernel(*trained.model, x, spec, full, 1e-9, 123);

    CHECK(max_abs_diff(exact.values, kernel.values) < 1e-6);
    CHECK(kernel.method_tag.find("/full") != std::string::npos);
    CHECK(efficiency_gap(*trained.model, x, kernel) < 1e-6);
}

TEST_CASE("kernel: constant function, determinism, seed spread") {
    SUBCASE("constant function gives zeros") {
        ConstantFunction f(12, 0.25);
        auto data = make_income_task(200, 19);
        ValueFunctionSpec spec = interventional(data);
        spec.n_reference_samples = 40;
        const auto phi = shapley_kernel(f, data.row_vec(0), spec, 300, 1e-6, 5);
        for (double v : phi.values) CHECK(std::fabs(v) < 1e-9);
    }

    auto data = make_income_task(420, 19);
    TrainConfig cfg;
    cfg.kind = ModelKind::gbt;
    cfg.gbt.n_rounds = 60;
    cfg.seed = 19;
    const auto trained = train(data, cfg);
    ValueFunctionSpec spec = interventional(data);
    spec.n_reference_samples = 48;
    const auto x = data.row_vec(33);

    SUBCASE("same seed reproduces bit-identical values") {
        const auto a = shapley_kernel(*trained.model, x, spec, 600, 1e-6, 42);
        const auto b = shapley_kernel(*trained.model, x, spec, 600, 1e-6, 42);
        CHECK(a.values == b.values);
        CHECK(a.method_tag == b.method_tag);
    }

    SUBCASE("two seeds at n=2000 stay within 5% of the attribution mass") {
        const auto a = shapley_kernel(*trained.model, x, spec, 2000, 1e-6, 1);
        const auto b = shapley_kernel(*trained.model, x, spec, 2000, 1e-6, 2);
        const double scale = l1_norm(a.values);
        CHECK(scale > 0.0);
        CHECK(max_abs_diff(a.values, b.values) < 0.05 * scale);
    }
}

TEST_CASE("kernel error shrinks toward exact as coalitions are added") {
    auto data = make_clinic_task(240, 29);
    // 8-feature slice: drop the last two columns
    Dataset small;
    small.schema.features.assign(data.schema.features.begin(), data.schema.features.begin() + 8);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto r = data.row(i);
        for (std::size_t j = 0; j < 8; ++j) small.rows.push_back(r[j]);
        small.labels.push_back(data.labels[i]);
    }
    TrainConfig cfg;
    cfg.kind = ModelKind::forest;
    cfg.forest.n_trees = 24;
    cfg.seed = 3;
    const auto trained = train(small, cfg);

    ValueFunctionSpec spec = interventional(small);
    spec.n_reference_samples = 24;
    const auto x = small.row_vec(5);
    const auto exact = shapley_exact(*trained.model, x, spec);

    const std::size_t full = (std::size_t{1} << 8) - 2;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {std::size_t{40}, std::size_t{120}, full}) {
        const auto est = shapley_kernel(*trained.model, x, spec, n, 1e-8, 42);
        const double err = max_abs_diff(est.values, exact.values);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
    CHECK(prev < 1e-6);  // exact at the full enumeration
}

TEST_CASE("reference sensitivity report") {
    SUBCASE("identical specs mean zero delta") {
        const Dataset ref = dataset_from_rows({{0.0, 1.0}, {1.0, 0.0}});
        LinearScoreFunction f({0.3, 0.2}, 0.1);
        const auto rep =
            attribution_sensitivity_to_reference(f, {1.0, 1.0}, interventional(ref),
                                                 interventional(ref));
        CHECK(rep.l1_delta == doctest::Approx(0.0).epsilon(1e-12));
        CHECK_FALSE(rep.argmax_changed);
    }

    SUBCASE("a feature the model ignores stays at zero under reference shift") {
        LinearScoreFunction f({0.05, 0.0, 0.04}, 0.3);
        const Dataset ref_a =
            dataset_from_rows({{1.0, 2.0, 0.5}, {0.0, 1.0, 1.5}, {2.0, 3.0, 1.0}});
        Dataset ref_b = ref_a;
        for (std::size_t i = 0; i < ref_b.n(); ++i) ref_b.rows[i * 3 + 1] += 10.0;
        const auto rep = attribution_sensitivity_to_reference(
            f, {1.5, 0.5, 2.0}, interventional(ref_a), interventional(ref_b));
        CHECK(std::fabs(rep.phi_a.values[1]) < 1e-9);
        CHECK(std::fabs(rep.phi_b.values[1]) < 1e-9);
    }

    SUBCASE("two-group toy: swapping the reference flips the top feature") {
        auto toy = make_two_group_toy(150, 4);
        TrainConfig cfg;
        cfg.kind = ModelKind::gbt;
        cfg.seed = 4;
        const auto trained = train(toy, cfg);

        // near the group's own decision boundary the full-data reference
        // shifts the attribution mass onto the group-separating feature
        std::vector<std::size_t> g1_rows;
        for (std::size_t i = 0; i < toy.n(); ++i)
            if (toy.group[i] == 0) g1_rows.push_back(i);
        std::sort(g1_rows.begin(), g1_rows.end(), [&](std::size_t a, std::size_t b) {
            return std::fabs(toy.row(a)[0]) < std::fabs(toy.row(b)[0]);
        });

        ValueFunctionSpec own_group = interventional(toy.subset(g1_rows));
        ValueFunctionSpec full_data = interventional(toy);
        bool flipped = false;
        for (std::size_t c = 0; c < std::min<std::size_t>(g1_rows.size(), 30) && !flipped; ++c) {
            const auto rep = attribution_sensitivity_to_reference(
                *trained.model, toy.row_vec(g1_rows[c]), own_group, full_data);
            if (rep.argmax_a == 0 && rep.argmax_b == 1) {
                CHECK(rep.argmax_changed);
                CHECK(rep.l1_delta > 0.2);
                flipped = true;
            }
        }
        CHECK(flipped);
    }
}
