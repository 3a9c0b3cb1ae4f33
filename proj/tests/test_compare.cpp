#include <cmath>
#include <string>

#include "doctest.h"
#include "xaudit/compare.hpp"
#include "xaudit/rng.hpp"
#include "xaudit/scaler.hpp"
#include "xaudit/synth.hpp"

using namespace xaudit;

namespace {

Attribution attr(std::vector<double> v) {
    Attribution a;
    a.values = std::move(v);
    a.method_tag = "test";
    return a;
}

FeatureSchema continuous_schema(std::size_t d) {
    FeatureSchema s;
    for (std::size_t j = 0; j < d; ++j) s.features.push_back(Feature::continuous("f" + std::to_string(j)));
    return s;
}

}  // namespace

TEST_CASE("l1 normalization hand values, idempotence, argmax invariance") {
    Attribution a = normalize_l1(attr({2.0, -2.0}));
    CHECK(a.values[0] == doctest::Approx(0.5));
    CHECK(a.values[1] == doctest::Approx(-0.5));
    CHECK_FALSE(a.degenerate);

    Attribution z = normalize_l1(attr({0.0, 0.0, 0.0}));
    CHECK(z.values == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(z.degenerate);

    Attribution raw = attr({0.3, -1.2, 0.7, 0.05});
    Attribution once = normalize_l1(raw);
    Attribution twice = normalize_l1(once);
    for (std::size_t j = 0; j < 4; ++j) CHECK(twice.values[j] == doctest::Approx(once.values[j]));
    CHECK(argmax_abs(raw.values) == argmax_abs(once.values));
}

TEST_CASE("disagreement metrics") {
    SUBCASE("hand vectors") {
        Attribution a = attr({0.6, 0.3, 0.1});
        Attribution b = attr({0.1, 0.3, 0.6});
        DisagreementRecord r = disagreement(a, b, 2);
        CHECK_FALSE(r.top1_match);
        CHECK(r.topk_overlap == doctest::Approx(0.5));
        CHECK(r.l1_delta == doctest::Approx(1.0));
        // magnitude ranks are exactly reversed
        CHECK(r.rank_corr == doctest::Approx(-1.0));
        CHECK(r.sign_agreement == doctest::Approx(1.0));
    }
    SUBCASE("identity record") {
        for (auto v : {std::vector<double>{0.6, 0.3, 0.1}, std::vector<double>{-0.25, 0.25, 0.25, -0.25},
                       std::vector<double>{0.0, 1.0, 0.0}}) {
            Attribution a = attr(v);
            DisagreementRecord r = disagreement(a, a, 3);
            CHECK(r.top1_match);
            CHECK(r.topk_overlap == doctest::Approx(1.0));
            CHECK(r.rank_corr == doctest::Approx(1.0));
            CHECK(r.sign_agreement == doctest::Approx(1.0));
            CHECK(r.l1_delta == doctest::Approx(0.0));
        }
    }
    SUBCASE("negated attribution keeps rank structure, loses signs") {
        Attribution a = attr({0.5, -0.3, 0.2});
        Attribution b = attr({-0.5, 0.3, -0.2});
        DisagreementRecord r = disagreement(a, b, 3);
        CHECK(r.sign_agreement == doctest::Approx(0.0));
        CHECK(r.rank_corr == doctest::Approx(1.0));
        CHECK(r.top1_match);
    }
    SUBCASE("symmetry") {
        Attribution a = attr({0.45, -0.35, 0.15, 0.05});
        Attribution b = attr({0.05, 0.55, -0.25, 0.15});
        DisagreementRecord ab = disagreement(a, b, 2);
        DisagreementRecord ba = disagreement(b, a, 2);
        CHECK(ab.top1_match == ba.top1_match);
        CHECK(ab.topk_overlap == doctest::Approx(ba.topk_overlap));
        CHECK(ab.rank_corr == doctest::Approx(ba.rank_corr));
        CHECK(ab.sign_agreement == doctest::Approx(ba.sign_agreement));
        CHECK(ab.l1_delta == doctest::Approx(ba.l1_delta));
    }
    SUBCASE("average ranks on tied magnitudes") {
        // ranks (3, 1.5, 1.5) vs (1.5, 3, 1.5) correlate at -1/2
        Attribution a = attr({0.5, 0.25, 0.25});
        Attribution b = attr({0.25, 0.5, 0.25});
        CHECK(disagreement(a, b, 3).rank_corr == doctest::Approx(-0.5));
    }
    SUBCASE("constant magnitudes") {
        Attribution flat = attr({0.25, -0.25, 0.25, -0.25});
        Attribution spread = attr({0.7, 0.2, 0.05, 0.05});
        CHECK(disagreement(flat, flat, 3).rank_corr == doctest::Approx(1.0));
        CHECK(disagreement(flat, spread, 3).rank_corr == doctest::Approx(0.0));
    }
    SUBCASE("argmax ties break to the lowest index") {
        Attribution a = attr({0.5, -0.5});
        Attribution b = attr({0.5, 0.5});
        CHECK(disagreement(a, b, 1).top1_match);
    }
    SUBCASE("k larger than the dimension grades out of the dimension") {
        Attribution a = attr({0.6, 0.4});
        CHECK(disagreement(a, a, 10).topk_overlap == doctest::Approx(1.0));
    }
    SUBCASE("vacuous sign agreement") {
        Attribution a = attr({0.0, 1.0});
        Attribution b = attr({1.0, 0.0});
        CHECK(disagreement(a, b, 1).sign_agreement == doctest::Approx(1.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(disagreement(attr({1.0}), attr({0.5, 0.5}), 1), InvalidArgument);
        CHECK_THROWS_AS(disagreement(attr({1.0}), attr({1.0}), 0), InvalidArgument);
        CHECK_THROWS_AS(disagreement(attr({}), attr({}), 1), InvalidArgument);
    }
}

TEST_CASE("explain method names round-trip") {
    for (auto m : {ExplainMethod::shap_exact, ExplainMethod::shap_kernel, ExplainMethod::lime,
                   ExplainMethod::counterfactual})
        CHECK(explain_method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(explain_method_from_string("gradcam"), InvalidArgument);

    ExplainerConfig cfg;
    cfg.method = ExplainMethod::shap_kernel;
    cfg.n_coalitions = 1500;
    CHECK(cfg.tag() == "shap-kernel/interventional/m=1500");
    cfg.method = ExplainMethod::counterfactual;
    cfg.cf_k = 7;
    CHECK(cfg.tag() == "counterfactual/k=7");
}

TEST_CASE("default baseline point is medians and modes") {
    FeatureSchema schema;
    schema.features.push_back(Feature::continuous("age"));
    schema.features.push_back(Feature::continuous("bias"));
    schema.features.push_back(Feature::categorical("plan", {"a", "b", "c"}));
    Dataset d;
    d.schema = schema;
    d.rows = {1, 0, 0, 2, 0, 1, 3, 0, 1, 4, 0, 2, 100, 0, 1};
    d.labels = {0, 0, 1, 1, 0};

    StandardScaler scaler = fit_scaler(d);
    std::vector<double> base = typical_point(scaler);
    CHECK(base[0] == doctest::Approx(3.0));
    CHECK(base[1] == doctest::Approx(0.0));
    CHECK(base[2] == doctest::Approx(1.0));

    // empty cfg.baseline resolves to that point: phi_j = w_j (x_j - base_j)
    LinearScoreFunction f({0.1, -0.05, 0.02}, 0.4);
    ExplainerConfig cfg;
    cfg.method = ExplainMethod::shap_exact;
    cfg.value_kind = ValueFunctionSpec::Kind::baseline;
    std::vector<double> x = {5.0, 1.0, 2.0};
    Attribution a = explain(f, x, cfg, d, scaler);
    CHECK(a.values[0] == doctest::Approx(0.1 * 2.0));
    CHECK(a.values[1] == doctest::Approx(-0.05 * 1.0));
    CHECK(a.values[2] == doctest::Approx(0.02 * 1.0));
}

TEST_CASE("counterfactual dispatch yields frequency attribution or degenerate zeros") {
    Dataset toy = make_two_group_toy(120, 21);
    StandardScaler scaler = fit_scaler(toy);
    ExplainerConfig cfg;
    cfg.method = ExplainMethod::counterfactual;
    cfg.cf_k = 6;
    cfg.cf_budget = 6000;
    cfg.seed = 21;

    SigmoidLinearFunction f({2.0, 0.0}, 0.0);
    std::vector<double> x = {-1.0, 0.2};
    Attribution a = explain(f, x, cfg, toy, scaler);
    CHECK(a.method_tag.find("counterfactual-frequency") == 0);
    double sum = 0.0;
    for (double v : a.values) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0));

    ConstantFunction flat(2, 0.8);
    Attribution z = explain(flat, x, cfg, toy, scaler);
    CHECK(z.degenerate);
    CHECK(z.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("same config twice yields identity records") {
    Dataset income = make_income_task(600, 11);
    auto [train_d, test_d] = split(income, 0.2, 11);
    TrainConfig tc;
    tc.kind = ModelKind::gbt;
    tc.gbt.n_rounds = 30;
    tc.seed = 11;
    auto out = train(train_d, tc);
    Dataset probe = test_d.subset({0, 1, 2, 3});

    ExplainerConfig li;
    li.method = ExplainMethod::lime;
    li.lime_samples = 2000;
    li.seed = 9;
    DisagreementReport rep = run_disagreement_experiment(*out.model, probe, train_d, {li, li}, 3);
    CHECK(rep.n_instances == 4);
    CHECK(rep.n_skipped == 0);
    CHECK(rep.records.size() == 4);
    for (const auto& r : rep.records) {
        CHECK(r.top1_match);
        CHECK(r.l1_delta == doctest::Approx(0.0));
        CHECK(r.topk_overlap == doctest::Approx(1.0));
    }
    CHECK(rep.aggregates.size() == 1);
    CHECK(rep.aggregates[0].top1_match_rate == doctest::Approx(1.0));

    CHECK_THROWS_AS(run_disagreement_experiment(*out.model, probe, train_d, {li}, 3), InvalidArgument);
}

TEST_CASE("exact shapley and lime pick different top features on the income model") {
    Dataset income = make_income_task(1200, 11);
    auto [train_d, test_d] = split(income, 0.2, 11);
    TrainConfig tc;
    tc.kind = ModelKind::gbt;
    tc.gbt.n_rounds = 60;
    tc.seed = 11;
    auto out = train(train_d, tc);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 10; ++i) idx.push_back(i);
    Dataset probe = test_d.subset(idx);

    ExplainerConfig se;
    se.method = ExplainMethod::shap_exact;
    se.n_reference_samples = 32;
    se.seed = 11;
    ExplainerConfig li;
    li.method = ExplainMethod::lime;
    li.lime_samples = 3000;
    li.seed = 11;
    DisagreementReport rep = run_disagreement_experiment(*out.model, probe, train_d, {se, li}, 3);
    CHECK(rep.n_instances == 10);
    std::size_t mismatches = 0;
    for (const auto& r : rep.records)
        if (!r.top1_match) ++mismatches;
    CHECK(mismatches >= 1);
    CHECK(rep.aggregates[0].mean_l1_delta > 0.0);
}

TEST_CASE("kernel estimator noise across seeds is small next to cross-method distance") {
    Dataset income = make_income_task(1200, 11);
    auto [train_d, test_d] = split(income, 0.2, 11);
    TrainConfig tc;
    tc.kind = ModelKind::gbt;
    tc.gbt.n_rounds = 60;
    tc.seed = 11;
    auto out = train(train_d, tc);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 10; ++i) idx.push_back(i);
    Dataset probe = test_d.subset(idx);

    ExplainerConfig k1;
    k1.method = ExplainMethod::shap_kernel;
    k1.n_coalitions = 2000;
    k1.n_reference_samples = 32;
    k1.seed = 101;
    ExplainerConfig k2 = k1;
    k2.seed = 202;
    ExplainerConfig li;
    li.method = ExplainMethod::lime;
    li.lime_samples = 3000;
    li.seed = 11;
    DisagreementReport rep = run_disagreement_experiment(*out.model, probe, train_d, {k1, k2, li}, 3);
    REQUIRE(rep.aggregates.size() == 3);
    const double seed_pair = rep.aggregates[0].mean_l1_delta;
    CHECK(seed_pair < rep.aggregates[1].mean_l1_delta);
    CHECK(seed_pair < rep.aggregates[2].mean_l1_delta);
    CHECK(seed_pair < 0.1);

    // deterministic given the seeds in the configs
    DisagreementReport again = run_disagreement_experiment(*out.model, probe, train_d, {k1, k2, li}, 3);
    CHECK(again.aggregates[0].mean_l1_delta == doctest::Approx(seed_pair).epsilon(1e-12));
}

TEST_CASE("explainer failure is recorded and the instance skipped") {
    FeatureSchema schema = continuous_schema(3);
    Dataset ref;
    ref.schema = schema;
    Rng rng(derive_seed(7, "test.failure"));
    for (std::size_t i = 0; i < 30; ++i) {
        for (std::size_t j = 0; j < 3; ++j) ref.rows.push_back(rng.normal());
        ref.labels.push_back(static_cast<int>(i % 2));
    }
    Dataset probe = ref.subset({0, 1, 2});
    probe.rows[0] = 999.0;  // the scorer rejects this value on feature 0

    CallableFunction f(3, [](std::span<const double> z) -> double {
        if (z[0] > 900.0) throw InvalidArgument("sensor out of range");
        return 0.5 + 0.04 * z[0];
    });

    ExplainerConfig se;
    se.method = ExplainMethod::shap_exact;
    se.n_reference_samples = 16;
    ExplainerConfig li;
    li.method = ExplainMethod::lime;
    li.lime_samples = 500;
    li.seed = 7;
    DisagreementReport rep = run_disagreement_experiment(f, probe, ref, {se, li}, 2);
    CHECK(rep.n_instances == 2);
    CHECK(rep.n_skipped == 1);
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].instance == 0);
    CHECK(rep.failures[0].method == se.tag());
    CHECK(std::string(rep.failures[0].message).find("sensor") != std::string::npos);
    CHECK(rep.records.size() == 2);
    CHECK(rep.aggregates[0].n == 2);
}

TEST_CASE("argmax of exact shapley invariant under positive score scaling") {
    FeatureSchema schema = continuous_schema(4);
    Dataset ref;
    ref.schema = schema;
    Rng rng(derive_seed(13, "test.scale"));
    for (std::size_t i = 0; i < 24; ++i) {
        for (std::size_t j = 0; j < 4; ++j) ref.rows.push_back(rng.uniform(-1.0, 1.0));
        ref.labels.push_back(static_cast<int>(i % 2));
    }
    // weights keep both scores inside [0,1] on the cube, so scaling is exact
    LinearScoreFunction f({0.12, -0.08, 0.05, 0.02}, 0.5);
    CallableFunction g(4, [&](std::span<const double> z) {
        return 0.4 * (0.5 + 0.12 * z[0] - 0.08 * z[1] + 0.05 * z[2] + 0.02 * z[3]);
    });
    ValueFunctionSpec spec;
    spec.reference = ref;
    for (std::size_t i = 0; i < 6; ++i) {
        std::vector<double> x = ref.row_vec(i);
        Attribution af = shapley_exact(f, x, spec);
        Attribution ag = shapley_exact(g, x, spec);
        CHECK(argmax_abs(af.values) == argmax_abs(ag.values));
        CHECK(argmax_abs(normalize_l1(af).values) == argmax_abs(af.values));
    }
}

TEST_CASE("boundary experiment") {
    Dataset clinic = make_clinic_task(1600, 37);
    auto [train_d, test_d] = split(clinic, 0.2, 37);
    TrainConfig lc;
    lc.kind = ModelKind::logistic;
    lc.seed = 37;
    TrainConfig fc;
    fc.kind = ModelKind::forest;
    fc.forest.n_trees = 60;
    fc.seed = 37;
    auto lo = train(train_d, lc);
    auto fo = train(train_d, fc);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 24; ++i) idx.push_back(i);
    Dataset probe = test_d.subset(idx);

    ExplainerConfig cfg;
    cfg.method = ExplainMethod::lime;
    cfg.lime_samples = 3000;
    cfg.seed = 5;

    SUBCASE("identical models disagree nowhere") {
        BoundaryReport rep = run_boundary_experiment(*lo.model, *lo.model, probe, train_d, cfg, 3);
        CHECK(rep.agreement == doctest::Approx(1.0));
        CHECK(rep.n_agreeing == probe.n());
        for (const auto& r : rep.records) {
            CHECK(r.top1_match);
            CHECK(r.l1_delta == doctest::Approx(0.0));
        }
        CHECK(rep.aggregate.mean_l1_delta == doctest::Approx(0.0));
    }
    SUBCASE("logistic versus forest agree on labels yet explanations drift") {
        BoundaryReport rep = run_boundary_experiment(*lo.model, *fo.model, probe, train_d, cfg, 3);
        CHECK(rep.agreement >= 0.7);
        CHECK(rep.n_agreeing >= 15);
        CHECK(rep.records.size() == rep.n_agreeing);
        CHECK(rep.aggregate.mean_l1_delta > 0.1);
        CHECK(rep.failures.empty());
    }
    SUBCASE("trained versus random-label twin still yields a report") {
        Dataset shuffled = train_d;
        Rng rng(derive_seed(99, "test.shuffle"));
        rng.shuffle(shuffled.labels);
        auto ro = train(shuffled, fc);
        BoundaryReport rep = run_boundary_experiment(*fo.model, *ro.model, probe, train_d, cfg, 3);
        CHECK(rep.n_agreeing >= 1);
        CHECK(std::isfinite(rep.aggregate.mean_l1_delta));
        CHECK(rep.n_total == probe.n());
    }
    SUBCASE("no agreeing instances is an error") {
        ConstantFunction yes(clinic.dim(), 0.9);
        ConstantFunction no(clinic.dim(), 0.1);
        CHECK_THROWS_AS(run_boundary_experiment(yes, no, probe, train_d, cfg, 3), InvalidArgument);
    }
}
