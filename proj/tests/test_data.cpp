#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "xaudit/dataset.hpp"
#include "xaudit/rng.hpp"
#include "xaudit/scaler.hpp"
#include "xaudit/synth.hpp"

using namespace xaudit;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Dataset small_mixed() {
    Dataset d;
    d.schema.features = {Feature::continuous("age", 0.5), Feature::categorical("color", {"red", "blue"}),
                         Feature::continuous("income")};
    d.rows = {30.0, 0, 1000.25, 41.5, 1, 2000.5, 29.0, 0, 1500.75, 55.5, 1, 900.0};
    d.labels = {0, 1, 0, 1};
    return d;
}

}  // namespace

TEST_CASE("rng streams are deterministic and named streams are independent") {
    Rng a(42), b(42);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
    CHECK(derive_seed(1, "x") != derive_seed(2, "x"));
    CHECK(derive_seed(1, "x") == derive_seed(1, "x"));
}

TEST_CASE("rng uniform01 stays in [0,1) and normal has sane moments") {
    Rng r(7);
    double sum = 0.0, sum2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double z = r.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.05);
    CHECK(std::fabs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("schema validation rejects bad shapes") {
    FeatureSchema s;
    s.features = {Feature::continuous("a"), Feature::continuous("a")};
    CHECK_THROWS_AS(s.validate(), SchemaError);

    s.features = {Feature::continuous("")};
    CHECK_THROWS_AS(s.validate(), SchemaError);

    s.features = {Feature::continuous("a", 0.0)};
    CHECK_THROWS_AS(s.validate(), SchemaError);

    s.features = {Feature::categorical("c", {"only"})};
    CHECK_THROWS_AS(s.validate(), SchemaError);

    s.features = {Feature::continuous("a"), Feature::categorical("c", {"x", "y"})};
    CHECK_NOTHROW(s.validate());
    CHECK(s.index_of("c") == 1);
    CHECK_THROWS_AS(s.index_of("missing"), SchemaError);
}

TEST_CASE("csv write then load is identity on a mixed dataset") {
    const auto d = small_mixed();
    const auto path = temp_path("xaudit_roundtrip.csv");
    write_csv(d, path);
    const auto back = load_csv(path, d.schema, "label", std::nullopt);
    REQUIRE(back.n() == d.n());
    REQUIRE(back.dim() == d.dim());
    for (std::size_t i = 0; i < d.n(); ++i) {
        CHECK(back.labels[i] == d.labels[i]);
        for (std::size_t j = 0; j < d.dim(); ++j)
            CHECK(back.row(i)[j] == doctest::Approx(d.row(i)[j]).epsilon(1e-12));
    }
    std::filesystem::remove(path);
}

TEST_CASE("csv loader reports missing columns and bad cells with line numbers") {
    const auto path = temp_path("xaudit_bad.csv");
    FeatureSchema s;
    s.features = {Feature::continuous("a")};

    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("b,label\n1,0\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_csv(path, s, "label", std::nullopt), SchemaError);

    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("a,label\n1,0\nnope,1\n", f);
        std::fclose(f);
    }
    try {
        load_csv(path, s, "label", std::nullopt);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("csv loader maps unseen category strings by first appearance") {
    const auto path = temp_path("xaudit_cats.csv");
    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("c,label\ngreen,0\nred,1\ngreen,1\nblue,0\n", f);
        std::fclose(f);
    }
    FeatureSchema s;
    Feature c;
    c.name = "c";
    c.kind = FeatureKind::Categorical;
    s.features = {c};
    const auto d = load_csv(path, s, "label", std::nullopt);
    REQUIRE(d.schema.features[0].categories ==
            std::vector<std::string>{"green", "red", "blue"});
    CHECK(d.rows == std::vector<double>{0, 1, 0, 2});
    std::filesystem::remove(path);
}

TEST_CASE("split partitions every row exactly once") {
    const auto d = make_clinic_task(101, 3);
    const auto [train_d, test_d] = split(d, 0.25, 9);
    CHECK(test_d.n() == 25);  // round(101*0.25)
    CHECK(train_d.n() + test_d.n() == d.n());

    // multiset of rows is preserved: compare sorted first-feature values
    std::multiset<double> orig, parts;
    for (std::size_t i = 0; i < d.n(); ++i) orig.insert(d.row(i)[0]);
    for (std::size_t i = 0; i < train_d.n(); ++i) parts.insert(train_d.row(i)[0]);
    for (std::size_t i = 0; i < test_d.n(); ++i) parts.insert(test_d.row(i)[0]);
    CHECK(orig == parts);

    CHECK_THROWS_AS(split(d, 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(split(d, 1.0, 1), InvalidArgument);
}

TEST_CASE("scaler matches hand-computed stats on {1,2,3}") {
    Dataset d;
    d.schema.features = {Feature::continuous("v")};
    d.rows = {1, 2, 3};
    d.labels = {0, 1, 0};
    const auto s = fit_scaler(d);
    CHECK(s.mean[0] == doctest::Approx(2.0));
    CHECK(s.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-9));  // 0.8165
    CHECK(s.median[0] == doctest::Approx(2.0));
    CHECK(s.mad[0] == doctest::Approx(1.0));
    CHECK_FALSE(s.is_constant[0]);
}

TEST_CASE("scaler flags constant features and keeps identity scaling") {
    Dataset d;
    d.schema.features = {Feature::continuous("v"), Feature::continuous("w")};
    d.rows = {5, 1, 5, 2, 5, 3};
    d.labels = {0, 1, 0};
    const auto s = fit_scaler(d);
    CHECK(s.is_constant[0]);
    CHECK(s.stddev[0] == 1.0);
    const auto z = s.standardize({5, 2});
    CHECK(z[0] == doctest::Approx(0.0));
}

TEST_CASE("scaler on 1000 standard-normal draws recovers the moments") {
    Rng r(11);
    Dataset d;
    d.schema.features = {Feature::continuous("v")};
    for (int i = 0; i < 1000; ++i) {
        d.rows.push_back(r.normal());
        d.labels.push_back(i % 2);
    }
    const auto s = fit_scaler(d);
    CHECK(std::fabs(s.mean[0]) < 0.1);
    CHECK(std::fabs(s.stddev[0] - 1.0) < 0.1);
}

TEST_CASE("scaler round trip is identity within 1e-9") {
    const auto d = make_credit_task(300, 5);
    const auto s = fit_scaler(d);
    for (std::size_t i = 0; i < 20; ++i) {
        const auto x = d.row_vec(i);
        const auto back = s.unstandardize(s.standardize(x));
        for (std::size_t j = 0; j < x.size(); ++j)
            CHECK(back[j] == doctest::Approx(x[j]).epsilon(1e-9));
    }
}

TEST_CASE("scaler records categorical marginals and observed ranges") {
    const auto d = make_income_task(500, 2);
    const auto s = fit_scaler(d);
    const std::size_t cat = 8;  // first categorical feature
    REQUIRE_FALSE(d.schema.is_continuous(cat));
    double total = 0.0;
    for (double f : s.category_freq[cat]) {
        CHECK(f >= 0.0);
        total += f;
    }
    CHECK(total == doctest::Approx(1.0));
    for (std::size_t j = 0; j < d.dim(); ++j) CHECK(s.min_value[j] <= s.max_value[j]);
}

TEST_CASE("two-group toy matches its construction") {
    const auto d = make_two_group_toy(500, 1);
    REQUIRE(d.n() == 1000);
    REQUIRE(d.has_group());

    std::size_t pos = 0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        pos += static_cast<std::size_t>(d.labels[i]);
        if (d.group[i] == 1) CHECK(d.labels[i] == 1);
        if (d.group[i] == 0) CHECK(d.labels[i] == (d.row(i)[0] > 0 ? 1 : 0));
    }
    const double p = static_cast<double>(pos) / static_cast<double>(d.n());
    CHECK(p == doctest::Approx(0.75).epsilon(0.07));

    // within group 1 the second feature carries no label signal
    double mean_pos = 0, mean_neg = 0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        if (d.group[i] != 0) continue;
        if (d.labels[i] == 1) {
            mean_pos += d.row(i)[1];
            ++n_pos;
        } else {
            mean_neg += d.row(i)[1];
            ++n_neg;
        }
    }
    mean_pos /= static_cast<double>(n_pos);
    mean_neg /= static_cast<double>(n_neg);
    CHECK(std::fabs(mean_pos - mean_neg) < 0.15);

    const auto d2 = make_two_group_toy(500, 1);
    CHECK(d.rows == d2.rows);
    CHECK(d.labels == d2.labels);
    CHECK_THROWS_AS(make_two_group_toy(5, 1), InvalidArgument);
}

TEST_CASE("bundled tasks have the documented shapes and balances") {
    const auto income = make_income_task(2000, 3);
    CHECK(income.dim() == 12);
    CHECK(income.positive_rate() == doctest::Approx(0.25).epsilon(0.3));

    const auto credit = make_credit_task(2000, 3);
    CHECK(credit.dim() == 20);
    CHECK(credit.positive_rate() == doctest::Approx(0.68).epsilon(0.12));

    const auto biopsy = make_biopsy_task(1000, 3);
    CHECK(biopsy.dim() == 30);
    CHECK(biopsy.positive_rate() == doctest::Approx(0.5).epsilon(0.15));

    const auto clinic = make_clinic_task(1000, 3);
    CHECK(clinic.dim() == 10);
    CHECK(clinic.positive_rate() == doctest::Approx(0.5).epsilon(0.15));

    const auto screening = make_screening_task(1000, 3);
    CHECK(screening.dim() == 8);
    CHECK(screening.positive_rate() == doctest::Approx(0.5).epsilon(0.15));

    const auto corr = make_correlated_task(1000, 3);
    CHECK(corr.dim() == 6);
    // f1..f3 share the latent driver; f4 does not
    double c01 = 0, c03 = 0;
    for (std::size_t i = 0; i < corr.n(); ++i) {
        c01 += corr.row(i)[0] * corr.row(i)[1];
        c03 += corr.row(i)[0] * corr.row(i)[3];
    }
    CHECK(c01 / 1000.0 > 2.0);
    CHECK(std::fabs(c03 / 1000.0) < 0.3);
}
