#include "xaudit/synth.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "xaudit/rng.hpp"

namespace xaudit {

namespace {

FeatureSchema continuous_schema(std::size_t d) {
    FeatureSchema s;
    for (std::size_t j = 0; j < d; ++j)
        s.features.push_back(Feature::continuous("f" + std::to_string(j + 1)));
    return s;
}

std::vector<std::string> letter_levels(std::size_t card) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < card; ++c) out.push_back(std::string(1, static_cast<char>('a' + c)));
    return out;
}

// draws a categorical code from cumulative-free probabilities
std::size_t draw_cat(Rng& rng, const std::vector<double>& probs) {
    double u = rng.uniform01();
    for (std::size_t c = 0; c + 1 < probs.size(); ++c) {
        if (u < probs[c]) return c;
        u -= probs[c];
    }
    return probs.size() - 1;
}

}  // namespace

Dataset make_two_group_toy(std::size_t n_per_group, std::uint64_t seed) {
    if (n_per_group < 10) throw InvalidArgument("make_two_group_toy: n_per_group must be >= 10");
    Rng rng(derive_seed(seed, "synth.two_group_toy"));
    Dataset d;
    d.schema.features = {Feature::continuous("f1"), Feature::continuous("f2")};
    d.rows.reserve(4 * n_per_group);
    for (std::size_t i = 0; i < n_per_group; ++i) {
        const double f1 = rng.uniform(-3.0, 3.0);
        const double f2 = rng.normal(0.0, 0.5);
        d.rows.insert(d.rows.end(), {f1, f2});
        d.labels.push_back(f1 > 0.0 ? 1 : 0);
        d.group.push_back(0);
    }
    for (std::size_t i = 0; i < n_per_group; ++i) {
        const double f1 = rng.uniform(-3.0, 3.0);
        const double f2 = rng.normal(5.0, 0.5);
        d.rows.insert(d.rows.end(), {f1, f2});
        d.labels.push_back(1);
        d.group.push_back(1);
    }
    return d;
}

Dataset make_income_task(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("make_income_task: n must be positive");
    Rng rng(derive_seed(seed, "synth.income"));
    Dataset d;
    for (std::size_t j = 0; j < 8; ++j)
        d.schema.features.push_back(Feature::continuous("f" + std::to_string(j + 1)));
    d.schema.features.push_back(Feature::categorical("f9", letter_levels(3)));
    d.schema.features.push_back(Feature::categorical("f10", letter_levels(4)));
    d.schema.features.push_back(Feature::categorical("f11", letter_levels(2)));
    d.schema.features.push_back(Feature::categorical("f12", letter_levels(3)));

    // near-tied main effects on f1..f4 plus a pure f5*f6 interaction
    constexpr std::array<double, 8> w = {0.8, 0.75, 0.7, -0.72, 0.0, 0.0, 0.4, -0.3};
    const std::vector<std::vector<double>> cat_probs = {
        {0.4, 0.35, 0.25}, {0.3, 0.3, 0.25, 0.15}, {0.55, 0.45}, {0.4, 0.35, 0.25}};
    const std::vector<std::vector<double>> cat_effect = {
        {-0.6, 0.1, 0.7}, {-0.3, 0.0, 0.2, 0.4}, {0.25, -0.25}, {0.0, 0.3, -0.3}};

    d.rows.reserve(n * 12);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 8> x{};
        double s = -1.25;
        for (std::size_t j = 0; j < 8; ++j) {
            x[j] = rng.normal();
            s += w[j] * x[j];
        }
        s += 0.5 * x[4] * x[5];
        for (double v : x) d.rows.push_back(v);
        for (std::size_t c = 0; c < 4; ++c) {
            const std::size_t code = draw_cat(rng, cat_probs[c]);
            s += cat_effect[c][code];
            d.rows.push_back(static_cast<double>(code));
        }
        d.labels.push_back(s + rng.normal(0.0, 0.6) > 0.0 ? 1 : 0);
    }
    return d;
}

Dataset make_credit_task(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("make_credit_task: n must be positive");
    Rng rng(derive_seed(seed, "synth.credit"));
    Dataset d;
    for (std::size_t j = 0; j < 16; ++j)
        d.schema.features.push_back(Feature::continuous("f" + std::to_string(j + 1)));
    d.schema.features.push_back(Feature::categorical("f17", letter_levels(3)));
    d.schema.features.push_back(Feature::categorical("f18", letter_levels(3)));
    d.schema.features.push_back(Feature::categorical("f19", letter_levels(2)));
    d.schema.features.push_back(Feature::categorical("f20", letter_levels(4)));

    constexpr std::array<double, 16> w = {0.9,  0.8,   -0.7, 0.6,  -0.5, 0.45, 0.4,  -0.35,
                                          0.3,  0.25,  -0.2, 0.2,  0.15, -0.15, 0.1, 0.1};
    const std::vector<std::vector<double>> cat_probs = {
        {0.5, 0.3, 0.2}, {0.4, 0.35, 0.25}, {0.6, 0.4}, {0.4, 0.3, 0.2, 0.1}};
    const std::vector<std::vector<double>> cat_effect = {
        {0.0, 0.5, -0.5}, {-0.4, 0.0, 0.4}, {0.3, -0.3}, {0.5, 0.2, -0.2, -0.5}};

    d.rows.reserve(n * 20);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 16> x{};
        double s = 0.8;
        for (std::size_t j = 0; j < 16; ++j) {
            x[j] = rng.normal();
            s += w[j] * x[j];
        }
        s += 0.7 * x[0] * x[1] - 0.5 * x[2] * x[3] + 0.4 * x[4] * x[5];
        for (double v : x) d.rows.push_back(v);
        for (std::size_t c = 0; c < 4; ++c) {
            const std::size_t code = draw_cat(rng, cat_probs[c]);
            s += cat_effect[c][code];
            d.rows.push_back(static_cast<double>(code));
        }
        d.labels.push_back(s + rng.normal(0.0, 0.7) > 0.0 ? 1 : 0);
    }
    return d;
}

Dataset make_biopsy_task(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("make_biopsy_task: n must be positive");
    Rng rng(derive_seed(seed, "synth.biopsy"));
    Dataset d;
    d.schema = continuous_schema(30);
    d.rows.reserve(n * 30);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 30; ++j) {
            const double v = rng.normal();
            d.rows.push_back(v);
            if (j < 20) s += 0.55 * v;
        }
        d.labels.push_back(s + rng.normal(0.0, 0.8) > 0.0 ? 1 : 0);
    }
    return d;
}

Dataset make_clinic_task(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("make_clinic_task: n must be positive");
    Rng rng(derive_seed(seed, "synth.clinic"));
    Dataset d;
    d.schema = continuous_schema(10);
    // one dominant marker plus a tail of weak ones: linear and tree models
    // learn nearly the same boundary, matching the pair-agreement target
    constexpr std::array<double, 10> w = {2.0,  -0.6, 0.4,  0.25, -0.15,
                                          0.1,  0.08, -0.05, 0.04, 0.02};
    d.rows.reserve(n * 10);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 10; ++j) {
            const double v = rng.normal();
            d.rows.push_back(v);
            s += w[j] * v;
        }
        d.labels.push_back(s + rng.normal(0.0, 0.8) > 0.0 ? 1 : 0);
    }
    return d;
}

Dataset make_screening_task(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("make_screening_task: n must be positive");
    Rng rng(derive_seed(seed, "synth.screening"));
    Dataset d;
    d.schema = continuous_schema(8);
    // weak diffuse signal under heavy label noise: the fitted logistic stays
    // in the quasi-linear regime, so smooth-model properties are visible
    constexpr std::array<double, 8> w = {0.5, -0.45, 0.4, 0.35, -0.3, 0.25, 0.2, -0.15};
    d.rows.reserve(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            const double v = rng.normal();
            d.rows.push_back(v);
            s += w[j] * v;
        }
        d.labels.push_back(s + rng.normal(0.0, 2.2) > 0.0 ? 1 : 0);
    }
    return d;
}

Dataset make_correlated_task(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("make_correlated_task: n must be positive");
    Rng rng(derive_seed(seed, "synth.correlated"));
    Dataset d;
    d.schema = continuous_schema(6);
    d.rows.reserve(n * 6);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.uniform(-3.0, 3.0);
        d.rows.push_back(z + rng.normal(0.0, 0.2));
        d.rows.push_back(z + rng.normal(0.0, 0.35));
        d.rows.push_back(z + rng.normal(0.0, 0.35));
        d.rows.push_back(rng.normal());
        d.rows.push_back(rng.normal());
        d.rows.push_back(rng.normal());
        d.labels.push_back(z + rng.normal(0.0, 0.8) > 0.0 ? 1 : 0);
    }
    return d;
}

}  // namespace xaudit
