#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xaudit/error.hpp"

namespace xaudit {

enum class FeatureKind { Continuous, Categorical };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    // continuous only: measurement granularity of the dataset (> 0)
    double precision = 0.01;
    // categorical only: level labels, index == integer code; cardinality >= 2
    std::vector<std::string> categories;

    std::size_t cardinality() const { return categories.size(); }

    static Feature continuous(std::string name, double precision = 0.01) {
        Feature f;
        f.name = std::move(name);
        f.kind = FeatureKind::Continuous;
        f.precision = precision;
        return f;
    }

    static Feature categorical(std::string name, std::vector<std::string> categories) {
        Feature f;
        f.name = std::move(name);
        f.kind = FeatureKind::Categorical;
        f.categories = std::move(categories);
        return f;
    }
};

// Feature vocabulary shared by datasets, models and explainers.
struct FeatureSchema {
    std::vector<Feature> features;

    std::size_t dim() const { return features.size(); }

    bool is_continuous(std::size_t j) const { return features[j].kind == FeatureKind::Continuous; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t j = 0; j < features.size(); ++j)
            if (features[j].name == name) return j;
        throw SchemaError("unknown feature: " + name);
    }

    void validate() const {
        for (std::size_t j = 0; j < features.size(); ++j) {
            const Feature& f = features[j];
            if (f.name.empty()) throw SchemaError("feature " + std::to_string(j) + " has empty name");
            for (std::size_t k = j + 1; k < features.size(); ++k)
                if (features[k].name == f.name) throw SchemaError("duplicate feature name: " + f.name);
            if (f.kind == FeatureKind::Continuous) {
                if (!(f.precision > 0.0)) throw SchemaError("feature " + f.name + ": precision must be > 0");
            } else if (f.cardinality() < 2) {
                throw SchemaError("feature " + f.name + ": categorical cardinality must be >= 2");
            }
        }
    }

};

// Rounds a value to the feature's declared measurement granularity.
inline double round_to_precision(double v, double precision) {
    return std::llround(v / precision) * precision;
}

}  // namespace xaudit
