#pragma once

#include <string>
#include <vector>

#include "xaudit/dataset.hpp"
#include "xaudit/explainers.hpp"
#include "xaudit/model.hpp"

namespace xaudit {

// Pairwise disagreement between two attributions for the same instance.
struct DisagreementRecord {
    std::string method_a;
    std::string method_b;
    std::size_t instance = 0;
    bool top1_match = false;
    double topk_overlap = 0.0;
    double rank_corr = 0.0;
    double sign_agreement = 0.0;
    double l1_delta = 0.0;
};

struct PairAggregate {
    std::string method_a;
    std::string method_b;
    std::size_t n = 0;
    double top1_match_rate = 0.0;
    double mean_topk_overlap = 0.0;
    double mean_rank_corr = 0.0;
    double mean_sign_agreement = 0.0;
    double mean_l1_delta = 0.0;
};

struct ExplainFailure {
    std::size_t instance = 0;
    std::string method;
    std::string message;
};

struct DisagreementReport {
    std::vector<DisagreementRecord> records;
    std::vector<PairAggregate> aggregates;  // one per config pair, (i, j) order
    std::vector<ExplainFailure> failures;
    std::size_t n_instances = 0;  // instances contributing to aggregates
    std::size_t n_skipped = 0;
};

// Metrics between two L1-normalized attributions of equal dimension.
// top1 ties break to the lowest index.  topk uses k clamped to the
// dimension so the identity record scores 1.  rank_corr is Spearman with
// average ranks on |values|; a constant magnitude vector correlates 1 with
// another constant one and 0 with anything else.  sign_agreement counts
// features nonzero in both and is vacuously 1.
DisagreementRecord disagreement(const Attribution& a, const Attribution& b, std::size_t k);

// Explains every test row with every config (attributions L1-normalized),
// then records all pairwise disagreements.  A config failing on a row
// records the failure and drops that row from the aggregates.
DisagreementReport run_disagreement_experiment(const DecisionFunction& f, const Dataset& test,
                                               const Dataset& reference,
                                               const std::vector<ExplainerConfig>& methods,
                                               std::size_t k = 3);

struct BoundaryReport {
    double agreement = 0.0;  // label agreement of f and g over the full test set
    std::size_t n_agreeing = 0;
    std::size_t n_total = 0;
    std::vector<DisagreementRecord> records;  // method_a = f's view, method_b = g's
    PairAggregate aggregate;
    std::vector<ExplainFailure> failures;
};

// Restricts to test rows where f and g assign the same label, then compares
// explain(f, x) against explain(g, x) under one shared config.
BoundaryReport run_boundary_experiment(const DecisionFunction& f, const DecisionFunction& g,
                                       const Dataset& test, const Dataset& reference,
                                       const ExplainerConfig& cfg, std::size_t k = 3);

}  // namespace xaudit
