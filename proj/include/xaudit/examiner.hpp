#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xaudit/attribution.hpp"
#include "xaudit/counterfactual.hpp"
#include "xaudit/dataset.hpp"
#include "xaudit/explainers.hpp"
#include "xaudit/model.hpp"

namespace xaudit {

struct OracleReply {
    double score = 0.0;
    int label = 0;
};

// What a provider hands back for one instance: a feature attribution, a
// counterfactual set, either, or nothing at all.
struct ProviderExplanation {
    std::optional<Attribution> attribution;
    std::optional<CounterfactualSet> counterfactuals;
};

using ExplainProvider = std::function<ProviderExplanation(const std::vector<double>&)>;

// Query-only access to a decision function. decide() spends one unit of
// budget and throws BudgetExhausted once the budget is gone; explanations
// are provider output, not queries, so explain() is free. spent <= budget
// holds after any call sequence; accounting is atomic so checks may share
// an oracle across threads.
class QueryOracle {
  public:
    explicit QueryOracle(std::uint64_t budget) : budget_(budget) {}
    virtual ~QueryOracle() = default;

    QueryOracle(const QueryOracle&) = delete;
    QueryOracle& operator=(const QueryOracle&) = delete;

    OracleReply decide(const std::vector<double>& x);
    virtual ProviderExplanation explain(const std::vector<double>& x);

    std::uint64_t budget() const { return budget_; }
    std::uint64_t spent() const { return spent_.load(std::memory_order_relaxed); }
    std::uint64_t remaining() const;

  protected:
    virtual OracleReply decide_impl(const std::vector<double>& x) = 0;

  private:
    std::uint64_t budget_;
    std::atomic<std::uint64_t> spent_{0};
};

// In-process oracle wrapping a decision function, optionally with a
// provider-supplied explanation channel.
class LocalOracle final : public QueryOracle {
  public:
    LocalOracle(std::shared_ptr<const DecisionFunction> f, std::uint64_t budget);
    LocalOracle(std::shared_ptr<const DecisionFunction> f, ExplainProvider provider,
                std::uint64_t budget);

    ProviderExplanation explain(const std::vector<double>& x) override;

  protected:
    OracleReply decide_impl(const std::vector<double>& x) override;

  private:
    std::shared_ptr<const DecisionFunction> f_;
    ExplainProvider provider_;
};

enum class VerdictStatus { pass, fail, inconclusive };

std::string to_string(VerdictStatus s);

struct ConsistencyVerdict {
    std::string name;
    VerdictStatus status = VerdictStatus::inconclusive;
    std::string evidence;
    // Every point the check sent to decide(), in order, so the verdict can
    // be replayed against the same oracle.
    std::vector<std::vector<double>> query_points;
    std::optional<std::vector<double>> witness;
    std::size_t checked = 0;
    std::size_t total = 0;
};

// Re-queries decide() at each claimed counterfactual, in claim order, one
// query per claim; a claim fails when the re-queried label contradicts the
// side of the threshold the provider's flipped_score asserted, and that
// point is returned as the witness. When budget remains afterwards the
// original x is re-queried once and claims that never leave its label are
// failed too. Budget exhaustion mid-run yields inconclusive with the count
// of claims checked so far.
ConsistencyVerdict check_counterfactual_validity(QueryOracle& o, const std::vector<double>& x);

// Ablation test of the provider's attribution at x: replace the top- and
// bottom-attributed features with m reference draws each and compare mean
// |delta score|. Pass iff top >= bottom; both below the 1e-3 noise floor is
// inconclusive. Costs 1 + 2m queries.
ConsistencyVerdict check_attribution_faithfulness(QueryOracle& o, const std::vector<double>& x,
                                                  const Dataset& reference, std::size_t m);

// Planted models for the explainer sanity filter.
struct SanityProbes {
    std::shared_ptr<const DecisionFunction> linear;
    std::shared_ptr<const DecisionFunction> constant;
    std::shared_ptr<const DecisionFunction> trained;
    std::shared_ptr<const DecisionFunction> trained_shuffled;  // label-randomized retrain
    Dataset reference;
    std::vector<std::vector<double>> probe_points;
};

SanityProbes make_sanity_probes(const Dataset& train_like, std::uint64_t seed);

using ExplainFn =
    std::function<Attribution(const DecisionFunction&, const std::vector<double>&)>;

// Fail iff the explainer is insensitive to swapping the trained model for
// its label-randomized twin (mean l1 delta < 1e-6 across probe points) or
// returns a nonzero attribution on the constant model.
bool sanity_filter(const ExplainFn& explainer, const SanityProbes& probes);
bool sanity_filter(const ExplainerConfig& cfg, const SanityProbes& probes);

struct ScaffoldPair {
    std::size_t real_row = 0;
    std::size_t partner_row = 0;
    std::size_t kept_driver = 0;  // top driver, held at the real row's value
    double real_score = 0.0;
    double composite_score = 0.0;
    double slide_spread = 0.0;  // score range as the top driver slides its observed span
    bool suspicious = false;
};

struct ScaffoldSuspicion {
    double suspicion_score = 0.0;  // fraction of evaluated pairs that fired
    std::size_t pairs_requested = 0;
    std::size_t pairs_evaluated = 0;
    std::size_t pairs_suspicious = 0;
    std::vector<std::size_t> drivers;    // score-driving features the probe keyed on
    double top_driver_correlation = 0.0;  // |corr(score, top driver)| across the row sample
    bool partial = false;                 // budget ran out before all pairs
    std::string note;
    std::vector<ScaffoldPair> pairs;
    std::vector<std::vector<double>> query_points;
};

// Probes for routing scaffolds: paired real rows vs perturbation-style
// composites of them. Each composite keeps the top score-driving feature
// at the real row and defects the remaining drivers past an opposite
// partner row; interpolates then slide the kept driver across its observed
// in-data range at that composite. A pair is suspicious when the composite
// jumps by more than 0.5 from its real row while every interpolate stays
// within a 0.1 score band: the feature that visibly drives the function on
// real rows is dead at the very point that flipped, which is the signature
// of a decoy that suppresses it. Honest models keep responding to their
// own drivers off-manifold, and a scaffold whose decoy equals the real
// model never jumps with the driver held.
ScaffoldSuspicion scaffold_probe(QueryOracle& o, const Dataset& train_like, std::size_t n_pairs,
                                 std::uint64_t seed);

struct GroupRate {
    int group = 0;
    std::size_t size = 0;
    std::size_t positives = 0;  // decided label 1
    double positive_rate = 0.0;
    std::size_t qualified = 0;  // reference label 1
    std::optional<double> true_positive_rate;
};

struct FairnessRecord {
    double demographic_parity_gap = 0.0;
    std::optional<double> equal_opportunity_gap;
    std::vector<GroupRate> group_rates;
    // group pairs whose EO comparison had an empty positive side
    std::vector<std::pair<int, int>> eo_not_computable;
    // decide() labels per audited reference row, the recountable query log
    std::vector<int> decided_labels;
    std::size_t rows_decided = 0;
    bool partial = false;
};

// Direct fairness test from an examiner-chosen reference with groups.
// demographic_parity_gap is the max pairwise |positive rate difference|;
// equal_opportunity_gap the same restricted to qualified rows (reference
// label == 1 when positive_is_favorable, else 0).
FairnessRecord fairness_audit(QueryOracle& o, const Dataset& reference,
                              bool positive_is_favorable = true);

struct AuditSelection {
    bool fairness = true;
    bool scaffold = true;
    bool consistency = true;
    std::size_t scaffold_pairs = 16;
    std::size_t faithfulness_draws = 16;
    // reference row indices whose provider explanations get consistency
    // checks; empty selects the first three rows
    std::vector<std::size_t> instances;
    std::uint64_t seed = 0;
    bool positive_is_favorable = true;
};

struct AuditReport {
    std::vector<ConsistencyVerdict> consistency_verdicts;
    std::optional<FairnessRecord> fairness;
    std::optional<ScaffoldSuspicion> scaffold;
    std::uint64_t queries_spent = 0;
};

// Runs the selected checks within the oracle's budget. Direct tests come
// first: fairness, then the scaffold probe, then explanation-consistency
// checks; explanation verdicts never feed the direct findings.
AuditReport audit(QueryOracle& o, const Dataset& reference, const AuditSelection& sel);

}  // namespace xaudit
