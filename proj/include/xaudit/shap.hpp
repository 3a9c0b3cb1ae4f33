#pragma once

#include <cstdint>
#include <optional>

#include "xaudit/attribution.hpp"
#include "xaudit/dataset.hpp"
#include "xaudit/model.hpp"

namespace xaudit {

// How absent features are filled in when evaluating a coalition.
// interventional: average composites over reference rows (capped, seeded
// subsample when the reference is larger than the cap).  baseline: a single
// composite against one fixed point.
struct ValueFunctionSpec {
    enum class Kind { interventional, baseline };
    Kind kind = Kind::interventional;
    Dataset reference;              // interventional only
    std::vector<double> baseline;   // baseline only
    std::size_t n_reference_samples = 128;

    void validate(std::size_t d) const;

    // The rows actually averaged over; the subsample draw is a fixed
    // internal stream so every estimator sees the same rows.
    std::vector<std::vector<double>> effective_reference() const;

    std::string kind_tag() const {
        return kind == Kind::interventional ? "interventional" : "baseline";
    }
};

double coalition_value(const DecisionFunction& f, const std::vector<double>& x,
                       const std::vector<std::size_t>& s, const ValueFunctionSpec& spec);

// Exact Shapley attribution by full subset enumeration; 2^d coalition
// values, so refused above d = 15.
Attribution shapley_exact(const DecisionFunction& f, const std::vector<double>& x,
                          const ValueFunctionSpec& spec);

// Kernel-weighted least squares estimate.  When n_coalitions covers every
// proper nonempty coalition the estimate is exact up to the solver.
// Efficiency is imposed exactly by eliminating the last feature's
// coefficient.  A singular system escalates the ridge tenfold up to 1e-2
// and marks the method tag.
Attribution shapley_kernel(const DecisionFunction& f, const std::vector<double>& x,
                           const ValueFunctionSpec& spec, std::size_t n_coalitions, double ridge,
                           std::uint64_t seed);

struct ReferenceSensitivity {
    Attribution phi_a;
    Attribution phi_b;
    std::size_t argmax_a = 0;
    std::size_t argmax_b = 0;
    bool argmax_changed = false;
    double l1_delta = 0.0;  // on L1-normalized values
};

// Same algorithm (exact enumeration), two reference specs.
ReferenceSensitivity attribution_sensitivity_to_reference(const DecisionFunction& f,
                                                          const std::vector<double>& x,
                                                          const ValueFunctionSpec& spec_a,
                                                          const ValueFunctionSpec& spec_b);

}  // namespace xaudit
