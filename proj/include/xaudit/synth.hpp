#pragma once

#include <cstdint>

#include "xaudit/dataset.hpp"

namespace xaudit {

// Two 2-D populations sharing one uniform feature.  Group 1 (group code 0):
// f1 ~ U(-3,3), f2 ~ N(0,0.5), label = 1 iff f1 > 0.  Group 2 (group code 1):
// f1 ~ U(-3,3), f2 ~ N(5,0.5), label = 1 always.  f2 separates the groups but
// within Group 1 carries no label signal.
Dataset make_two_group_toy(std::size_t n_per_group, std::uint64_t seed);

// Bundled synthetic tasks.  Dimensions and class balance mirror familiar
// tabular benchmarks; the generating weights are fixed so downstream
// experiment calibrations stay put.

// 12 features (8 continuous, 4 categorical), ~25% positive.  Several
// near-tied main effects plus a pure pairwise interaction.
Dataset make_income_task(std::size_t n, std::uint64_t seed);

// 20 features (16 continuous, 4 categorical), ~68% positive.  Moderate
// main effects with three pairwise interactions, so tree ensembles and
// linear models learn genuinely different boundaries.
Dataset make_credit_task(std::size_t n, std::uint64_t seed);

// 30 continuous features, ~50% positive.  Signal spread evenly over the
// first 20 features; no single feature carries enough weight to flip a
// confident prediction on its own.
Dataset make_biopsy_task(std::size_t n, std::uint64_t seed);

// 10 continuous features, ~50% positive.  One dominant marker plus weak
// support features; linear and tree learners agree on most predictions.
Dataset make_clinic_task(std::size_t n, std::uint64_t seed);

// 8 continuous features, ~50% positive.  Weak diffuse signal with heavy
// label noise; trained probabilities stay well inside (0,1).
Dataset make_screening_task(std::size_t n, std::uint64_t seed);

// 6 continuous features where f1..f3 track one latent driver (f1 most
// tightly) and f4..f6 are pure noise.  The correlation structure is what
// an off-manifold perturbation detector keys on.
Dataset make_correlated_task(std::size_t n, std::uint64_t seed);

}  // namespace xaudit
