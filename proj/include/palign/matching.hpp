#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "palign/core.hpp"

namespace palign {

// An order-preserving pairing between two symbol sequences. Positions
// strictly increase on both sides and paired symbols are equal.
struct Matching {
    std::vector<std::pair<int, int>> pairs;
    BitCost score_hint = 0.0; // total symbol_cost of the matched symbols
    bool exact = true;        // false when banding truncated the search
};

// Up to k distinct matchings of a against b, best first, ranked by the
// total symbol_cost of the matched symbols (ties: lexicographically
// smallest pair list). Exact within 64x64; longer inputs are banded
// around the diagonal and flagged exact=false. Sequences with no shared
// symbol yield an empty list.
std::vector<Matching> pairwise_match(const std::vector<Symbol>& a,
                                     const std::vector<Symbol>& b,
                                     const PatternStore& store,
                                     int k);

// Same search under a caller-supplied per-symbol weight. score_hint is the
// weighted total. Used where the objective is not the plain literal cost,
// e.g. single-row retrieval scoring.
std::vector<Matching> pairwise_match_weighted(const std::vector<Symbol>& a,
                                              const std::vector<Symbol>& b,
                                              const std::function<double(const Symbol&)>& weight,
                                              int k);

} // namespace palign
