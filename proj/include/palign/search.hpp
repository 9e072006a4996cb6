#pragma once

#include <string>
#include <vector>

#include "palign/alignment.hpp"
#include "palign/core.hpp"
#include "palign/scoring.hpp"

namespace palign {

struct SearchParams {
    int beam_width = 200;
    int max_rows = 20;    // cap on Old rows per alignment
    int max_results = 10;
    bool exhaustive = false; // full enumeration, small instances only

    void check() const; // throws ConfigError on non-positive values
};

// Ranked alignments of one New pattern against the store, best first.
// Ranking: compression_difference descending; ties broken by fewer rows,
// then the lexicographically smallest sorted row id list, then the
// canonical serialization. With no shareable symbol anywhere the single
// result is the New pattern alone at difference zero.
std::vector<ScoredAlignment> build_alignments(const PatternStore& store,
                                              const Pattern& input,
                                              const SearchParams& params);

struct RetrievalHit {
    std::string pattern_id;
    CompressionScore score;
};

// Query-by-example: stored patterns ranked by the compression difference of
// their best single-row alignment with the query; zero-overlap patterns are
// omitted.
std::vector<RetrievalHit> retrieve(const PatternStore& store, const Pattern& query,
                                   const SearchParams& params);

} // namespace palign
