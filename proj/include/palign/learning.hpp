#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "palign/core.hpp"
#include "palign/search.hpp"

namespace palign {

// One pair-merge event: two adjacent elements unified into a new chunk.
struct MergeRecord {
    std::string left;  // chunk id or "'symbol" for a raw symbol
    std::string right;
    std::string chunk_id;
    std::uint64_t count = 0; // adjacent-pair count at merge time
};

struct Chunk {
    std::string id;              // L1, L2, ... in discovery order
    std::vector<Symbol> symbols; // flattened: concatenation of the two halves
    std::uint64_t merge_count = 0;
    std::uint64_t final_count = 0; // top-level occurrences in the final stream
};

struct ChunkLexicon {
    std::vector<Chunk> chunks;
    std::vector<MergeRecord> merge_log;
    // final stream: element < 0 encodes raw symbol index ~e, element >= 0 a chunk index
    std::vector<int> final_stream;
    std::vector<Symbol> leaves; // raw-symbol table for the stream encoding

    // The input stream, reconstructed from the hierarchical parse.
    std::vector<Symbol> flatten() const;
    // Nested "[ ... ]" rendering of the final parse.
    std::string bracketed() const;
    // Chunk indices ranked by final_count desc, then discovery order.
    std::vector<std::size_t> ranked_chunks() const;
};

// Iterative pair merging: repeatedly unify the most frequent adjacent
// element pair (ties: earliest first occurrence in the stream), rewrite the
// stream, and record the new chunk, until max_chunks chunks exist or the
// best pair occurs fewer than min_count times.
ChunkLexicon discover_chunks(const std::vector<Symbol>& stream, int max_chunks, int min_count);

// Candidate Old patterns read off the best alignment of one New pattern.
struct DerivedPatterns {
    std::vector<Pattern> candidates; // ids prefixed L
    std::map<std::string, std::uint64_t> frequency_increments; // used rows: +1
};

// (a) each maximal unmatched New segment as a fresh pattern; (b) a composite
// of the New sequence with every fully matched row's covered span replaced
// by that row's id token. Nothing is committed; merge with commit().
DerivedPatterns derive_patterns(const PatternStore& store, const Pattern& input,
                                const SearchParams& params, int& next_learned_id);

PatternStore commit(const PatternStore& store, const DerivedPatterns& derived);

struct GrammarCost {
    BitCost grammar_bits = 0.0;  // spell every pattern + its code
    BitCost encoding_bits = 0.0; // best-alignment encoded bits per sequence
    BitCost total_bits = 0.0;
};

GrammarCost grammar_cost(const PatternStore& store,
                         const std::vector<std::vector<Symbol>>& corpus,
                         const SearchParams& params);

struct LearnReport {
    PatternStore store;
    GrammarCost before;
    GrammarCost after;
    std::vector<GrammarCost> per_pass;
};

// Repeated derive-and-commit passes over a corpus. Early passes always
// commit (the store has to bootstrap); the last three only keep changes
// that do not increase the total grammar cost.
LearnReport learn_loop(const PatternStore& store,
                       const std::vector<std::vector<Symbol>>& corpus,
                       const SearchParams& params, int passes = 10);

} // namespace palign
