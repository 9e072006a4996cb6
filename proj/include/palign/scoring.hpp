#pragma once

#include <vector>

#include "palign/alignment.hpp"
#include "palign/core.hpp"

namespace palign {

struct CompressionScore {
    BitCost raw_bits = 0.0;             // the New pattern spelled literally
    BitCost encoded_bits = 0.0;         // cost of encoding it via the alignment
    double compression_difference = 0.0; // raw - encoded, may be negative
};

// Minimum-length-encoding score of an alignment.
//
//   raw_bits     = sum of symbol_cost over the New pattern.
//   encoded_bits = sum over Old rows of their effective reference cost
//                + symbol_cost of every unmatched New symbol
//                + symbol_cost of every unconsummated shared Old symbol.
//
// A row's reference cost starts at pattern_code_cost and is worked off by
// unification: every one of its symbols merged with a different stored
// pattern's symbol waives that symbol's cost, floored at zero. Conversely a
// shared symbol (one that occurs in several stored patterns) left unmerged
// is charged at its literal cost: structure that a row advertises but the
// alignment does not consume counts against it. Symbols private to a single
// pattern stay free when unmatched; they are the alignment's inferences.
CompressionScore score_alignment(const PatternStore& store, const Alignment& al);

struct ScoredAlignment {
    Alignment alignment;
    CompressionScore score;
};

// Relative probabilities over a candidate set: p_i proportional to
// 2^(-encoded_bits_i), normalized, computed stably in log space.
std::vector<double> alignment_probabilities(const std::vector<CompressionScore>& scored);

// A symbol carried by an Old row but absent from the matched structure.
struct Inference {
    Symbol symbol;
    int source_row = 0;
    double p = 0.0;
};

// Every Old-row symbol not covered by a column, in projection order, tagged
// with the alignment's probability.
std::vector<Inference> infer(const Alignment& al, double probability);

// Inferences pooled across a ranked candidate set: a symbol inferred by
// several alignments takes the sum of their probabilities, capped at 1.
std::vector<Inference> aggregate_inferences(const std::vector<ScoredAlignment>& candidates,
                                            const std::vector<double>& probabilities);

// Canonical string naming every instance the score still charges (uncovered
// New symbols and unconsummated shared Old symbols). Alignments over the
// same rows with equal signatures are interchangeable for search purposes;
// the beam uses this to keep structurally different variants alive.
std::string charge_signature(const PatternStore& store, const Alignment& al);

} // namespace palign
