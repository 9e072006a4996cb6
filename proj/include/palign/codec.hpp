#pragma once

#include <optional>
#include <string>
#include <vector>

#include "palign/alignment.hpp"
#include "palign/core.hpp"
#include "palign/search.hpp"

namespace palign {

// One element of an encoding: a stored-pattern reference or a literal symbol.
struct CodeItem {
    enum class Kind { PatternRef, Literal };
    Kind kind = Kind::Literal;
    std::string pattern_id;   // PatternRef only
    std::vector<bool> bitmap; // PatternRef: which pattern symbols to expand; empty = all
    Symbol literal;           // Literal only

    static CodeItem ref(std::string id, std::vector<bool> bitmap = {});
    static CodeItem lit(Symbol s);
};

struct Encoding {
    std::vector<CodeItem> items;
    BitCost cost = 0.0; // always equals recompute_cost(store, *this)
};

BitCost recompute_cost(const PatternStore& store, const Encoding& enc);

// Turns an alignment into an encoding of its New pattern: walking the New
// row left to right, each maximal run of symbols covered by the same Old row
// emits one reference (carrying a skip bitmap when the row is only partially
// expanded); uncovered symbols emit literals. Alignments whose coverage
// would replay out of order are rejected with NonDecodableError.
Encoding encode(const PatternStore& store, const Alignment& al);

// Expands an encoding back into the exact symbol sequence.
std::vector<Symbol> decode(const PatternStore& store, const Encoding& enc);

// Language production is decoding against the grammar; alias kept for the
// command surface.
inline std::vector<Symbol> produce(const PatternStore& store, const Encoding& enc) {
    return decode(store, enc);
}

struct CompressedCorpus {
    PatternStore grammar;
    std::vector<Encoding> encodings;
    bool detached_grammar = false; // container carries only a grammar hash
};

// Aligns and encodes each sequence independently (in parallel; output order
// follows input order). Sequences the grammar cannot cover come out as
// all-literal encodings.
CompressedCorpus compress_corpus(const PatternStore& store,
                                 const std::vector<std::vector<Symbol>>& corpus,
                                 const SearchParams& params);

std::vector<std::vector<Symbol>> decompress_corpus(const CompressedCorpus& cc);

// Container format: header "SPC1", a grammar section in the pattern file
// format terminated by "%%", then one encoding per line of space-separated
// items "@<pattern-id>[/bitmap-hex]" or "=<symbol>". In detached mode the
// grammar section holds only a "# grammar-fnv1a64: <hex>" comment and the
// reader must be handed the matching store.
std::string write_container(const CompressedCorpus& cc);
CompressedCorpus read_container(const std::string& text,
                                const std::optional<PatternStore>& external_grammar = std::nullopt);

std::string grammar_hash(const PatternStore& store);

} // namespace palign
