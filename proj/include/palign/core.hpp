#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace palign {

// Information measured in bits (base-2, real-valued, always finite and >= 0).
using BitCost = double;

// A symbol is an opaque token: non-empty, no whitespace. Bracket-like tokens
// ("<", ">", "#head", ...) carry no special meaning.
using Symbol = std::string;

enum class Origin { New, Old };

// An ordered sequence of symbols with an occurrence count.
struct Pattern {
    std::string id;
    std::vector<Symbol> symbols;
    std::uint64_t frequency = 1;
    Origin origin = Origin::Old;

    std::size_t size() const { return symbols.size(); }
};

// Makes a New pattern (frequency is always 1 for fresh observations).
Pattern make_new_pattern(std::vector<Symbol> symbols, std::string id = "N1");

// The collection of Old patterns plus the statistics the cost model needs.
// Immutable after construction; mutation means building a new store.
class PatternStore {
public:
    PatternStore() = default;
    explicit PatternStore(std::vector<Pattern> old_patterns);

    const std::vector<Pattern>& patterns() const { return patterns_; }
    bool empty() const { return patterns_.empty(); }
    std::size_t size() const { return patterns_.size(); }

    bool contains(const std::string& id) const;
    // Throws UnknownPatternError.
    const Pattern& by_id(const std::string& id) const;

    std::uint64_t total_pattern_frequency() const { return total_pattern_frequency_; }
    std::uint64_t total_symbol_occurrences() const { return total_symbol_occurrences_; }
    std::size_t distinct_symbol_count() const { return occurrences_.size(); }
    std::uint64_t occurrences(const Symbol& s) const;

    // True when the symbol occurs in two or more distinct stored patterns.
    // Such symbols knit patterns together; leaving one unmatched in an
    // alignment is charged by the scorer.
    bool is_shared(const Symbol& s) const;

    // Shannon code length for spelling one symbol literally, with add-one
    // smoothing over the store-wide occurrence counts:
    //   log2((total_symbol_occurrences + V) / (occurrences(s) + 1))
    // where V is the number of distinct symbols in the store. Symbols absent
    // from the store get the maximal cost log2(total + V). An empty store has
    // no statistics at all; there the literal cost falls back to 8 bits per
    // byte of the token.
    BitCost symbol_cost(const Symbol& s) const;

    // Ideal code length for referencing a stored pattern:
    //   log2(total_pattern_frequency / frequency)
    // Throws UnknownPatternError if the id is not stored.
    BitCost pattern_code_cost(const std::string& id) const;

    // A copy of this store with extra patterns appended and the given
    // frequency increments applied. Ids of additions must be fresh.
    PatternStore with(const std::vector<Pattern>& additions,
                      const std::map<std::string, std::uint64_t>& frequency_increments = {}) const;

    const std::map<Symbol, std::uint64_t>& symbol_occurrences() const { return occurrences_; }

private:
    std::vector<Pattern> patterns_;
    std::map<std::string, std::size_t> index_;
    std::map<Symbol, std::uint64_t> occurrences_;
    std::map<Symbol, BitCost> costs_; // memoized symbol_cost per known symbol
    std::set<Symbol> shared_;
    std::uint64_t total_pattern_frequency_ = 0;
    std::uint64_t total_symbol_occurrences_ = 0;
    BitCost absent_cost_ = 0.0;
};

// Pattern file format: UTF-8 text, '#' or blank lines ignored, each data line
//   [<id>:]<frequency><TAB><symbol> <symbol> ...
// Ids default to P1, P2, ... by data-line order.
PatternStore load_store(const std::string& path);
PatternStore parse_store(std::string_view text);
std::string serialize_store(const PatternStore& store);

// Splits an inline string into symbols: on whitespace, or one symbol per
// character when per_char is set.
std::vector<Symbol> tokenize(std::string_view text, bool per_char = false);

} // namespace palign
