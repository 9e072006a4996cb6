#include "palign/learning.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "palign/error.hpp"
#include "palign/scoring.hpp"

namespace palign {

std::vector<Symbol> ChunkLexicon::flatten() const {
    std::vector<Symbol> out;
    for (int e : final_stream) {
        if (e < 0) {
            out.push_back(leaves[~e]);
        } else {
            const Chunk& c = chunks[e];
            out.insert(out.end(), c.symbols.begin(), c.symbols.end());
        }
    }
    return out;
}

namespace {

void bracket_element(const ChunkLexicon& lex, const std::map<std::string, std::pair<int, int>>& parts,
                     int element, std::ostream& out) {
    if (element < 0) {
        out << lex.leaves[~element];
        return;
    }
    const Chunk& c = lex.chunks[element];
    auto it = parts.find(c.id);
    out << '[';
    bracket_element(lex, parts, it->second.first, out);
    out << ' ';
    bracket_element(lex, parts, it->second.second, out);
    out << ']';
}

} // namespace

std::string ChunkLexicon::bracketed() const {
    // rebuild each chunk's two halves from the merge log
    std::map<std::string, std::pair<int, int>> parts;
    std::map<std::string, int> chunk_index;
    for (std::size_t i = 0; i < chunks.size(); ++i) chunk_index[chunks[i].id] = static_cast<int>(i);
    std::map<std::string, int> leaf_index;
    for (std::size_t i = 0; i < leaves.size(); ++i) leaf_index["'" + leaves[i]] = ~static_cast<int>(i);
    auto resolve = [&](const std::string& name) {
        auto li = leaf_index.find(name);
        if (li != leaf_index.end()) return li->second;
        return chunk_index.at(name);
    };
    for (const MergeRecord& m : merge_log) {
        parts[m.chunk_id] = {resolve(m.left), resolve(m.right)};
    }
    std::ostringstream out;
    bool first = true;
    for (int e : final_stream) {
        if (!first) out << ' ';
        first = false;
        bracket_element(*this, parts, e, out);
    }
    return out.str();
}

std::vector<std::size_t> ChunkLexicon::ranked_chunks() const {
    std::vector<std::size_t> order(chunks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return chunks[a].final_count > chunks[b].final_count;
    });
    return order;
}

ChunkLexicon discover_chunks(const std::vector<Symbol>& stream, int max_chunks, int min_count) {
    if (max_chunks < 0 || min_count < 1) throw ConfigError("discover_chunks: bad limits");
    ChunkLexicon lex;
    std::map<Symbol, int> leaf_ids;
    std::vector<int> work;
    work.reserve(stream.size());
    for (const Symbol& s : stream) {
        auto it = leaf_ids.find(s);
        if (it == leaf_ids.end()) {
            it = leaf_ids.emplace(s, ~static_cast<int>(lex.leaves.size())).first;
            lex.leaves.push_back(s);
        }
        work.push_back(it->second);
    }

    auto element_name = [&](int e) {
        return e < 0 ? "'" + lex.leaves[~e] : lex.chunks[e].id;
    };
    auto element_symbols = [&](int e) -> std::vector<Symbol> {
        if (e < 0) return {lex.leaves[~e]};
        return lex.chunks[e].symbols;
    };

    while (static_cast<int>(lex.chunks.size()) < max_chunks) {
        // count adjacent pairs and remember each pair's first occurrence
        std::map<std::pair<int, int>, std::pair<std::uint64_t, std::size_t>> pairs;
        for (std::size_t i = 0; i + 1 < work.size(); ++i) {
            auto key = std::make_pair(work[i], work[i + 1]);
            auto it = pairs.find(key);
            if (it == pairs.end()) {
                pairs.emplace(key, std::make_pair(1ull, i));
            } else {
                ++it->second.first;
            }
        }
        std::pair<int, int> best{0, 0};
        std::uint64_t best_count = 0;
        std::size_t best_first = 0;
        for (const auto& [key, val] : pairs) {
            if (val.first > best_count ||
                (val.first == best_count && best_count > 0 && val.second < best_first)) {
                best = key;
                best_count = val.first;
                best_first = val.second;
            }
        }
        if (best_count < static_cast<std::uint64_t>(min_count)) break;

        Chunk chunk;
        chunk.id = "L" + std::to_string(lex.chunks.size() + 1);
        chunk.symbols = element_symbols(best.first);
        const std::vector<Symbol> right = element_symbols(best.second);
        chunk.symbols.insert(chunk.symbols.end(), right.begin(), right.end());
        chunk.merge_count = best_count;
        lex.merge_log.push_back(
            MergeRecord{element_name(best.first), element_name(best.second), chunk.id, best_count});
        const int chunk_elem = static_cast<int>(lex.chunks.size());
        lex.chunks.push_back(std::move(chunk));

        // left-to-right non-overlapping rewrite
        std::vector<int> next;
        next.reserve(work.size());
        for (std::size_t i = 0; i < work.size();) {
            if (i + 1 < work.size() && work[i] == best.first && work[i + 1] == best.second) {
                next.push_back(chunk_elem);
                i += 2;
            } else {
                next.push_back(work[i]);
                ++i;
            }
        }
        work = std::move(next);
    }

    lex.final_stream = work;
    for (int e : work) {
        if (e >= 0) ++lex.chunks[e].final_count;
    }
    return lex;
}

DerivedPatterns derive_patterns(const PatternStore& store, const Pattern& input,
                                const SearchParams& params, int& next_learned_id) {
    DerivedPatterns out;
    double baseline = 0.0; // best difference before learning; set below
    auto fresh_id = [&] { return "L" + std::to_string(next_learned_id++); };
    auto sequence_exists = [&](const std::vector<Symbol>& symbols) {
        for (const Pattern& p : store.patterns()) {
            if (p.symbols == symbols) return true;
        }
        return false;
    };
    // A candidate must carry its weight: committing it (with the frequency
    // increments) may not lower the best difference for this very input.
    // Re-deriving statistics can otherwise dilute the symbol costs enough to
    // hurt, and learning must never hurt the instance it learned from.
    auto add_candidate = [&](std::vector<Symbol> symbols) {
        if (symbols.empty() || sequence_exists(symbols)) return;
        for (const Pattern& c : out.candidates) {
            if (c.symbols == symbols) return;
        }
        Pattern p;
        p.id = fresh_id();
        p.symbols = std::move(symbols);
        p.frequency = 1;
        p.origin = Origin::Old;
        PatternStore probe = store.with({p}, out.frequency_increments);
        const double with_it =
            build_alignments(probe, input, params).front().score.compression_difference;
        if (with_it < baseline - 1e-9) return;
        out.candidates.push_back(std::move(p));
    };

    if (store.empty()) {
        baseline = 0.0;
        add_candidate(input.symbols);
        return out;
    }
    std::vector<ScoredAlignment> ranked = build_alignments(store, input, params);
    const Alignment& best = ranked.front().alignment;
    baseline = ranked.front().score.compression_difference;
    if (best.rows.empty()) {
        add_candidate(input.symbols);
        return out;
    }

    for (const auto& row : best.rows) ++out.frequency_increments[row->id];

    const std::size_t n = best.input.size();
    std::vector<bool> matched(n, false);
    // covered New span per row, and whether every row symbol sits in a column
    std::vector<int> span_lo(best.row_count(), -1);
    std::vector<int> span_hi(best.row_count(), -1);
    std::vector<std::size_t> in_columns(best.row_count(), 0);
    for (const Column& c : best.columns) {
        int new_pos = -1;
        for (const ColumnEntry& e : c.entries) {
            if (e.row == 0) new_pos = e.pos;
        }
        for (const ColumnEntry& e : c.entries) {
            if (e.row == 0) {
                matched[e.pos] = true;
                continue;
            }
            ++in_columns[e.row];
            if (new_pos >= 0) {
                if (span_lo[e.row] < 0) span_lo[e.row] = new_pos;
                span_lo[e.row] = std::min(span_lo[e.row], new_pos);
                span_hi[e.row] = std::max(span_hi[e.row], new_pos);
            }
        }
    }

    // (a) maximal unmatched segments
    for (std::size_t i = 0; i < n;) {
        if (matched[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !matched[j]) ++j;
        add_candidate(std::vector<Symbol>(best.input.symbols.begin() + i,
                                          best.input.symbols.begin() + j));
        i = j;
    }

    // (b) one composite: fully matched rows' spans replaced by their id
    std::vector<int> span_owner(n, -1);
    bool any_replacement = false;
    for (int r = 1; r < best.row_count(); ++r) {
        if (in_columns[r] != best.row_pattern(r).size()) continue; // not fully matched
        if (span_lo[r] < 0) continue;                              // covers no New symbol
        bool contiguous = true;
        for (int i = span_lo[r]; i <= span_hi[r]; ++i) contiguous &= matched[i];
        if (!contiguous) continue;
        bool free_span = true;
        for (int i = span_lo[r]; i <= span_hi[r]; ++i) free_span &= span_owner[i] < 0;
        if (!free_span) continue;
        for (int i = span_lo[r]; i <= span_hi[r]; ++i) span_owner[i] = r;
        any_replacement = true;
    }
    if (any_replacement) {
        std::vector<Symbol> composite;
        for (std::size_t i = 0; i < n;) {
            if (span_owner[i] >= 0) {
                const int r = span_owner[i];
                composite.push_back(best.rows[r - 1]->id);
                while (i < n && span_owner[i] == r) ++i;
            } else {
                composite.push_back(best.input.symbols[i]);
                ++i;
            }
        }
        if (composite.size() >= 2) add_candidate(std::move(composite));
    }
    return out;
}

PatternStore commit(const PatternStore& store, const DerivedPatterns& derived) {
    return store.with(derived.candidates, derived.frequency_increments);
}

GrammarCost grammar_cost(const PatternStore& store,
                         const std::vector<std::vector<Symbol>>& corpus,
                         const SearchParams& params) {
    GrammarCost gc;
    for (const Pattern& p : store.patterns()) {
        for (const Symbol& s : p.symbols) gc.grammar_bits += store.symbol_cost(s);
        gc.grammar_bits += store.pattern_code_cost(p.id);
    }
    for (const std::vector<Symbol>& seq : corpus) {
        if (seq.empty()) continue;
        Pattern input = make_new_pattern(seq);
        std::vector<ScoredAlignment> ranked = build_alignments(store, input, params);
        gc.encoding_bits += ranked.front().score.encoded_bits;
    }
    gc.total_bits = gc.grammar_bits + gc.encoding_bits;
    return gc;
}

LearnReport learn_loop(const PatternStore& store,
                       const std::vector<std::vector<Symbol>>& corpus,
                       const SearchParams& params, int passes) {
    if (passes < 1) throw ConfigError("learn_loop: passes must be positive");
    LearnReport report;
    report.store = store;
    report.before = grammar_cost(store, corpus, params);

    int next_id = 1;
    for (const Pattern& p : report.store.patterns()) {
        if (p.id.size() > 1 && p.id[0] == 'L') {
            next_id = std::max(next_id, std::atoi(p.id.c_str() + 1) + 1);
        }
    }

    const int greedy_from = std::max(1, passes - 2); // final three passes
    GrammarCost last = report.before;
    for (int pass = 1; pass <= passes; ++pass) {
        for (const std::vector<Symbol>& seq : corpus) {
            if (seq.empty()) continue;
            Pattern input = make_new_pattern(seq);
            int candidate_id = next_id;
            DerivedPatterns derived = derive_patterns(report.store, input, params, candidate_id);
            if (derived.candidates.empty() && derived.frequency_increments.empty()) continue;
            PatternStore updated = commit(report.store, derived);
            if (pass >= greedy_from) {
                GrammarCost cost = grammar_cost(updated, corpus, params);
                if (cost.total_bits > last.total_bits) continue; // keep the better store
                last = cost;
            }
            report.store = updated;
            next_id = candidate_id;
        }
        last = grammar_cost(report.store, corpus, params);
        report.per_pass.push_back(last);
    }
    report.after = report.per_pass.back();
    return report;
}

} // namespace palign
