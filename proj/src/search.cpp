#include "palign/search.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "palign/error.hpp"

namespace palign {

void SearchParams::check() const {
    if (beam_width < 1 || max_rows < 1 || max_results < 1) {
        throw ConfigError("search parameters must be positive");
    }
}

namespace {

constexpr int kMatchAlternatives = 4;  // k-best matchings tried per (alignment, pattern)
constexpr int kBeamPerRowSet = 12;     // beam slots per row multiset
constexpr int kBeamPerSignature = 2;   // ... of which per distinct charge signature

struct RankKey {
    double diff;
    int row_count;
    std::vector<std::string> row_ids;
    std::string canonical;
};

bool rank_before(const RankKey& a, const RankKey& b) {
    if (a.diff != b.diff) return a.diff > b.diff;
    if (a.row_count != b.row_count) return a.row_count < b.row_count;
    if (a.row_ids != b.row_ids) return a.row_ids < b.row_ids;
    return a.canonical < b.canonical;
}

struct PoolEntry {
    ScoredAlignment scored;
    RankKey key;
    std::string signature; // which instances are still chargeable
    mutable bool expanded = false;
};

RankKey make_key(const ScoredAlignment& sa) {
    return RankKey{sa.score.compression_difference, static_cast<int>(sa.alignment.rows.size()),
                   sorted_row_ids(sa.alignment), canonical_key(sa.alignment)};
}

// Runs fn(i) for i in [0, n) across a few threads; results land by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (n < 8 || hw < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = std::min<std::size_t>(hw, n);
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (std::thread& t : threads) t.join();
}

std::vector<ScoredAlignment> beam_search(const PatternStore& store, const Pattern& input,
                                         const SearchParams& params) {
    std::map<std::string, PoolEntry> pool; // canonical key -> best-known entry
    auto admit = [&](Alignment al) -> bool {
        ScoredAlignment sa{std::move(al), {}};
        sa.score = score_alignment(store, sa.alignment);
        std::string signature = charge_signature(store, sa.alignment);
        RankKey key = make_key(sa);
        std::string canon = key.canonical;
        return pool
            .emplace(std::move(canon),
                     PoolEntry{std::move(sa), std::move(key), std::move(signature)})
            .second;
    };

    Alignment seed;
    seed.input = input;
    admit(seed);

    std::vector<const PoolEntry*> beam;
    for (const auto& [k, e] : pool) beam.push_back(&e);

    for (int stage = 0; stage < params.max_rows; ++stage) {
        // each alignment is expanded once; expansions run in parallel and
        // merge deterministically
        std::vector<const PoolEntry*> frontier;
        for (const PoolEntry* e : beam) {
            if (!e->expanded &&
                static_cast<int>(e->scored.alignment.rows.size()) < params.max_rows) {
                frontier.push_back(e);
            }
        }
        if (frontier.empty()) break;
        std::vector<std::vector<Alignment>> found(frontier.size());
        parallel_for(frontier.size(), [&](std::size_t bi) {
            frontier[bi]->expanded = true;
            const Alignment& base = frontier[bi]->scored.alignment;
            const std::vector<ProjectionCell> cells = project(base);
            std::vector<Symbol> proj;
            proj.reserve(cells.size());
            for (const ProjectionCell& c : cells) proj.push_back(c.symbol);
            for (const Pattern& pat : store.patterns()) {
                for (const Matching& m :
                     pairwise_match(proj, pat.symbols, store, kMatchAlternatives)) {
                    found[bi].push_back(unify(base, cells, pat, m));
                }
            }
        });

        bool grew = false;
        for (std::vector<Alignment>& group : found) {
            for (Alignment& al : group) grew |= admit(std::move(al));
        }
        if (!grew) break;

        std::vector<const PoolEntry*> ranked;
        ranked.reserve(pool.size());
        for (const auto& [k, e] : pool) ranked.push_back(&e);
        std::sort(ranked.begin(), ranked.end(),
                  [](const PoolEntry* a, const PoolEntry* b) { return rank_before(a->key, b->key); });
        // near-tied column variants of one row set must not crowd out
        // everything else: per row multiset only a few slots, and within a
        // multiset preference goes to variants whose chargeable leftovers
        // differ (those are the ones a later row might still consume)
        std::map<std::vector<std::string>, int> per_set;
        std::map<std::pair<std::vector<std::string>, std::string>, int> per_sig;
        std::vector<const PoolEntry*> next_beam;
        for (const PoolEntry* e : ranked) {
            if (static_cast<int>(next_beam.size()) >= params.beam_width) break;
            int& used = per_set[e->key.row_ids];
            if (used >= kBeamPerRowSet) continue;
            int& sig_used = per_sig[{e->key.row_ids, e->signature}];
            if (sig_used >= kBeamPerSignature) continue;
            ++used;
            ++sig_used;
            next_beam.push_back(e);
        }
        beam = std::move(next_beam);
    }

    std::vector<const PoolEntry*> ranked;
    ranked.reserve(pool.size());
    for (const auto& [k, e] : pool) ranked.push_back(&e);
    std::sort(ranked.begin(), ranked.end(),
              [](const PoolEntry* a, const PoolEntry* b) { return rank_before(a->key, b->key); });
    std::vector<ScoredAlignment> out;
    for (const PoolEntry* e : ranked) {
        if (static_cast<int>(out.size()) >= params.max_results) break;
        validate(e->scored.alignment);
        out.push_back(e->scored);
    }
    return out;
}

// --- exhaustive enumeration -------------------------------------------------
//
// Enumerates every legal alignment for a chosen row multiset by emitting
// columns left to right: each step either stops (remaining symbols are
// residue) or picks the next column as a set of >= 2 rows with an equal
// symbol at or beyond each row's cursor. Alignments that leave a chosen row
// without any column are skipped; they are already covered by a smaller
// multiset. Within a fixed row multiset the score only improves as columns
// are added, so an admissible bound over the remaining suffixes prunes hard.

struct ExhaustiveState {
    const PatternStore* store = nullptr;
    int max_results = 10;
    Alignment al; // rows fixed; columns grow and shrink during recursion
    std::vector<int> cursor;

    // incremental score state
    double raw = 0.0;
    std::vector<double> code;                // per old row
    std::vector<double> waiver;              // per old row
    std::vector<std::vector<double>> cost;   // per row, per position
    std::vector<std::vector<char>> shared;   // old rows: chargeable symbol
    std::vector<std::vector<char>> consumed; // per row, per position
    std::vector<std::vector<double>> suffix_gain; // possible future gain from position on

    // retained candidates, pruned against the k-th best difference seen
    std::vector<PoolEntry> table;
    std::set<std::string> table_keys;
    std::multiset<double> best_diffs; // top max_results differences
    std::vector<int> row_entries;     // entry count per row, for symmetry breaking
    long long budget = 0;

    double current_diff() const {
        double encoded = 0.0;
        for (std::size_t r = 0; r < code.size(); ++r) {
            encoded += std::max(0.0, code[r] - waiver[r]);
        }
        for (int r = 0; r < al.row_count(); ++r) {
            const auto& marks = consumed[std::size_t(r)];
            for (std::size_t j = 0; j < marks.size(); ++j) {
                if (marks[j]) continue;
                if (r == 0) {
                    encoded += cost[0][j];
                } else if (shared[std::size_t(r - 1)][j]) {
                    encoded += cost[std::size_t(r)][j];
                }
            }
        }
        return raw - encoded;
    }

    double optimistic_bound() const {
        double bound = current_diff();
        for (int r = 0; r < al.row_count(); ++r) {
            bound += suffix_gain[std::size_t(r)][std::size_t(cursor[std::size_t(r)])];
        }
        for (std::size_t r = 0; r < code.size(); ++r) {
            bound += std::max(0.0, code[r] - waiver[r]);
        }
        return bound;
    }

    double table_floor() const {
        if (static_cast<int>(best_diffs.size()) < max_results) return -1e300;
        return *best_diffs.begin();
    }

    // rows of the same pattern are interchangeable: a row may receive its
    // first entry only after every earlier row of the same pattern has one,
    // counting entries in the column currently being assembled
    bool may_start(int row, const Column* pending) const {
        if (row == 0 || row_entries[std::size_t(row)] > 0) return true;
        const std::string& id = al.rows[std::size_t(row - 1)]->id;
        for (int i = 1; i < row; ++i) {
            if (al.rows[std::size_t(i - 1)]->id != id || row_entries[std::size_t(i)] > 0) {
                continue;
            }
            bool in_pending = false;
            if (pending != nullptr) {
                for (const ColumnEntry& e : pending->entries) in_pending |= e.row == i;
            }
            if (!in_pending) return false;
        }
        return true;
    }
};

void exhaustive_emit(ExhaustiveState& st) {
    for (std::size_t r = 1; r < st.row_entries.size(); ++r) {
        if (st.row_entries[r] == 0) return; // a chosen row sits unused
    }
    const double diff = st.current_diff();
    if (diff < st.table_floor() - 1e-9) return;
    st.best_diffs.insert(diff);
    if (static_cast<int>(st.best_diffs.size()) > st.max_results) {
        st.best_diffs.erase(st.best_diffs.begin());
    }
    ScoredAlignment sa{st.al, score_alignment(*st.store, st.al)};
    RankKey key = make_key(sa);
    if (!st.table_keys.insert(key.canonical).second) return;
    std::string signature; // not needed for ranking the exhaustive table
    st.table.push_back(PoolEntry{std::move(sa), std::move(key), std::move(signature)});
    if (static_cast<int>(st.table.size()) > st.max_results * 8) {
        std::sort(st.table.begin(), st.table.end(),
                  [](const PoolEntry& a, const PoolEntry& b) { return rank_before(a.key, b.key); });
        while (static_cast<int>(st.table.size()) > st.max_results * 4) {
            st.table_keys.erase(st.table.back().key.canonical);
            st.table.pop_back();
        }
    }
}

// applies one column to the incremental state; returns undo bookkeeping
struct ColumnUndo {
    std::vector<std::pair<int, int>> consumed_marks;
    std::vector<std::pair<int, double>> waiver_adds;
};

ColumnUndo apply_column(ExhaustiveState& st, const Column& col) {
    ColumnUndo undo;
    bool has_new = false;
    std::set<std::string> ids;
    std::map<std::string, int> first_of_id;
    for (const ColumnEntry& e : col.entries) {
        if (e.row == 0) {
            has_new = true;
            continue;
        }
        const std::string& id = st.al.rows[std::size_t(e.row - 1)]->id;
        ids.insert(id);
        if (!first_of_id.count(id)) first_of_id[id] = e.row;
    }
    const double sym_cost = st.store->symbol_cost(col.symbol);
    for (const ColumnEntry& e : col.entries) {
        ++st.row_entries[std::size_t(e.row)];
        auto& marks = st.consumed[std::size_t(e.row)];
        if (e.row == 0) {
            if (!marks[std::size_t(e.pos)]) {
                marks[std::size_t(e.pos)] = 1;
                undo.consumed_marks.emplace_back(e.row, e.pos);
            }
            continue;
        }
        const bool first = first_of_id[st.al.rows[std::size_t(e.row - 1)]->id] == e.row;
        const bool claims = first && (ids.size() >= 2 || has_new);
        if (first && ids.size() >= 2) {
            st.waiver[std::size_t(e.row - 1)] += sym_cost;
            undo.waiver_adds.emplace_back(e.row - 1, sym_cost);
        }
        if (claims && !marks[std::size_t(e.pos)]) {
            marks[std::size_t(e.pos)] = 1;
            undo.consumed_marks.emplace_back(e.row, e.pos);
        }
    }
    return undo;
}

void revert_column(ExhaustiveState& st, const ColumnUndo& undo, const Column& col) {
    for (const ColumnEntry& e : col.entries) --st.row_entries[std::size_t(e.row)];
    for (const auto& [row, pos] : undo.consumed_marks) {
        st.consumed[std::size_t(row)][std::size_t(pos)] = 0;
    }
    for (const auto& [row, amount] : undo.waiver_adds) {
        st.waiver[std::size_t(row)] -= amount;
    }
}

void exhaustive_extend_column(ExhaustiveState& st, Column& col, int min_row);

void exhaustive_step(ExhaustiveState& st) {
    if (--st.budget < 0) {
        throw ConfigError("exhaustive search exceeded its safety budget; "
                          "use beam search for instances this large");
    }
    exhaustive_emit(st);
    if (st.optimistic_bound() < st.table_floor() - 1e-9) return;
    // open a new column: choose its first (lowest) row and position
    for (int r = 0; r < st.al.row_count(); ++r) {
        if (!st.may_start(r, nullptr)) continue;
        const Pattern& rp = st.al.row_pattern(r);
        for (int p = st.cursor[std::size_t(r)]; p < static_cast<int>(rp.size()); ++p) {
            Column col;
            col.symbol = rp.symbols[std::size_t(p)];
            col.entries = {ColumnEntry{r, p}};
            const int save = st.cursor[std::size_t(r)];
            st.cursor[std::size_t(r)] = p + 1;
            exhaustive_extend_column(st, col, r + 1);
            st.cursor[std::size_t(r)] = save;
        }
    }
}

void exhaustive_extend_column(ExhaustiveState& st, Column& col, int min_row) {
    if (col.entries.size() >= 2) {
        const ColumnUndo undo = apply_column(st, col);
        st.al.columns.push_back(col);
        exhaustive_step(st);
        st.al.columns.pop_back();
        revert_column(st, undo, col);
    }
    for (int r = min_row; r < st.al.row_count(); ++r) {
        if (!st.may_start(r, &col)) continue;
        const Pattern& rp = st.al.row_pattern(r);
        for (int p = st.cursor[std::size_t(r)]; p < static_cast<int>(rp.size()); ++p) {
            if (rp.symbols[std::size_t(p)] != col.symbol) continue;
            col.entries.push_back(ColumnEntry{r, p});
            const int save = st.cursor[std::size_t(r)];
            st.cursor[std::size_t(r)] = p + 1;
            exhaustive_extend_column(st, col, r + 1);
            st.cursor[std::size_t(r)] = save;
            col.entries.pop_back();
        }
    }
}

void enumerate_row_multisets(const PatternStore& store, std::size_t from, int remaining,
                             std::vector<Pattern>& current,
                             const std::function<void(const std::vector<Pattern>&)>& visit) {
    visit(current);
    if (remaining == 0) return;
    for (std::size_t i = from; i < store.size(); ++i) {
        current.push_back(store.patterns()[i]);
        enumerate_row_multisets(store, i, remaining - 1, current, visit);
        current.pop_back();
    }
}

std::vector<ScoredAlignment> exhaustive_search(const PatternStore& store, const Pattern& input,
                                               const SearchParams& params) {
    ExhaustiveState st;
    st.store = &store;
    st.max_results = params.max_results;
    st.budget = 1'500'000;

    std::vector<Pattern> rows;
    enumerate_row_multisets(store, 0, params.max_rows, rows, [&](const std::vector<Pattern>& rs) {
        // a chosen row must be able to match something, or the multiset is dead
        for (std::size_t i = 0; i < rs.size(); ++i) {
            std::set<Symbol> partners(input.symbols.begin(), input.symbols.end());
            for (std::size_t j = 0; j < rs.size(); ++j) {
                if (j != i) partners.insert(rs[j].symbols.begin(), rs[j].symbols.end());
            }
            bool can_match = false;
            for (const Symbol& sym : rs[i].symbols) can_match |= partners.count(sym) > 0;
            if (!can_match) return;
        }
        st.al.input = input;
        st.al.rows.clear();
        for (const Pattern& r : rs) st.al.rows.push_back(std::make_shared<const Pattern>(r));
        st.al.columns.clear();
        const int nrows = st.al.row_count();
        st.cursor.assign(std::size_t(nrows), 0);
        st.row_entries.assign(std::size_t(nrows), 0);
        st.raw = 0.0;
        for (const Symbol& s : input.symbols) st.raw += store.symbol_cost(s);
        st.code.assign(rs.size(), 0.0);
        st.waiver.assign(rs.size(), 0.0);
        for (std::size_t r = 0; r < rs.size(); ++r) st.code[r] = store.pattern_code_cost(rs[r].id);
        st.cost.assign(std::size_t(nrows), {});
        st.shared.assign(rs.size(), {});
        st.consumed.assign(std::size_t(nrows), {});
        st.suffix_gain.assign(std::size_t(nrows), {});
        for (int r = 0; r < nrows; ++r) {
            const Pattern& rp = st.al.row_pattern(r);
            auto& costs = st.cost[std::size_t(r)];
            costs.resize(rp.size());
            st.consumed[std::size_t(r)].assign(rp.size(), 0);
            for (std::size_t j = 0; j < rp.size(); ++j) costs[j] = store.symbol_cost(rp.symbols[j]);
            if (r >= 1) {
                auto& flags = st.shared[std::size_t(r - 1)];
                flags.resize(rp.size());
                for (std::size_t j = 0; j < rp.size(); ++j) {
                    flags[j] = store.is_shared(rp.symbols[j]) ? 1 : 0;
                }
            }
            // gain available past each position: uncovered input symbols, or
            // chargeable old symbols that a later column could still consume
            auto& gain = st.suffix_gain[std::size_t(r)];
            gain.assign(rp.size() + 1, 0.0);
            for (int j = static_cast<int>(rp.size()) - 1; j >= 0; --j) {
                const bool counts = r == 0 || st.shared[std::size_t(r - 1)][std::size_t(j)];
                gain[std::size_t(j)] =
                    gain[std::size_t(j + 1)] + (counts ? costs[std::size_t(j)] : 0.0);
            }
        }
        exhaustive_step(st);
    });

    std::sort(st.table.begin(), st.table.end(),
              [](const PoolEntry& a, const PoolEntry& b) { return rank_before(a.key, b.key); });
    std::vector<ScoredAlignment> out;
    for (const PoolEntry& e : st.table) {
        if (static_cast<int>(out.size()) >= params.max_results) break;
        validate(e.scored.alignment);
        out.push_back(e.scored);
    }
    return out;
}

} // namespace

std::vector<ScoredAlignment> build_alignments(const PatternStore& store, const Pattern& input,
                                              const SearchParams& params) {
    params.check();
    if (input.origin != Origin::New) throw Error("build_alignments: input must be a New pattern");
    if (input.symbols.empty()) throw Error("build_alignments: input must be non-empty");
    return params.exhaustive ? exhaustive_search(store, input, params)
                             : beam_search(store, input, params);
}

std::vector<RetrievalHit> retrieve(const PatternStore& store, const Pattern& query,
                                   const SearchParams& params) {
    params.check();
    if (query.symbols.empty()) throw Error("retrieve: query must be non-empty");
    Pattern q = query;
    q.origin = Origin::New;
    q.frequency = 1;

    Alignment seed;
    seed.input = q;
    const std::vector<ProjectionCell> cells = project(seed);

    // For a single-row alignment the compression difference is, up to a
    // per-pattern constant, the matched total under this weight: matching a
    // shared symbol both covers a query symbol and clears the row's charge.
    const auto weight = [&store](const Symbol& s) {
        return store.symbol_cost(s) * (store.is_shared(s) ? 2.0 : 1.0);
    };
    std::vector<std::pair<RankKey, RetrievalHit>> hits;
    for (const Pattern& pat : store.patterns()) {
        std::vector<Matching> ms = pairwise_match_weighted(q.symbols, pat.symbols, weight, 1);
        if (ms.empty()) continue;
        Alignment al = unify(seed, cells, pat, ms.front());
        ScoredAlignment sa{std::move(al), {}};
        sa.score = score_alignment(store, sa.alignment);
        hits.emplace_back(make_key(sa), RetrievalHit{pat.id, sa.score});
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto& a, const auto& b) { return rank_before(a.first, b.first); });
    std::vector<RetrievalHit> out;
    for (auto& [key, hit] : hits) {
        if (static_cast<int>(out.size()) >= params.max_results) break;
        out.push_back(std::move(hit));
    }
    return out;
}

} // namespace palign
