#pragma once

// Shared fixtures, generators and independent oracles for the test suites.
// The oracles recompute costs and enumerate alignments from the raw rules,
// on their own data structures, so they share no code path with the engine.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "palign/core.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) {
    return std::string(PALIGN_FIXTURE_DIR) + "/" + name;
}

inline std::vector<std::string> syms(const std::string& text) {
    return palign::tokenize(text);
}

// ---------------------------------------------------------------------------
// Cost oracle: tallies occurrences over (symbols, frequency) rows and applies
// the published formulas directly.
struct CostOracle {
    std::vector<std::pair<std::vector<std::string>, std::uint64_t>> rows;

    std::uint64_t total_occ() const {
        std::uint64_t t = 0;
        for (const auto& [symbols, freq] : rows) t += freq * symbols.size();
        return t;
    }
    std::uint64_t occ(const std::string& s) const {
        std::uint64_t t = 0;
        for (const auto& [symbols, freq] : rows) {
            for (const auto& x : symbols) {
                if (x == s) t += freq;
            }
        }
        return t;
    }
    std::size_t distinct() const {
        std::set<std::string> d;
        for (const auto& [symbols, freq] : rows) d.insert(symbols.begin(), symbols.end());
        return d.size();
    }
    bool shared(const std::string& s) const {
        auto it = shared_cache.find(s);
        if (it != shared_cache.end()) return it->second;
        int homes = 0;
        for (const auto& [symbols, freq] : rows) {
            if (std::find(symbols.begin(), symbols.end(), s) != symbols.end()) ++homes;
        }
        return shared_cache[s] = homes >= 2;
    }
    double symbol_cost(const std::string& s) const {
        auto it = cost_cache.find(s);
        if (it != cost_cache.end()) return it->second;
        const double pool = double(total_occ()) + double(distinct());
        if (pool <= 0.0) return cost_cache[s] = 8.0 * double(s.size());
        return cost_cache[s] = std::log2(pool / (double(occ(s)) + 1.0));
    }
    double code_cost(std::size_t row) const {
        std::uint64_t total = 0;
        for (const auto& [symbols, freq] : rows) total += freq;
        return std::log2(double(total) / double(rows[row].second));
    }
    mutable std::map<std::string, bool> shared_cache;
    mutable std::map<std::string, double> cost_cache;
};

// ---------------------------------------------------------------------------
// Alignment oracle: a brute-force enumeration of every legal alignment for a
// fixed row selection, scored from scratch. Rows here are indices into the
// oracle's store; row instances may repeat.
struct OracleAlignment {
    // one column: list of (row, pos); row -1 is the input row
    std::vector<std::vector<std::pair<int, int>>> columns;
};

class AlignmentOracle {
public:
    CostOracle store;                     // old patterns with frequencies
    std::vector<std::string> input;       // the New sequence
    double best = 0.0;                    // best difference seen (input alone = 0 baseline)
    long long budget = 400'000;           // node cap; exceeded marks the run unusable
    bool exceeded = false;

    double run(int max_rows) {
        best = 0.0;
        std::vector<int> chosen;
        choose_rows(0, max_rows, chosen);
        return best;
    }

private:
    void choose_rows(std::size_t from, int remaining, std::vector<int>& chosen) {
        if (exceeded) return;
        score_all_alignments(chosen);
        if (remaining == 0) return;
        for (std::size_t i = from; i < store.rows.size(); ++i) {
            chosen.push_back(int(i));
            choose_rows(i, remaining - 1, chosen);
            chosen.pop_back();
        }
    }

    const std::vector<std::string>& row_syms(const std::vector<int>& chosen, int row) const {
        static const std::vector<std::string> none;
        if (row == -1) return input;
        return store.rows[chosen[std::size_t(row)]].first;
    }

    void score_all_alignments(const std::vector<int>& chosen) {
        OracleAlignment al;
        std::vector<int> cursor(chosen.size() + 1, 0); // index 0 = input row (-1)
        extend(chosen, al, cursor);
    }

    void extend(const std::vector<int>& chosen, OracleAlignment& al, std::vector<int>& cursor) {
        if (--budget < 0) {
            exceeded = true;
            return;
        }
        score(chosen, al);
        // next column: first member row and position, then extensions
        const int nrows = int(chosen.size());
        for (int r = -1; r < nrows; ++r) {
            const auto& rs = row_syms(chosen, r);
            for (int p = cursor[std::size_t(r + 1)]; p < int(rs.size()); ++p) {
                std::vector<std::pair<int, int>> col{{r, p}};
                const int save = cursor[std::size_t(r + 1)];
                cursor[std::size_t(r + 1)] = p + 1;
                grow_column(chosen, al, cursor, col, r + 1, rs[std::size_t(p)]);
                cursor[std::size_t(r + 1)] = save;
            }
        }
    }

    void grow_column(const std::vector<int>& chosen, OracleAlignment& al,
                     std::vector<int>& cursor, std::vector<std::pair<int, int>>& col,
                     int min_row, const std::string& symbol) {
        if (exceeded) return;
        if (col.size() >= 2) {
            al.columns.push_back(col);
            extend(chosen, al, cursor);
            al.columns.pop_back();
        }
        const int nrows = int(chosen.size());
        for (int r = min_row; r < nrows; ++r) {
            const auto& rs = row_syms(chosen, r);
            for (int p = cursor[std::size_t(r + 1)]; p < int(rs.size()); ++p) {
                if (rs[std::size_t(p)] != symbol) continue;
                col.emplace_back(r, p);
                const int save = cursor[std::size_t(r + 1)];
                cursor[std::size_t(r + 1)] = p + 1;
                grow_column(chosen, al, cursor, col, r + 1, symbol);
                cursor[std::size_t(r + 1)] = save;
                col.pop_back();
            }
        }
    }

    // scratch buffers, reused across nodes: index (row + 1) * stride + pos
    std::vector<char> scratch_covered;
    std::vector<char> scratch_consumed;
    std::vector<double> scratch_waiver;
    std::size_t stride = 0;

    void score(const std::vector<int>& chosen, const OracleAlignment& al) {
        stride = input.size();
        for (int r : chosen) stride = std::max(stride, store.rows[std::size_t(r)].first.size());
        const std::size_t cells = (chosen.size() + 1) * stride;
        scratch_covered.assign(cells, 0);
        scratch_consumed.assign(cells, 0);
        scratch_waiver.assign(chosen.size(), 0.0);
        auto covered = [&](int r, int p) -> char& {
            return scratch_covered[std::size_t(r + 1) * stride + std::size_t(p)];
        };
        auto consumed = [&](int r, int p) -> char& {
            return scratch_consumed[std::size_t(r + 1) * stride + std::size_t(p)];
        };

        // every chosen row must take part in at least one column
        std::vector<char> used(chosen.size(), 0);
        for (const auto& col : al.columns) {
            for (const auto& [r, p] : col) {
                if (r >= 0) used[std::size_t(r)] = 1;
                covered(r, p) = 1;
            }
        }
        for (char u : used) {
            if (!u) return;
        }

        double encoded = 0.0;
        std::vector<double>& waiver = scratch_waiver;
        for (const auto& col : al.columns) {
            const std::string& symbol =
                row_syms(chosen, col.front().first)[std::size_t(col.front().second)];
            bool has_new = false;
            std::set<int> ids;
            std::map<int, int> first_entry; // pattern index -> first row in column
            for (const auto& [r, p] : col) {
                if (r == -1) {
                    has_new = true;
                } else {
                    ids.insert(chosen[std::size_t(r)]);
                    if (!first_entry.count(chosen[std::size_t(r)])) {
                        first_entry[chosen[std::size_t(r)]] = r;
                    }
                }
            }
            for (const auto& [r, p] : col) {
                if (r == -1) {
                    consumed(-1, p) = 1;
                    continue;
                }
                const bool first = first_entry[chosen[std::size_t(r)]] == r;
                if (first && ids.size() >= 2) {
                    waiver[std::size_t(r)] += store.symbol_cost(symbol);
                    consumed(r, p) = 1;
                } else if (first && has_new) {
                    consumed(r, p) = 1;
                }
            }
        }
        for (std::size_t r = 0; r < chosen.size(); ++r) {
            encoded += std::max(0.0, store.code_cost(std::size_t(chosen[r])) - waiver[r]);
            const auto& rs = store.rows[std::size_t(chosen[r])].first;
            for (std::size_t p = 0; p < rs.size(); ++p) {
                if (!consumed(int(r), int(p)) && store.shared(rs[p])) {
                    encoded += store.symbol_cost(rs[p]);
                }
            }
        }
        double raw = 0.0;
        for (const auto& s : input) raw += store.symbol_cost(s);
        for (std::size_t p = 0; p < input.size(); ++p) {
            if (!covered(-1, int(p))) encoded += store.symbol_cost(input[std::size_t(p)]);
        }
        best = std::max(best, raw - encoded);
    }
};

// ---------------------------------------------------------------------------
// Deterministic random instances for property tests.
struct Rng {
    std::mt19937 gen;
    explicit Rng(std::uint32_t seed) : gen(seed) {}
    int between(int lo, int hi) { // inclusive
        return std::uniform_int_distribution<int>(lo, hi)(gen);
    }
    std::string letter(int alphabet) {
        return std::string(1, char('a' + between(0, alphabet - 1)));
    }
    std::vector<std::string> sequence(int len, int alphabet) {
        std::vector<std::string> out;
        for (int i = 0; i < len; ++i) out.push_back(letter(alphabet));
        return out;
    }
};

inline palign::PatternStore random_store(Rng& rng, int npatterns, int max_len, int alphabet) {
    std::vector<palign::Pattern> ps;
    for (int i = 0; i < npatterns; ++i) {
        palign::Pattern p;
        p.id = "P" + std::to_string(i + 1);
        p.symbols = rng.sequence(rng.between(1, max_len), alphabet);
        p.frequency = std::uint64_t(rng.between(1, 4));
        ps.push_back(std::move(p));
    }
    return palign::PatternStore(std::move(ps));
}

} // namespace testutil
