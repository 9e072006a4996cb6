#include "palign/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <set>
#include <unordered_set>

#include "palign/error.hpp"

namespace palign {

namespace {

// Backward-linked chain of matched pairs, shared between DP cells. Chains
// are only created at match steps, so two candidates with equal pair lists
// always share the same node; pointer identity doubles as list identity.
struct Link {
    int a;
    int b;
    std::shared_ptr<const Link> prev;
    std::uint64_t seq; // creation order, the deterministic tiebreak
};

struct Cand {
    double score = 0.0;
    std::uint64_t seq = 0;
    std::shared_ptr<const Link> tail;
};

std::vector<std::pair<int, int>> unroll(const std::shared_ptr<const Link>& tail) {
    std::vector<std::pair<int, int>> pairs;
    for (const Link* l = tail.get(); l != nullptr; l = l->prev.get()) {
        pairs.emplace_back(l->a, l->b);
    }
    std::reverse(pairs.begin(), pairs.end());
    return pairs;
}

// Keeps the best k candidates, distinct chains only.
void keep_best(std::vector<Cand>& cands, int k) {
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.seq < y.seq;
    });
    std::vector<Cand> out;
    out.reserve(std::min<std::size_t>(cands.size(), k));
    std::unordered_set<const Link*> seen;
    for (Cand& c : cands) {
        if (!seen.insert(c.tail.get()).second) continue;
        out.push_back(std::move(c));
        if (static_cast<int>(out.size()) >= k) break;
    }
    cands = std::move(out);
}

constexpr std::size_t kExactLimit = 64;

} // namespace

std::vector<Matching> pairwise_match_weighted(const std::vector<Symbol>& a,
                                              const std::vector<Symbol>& b,
                                              const std::function<double(const Symbol&)>& weight,
                                              int k) {
    if (k < 1) throw ConfigError("pairwise_match: k must be >= 1");
    if (a.empty() || b.empty()) return {};

    // cheap reject: no shared symbol at all
    {
        std::set<Symbol> in_b(b.begin(), b.end());
        bool any = false;
        for (const Symbol& s : a) {
            if (in_b.count(s)) {
                any = true;
                break;
            }
        }
        if (!any) return {};
    }

    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const bool banded = a.size() > kExactLimit && b.size() > kExactLimit;
    const int band = banded ? std::max(64, std::abs(n - m) + 32) : std::max(n, m) + 1;

    std::vector<double> wa(n);
    for (int i = 0; i < n; ++i) wa[i] = weight(a[i]);

    std::uint64_t next_seq = 1;

    // cells[i][j] = k best matchings of a[0..i) vs b[0..j).
    std::vector<std::vector<std::vector<Cand>>> cells(
        n + 1, std::vector<std::vector<Cand>>(m + 1));
    cells[0][0].push_back(Cand{});
    for (int j = 1; j <= m; ++j) cells[0][j] = cells[0][j - 1];
    std::vector<Cand> pool;
    for (int i = 1; i <= n; ++i) {
        cells[i][0] = cells[i - 1][0];
        for (int j = 1; j <= m; ++j) {
            if (std::abs(i - j) > band) continue;
            pool.clear();
            pool.insert(pool.end(), cells[i - 1][j].begin(), cells[i - 1][j].end());
            pool.insert(pool.end(), cells[i][j - 1].begin(), cells[i][j - 1].end());
            if (a[i - 1] == b[j - 1]) {
                for (const Cand& c : cells[i - 1][j - 1]) {
                    pool.push_back(Cand{
                        c.score + wa[i - 1], next_seq,
                        std::make_shared<const Link>(Link{i - 1, j - 1, c.tail, next_seq})});
                    ++next_seq;
                }
            }
            keep_best(pool, k);
            cells[i][j] = pool;
        }
    }

    std::vector<Matching> out;
    for (const Cand& c : cells[n][m]) {
        if (!c.tail) continue; // the empty matching is not a result
        Matching mt;
        mt.pairs = unroll(c.tail);
        mt.score_hint = c.score;
        mt.exact = !banded;
        out.push_back(std::move(mt));
    }
    return out;
}

std::vector<Matching> pairwise_match(const std::vector<Symbol>& a,
                                     const std::vector<Symbol>& b,
                                     const PatternStore& store,
                                     int k) {
    return pairwise_match_weighted(
        a, b, [&store](const Symbol& s) { return store.symbol_cost(s); }, k);
}

} // namespace palign
