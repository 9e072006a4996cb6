#include "palign/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "palign/error.hpp"

namespace palign {

namespace {

// Per-instance bookkeeping shared by the scorer and the charge signature.
struct Coverage {
    std::vector<std::vector<bool>> in_column; // instance participates in a column
    std::vector<std::vector<bool>> consumed;  // merged with another pattern or with New
    std::vector<BitCost> waiver;              // per row, cost worked off the reference
};

Coverage analyze(const PatternStore& store, const Alignment& al) {
    const int nrows = al.row_count();
    Coverage cov;
    cov.in_column.resize(nrows);
    cov.consumed.resize(nrows);
    cov.waiver.assign(nrows, 0.0);
    for (int r = 0; r < nrows; ++r) {
        cov.in_column[r].assign(al.row_pattern(r).size(), false);
        cov.consumed[r].assign(al.row_pattern(r).size(), false);
    }
    for (const Column& c : al.columns) {
        bool has_new = false;
        std::set<std::string> ids;
        std::map<std::string, int> first_of_id; // pattern id -> lowest row
        for (const ColumnEntry& e : c.entries) {
            cov.in_column[e.row][e.pos] = true;
            if (e.row == 0) {
                has_new = true;
                continue;
            }
            const std::string& id = al.rows[e.row - 1]->id;
            ids.insert(id);
            if (!first_of_id.count(id)) first_of_id[id] = e.row;
        }
        const BitCost sym_cost = store.symbol_cost(c.symbol);
        for (const ColumnEntry& e : c.entries) {
            if (e.row == 0) {
                cov.consumed[0][e.pos] = true;
                continue;
            }
            // Only one instance per pattern can claim the merge; extra rows
            // of the same pattern add nothing and earn nothing.
            const bool first = first_of_id[al.rows[e.row - 1]->id] == e.row;
            if (first && ids.size() >= 2) {
                cov.waiver[e.row] += sym_cost;
                cov.consumed[e.row][e.pos] = true;
            } else if (first && has_new) {
                cov.consumed[e.row][e.pos] = true;
            }
        }
    }
    return cov;
}

} // namespace

CompressionScore score_alignment(const PatternStore& store, const Alignment& al) {
    CompressionScore score;
    for (const Symbol& s : al.input.symbols) score.raw_bits += store.symbol_cost(s);

    const Coverage cov = analyze(store, al);
    for (int r = 1; r < al.row_count(); ++r) {
        const Pattern& p = *al.rows[r - 1];
        const BitCost code = store.pattern_code_cost(p.id);
        score.encoded_bits += std::max(0.0, code - cov.waiver[r]);
        for (std::size_t j = 0; j < p.symbols.size(); ++j) {
            if (!cov.consumed[r][j] && store.is_shared(p.symbols[j])) {
                score.encoded_bits += store.symbol_cost(p.symbols[j]);
            }
        }
    }
    for (std::size_t j = 0; j < al.input.symbols.size(); ++j) {
        if (!cov.in_column[0][j]) score.encoded_bits += store.symbol_cost(al.input.symbols[j]);
    }
    score.compression_difference = score.raw_bits - score.encoded_bits;
    return score;
}

std::string charge_signature(const PatternStore& store, const Alignment& al) {
    const Coverage cov = analyze(store, al);
    std::string sig;
    for (std::size_t j = 0; j < al.input.symbols.size(); ++j) {
        if (!cov.in_column[0][j]) sig += "~" + std::to_string(j);
    }
    std::vector<std::string> charged;
    for (int r = 1; r < al.row_count(); ++r) {
        const Pattern& p = *al.rows[r - 1];
        for (std::size_t j = 0; j < p.symbols.size(); ++j) {
            if (!cov.consumed[r][j] && store.is_shared(p.symbols[j])) {
                charged.push_back(p.id + ":" + std::to_string(j));
            }
        }
    }
    std::sort(charged.begin(), charged.end());
    for (const std::string& c : charged) {
        sig += "|";
        sig += c;
    }
    return sig;
}

std::vector<double> alignment_probabilities(const std::vector<CompressionScore>& scored) {
    std::vector<double> probs(scored.size(), 0.0);
    if (scored.empty()) return probs;
    double min_bits = scored[0].encoded_bits;
    for (const CompressionScore& s : scored) min_bits = std::min(min_bits, s.encoded_bits);
    double total = 0.0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        probs[i] = std::exp2(-(scored[i].encoded_bits - min_bits));
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

std::vector<Inference> infer(const Alignment& al, double probability) {
    std::vector<Inference> out;
    for (const ProjectionCell& cell : project(al)) {
        if (!cell.is_column() && cell.row >= 1) {
            out.push_back(Inference{cell.symbol, cell.row, probability});
        }
    }
    return out;
}

std::vector<Inference> aggregate_inferences(const std::vector<ScoredAlignment>& candidates,
                                            const std::vector<double>& probabilities) {
    std::map<Symbol, double> pooled;
    std::vector<Symbol> order;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::set<Symbol> seen; // one vote per candidate, however many rows infer it
        for (const Inference& inf : infer(candidates[i].alignment, probabilities[i])) {
            if (!seen.insert(inf.symbol).second) continue;
            auto it = pooled.find(inf.symbol);
            if (it == pooled.end()) {
                pooled.emplace(inf.symbol, inf.p);
                order.push_back(inf.symbol);
            } else {
                it->second = std::min(1.0, it->second + inf.p);
            }
        }
    }
    std::vector<Inference> out;
    out.reserve(order.size());
    for (const Symbol& s : order) out.push_back(Inference{s, -1, pooled[s]});
    return out;
}

} // namespace palign
