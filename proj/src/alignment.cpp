#include "palign/alignment.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "palign/error.hpp"

namespace palign {

void validate(const Alignment& al) {
    if (al.input.origin != Origin::New) throw Error("alignment: row 0 must be a New pattern");
    for (const auto& p : al.rows) {
        if (p->origin != Origin::Old) throw Error("alignment: rows >= 1 must be Old patterns");
    }
    // next expected minimum position per row, also catches position reuse
    std::vector<int> next(al.row_count(), 0);
    for (const Column& c : al.columns) {
        if (c.entries.size() < 2) throw Error("alignment: column with fewer than 2 entries");
        int prev_row = -1;
        for (const ColumnEntry& e : c.entries) {
            if (e.row <= prev_row) throw Error("alignment: column entries not sorted by row");
            prev_row = e.row;
            if (e.row < 0 || e.row >= al.row_count()) throw Error("alignment: entry row out of range");
            const Pattern& p = al.row_pattern(e.row);
            if (e.pos < 0 || e.pos >= static_cast<int>(p.size())) {
                throw Error("alignment: entry position out of range");
            }
            if (p.symbols[e.pos] != c.symbol) throw Error("alignment: entry symbol mismatch");
            if (e.pos < next[e.row]) throw Error("alignment: crossing or reused position");
            next[e.row] = e.pos + 1;
        }
    }
}

std::vector<ProjectionCell> project(const Alignment& al) {
    const int ncols = static_cast<int>(al.columns.size());
    // participation[r] = list of (column index, pos), in column order
    std::vector<std::vector<std::pair<int, int>>> participation(al.row_count());
    for (int ci = 0; ci < ncols; ++ci) {
        for (const ColumnEntry& e : al.columns[ci].entries) {
            participation[e.row].emplace_back(ci, e.pos);
        }
    }

    struct Run {
        int row;
        int begin;
        int end; // half-open
    };
    // gaps[g] collects runs placed before column g (g == ncols: after the last)
    std::vector<std::vector<Run>> gaps(ncols + 1);
    for (int r = 0; r < al.row_count(); ++r) {
        const int len = static_cast<int>(al.row_pattern(r).size());
        const auto& parts = participation[r];
        if (parts.empty()) {
            if (len > 0) gaps[0].push_back(Run{r, 0, len});
            continue;
        }
        if (parts.front().second > 0) {
            gaps[parts.front().first].push_back(Run{r, 0, parts.front().second});
        }
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            if (parts[i + 1].second > parts[i].second + 1) {
                gaps[parts[i].first + 1].push_back(
                    Run{r, parts[i].second + 1, parts[i + 1].second});
            }
        }
        if (parts.back().second + 1 < len) {
            gaps[parts.back().first + 1].push_back(Run{r, parts.back().second + 1, len});
        }
    }
    for (auto& g : gaps) {
        std::stable_sort(g.begin(), g.end(), [](const Run& a, const Run& b) {
            if (a.row != b.row) return a.row < b.row;
            return a.begin < b.begin;
        });
    }

    std::vector<ProjectionCell> cells;
    auto emit_gap = [&](int g) {
        for (const Run& run : gaps[g]) {
            const Pattern& p = al.row_pattern(run.row);
            for (int pos = run.begin; pos < run.end; ++pos) {
                ProjectionCell cell;
                cell.symbol = p.symbols[pos];
                cell.row = run.row;
                cell.pos = pos;
                cells.push_back(std::move(cell));
            }
        }
    };
    for (int ci = 0; ci < ncols; ++ci) {
        emit_gap(ci);
        ProjectionCell cell;
        cell.symbol = al.columns[ci].symbol;
        cell.column_index = ci;
        cells.push_back(std::move(cell));
    }
    emit_gap(ncols);
    return cells;
}

std::vector<Symbol> projection_symbols(const Alignment& al) {
    std::vector<Symbol> out;
    for (const ProjectionCell& c : project(al)) out.push_back(c.symbol);
    return out;
}

Alignment unify(const Alignment& base, const std::vector<ProjectionCell>& cells,
                const Pattern& pat, const Matching& matching) {
    Alignment out;
    out.input = base.input;
    out.rows = base.rows;
    out.rows.push_back(std::make_shared<const Pattern>(pat));
    const int new_row = static_cast<int>(out.rows.size());

    std::map<int, int> matched; // cell index -> position in pat
    for (const auto& [ci, pj] : matching.pairs) matched.emplace(ci, pj);

    out.columns.reserve(base.columns.size() + matching.pairs.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const ProjectionCell& cell = cells[i];
        auto hit = matched.find(static_cast<int>(i));
        if (cell.is_column()) {
            Column col = base.columns[cell.column_index];
            if (hit != matched.end()) {
                col.entries.push_back(ColumnEntry{new_row, hit->second});
            }
            out.columns.push_back(std::move(col));
        } else if (hit != matched.end()) {
            Column col;
            col.symbol = cell.symbol;
            col.entries = {ColumnEntry{cell.row, cell.pos}, ColumnEntry{new_row, hit->second}};
            out.columns.push_back(std::move(col));
        }
    }
    return out;
}

std::vector<std::string> sorted_row_ids(const Alignment& al) {
    std::vector<std::string> ids;
    ids.reserve(al.rows.size());
    for (const auto& p : al.rows) ids.push_back(p->id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::string canonical_key(const Alignment& al) {
    // Rows are named by pattern id plus the positions they contribute to
    // columns; columns are serialized as a sorted set. The key is therefore
    // independent of both row numbering and column vector order.
    std::vector<std::string> row_token(al.row_count());
    row_token[0] = "~new";
    {
        std::vector<std::vector<int>> positions(al.row_count());
        for (const Column& c : al.columns) {
            for (const ColumnEntry& e : c.entries) positions[e.row].push_back(e.pos);
        }
        for (int r = 1; r < al.row_count(); ++r) {
            std::sort(positions[r].begin(), positions[r].end());
            std::string tok = al.rows[r - 1]->id + "@";
            for (int p : positions[r]) tok += std::to_string(p) + ",";
            row_token[r] = std::move(tok);
        }
    }

    std::vector<std::string> cols;
    cols.reserve(al.columns.size());
    for (const Column& c : al.columns) {
        std::vector<std::string> entries;
        for (const ColumnEntry& e : c.entries) {
            entries.push_back(row_token[e.row] + ":" + std::to_string(e.pos));
        }
        std::sort(entries.begin(), entries.end());
        std::string s = c.symbol + "{";
        for (const std::string& e : entries) s += e + "|";
        s += "}";
        cols.push_back(std::move(s));
    }
    std::sort(cols.begin(), cols.end());

    std::vector<std::string> ids = sorted_row_ids(al);
    std::ostringstream key;
    key << "R";
    for (const std::string& id : ids) key << '|' << id;
    key << "#C";
    for (const std::string& c : cols) key << c;
    return key.str();
}

} // namespace palign
