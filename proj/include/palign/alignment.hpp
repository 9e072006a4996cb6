#pragma once

#include <memory>
#include <string>
#include <vector>

#include "palign/core.hpp"
#include "palign/matching.hpp"

namespace palign {

struct ColumnEntry {
    int row = 0; // 0 = the New row, >= 1 Old row instances
    int pos = 0; // position within that row's pattern
};

// A column records one act of unification: >= 2 equal symbols merged.
struct Column {
    Symbol symbol;
    std::vector<ColumnEntry> entries; // sorted by row, at most one per row
};

// One New pattern (row 0) plus any number of Old pattern instances,
// order-preserving per row. The same Old pattern may occupy several rows.
// Rows share immutable pattern values; alignments copy cheaply.
struct Alignment {
    Pattern input;                                      // row 0
    std::vector<std::shared_ptr<const Pattern>> rows;   // row r -> rows[r-1]
    std::vector<Column> columns;

    int row_count() const { return 1 + static_cast<int>(rows.size()); }
    const Pattern& row_pattern(int r) const { return r == 0 ? input : *rows[r - 1]; }
};

// Throws Error when a structural invariant is broken.
void validate(const Alignment& al);

// One element of the merged left-to-right reading of an alignment: either a
// column or a single row's unmatched symbol.
struct ProjectionCell {
    Symbol symbol;
    int column_index = -1; // >= 0 when the cell is a column
    int row = -1;          // residue cells: owning row
    int pos = -1;          // residue cells: position in the owning row
    bool is_column() const { return column_index >= 0; }
};

// Merges all rows into one sequence. Each column contributes its symbol
// once. A run of unmatched symbols attaches to the gap just after the last
// column containing its row (or just before the row's first column when
// there is none); within a gap, runs are ordered row 0 first, then row 1,
// and so on.
std::vector<ProjectionCell> project(const Alignment& al);

std::vector<Symbol> projection_symbols(const Alignment& al);

// Extends an alignment with one more Old row, merging the given matching of
// `pat` against the projection cells of `base`.
Alignment unify(const Alignment& base, const std::vector<ProjectionCell>& cells,
                const Pattern& pat, const Matching& matching);

// Row-permutation-invariant serialization; equal keys mean the same
// alignment. Also the final ranking tiebreak.
std::string canonical_key(const Alignment& al);

std::vector<std::string> sorted_row_ids(const Alignment& al);

} // namespace palign
