#include "palign/render.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace palign {

std::string render_alignment(const Alignment& al) {
    const std::vector<ProjectionCell> cells = project(al);

    // x position per projection cell
    std::vector<std::size_t> x(cells.size(), 0);
    std::size_t width = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        x[i] = width;
        width += cells[i].symbol.size() + 1;
    }

    const int nrows = al.row_count();
    std::vector<std::string> row_line(nrows, std::string(width, ' '));
    std::vector<std::string> tie_line(std::max(0, nrows - 1), std::string(width, ' '));

    auto put = [&](std::string& line, std::size_t at, const std::string& text) {
        for (std::size_t i = 0; i < text.size(); ++i) line[at + i] = text[i];
    };

    for (std::size_t i = 0; i < cells.size(); ++i) {
        const ProjectionCell& cell = cells[i];
        if (!cell.is_column()) {
            put(row_line[cell.row], x[i], cell.symbol);
            continue;
        }
        const Column& col = al.columns[cell.column_index];
        int rmin = col.entries.front().row;
        int rmax = col.entries.back().row;
        for (const ColumnEntry& e : col.entries) put(row_line[e.row], x[i], cell.symbol);
        for (int r = rmin; r < rmax; ++r) tie_line[r][x[i]] = '|';
        for (int r = rmin + 1; r < rmax; ++r) {
            bool has_entry = false;
            for (const ColumnEntry& e : col.entries) has_entry |= e.row == r;
            if (!has_entry) row_line[r][x[i]] = '|';
        }
    }

    std::ostringstream out;
    for (int r = 0; r < nrows; ++r) {
        std::string body = row_line[r];
        while (!body.empty() && body.back() == ' ') body.pop_back();
        out << r << ' ' << body << ' ' << r;
        if (r >= 1) out << "  (" << al.rows[r - 1]->id << ')';
        out << '\n';
        if (r + 1 < nrows) {
            std::string ties = tie_line[r];
            while (!ties.empty() && ties.back() == ' ') ties.pop_back();
            out << "  " << ties << '\n';
        }
    }
    return out.str();
}

} // namespace palign
