#include "palign/core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "palign/error.hpp"

namespace palign {

Pattern make_new_pattern(std::vector<Symbol> symbols, std::string id) {
    Pattern p;
    p.id = std::move(id);
    p.symbols = std::move(symbols);
    p.frequency = 1; // every fresh observation is a single event
    p.origin = Origin::New;
    return p;
}

PatternStore::PatternStore(std::vector<Pattern> old_patterns)
    : patterns_(std::move(old_patterns)) {
    std::map<Symbol, std::set<std::string>> homes;
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
        Pattern& p = patterns_[i];
        p.origin = Origin::Old;
        if (p.frequency == 0 || p.symbols.empty()) {
            throw Error("pattern '" + p.id + "': frequency and symbol list must be non-empty");
        }
        if (!index_.emplace(p.id, i).second) {
            throw DuplicateIdError(0, p.id);
        }
        total_pattern_frequency_ += p.frequency;
        for (const Symbol& s : p.symbols) {
            occurrences_[s] += p.frequency;
            total_symbol_occurrences_ += p.frequency;
            homes[s].insert(p.id);
        }
    }
    for (const auto& [sym, ids] : homes) {
        if (ids.size() >= 2) shared_.insert(sym);
    }
    const double pool = static_cast<double>(total_symbol_occurrences_) +
                        static_cast<double>(occurrences_.size());
    if (pool > 0.0) {
        absent_cost_ = std::log2(pool);
        for (const auto& [sym, occ] : occurrences_) {
            costs_[sym] = std::log2(pool / (static_cast<double>(occ) + 1.0));
        }
    }
}

bool PatternStore::contains(const std::string& id) const {
    return index_.count(id) != 0;
}

const Pattern& PatternStore::by_id(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownPatternError(id);
    return patterns_[it->second];
}

std::uint64_t PatternStore::occurrences(const Symbol& s) const {
    auto it = occurrences_.find(s);
    return it == occurrences_.end() ? 0 : it->second;
}

bool PatternStore::is_shared(const Symbol& s) const {
    return shared_.count(s) != 0;
}

BitCost PatternStore::symbol_cost(const Symbol& s) const {
    if (patterns_.empty()) {
        // No statistics to smooth over: spell the token out, byte by byte.
        return 8.0 * static_cast<double>(s.size());
    }
    auto it = costs_.find(s);
    return it == costs_.end() ? absent_cost_ : it->second;
}

BitCost PatternStore::pattern_code_cost(const std::string& id) const {
    const Pattern& p = by_id(id);
    return std::log2(static_cast<double>(total_pattern_frequency_) /
                     static_cast<double>(p.frequency));
}

PatternStore PatternStore::with(const std::vector<Pattern>& additions,
                                const std::map<std::string, std::uint64_t>& increments) const {
    std::vector<Pattern> next = patterns_;
    for (Pattern& p : next) {
        auto it = increments.find(p.id);
        if (it != increments.end()) p.frequency += it->second;
    }
    for (const Pattern& p : additions) next.push_back(p);
    return PatternStore(std::move(next));
}

namespace {

bool is_blank(const std::string& line) {
    for (char c : line) {
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

} // namespace

PatternStore parse_store(std::string_view text) {
    std::vector<Pattern> patterns;
    std::set<std::string> seen;
    int line_no = 0;
    int data_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string line(text.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                          : end - start));
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || is_blank(line)) continue;

        ++data_no;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(line_no, "missing TAB between frequency and symbols");
        }
        std::string head = line.substr(0, tab);
        std::string body = line.substr(tab + 1);

        Pattern p;
        std::size_t colon = head.find(':');
        std::string freq_text;
        if (colon != std::string::npos) {
            p.id = head.substr(0, colon);
            freq_text = head.substr(colon + 1);
            if (p.id.empty()) throw ParseError(line_no, "empty pattern id");
        } else {
            p.id = "P" + std::to_string(data_no);
            freq_text = head;
        }
        if (freq_text.empty() || freq_text.find_first_not_of("0123456789") != std::string::npos) {
            throw ParseError(line_no, "missing or malformed frequency '" + freq_text + "'");
        }
        p.frequency = std::stoull(freq_text);
        if (p.frequency == 0) throw ParseError(line_no, "frequency must be positive");

        std::size_t pos = 0;
        while (pos <= body.size()) {
            std::size_t sp = body.find(' ', pos);
            std::string tok = body.substr(pos, sp == std::string::npos ? std::string::npos : sp - pos);
            pos = sp == std::string::npos ? body.size() + 1 : sp + 1;
            if (tok.empty()) throw ParseError(line_no, "empty symbol (check separating spaces)");
            if (tok.find_first_of(" \t") != std::string::npos) {
                throw ParseError(line_no, "symbol contains whitespace");
            }
            p.symbols.push_back(tok);
        }
        if (p.symbols.empty()) throw ParseError(line_no, "empty symbol list");
        if (!seen.insert(p.id).second) throw DuplicateIdError(line_no, p.id);
        p.origin = Origin::Old;
        patterns.push_back(std::move(p));
    }
    return PatternStore(std::move(patterns));
}

PatternStore load_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open pattern file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_store(buf.str());
}

std::string serialize_store(const PatternStore& store) {
    std::ostringstream out;
    for (const Pattern& p : store.patterns()) {
        out << p.id << ':' << p.frequency << '\t';
        for (std::size_t i = 0; i < p.symbols.size(); ++i) {
            if (i) out << ' ';
            out << p.symbols[i];
        }
        out << '\n';
    }
    return out.str();
}

std::vector<Symbol> tokenize(std::string_view text, bool per_char) {
    std::vector<Symbol> out;
    if (per_char) {
        for (char c : text) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
            out.emplace_back(1, c);
        }
        return out;
    }
    std::string cur;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

} // namespace palign
