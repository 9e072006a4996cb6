#include "palign/codec.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <sstream>
#include <thread>

#include "palign/error.hpp"

namespace palign {

CodeItem CodeItem::ref(std::string id, std::vector<bool> bitmap) {
    CodeItem item;
    item.kind = Kind::PatternRef;
    item.pattern_id = std::move(id);
    item.bitmap = std::move(bitmap);
    return item;
}

CodeItem CodeItem::lit(Symbol s) {
    CodeItem item;
    item.kind = Kind::Literal;
    item.literal = std::move(s);
    return item;
}

BitCost recompute_cost(const PatternStore& store, const Encoding& enc) {
    BitCost cost = 0.0;
    for (const CodeItem& item : enc.items) {
        if (item.kind == CodeItem::Kind::Literal) {
            cost += store.symbol_cost(item.literal);
            continue;
        }
        const Pattern& p = store.by_id(item.pattern_id);
        cost += store.pattern_code_cost(item.pattern_id);
        if (!item.bitmap.empty()) {
            if (item.bitmap.size() != p.size()) {
                throw Error("bitmap length does not match pattern '" + item.pattern_id + "'");
            }
            // partial expansion: one bit per pattern symbol
            cost += static_cast<BitCost>(p.size());
        }
    }
    return cost;
}

Encoding encode(const PatternStore& store, const Alignment& al) {
    const std::size_t n = al.input.size();
    // cover[i] = Old row expanding New position i (0 = literal)
    std::vector<int> cover(n, 0);
    std::vector<std::vector<int>> column_rows(n);
    for (const Column& c : al.columns) {
        int new_pos = -1;
        for (const ColumnEntry& e : c.entries) {
            if (e.row == 0) new_pos = e.pos;
        }
        if (new_pos < 0) continue;
        for (const ColumnEntry& e : c.entries) {
            if (e.row >= 1) column_rows[new_pos].push_back(e.row);
        }
    }
    int run_row = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int>& rows = column_rows[i];
        if (rows.empty()) {
            run_row = 0;
            continue;
        }
        std::sort(rows.begin(), rows.end());
        if (run_row != 0 && std::find(rows.begin(), rows.end(), run_row) != rows.end()) {
            cover[i] = run_row; // extend the current run where possible
        } else {
            cover[i] = rows.front();
            run_row = rows.front();
        }
    }

    // a row split across two runs cannot be replayed in item order
    std::vector<bool> referenced(al.row_count(), false);
    int prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (cover[i] != 0 && cover[i] != prev) {
            if (referenced[cover[i]]) {
                throw NonDecodableError("row '" + al.rows[cover[i] - 1]->id +
                                        "' covers interleaved segments of the input");
            }
            referenced[cover[i]] = true;
        }
        prev = cover[i];
    }

    Encoding enc;
    for (std::size_t i = 0; i < n;) {
        if (cover[i] == 0) {
            enc.items.push_back(CodeItem::lit(al.input.symbols[i]));
            ++i;
            continue;
        }
        const int row = cover[i];
        const Pattern& p = *al.rows[row - 1];
        std::vector<bool> bitmap(p.size(), false);
        for (const Column& c : al.columns) {
            int new_pos = -1;
            int row_pos = -1;
            for (const ColumnEntry& e : c.entries) {
                if (e.row == 0) new_pos = e.pos;
                if (e.row == row) row_pos = e.pos;
            }
            if (new_pos >= 0 && row_pos >= 0 && cover[new_pos] == row) bitmap[row_pos] = true;
        }
        if (std::find(bitmap.begin(), bitmap.end(), false) == bitmap.end()) {
            bitmap.clear(); // full expansion needs no annotation
        }
        enc.items.push_back(CodeItem::ref(p.id, std::move(bitmap)));
        while (i < n && cover[i] == row) ++i;
    }
    enc.cost = recompute_cost(store, enc);
    return enc;
}

std::vector<Symbol> decode(const PatternStore& store, const Encoding& enc) {
    std::vector<Symbol> out;
    for (const CodeItem& item : enc.items) {
        if (item.kind == CodeItem::Kind::Literal) {
            out.push_back(item.literal);
            continue;
        }
        const Pattern& p = store.by_id(item.pattern_id);
        if (!item.bitmap.empty() && item.bitmap.size() != p.size()) {
            throw Error("bitmap length does not match pattern '" + item.pattern_id + "'");
        }
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (item.bitmap.empty() || item.bitmap[j]) out.push_back(p.symbols[j]);
        }
    }
    return out;
}

namespace {

// corpus items are independent; a few threads split the list
void parallel_indices(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (n < 4 || hw < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (std::thread& t : threads) t.join();
}

} // namespace

CompressedCorpus compress_corpus(const PatternStore& store,
                                 const std::vector<std::vector<Symbol>>& corpus,
                                 const SearchParams& params) {
    params.check();
    CompressedCorpus cc;
    cc.grammar = store;
    cc.encodings.resize(corpus.size());
    parallel_indices(corpus.size(), [&](std::size_t i) {
        Pattern input = make_new_pattern(corpus[i]);
        Encoding enc;
        bool done = false;
        if (!input.symbols.empty()) {
            for (const ScoredAlignment& sa : build_alignments(store, input, params)) {
                try {
                    enc = encode(store, sa.alignment);
                    done = true;
                    break;
                } catch (const NonDecodableError&) {
                    // next-ranked alignment
                }
            }
        }
        if (!done) {
            for (const Symbol& s : corpus[i]) enc.items.push_back(CodeItem::lit(s));
            enc.cost = recompute_cost(store, enc);
        }
        cc.encodings[i] = std::move(enc);
    });
    return cc;
}

std::vector<std::vector<Symbol>> decompress_corpus(const CompressedCorpus& cc) {
    std::vector<std::vector<Symbol>> out(cc.encodings.size());
    parallel_indices(cc.encodings.size(), [&](std::size_t i) {
        out[i] = decode(cc.grammar, cc.encodings[i]);
    });
    return out;
}

std::string grammar_hash(const PatternStore& store) {
    // FNV-1a 64 over the canonical serialization
    const std::string text = serialize_store(store);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

namespace {

std::string bitmap_to_hex(const std::vector<bool>& bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        int nib = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            nib <<= 1;
            if (i + j < bits.size() && bits[i + j]) nib |= 1;
        }
        out.push_back(digits[nib]);
    }
    return out;
}

std::vector<bool> hex_to_bitmap(const std::string& hex, std::size_t nbits) {
    std::vector<bool> bits(nbits, false);
    for (std::size_t i = 0; i < nbits; ++i) {
        const std::size_t nibble = i / 4;
        if (nibble >= hex.size()) throw Error("bitmap hex too short");
        char c = hex[nibble];
        int v = c >= '0' && c <= '9'   ? c - '0'
                : c >= 'a' && c <= 'f' ? c - 'a' + 10
                : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                       : -1;
        if (v < 0) throw Error("bad bitmap hex digit");
        bits[i] = (v >> (3 - (i % 4))) & 1;
    }
    return bits;
}

} // namespace

std::string write_container(const CompressedCorpus& cc) {
    std::ostringstream out;
    out << "SPC1\n";
    if (cc.detached_grammar) {
        out << "# grammar-fnv1a64: " << grammar_hash(cc.grammar) << "\n";
    } else {
        out << serialize_store(cc.grammar);
    }
    out << "%%\n";
    for (const Encoding& enc : cc.encodings) {
        bool first = true;
        for (const CodeItem& item : enc.items) {
            if (!first) out << ' ';
            first = false;
            if (item.kind == CodeItem::Kind::Literal) {
                out << '=' << item.literal;
            } else {
                out << '@' << item.pattern_id;
                if (!item.bitmap.empty()) out << '/' << bitmap_to_hex(item.bitmap);
            }
        }
        out << '\n';
    }
    return out.str();
}

CompressedCorpus read_container(const std::string& text,
                                const std::optional<PatternStore>& external_grammar) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "SPC1") throw Error("not a SPC1 container");

    std::string grammar_text;
    std::string hash_hint;
    while (std::getline(in, line)) {
        if (line == "%%") break;
        const std::string hash_tag = "# grammar-fnv1a64: ";
        if (line.rfind(hash_tag, 0) == 0) hash_hint = line.substr(hash_tag.size());
        grammar_text += line;
        grammar_text += '\n';
    }

    CompressedCorpus cc;
    if (!hash_hint.empty()) {
        if (!external_grammar) {
            throw Error("container has a detached grammar; a store must be supplied");
        }
        if (grammar_hash(*external_grammar) != hash_hint) {
            throw Error("supplied store does not match the container's grammar hash");
        }
        cc.grammar = *external_grammar;
        cc.detached_grammar = true;
    } else {
        cc.grammar = parse_store(grammar_text);
    }

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        Encoding enc;
        std::istringstream items(line);
        std::string tok;
        while (items >> tok) {
            if (tok[0] == '=') {
                enc.items.push_back(CodeItem::lit(tok.substr(1)));
            } else if (tok[0] == '@') {
                std::string body = tok.substr(1);
                std::size_t slash = body.find('/');
                if (slash == std::string::npos) {
                    enc.items.push_back(CodeItem::ref(body));
                } else {
                    std::string id = body.substr(0, slash);
                    const Pattern& p = cc.grammar.by_id(id);
                    enc.items.push_back(
                        CodeItem::ref(id, hex_to_bitmap(body.substr(slash + 1), p.size())));
                }
            } else {
                throw Error("bad encoding item '" + tok + "'");
            }
        }
        enc.cost = recompute_cost(cc.grammar, enc);
        cc.encodings.push_back(std::move(enc));
    }
    return cc;
}

} // namespace palign
