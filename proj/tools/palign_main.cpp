// palign command line: align, retrieve, compress, decompress, produce, learn.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "palign/codec.hpp"
#include "palign/core.hpp"
#include "palign/error.hpp"
#include "palign/learning.hpp"
#include "palign/render.hpp"
#include "palign/scoring.hpp"
#include "palign/search.hpp"

using json = nlohmann::json;
using namespace palign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

struct CommonOpts {
    std::string store_path;
    std::string inline_symbols;
    std::string input_path;
    std::string format = "text";
    int beam = 200;
    int max_rows = 20;
    int max_results = 10;
    bool exhaustive = false;
    bool per_char = false;
    long seed = 0; // reserved for randomized generators

    SearchParams params() const {
        SearchParams p;
        p.beam_width = beam;
        p.max_rows = max_rows;
        p.max_results = max_results;
        p.exhaustive = exhaustive;
        return p;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_store = true) {
    auto* store = cmd->add_option("--store", o.store_path, "pattern file of Old patterns");
    if (need_store) store->required();
    cmd->add_option("--new", o.inline_symbols, "inline New symbols");
    cmd->add_option("--input", o.input_path, "input file");
    cmd->add_option("--beam", o.beam, "beam width");
    cmd->add_option("--max-rows", o.max_rows, "cap on Old rows per alignment");
    cmd->add_option("--max-results", o.max_results, "ranked results to return");
    cmd->add_flag("--exhaustive", o.exhaustive, "full enumeration (small instances only)");
    cmd->add_option("--format", o.format, "text|structured")
        ->check(CLI::IsMember({"text", "structured"}));
    cmd->add_flag("--chars", o.per_char, "tokenize inline/new input per character");
    cmd->add_option("--seed", o.seed, "seed for randomized generators");
}

std::vector<Symbol> input_symbols(const CommonOpts& o) {
    if (!o.inline_symbols.empty()) return tokenize(o.inline_symbols, o.per_char);
    if (!o.input_path.empty()) return tokenize(read_file(o.input_path), o.per_char);
    throw ConfigError("provide --new or --input");
}

std::vector<std::vector<Symbol>> input_lines(const CommonOpts& o) {
    std::vector<std::vector<Symbol>> out;
    std::istringstream in(read_file(o.input_path));
    std::string line;
    while (std::getline(in, line)) out.push_back(tokenize(line, o.per_char));
    return out;
}

json score_json(const CompressionScore& s) {
    return json{{"raw_bits", s.raw_bits},
                {"encoded_bits", s.encoded_bits},
                {"compression_difference", s.compression_difference}};
}

int cmd_align(const CommonOpts& o) {
    PatternStore store = load_store(o.store_path);
    Pattern input = make_new_pattern(input_symbols(o));
    std::vector<ScoredAlignment> ranked = build_alignments(store, input, o.params());
    std::vector<CompressionScore> scores;
    for (const ScoredAlignment& sa : ranked) scores.push_back(sa.score);
    std::vector<double> probs = alignment_probabilities(scores);

    if (o.format == "structured") {
        json results = json::array();
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            const Alignment& al = ranked[i].alignment;
            json rows = json::array();
            rows.push_back(json{{"row", 0}, {"id", al.input.id}, {"origin", "New"}});
            for (std::size_t r = 0; r < al.rows.size(); ++r) {
                rows.push_back(
                    json{{"row", r + 1}, {"id", al.rows[r]->id}, {"origin", "Old"}});
            }
            json cols = json::array();
            for (const Column& c : al.columns) {
                json entries = json::array();
                for (const ColumnEntry& e : c.entries) {
                    entries.push_back(json{{"row", e.row}, {"pos", e.pos}});
                }
                cols.push_back(json{{"symbol", c.symbol}, {"entries", entries}});
            }
            json infs = json::array();
            for (const Inference& inf : infer(al, probs[i])) {
                infs.push_back(json{{"symbol", inf.symbol}, {"row", inf.source_row}, {"p", inf.p}});
            }
            json r = score_json(ranked[i].score);
            r["rank"] = i + 1;
            r["rows"] = rows;
            r["columns"] = cols;
            r["probability"] = probs[i];
            r["inferences"] = infs;
            results.push_back(std::move(r));
        }
        json pooled = json::array();
        for (const Inference& inf : aggregate_inferences(ranked, probs)) {
            pooled.push_back(json{{"symbol", inf.symbol}, {"p", inf.p}});
        }
        std::cout << json{{"results", results}, {"pooled_inferences", pooled}}.dump(2) << '\n';
        return kExitOk;
    }

    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const ScoredAlignment& sa = ranked[i];
        std::cout << "result " << (i + 1) << ": diff=" << fmt(sa.score.compression_difference)
                  << " raw=" << fmt(sa.score.raw_bits) << " encoded=" << fmt(sa.score.encoded_bits)
                  << " p=" << fmt(probs[i]) << '\n';
        std::cout << "rows:";
        for (const auto& r : sa.alignment.rows) std::cout << ' ' << r->id;
        std::cout << '\n' << render_alignment(sa.alignment);
        std::vector<Inference> infs = infer(sa.alignment, probs[i]);
        if (!infs.empty()) {
            std::cout << "inferences:";
            for (const Inference& inf : infs) {
                std::cout << ' ' << inf.symbol << "(row " << inf.source_row << ")";
            }
            std::cout << '\n';
        }
        std::cout << '\n';
    }
    return kExitOk;
}

int cmd_retrieve(const CommonOpts& o, const std::string& query) {
    PatternStore store = load_store(o.store_path);
    std::string text = !query.empty() ? query : o.inline_symbols;
    if (text.empty() && !o.input_path.empty()) text = read_file(o.input_path);
    if (text.empty()) throw ConfigError("provide --query, --new or --input");
    Pattern q = make_new_pattern(tokenize(text, o.per_char));
    std::vector<RetrievalHit> hits = retrieve(store, q, o.params());

    if (o.format == "structured") {
        json arr = json::array();
        for (const RetrievalHit& h : hits) {
            json j = score_json(h.score);
            j["pattern"] = h.pattern_id;
            arr.push_back(std::move(j));
        }
        std::cout << json{{"hits", arr}}.dump(2) << '\n';
        return kExitOk;
    }
    for (std::size_t i = 0; i < hits.size(); ++i) {
        std::cout << (i + 1) << ". " << hits[i].pattern_id
                  << " diff=" << fmt(hits[i].score.compression_difference) << '\n';
    }
    return kExitOk;
}

int cmd_compress(const CommonOpts& o, const std::string& out_path, bool detached) {
    PatternStore store = load_store(o.store_path);
    if (o.input_path.empty()) throw ConfigError("compress needs --input");
    std::vector<std::vector<Symbol>> corpus = input_lines(o);
    CompressedCorpus cc = compress_corpus(store, corpus, o.params());
    cc.detached_grammar = detached;
    std::string container = write_container(cc);
    if (out_path.empty()) {
        std::cout << container;
    } else {
        write_file(out_path, container);
        BitCost total_cost = 0.0;
        BitCost total_raw = 0.0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            total_cost += cc.encodings[i].cost;
            for (const Symbol& s : corpus[i]) total_raw += store.symbol_cost(s);
        }
        std::cout << "sequences: " << corpus.size() << "\nencoding cost: " << fmt(total_cost)
                  << " bits\nraw literal cost: " << fmt(total_raw) << " bits\n";
    }
    return kExitOk;
}

int cmd_decompress(const CommonOpts& o, const std::string& out_path) {
    if (o.input_path.empty()) throw ConfigError("decompress needs --input");
    std::optional<PatternStore> external;
    if (!o.store_path.empty()) external = load_store(o.store_path);
    CompressedCorpus cc = read_container(read_file(o.input_path), external);
    std::ostringstream out;
    for (const std::vector<Symbol>& seq : decompress_corpus(cc)) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (i) out << ' ';
            out << seq[i];
        }
        out << '\n';
    }
    if (out_path.empty()) {
        std::cout << out.str();
    } else {
        write_file(out_path, out.str());
    }
    return kExitOk;
}

int cmd_produce(const CommonOpts& o, const std::string& out_path) {
    return cmd_decompress(o, out_path); // production of language is decoding
}

int cmd_learn(const CommonOpts& o, bool chunks, int report_max, int max_chunks, int min_count,
              int passes, const std::string& truth_path, const std::string& out_path) {
    if (o.input_path.empty()) throw ConfigError("learn needs --input");
    if (chunks) {
        std::vector<Symbol> stream = tokenize(read_file(o.input_path), o.per_char);
        if (stream.size() < 2) throw Error("stream too short to chunk");
        ChunkLexicon lex = discover_chunks(stream, max_chunks, min_count);

        std::vector<std::string> truth;
        if (!truth_path.empty()) {
            for (const Symbol& w : tokenize(read_file(truth_path))) truth.push_back(w);
        }
        std::vector<std::size_t> order = lex.ranked_chunks();
        if (static_cast<int>(order.size()) > report_max) order.resize(report_max);

        int exact = 0;
        json arr = json::array();
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            const Chunk& c = lex.chunks[order[rank]];
            std::string word;
            for (const Symbol& s : c.symbols) word += s;
            const bool hit = std::find(truth.begin(), truth.end(), word) != truth.end();
            exact += hit ? 1 : 0;
            if (o.format == "structured") {
                arr.push_back(json{{"rank", rank + 1},
                                   {"id", c.id},
                                   {"chunk", word},
                                   {"count", c.final_count},
                                   {"merge_count", c.merge_count}});
            } else {
                std::cout << (rank + 1) << ". " << c.id << " '" << word
                          << "' count=" << c.final_count << " merge_count=" << c.merge_count;
                if (!truth.empty()) std::cout << (hit ? " [word]" : "");
                std::cout << '\n';
            }
        }
        if (o.format == "structured") {
            json j{{"chunks", arr}, {"parse", lex.bracketed()}};
            if (!truth.empty() && !order.empty()) {
                j["precision"] = static_cast<double>(exact) / static_cast<double>(order.size());
            }
            std::cout << j.dump(2) << '\n';
        } else {
            if (!truth.empty() && !order.empty()) {
                std::cout << "precision: " << exact << "/" << order.size() << " = "
                          << fmt(static_cast<double>(exact) / static_cast<double>(order.size()))
                          << '\n';
            }
            std::cout << "parse: " << lex.bracketed() << '\n';
        }
        if (!out_path.empty()) {
            std::vector<Pattern> ps;
            for (std::size_t i = 0; i < lex.chunks.size(); ++i) {
                Pattern p;
                p.id = lex.chunks[i].id;
                p.symbols = lex.chunks[i].symbols;
                p.frequency = std::max<std::uint64_t>(1, lex.chunks[i].final_count);
                ps.push_back(std::move(p));
            }
            write_file(out_path, serialize_store(PatternStore(std::move(ps))));
        }
        return kExitOk;
    }

    PatternStore store = o.store_path.empty() ? PatternStore{} : load_store(o.store_path);
    std::vector<std::vector<Symbol>> corpus = input_lines(o);
    LearnReport report = learn_loop(store, corpus, o.params(), passes);
    if (!out_path.empty()) write_file(out_path, serialize_store(report.store));
    if (o.format == "structured") {
        auto gc = [](const GrammarCost& g) {
            return json{{"grammar_bits", g.grammar_bits},
                        {"encoding_bits", g.encoding_bits},
                        {"total_bits", g.total_bits}};
        };
        json per = json::array();
        for (const GrammarCost& g : report.per_pass) per.push_back(gc(g));
        std::cout << json{{"before", gc(report.before)},
                          {"after", gc(report.after)},
                          {"passes", per},
                          {"patterns", report.store.size()}}
                         .dump(2)
                  << '\n';
    } else {
        std::cout << "grammar_cost before: total=" << fmt(report.before.total_bits)
                  << " (grammar=" << fmt(report.before.grammar_bits)
                  << " encoding=" << fmt(report.before.encoding_bits) << ")\n";
        std::cout << "grammar_cost after:  total=" << fmt(report.after.total_bits)
                  << " (grammar=" << fmt(report.after.grammar_bits)
                  << " encoding=" << fmt(report.after.encoding_bits) << ")\n";
        std::cout << "patterns: " << report.store.size() << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pattern alignment, retrieval, compression and chunk learning"};
    app.require_subcommand(1);

    CommonOpts align_o, retrieve_o, compress_o, decompress_o, produce_o, learn_o;
    std::string query, compress_out, decompress_out, produce_out, learn_out, truth_path;
    bool detached = false;
    bool chunks = false;
    int report_max = 15;
    int max_chunks = 64;
    int min_count = 2;
    int passes = 10;

    CLI::App* align = app.add_subcommand("align", "rank alignments of a New pattern");
    add_common(align, align_o);

    CLI::App* retr = app.add_subcommand("retrieve", "query-by-example over the store");
    add_common(retr, retrieve_o);
    retr->add_option("--query", query, "query symbols");

    CLI::App* comp = app.add_subcommand("compress", "compress a corpus file against a grammar");
    add_common(comp, compress_o);
    comp->add_option("--out", compress_out, "container output path");
    comp->add_flag("--detached", detached, "embed only a grammar hash");

    CLI::App* deco = app.add_subcommand("decompress", "expand a container back to text");
    add_common(deco, decompress_o, false);
    deco->add_option("--out", decompress_out, "output path");

    CLI::App* prod = app.add_subcommand("produce", "decode encodings against a grammar");
    add_common(prod, produce_o, false);
    prod->add_option("--out", produce_out, "output path");

    CLI::App* learn = app.add_subcommand("learn", "chunk discovery or grammar learning");
    add_common(learn, learn_o, false);
    learn->add_flag("--chunks", chunks, "pair-merge chunk discovery on a symbol stream");
    learn->add_option("--max", report_max, "chunks to report");
    learn->add_option("--max-chunks", max_chunks, "merge budget");
    learn->add_option("--min-count", min_count, "minimum pair count to merge");
    learn->add_option("--passes", passes, "derive-and-commit passes");
    learn->add_option("--truth", truth_path, "reference lexicon for precision");
    learn->add_option("--out", learn_out, "write the learned pattern file here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (align->parsed()) return cmd_align(align_o);
        if (retr->parsed()) return cmd_retrieve(retrieve_o, query);
        if (comp->parsed()) return cmd_compress(compress_o, compress_out, detached);
        if (deco->parsed()) return cmd_decompress(decompress_o, decompress_out);
        if (prod->parsed()) return cmd_produce(produce_o, produce_out);
        if (learn->parsed()) {
            return cmd_learn(learn_o, chunks, report_max, max_chunks, min_count, passes,
                             truth_path, learn_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitConfig;
}
