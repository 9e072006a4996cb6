#include "doctest.h"

#include <set>

#include "helpers.hpp"
#include "palign/codec.hpp"
#include "palign/core.hpp"
#include "palign/error.hpp"
#include "palign/scoring.hpp"

using namespace palign;
using testutil::fixture;
using testutil::syms;

namespace {

SearchParams small_params() {
    SearchParams p;
    p.beam_width = 64;
    p.max_rows = 8;
    return p;
}

Encoding encode_best(const PatternStore& s, const std::string& text) {
    auto ranked = build_alignments(s, make_new_pattern(syms(text)), small_params());
    REQUIRE(!ranked.empty());
    return encode(s, ranked.front().alignment);
}

} // namespace

TEST_CASE("a fully matched input becomes a single reference") {
    PatternStore s = parse_store("1\ta b\n");
    Encoding enc = encode_best(s, "a b");
    REQUIRE(enc.items.size() == 1);
    CHECK(enc.items[0].kind == CodeItem::Kind::PatternRef);
    CHECK(enc.items[0].pattern_id == "P1");
    CHECK(enc.items[0].bitmap.empty());
    CHECK(enc.cost == doctest::Approx(0.0)); // sole pattern, full expansion
    CHECK(decode(s, enc) == syms("a b"));
}

TEST_CASE("partial matches carry a skip bitmap and decode losslessly") {
    PatternStore s = parse_store("1\ta b\n1\tq r\n");
    Encoding enc = encode_best(s, "a c");
    REQUIRE(enc.items.size() == 2);
    CHECK(enc.items[0].kind == CodeItem::Kind::PatternRef);
    CHECK(enc.items[0].bitmap == std::vector<bool>{true, false});
    CHECK(enc.items[1].kind == CodeItem::Kind::Literal);
    CHECK(enc.items[1].literal == "c");
    CHECK(decode(s, enc) == syms("a c"));
    // 1 bit per pattern symbol when the bitmap is present
    CHECK(enc.cost ==
          doctest::Approx(s.pattern_code_cost("P1") + 2.0 + s.symbol_cost("c")));
}

TEST_CASE("literals expand to themselves") {
    PatternStore s = parse_store("1\ta b\n");
    Encoding enc;
    enc.items = {CodeItem::lit("x"), CodeItem::lit("y")};
    CHECK(decode(s, enc) == syms("x y"));
}

TEST_CASE("the sentence encodes against its grammar below its literal cost") {
    PatternStore s = load_store(fixture("fig1.sp"));
    SearchParams params;
    Pattern input = make_new_pattern(syms("t w o k i t t e n s p l a y"));
    auto ranked = build_alignments(s, input, params);
    Encoding enc;
    bool encoded = false;
    for (const ScoredAlignment& sa : ranked) {
        try {
            enc = encode(s, sa.alignment);
            encoded = true;
            break;
        } catch (const NonDecodableError&) {
        }
    }
    REQUIRE(encoded);
    CHECK(decode(s, enc) == input.symbols);
    CHECK(enc.cost < ranked.front().score.raw_bits);
}

TEST_CASE("unknown references are rejected") {
    PatternStore s = parse_store("1\ta b\n");
    Encoding enc;
    enc.items = {CodeItem::ref("nope")};
    CHECK_THROWS_AS(decode(s, enc), UnknownPatternError);
}

TEST_CASE("interleaved coverage is rejected as non-decodable") {
    // input a x a: the pattern could cover both a's around the literal x
    PatternStore s = parse_store("1\ta a\n");
    Alignment seed;
    seed.input = make_new_pattern(syms("a x a"));
    auto cells = project(seed);
    const Pattern& pat = s.by_id("P1");
    Matching m;
    m.pairs = {{0, 0}, {2, 1}};
    Alignment al = unify(seed, cells, pat, m);
    validate(al);
    CHECK_THROWS_AS(encode(s, al), NonDecodableError);
}

TEST_CASE("encode cost equals the alignment's encoded bits when nothing is skipped") {
    testutil::Rng rng(77);
    int qualifying = 0;
    for (int trial = 0; trial < 400; ++trial) {
        PatternStore s = testutil::random_store(rng, rng.between(1, 4), 4, 4);
        // build the input from whole patterns so full-expansion refs exist
        std::vector<Symbol> input;
        const int pieces = rng.between(1, 3);
        for (int i = 0; i < pieces; ++i) {
            const Pattern& p = s.patterns()[std::size_t(rng.between(0, int(s.size()) - 1))];
            input.insert(input.end(), p.symbols.begin(), p.symbols.end());
        }
        auto ranked = build_alignments(s, make_new_pattern(input), small_params());
        for (const ScoredAlignment& sa : ranked) {
            Encoding enc;
            try {
                enc = encode(s, sa.alignment);
            } catch (const NonDecodableError&) {
                continue;
            }
            bool all_full = !sa.alignment.rows.empty();
            std::set<std::string> referenced;
            for (const CodeItem& item : enc.items) {
                if (item.kind == CodeItem::Kind::Literal || !item.bitmap.empty()) {
                    all_full = false;
                } else {
                    referenced.insert(item.pattern_id);
                }
            }
            if (!all_full || referenced.size() != sa.alignment.rows.size()) continue;
            // also require one reference per row instance
            if (enc.items.size() != sa.alignment.rows.size()) continue;
            ++qualifying;
            CHECK(enc.cost == doctest::Approx(sa.score.encoded_bits).epsilon(1e-9));
        }
    }
    CHECK(qualifying > 50);
}

TEST_CASE("encoding cost always equals its recomputed sum") {
    testutil::Rng rng(79);
    for (int trial = 0; trial < 100; ++trial) {
        PatternStore s = testutil::random_store(rng, rng.between(1, 4), 4, 3);
        Pattern input = make_new_pattern(rng.sequence(rng.between(1, 8), 3));
        auto ranked = build_alignments(s, input, small_params());
        for (const ScoredAlignment& sa : ranked) {
            try {
                Encoding enc = encode(s, sa.alignment);
                CHECK(enc.cost == doctest::Approx(recompute_cost(s, enc)));
            } catch (const NonDecodableError&) {
            }
        }
    }
}

TEST_CASE("corpus compression round-trips exactly, including hard cases") {
    testutil::Rng rng(83);
    PatternStore s = testutil::random_store(rng, 4, 5, 4);
    std::vector<std::vector<Symbol>> corpus;
    corpus.push_back({});                        // empty sequence
    corpus.push_back(syms("zz qq"));             // nothing shared with the store
    for (int i = 0; i < 30; ++i) corpus.push_back(rng.sequence(rng.between(1, 9), 5));
    CompressedCorpus cc = compress_corpus(s, corpus, small_params());
    CHECK(decompress_corpus(cc) == corpus);

    // the unknown sequence came out as literals
    CHECK(cc.encodings[1].items.size() == 2);
    CHECK(cc.encodings[1].items[0].kind == CodeItem::Kind::Literal);
}

TEST_CASE("container text round-trips alignments, bitmaps and costs") {
    testutil::Rng rng(89);
    PatternStore s = testutil::random_store(rng, 3, 5, 3);
    std::vector<std::vector<Symbol>> corpus;
    for (int i = 0; i < 12; ++i) corpus.push_back(rng.sequence(rng.between(1, 8), 3));
    CompressedCorpus cc = compress_corpus(s, corpus, small_params());
    const std::string text = write_container(cc);
    CompressedCorpus back = read_container(text);
    CHECK(decompress_corpus(back) == corpus);
    CHECK(write_container(back) == text);
    for (std::size_t i = 0; i < cc.encodings.size(); ++i) {
        CHECK(back.encodings[i].cost == doctest::Approx(cc.encodings[i].cost));
    }
}

TEST_CASE("detached grammar containers demand the matching store") {
    PatternStore s = parse_store("1\ta b\n");
    CompressedCorpus cc = compress_corpus(s, {syms("a b")}, small_params());
    cc.detached_grammar = true;
    const std::string text = write_container(cc);
    CHECK_THROWS_AS(read_container(text), Error);
    PatternStore wrong = parse_store("1\tx y\n");
    CHECK_THROWS_AS(read_container(text, wrong), Error);
    CompressedCorpus back = read_container(text, s);
    CHECK(decompress_corpus(back) == std::vector<std::vector<Symbol>>{syms("a b")});
}

TEST_CASE("produce is decode") {
    PatternStore s = parse_store("1\tt w o\n1\tk i t t e n s\n1\tp l a y\n");
    Encoding enc;
    enc.items = {CodeItem::ref("P1"), CodeItem::ref("P2"), CodeItem::ref("P3")};
    CHECK(produce(s, enc) == syms("t w o k i t t e n s p l a y"));
    CHECK(produce(s, enc) == decode(s, enc));
}
