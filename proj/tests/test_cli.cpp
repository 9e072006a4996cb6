#include "doctest.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "helpers.hpp"

using json = nlohmann::json;
using testutil::fixture;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(PALIGN_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/palign_test_") + name;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string kSentence = "t w o k i t t e n s p l a y";

} // namespace

TEST_CASE("align reproduces the sentence parse from the command line") {
    RunResult r = run("align --store " + fixture("fig1.sp") + " --new \"" + kSentence +
                      "\" --max-results 1");
    CHECK(r.exit_code == 0);
    // join order varies; the row multiset is the contract
    std::istringstream lines(r.out);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line)) {
        if (line.rfind("rows:", 0) == 0) {
            std::istringstream words(line.substr(5));
            std::string w;
            while (words >> w) rows.push_back(w);
            break;
        }
    }
    std::sort(rows.begin(), rows.end());
    CHECK(rows == std::vector<std::string>{"P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8"});
}

TEST_CASE("align reports the class inferences") {
    RunResult r = run("align --store " + fixture("fig2.sp") +
                      " --new \"white-bib eats furry purrs\" --max-results 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("warm-blooded") != std::string::npos);
    CHECK(r.out.find("tabby") != std::string::npos);
}

TEST_CASE("an empty store aligns the input alone with certainty") {
    const std::string empty = temp_path("empty.sp");
    write_file(empty, "");
    RunResult r = run("align --store " + empty + " --new a");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("p=1.000000") != std::string::npos);
    CHECK(r.out.find("diff=0.000000") != std::string::npos);
}

TEST_CASE("text and structured outputs agree on ranking and scores") {
    RunResult text = run("align --store " + fixture("fig1.sp") + " --new \"" + kSentence + "\"");
    RunResult structured = run("align --store " + fixture("fig1.sp") + " --new \"" + kSentence +
                               "\" --format structured");
    CHECK(text.exit_code == 0);
    CHECK(structured.exit_code == 0);

    json doc = json::parse(structured.out);
    std::istringstream lines(text.out);
    std::string line;
    std::size_t idx = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("result ", 0) != 0) continue;
        REQUIRE(idx < doc["results"].size());
        const double diff = doc["results"][idx]["compression_difference"].get<double>();
        char expect[64];
        std::snprintf(expect, sizeof expect, "diff=%.6f", diff);
        CHECK(line.find(expect) != std::string::npos);
        ++idx;
    }
    CHECK(idx == doc["results"].size());

    // the structured rows of the winner match the text row list
    std::string text_rows;
    std::istringstream again(text.out);
    while (std::getline(again, line)) {
        if (line.rfind("rows:", 0) == 0) {
            text_rows = line;
            break;
        }
    }
    std::string joined = "rows:";
    for (const auto& row : doc["results"][0]["rows"]) {
        if (row["origin"].get<std::string>() == "Old") {
            joined += " " + row["id"].get<std::string>();
        } else {
            CHECK(row["row"].get<int>() == 0);
        }
    }
    CHECK(text_rows == joined);
}

TEST_CASE("identical invocations print identical bytes") {
    const std::string cmd = "align --store " + fixture("fig2.sp") +
                            " --new \"white-bib eats furry purrs\" --format structured";
    CHECK(run(cmd).out == run(cmd).out);
}

TEST_CASE("missing files exit 2 with a diagnostic, bad params exit 3") {
    CHECK(run("align --store /nonexistent.sp --new a").exit_code == 2);
    RunResult r = run("align --store " + fixture("fig1.sp") + " --new a --beam 0");
    CHECK(r.exit_code == 3);
}

TEST_CASE("parse errors name the offending line") {
    const std::string broken = temp_path("broken.sp");
    write_file(broken, "1\ta b\nno tab here\n");
    RunResult r = run("align --store " + broken + " --new a");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("line 2") != std::string::npos);
}

TEST_CASE("compress then decompress restores the file byte for byte") {
    const std::string corpus = temp_path("corpus.txt");
    std::ostringstream text;
    for (int i = 0; i < 20; ++i) {
        text << (i % 2 ? "t w o k i t t e n s p l a y\n" : "k i t t e n s p l a y\n");
    }
    write_file(corpus, text.str());
    const std::string container = temp_path("corpus.spc");
    const std::string restored = temp_path("corpus.out");
    RunResult c = run("compress --store " + fixture("fig1.sp") + " --input " + corpus +
                      " --out " + container);
    CHECK(c.exit_code == 0);
    RunResult d = run("decompress --input " + container + " --out " + restored);
    CHECK(d.exit_code == 0);
    CHECK(read_file(restored) == text.str());
}

TEST_CASE("produce decodes an encoding file against the grammar") {
    const std::string store = temp_path("words.sp");
    write_file(store, "W1:3\tt w o\nW2:2\tk i t t e n s\nW3:1\tp l a y\n");
    const std::string enc = temp_path("words.spc");
    write_file(enc, "SPC1\nW1:3\tt w o\nW2:2\tk i t t e n s\nW3:1\tp l a y\n%%\n@W1 @W2 @W3\n");
    RunResult r = run("produce --input " + enc);
    CHECK(r.exit_code == 0);
    CHECK(r.out == "t w o k i t t e n s p l a y\n");
}

TEST_CASE("retrieve finds the cat pattern for purrs") {
    RunResult r = run("retrieve --store " + fixture("fig2.sp") + " --query purrs");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("1. P3", 0) == 0);
}

TEST_CASE("chunk learning reports counts and precision against a truth file") {
    const std::vector<std::string> words{"the",  "quick", "brown", "fox",   "jumps",
                                         "over", "lazy",  "dog",   "water", "sing"};
    testutil::Rng rng(0);
    std::string text;
    for (int i = 0; i < 200; ++i) text += words[std::size_t(rng.between(0, 9))];
    const std::string stream = temp_path("nospace.txt");
    write_file(stream, text);
    const std::string truth = temp_path("truth.txt");
    std::string truth_text;
    for (const auto& w : words) truth_text += w + "\n";
    write_file(truth, truth_text);

    RunResult r = run("learn --chunks --chars --input " + stream + " --max 15 --truth " + truth);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("precision: ") != std::string::npos);
    // the acceptance suite asserts the >= 60% bar; here just demand sanity
    CHECK(r.out.find("count=") != std::string::npos);
}

TEST_CASE("grammar learning writes a pattern file and a cost report") {
    const std::string corpus = temp_path("learncorpus.txt");
    std::ostringstream text;
    for (int i = 0; i < 5; ++i) text << "t h e c a t\nt h e d o g\n";
    write_file(corpus, text.str());
    const std::string out_store = temp_path("learned.sp");
    RunResult r = run("learn --input " + corpus + " --passes 4 --beam 48 --out " + out_store);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("grammar_cost before:") != std::string::npos);
    CHECK(r.out.find("grammar_cost after:") != std::string::npos);
    const std::string learned = read_file(out_store);
    CHECK(learned.find("L1:") != std::string::npos);
}
