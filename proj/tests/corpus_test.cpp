#include "cotcheck/corpus.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "support/oracles.hpp"

using namespace cotcheck;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

// independent re-statement of the two scoring formulas
int oracle_score_complexity(const std::string& q, bool annotated) {
    int indicators = 0;
    if (split_sentences(q).sentences.size() > 1) ++indicators;
    if (split_clauses(q) > 1) ++indicators;
    if (annotated || has_year_token(q)) ++indicators;
    return std::min(4, 1 + indicators);
}

double oracle_hop_complexity(const std::string& q, bool annotated) {
    const double s = double(split_sentences(q).sentences.size());
    const double c = double(split_clauses(q));
    int w = 0;
    for (const auto& sent : split_sentences(q).sentences) {
        std::istringstream iss(sent);
        std::string word;
        int idx = 0;
        while (iss >> word) {
            if (idx++ > 0 && std::isupper(static_cast<unsigned char>(word[0]))) ++w;
        }
    }
    const double t = (annotated || has_year_token(q)) ? 1.0 : 0.0;
    double h = 1 + std::min(1.0, s - 1) + std::min(1.0, (c - 1) / 2) + std::min(1.0, w / 3.0) + t;
    return std::min(4.0, std::max(1.0, h));
}

}  // namespace

TEST(ScoreComplexity, Examples) {
    EXPECT_EQ(score_complexity("Who won?", false), 1);
    EXPECT_EQ(score_complexity("Who won in 1995?", false), 2);
    EXPECT_EQ(score_complexity("A happened. It ended because B, in 1995.", false), 4);
}

TEST(HopComplexity, Examples) {
    // 1 sentence, 1 clause, 0 capitalized (sentence-initial excluded), no time
    EXPECT_DOUBLE_EQ(hop_complexity("Who won?", false), 1.0);
    // saturation: 2 sentences, 3 clauses, 3 capitalized, time
    EXPECT_DOUBLE_EQ(
        hop_complexity("The Alpha and Beta met Gamma because of it. It was big, in 1995.", true),
        4.0);
    // 1 sentence, 2 clauses, 1 capitalized, no time -> 1 + 0 + 0.5 + 1/3
    const std::string q = "she saw Paris when visiting there";
    ASSERT_EQ(split_sentences(q).sentences.size(), 1u);
    ASSERT_EQ(split_clauses(q), 2u);
    EXPECT_NEAR(hop_complexity(q, false), 1.0 + 0.0 + 0.5 + 1.0 / 3.0, 1e-12);
}

TEST(ComplexityScorers, RangeAndDeterminismOnFuzzedInput) {
    std::mt19937_64 rng(37);
    const std::string alphabet = "abC .?!,1959 and if";
    for (int it = 0; it < 2000; ++it) {
        std::string s;
        const std::size_t len = rng() % 60;
        for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
        const bool annotated = (rng() % 2) == 0;
        const int c = score_complexity(s, annotated);
        const double h = hop_complexity(s, annotated);
        EXPECT_GE(c, 1);
        EXPECT_LE(c, 4);
        EXPECT_GE(h, 1.0);
        EXPECT_LE(h, 4.0);
        EXPECT_GE(static_cast<int>(std::floor(h)), 1);
        EXPECT_EQ(c, score_complexity(s, annotated));
        EXPECT_DOUBLE_EQ(h, hop_complexity(s, annotated));
        EXPECT_EQ(c, oracle_score_complexity(s, annotated));
        EXPECT_DOUBLE_EQ(h, oracle_hop_complexity(s, annotated));
    }
}

TEST(Categorize, BothModes) {
    EXPECT_EQ(categorize(1, CategorizeMode::question), HopCategory::one_hop);
    EXPECT_EQ(categorize(0, CategorizeMode::annotated), HopCategory::one_hop);
    EXPECT_EQ(categorize(7, CategorizeMode::question), HopCategory::four_plus_hop);
    EXPECT_EQ(categorize(2, CategorizeMode::question), HopCategory::two_hop);
    EXPECT_EQ(categorize(2, CategorizeMode::annotated), HopCategory::three_hop);
    EXPECT_EQ(categorize(3, CategorizeMode::annotated), HopCategory::four_plus_hop);
    EXPECT_THROW(categorize(-1, CategorizeMode::question), std::invalid_argument);
}

TEST(Categorize, PartitionsNonNegativeIntegers) {
    for (int v = 0; v <= 40; ++v) {
        for (auto mode : {CategorizeMode::question, CategorizeMode::annotated}) {
            const HopCategory c = categorize(v, mode);
            int matches = 0;
            for (auto cat : all_hop_categories()) {
                if (cat == c) ++matches;
            }
            EXPECT_EQ(matches, 1);
        }
    }
}

TEST(Ingest, ValidFilePreservesOrder) {
    const auto path = write_temp(
        "corpus_ok.jsonl",
        R"({"id":"a","question":"Who won in 1995?","answer":"X"})" "\n"
        R"({"id":"b","question":"Qb","answer":"Y","reasoning_path":["s1","s2"],"hops":2})" "\n"
        R"({"id":"c","question":"Qc","answer":"Z","time_scope":true})" "\n");
    const auto records = ingest(path);
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[0].id, "a");
    EXPECT_EQ(records[1].id, "b");
    EXPECT_EQ(records[2].id, "c");
    EXPECT_FALSE(records[0].gold_path.has_value());
    ASSERT_TRUE(records[1].gold_path.has_value());
    EXPECT_EQ(records[1].gold_path->size(), 2u);
    EXPECT_EQ(records[1].annotated_hops, 2);
    EXPECT_EQ(records[2].time_scope, "true");
    EXPECT_FALSE(records[0].time_scope.has_value());
}

TEST(Ingest, MalformedLineNamesLineNumber) {
    const auto path = write_temp(
        "corpus_bad.jsonl",
        R"({"id":"a","question":"q","answer":"x"})" "\n"
        "not json\n");
    try {
        ingest(path);
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Ingest, DuplicateIdNamesBothLines) {
    const auto path = write_temp(
        "corpus_dup.jsonl",
        R"({"id":"a","question":"q","answer":"x"})" "\n"
        R"({"id":"b","question":"q","answer":"x"})" "\n"
        R"({"id":"a","question":"q","answer":"x"})" "\n");
    try {
        ingest(path);
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
    }
}

TEST(Ingest, RoundTripsThroughWriteCorpus) {
    std::vector<QaRecord> records;
    QaRecord r;
    r.id = "r1";
    r.question = "Why so?";
    r.gold_answer = "Because.";
    r.gold_path = std::vector<std::string>{"a", "b"};
    r.time_scope = "1990s";
    r.annotated_hops = 3;
    records.push_back(r);
    QaRecord minimal;
    minimal.id = "r2";
    minimal.question = "Q";
    minimal.gold_answer = "A";
    records.push_back(minimal);

    const auto path = std::filesystem::temp_directory_path() / "corpus_round.jsonl";
    write_corpus(path, records);
    const auto back = ingest(path);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].id, records[0].id);
    EXPECT_EQ(back[0].gold_path, records[0].gold_path);
    EXPECT_EQ(back[0].time_scope, records[0].time_scope);
    EXPECT_EQ(back[0].annotated_hops, records[0].annotated_hops);
    EXPECT_FALSE(back[1].gold_path.has_value());
}

TEST(ConvertMenatqa, ToleratesCommonFieldSpellings) {
    const auto path = write_temp(
        "menatqa_raw.json",
        R"([{"question":"When did X start?","answers":["1995","95"],"type":"scope","time scope":"1990-2000","num_hops":2},
            {"qid":"raw7","query":"Who led Y?","answer":"Z","facts":["f1","f2"]}])");
    const auto records = convert_menatqa(path);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].id, "q0000");
    EXPECT_EQ(records[0].gold_answer, "1995");
    EXPECT_EQ(records[0].time_scope, "1990-2000");
    EXPECT_EQ(records[0].annotated_hops, 2);
    EXPECT_EQ(records[1].id, "raw7");
    ASSERT_TRUE(records[1].gold_path.has_value());
    EXPECT_EQ(records[1].gold_path->size(), 2u);
}

TEST(ConvertMenatqa, ErrorsOnUnusableRecord) {
    const auto path = write_temp("menatqa_bad.json", R"([{"question":"no answer here"}])");
    EXPECT_THROW(convert_menatqa(path), std::runtime_error);
}
