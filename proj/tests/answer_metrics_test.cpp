#include "cotcheck/answer_metrics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

using namespace cotcheck;

TEST(ExactMatch, NormalizationIdentity) {
    EXPECT_EQ(exact_match("The Eiffel Tower", "eiffel tower"), 1);
    EXPECT_EQ(exact_match("1995", "1996"), 0);
    EXPECT_EQ(exact_match("", ""), 1);
}

TEST(TokenF1, Basics) {
    EXPECT_DOUBLE_EQ(token_f1("x y", "y z"), 0.5);  // P = R = 0.5
    EXPECT_DOUBLE_EQ(token_f1("same words here", "same words here"), 1.0);
    EXPECT_DOUBLE_EQ(token_f1("", ""), 1.0);
    EXPECT_DOUBLE_EQ(token_f1("something", ""), 0.0);
    EXPECT_DOUBLE_EQ(token_f1("", "something"), 0.0);
    EXPECT_DOUBLE_EQ(token_f1("abc", "xyz"), 0.0);
}

TEST(TokenF1, MatchesMultisetOracleAndIsSymmetric) {
    std::mt19937_64 rng(41);
    const char* words[] = {"w1", "w2", "w3", "w1"};  // duplicates on purpose
    for (int it = 0; it < 2000; ++it) {
        std::string a;
        std::string b;
        const std::size_t na = rng() % 6;
        const std::size_t nb = rng() % 6;
        for (std::size_t i = 0; i < na; ++i) a += std::string(words[rng() % 4]) + " ";
        for (std::size_t i = 0; i < nb; ++i) b += std::string(words[rng() % 4]) + " ";

        // independent counting oracle over multisets
        std::map<std::string, int> ca;
        std::map<std::string, int> cb;
        for (const auto& t : tokenize(normalize_answer(a)).tokens) ++ca[t];
        for (const auto& t : tokenize(normalize_answer(b)).tokens) ++cb[t];
        int overlap = 0;
        int tot_a = 0;
        int tot_b = 0;
        for (const auto& [k, v] : ca) {
            tot_a += v;
            auto it2 = cb.find(k);
            if (it2 != cb.end()) overlap += std::min(v, it2->second);
        }
        for (const auto& [k, v] : cb) tot_b += v;
        double expected;
        if (tot_a == 0 && tot_b == 0) {
            expected = 1.0;
        } else if (tot_a == 0 || tot_b == 0 || overlap == 0) {
            expected = 0.0;
        } else {
            const double p = double(overlap) / tot_a;
            const double r = double(overlap) / tot_b;
            expected = 2 * p * r / (p + r);
        }
        EXPECT_DOUBLE_EQ(token_f1(a, b), expected);
        EXPECT_DOUBLE_EQ(token_f1(a, b), token_f1(b, a));
    }
}

TEST(TokenF1, EmImpliesF1One) {
    std::mt19937_64 rng(43);
    for (int it = 0; it < 500; ++it) {
        std::string a;
        for (int w = 0; w < int(rng() % 5); ++w) a += oracles::random_word(rng) + " ";
        std::string b = a + (rng() % 2 ? "." : "!");
        if (exact_match(a, b) == 1) EXPECT_DOUBLE_EQ(token_f1(a, b), 1.0);
    }
}

// Hand-computed before implementation:
//   pred "the cat sat", gold "the cat sat down":
//     p1=p2=p3=1 (smoothed), BP=exp(1-4/3)           -> exp(-1/3)
//   pred "the the the cat", gold "the cat sat down":
//     p1=2/4, p2=(1+1)/(3+1), p3=(0+1)/(2+1), p4=(0+1)/(1+1), BP=1 -> (1/24)^(1/4)
//   pred "a b", gold "a b c":
//     p1=1, p2=1 (smoothed), BP=exp(1-3/2)            -> exp(-1/2)
TEST(SentenceBleu, FrozenHandOracleValues) {
    EXPECT_NEAR(sentence_bleu("the cat sat", "the cat sat down"), 0.7165313105737893, 1e-9);
    EXPECT_NEAR(sentence_bleu("the the the cat", "the cat sat down"), 0.4518010018049224,
                1e-9);
    EXPECT_NEAR(sentence_bleu("a b", "a b c"), 0.6065306597126334, 1e-9);
}

TEST(SentenceBleu, IdentityAndDisjoint) {
    EXPECT_DOUBLE_EQ(sentence_bleu("alpha beta gamma delta", "alpha beta gamma delta"), 1.0);
    EXPECT_DOUBLE_EQ(sentence_bleu("one", "one"), 1.0);  // max n reduced to |pred|
    EXPECT_DOUBLE_EQ(sentence_bleu("x y z", "a b c"), 0.0);
    EXPECT_DOUBLE_EQ(sentence_bleu("", "a b"), 0.0);
}

TEST(SentenceBleu, RangeOnFuzzedInputs) {
    std::mt19937_64 rng(47);
    const char* vocab[] = {"a", "b", "c", "d"};
    for (int it = 0; it < 2000; ++it) {
        std::string p;
        std::string g;
        for (int w = 0; w < int(rng() % 7); ++w) p += std::string(vocab[rng() % 4]) + " ";
        for (int w = 0; w < int(rng() % 7); ++w) g += std::string(vocab[rng() % 4]) + " ";
        const double b = sentence_bleu(p, g);
        EXPECT_GE(b, 0.0);
        EXPECT_LE(b, 1.0 + 1e-12);
        if (!tokenize(p).tokens.empty() && p == g) EXPECT_DOUBLE_EQ(b, 1.0);
    }
}

TEST(CotExactMatch, OrderAndLengthSensitive) {
    const std::vector<std::string> p1 = {"go to A", "then B", "answer C"};
    EXPECT_EQ(cot_exact_match(p1, p1), 1);
    const std::vector<std::string> swapped = {"then B", "go to A", "answer C"};
    EXPECT_EQ(cot_exact_match(swapped, p1), 0);
    const std::vector<std::string> longer = {"go to A", "then B", "answer C", "extra"};
    EXPECT_EQ(cot_exact_match(longer, p1), 0);
    // normalization forgives punctuation and articles
    const std::vector<std::string> punct = {"Go to a A!", "then the B.", "answer C"};
    EXPECT_EQ(cot_exact_match(punct, p1), 1);
}

TEST(SoftStepSimilarity, Basics) {
    EXPECT_DOUBLE_EQ(soft_step_similarity("identical step", "identical step"), 1.0);
    EXPECT_DOUBLE_EQ(soft_step_similarity("alpha beta", "gamma delta"), 0.0);
    EXPECT_DOUBLE_EQ(soft_step_similarity("x y z", "y z w"), 0.5);
}

TEST(SoftStepSimilarity, CotEmImpliesAllOnes) {
    std::mt19937_64 rng(53);
    for (int it = 0; it < 300; ++it) {
        std::vector<std::string> gold;
        for (int s = 0; s < 1 + int(rng() % 4); ++s) {
            gold.push_back(oracles::random_word(rng) + " " + oracles::random_word(rng));
        }
        std::vector<std::string> pred = gold;
        if (rng() % 2 && !pred.empty()) pred[rng() % pred.size()] += " extraword";
        if (cot_exact_match(pred, gold) == 1) {
            for (std::size_t i = 0; i < gold.size(); ++i) {
                EXPECT_DOUBLE_EQ(soft_step_similarity(gold[i], pred[i]), 1.0);
            }
        }
    }
}

TEST(AggregateByCategory, MeansAndAbsentCategories) {
    std::vector<std::pair<HopCategory, double>> scores = {
        {HopCategory::one_hop, 1.0}, {HopCategory::one_hop, 0.0}};
    auto m = aggregate_by_category(scores);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_DOUBLE_EQ(m[HopCategory::one_hop], 0.5);

    scores.assign({{HopCategory::three_hop, 0.25}});
    m = aggregate_by_category(scores);
    EXPECT_DOUBLE_EQ(m[HopCategory::three_hop], 0.25);
    EXPECT_EQ(m.count(HopCategory::one_hop), 0u);
}

TEST(AggregateByCategory, MatchesAccumulationOracle) {
    std::mt19937_64 rng(59);
    for (int it = 0; it < 300; ++it) {
        std::vector<std::pair<HopCategory, double>> scores;
        const auto& cats = all_hop_categories();
        for (int i = 0; i < int(rng() % 30); ++i) {
            scores.emplace_back(cats[rng() % cats.size()],
                                double(rng() % 1000) / 1000.0);
        }
        if (scores.empty()) continue;
        const auto got = aggregate_by_category(scores);
        const auto want = oracles::group_means(scores);
        ASSERT_EQ(got.size(), want.size());
        for (const auto& [k, v] : want) EXPECT_NEAR(got.at(k), v, 1e-12);
    }
}

TEST(AggregateByCategory, ConstantScoresReturnConstant) {
    std::vector<std::pair<HopCategory, double>> scores;
    for (auto c : all_hop_categories()) {
        scores.emplace_back(c, 0.7);
        scores.emplace_back(c, 0.7);
    }
    for (const auto& [c, mean] : aggregate_by_category(scores)) {
        EXPECT_DOUBLE_EQ(mean, 0.7);
    }
}

TEST(ScoreAnswer, ComposesPerRecordScores) {
    QaRecord r;
    r.id = "x";
    r.question = "Who won the cup in 1995?";
    r.gold_answer = "The Reds";
    r.gold_path = std::vector<std::string>{"look up 1995 final", "the Reds won it"};
    ReasoningTrace t;
    t.steps = {"look up 1995 final", "the Reds won it"};
    t.final_answer = "reds";
    const auto s = score_answer(r, t);
    EXPECT_EQ(s.em, 1);
    EXPECT_DOUBLE_EQ(s.f1, 1.0);
    ASSERT_TRUE(s.cot_em.has_value());
    EXPECT_EQ(*s.cot_em, 1);
    ASSERT_EQ(s.soft_step_sims.size(), 2u);
    EXPECT_DOUBLE_EQ(s.soft_step_sims[0], 1.0);

    QaRecord no_path = r;
    no_path.gold_path.reset();
    const auto s2 = score_answer(no_path, t);
    EXPECT_FALSE(s2.cot_em.has_value());
    EXPECT_TRUE(s2.soft_step_sims.empty());
}
