#include "cotcheck/logic_graph.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

using namespace cotcheck;

namespace {

LogicalForm form(std::string s, std::string r, std::string o) {
    LogicalForm f;
    f.subject = std::move(s);
    f.relation = std::move(r);
    f.object = std::move(o);
    return f;
}

/// Random digraph on `n` labeled nodes with edge probability ~p/100.
ReasoningGraph random_graph(std::mt19937_64& rng, std::size_t n, int p,
                            std::vector<std::vector<bool>>* adj) {
    ReasoningGraph g;
    adj->assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) g.nodes.insert("n" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && int(rng() % 100) < p) {
                (*adj)[i][j] = true;
                g.edges.emplace("n" + std::to_string(i), "n" + std::to_string(j));
            }
        }
    }
    return g;
}

}  // namespace

TEST(ExtractLogicalForm, RelationKeywordSplitsStep) {
    const auto f = extract_logical_form("Paris is the capital of France");
    EXPECT_EQ(f.subject, "paris");
    EXPECT_EQ(f.relation, "is");
    EXPECT_EQ(f.object, "capital of france");
    EXPECT_TRUE(f.values.empty());
}

TEST(ExtractLogicalForm, EmptyStep) {
    const auto f = extract_logical_form("");
    EXPECT_TRUE(f.subject.empty());
    EXPECT_TRUE(f.relation.empty());
    EXPECT_TRUE(f.object.empty());
    EXPECT_TRUE(f.values.empty());
}

TEST(ExtractLogicalForm, ValuesCollectNumericTokens) {
    const auto f = extract_logical_form("Revenue grew 15% in 1995");
    EXPECT_TRUE(f.values.count("15%"));
    EXPECT_TRUE(f.values.count("1995"));
}

TEST(ExtractLogicalForm, LeftmostRelationWinsAndObjectStopsAtPunctuation) {
    const auto f = extract_logical_form("The team won the title, which was great");
    EXPECT_EQ(f.relation, "won");
    EXPECT_EQ(f.subject, "team");
    EXPECT_EQ(f.object, "title");
}

TEST(ExtractLogicalForm, CapitalizedSpanFallback) {
    const auto f = extract_logical_form("New York beat Los Angeles yesterday");
    EXPECT_EQ(f.relation, "");
    EXPECT_EQ(f.subject, "new york");
    EXPECT_EQ(f.object, "los angeles");
    const auto none = extract_logical_form("nothing capitalized here");
    EXPECT_EQ(none.subject, "");
    EXPECT_EQ(none.object, "");
    // "island" must not match the relation "is"
    const auto island = extract_logical_form("Staten Island ferry arrived late");
    EXPECT_EQ(island.relation, "");
}

TEST(BuildGraph, EdgesRequireRelationAndBothEndpoints) {
    const std::vector<LogicalForm> forms = {
        form("a", "is", "b"), form("b", "was", "c"),
        form("x", "", "y"),      // no relation -> no edge
        form("", "is", "z"),     // empty endpoint -> no edge
        form("a", "is", "b"),    // duplicate collapses
    };
    const auto g = build_graph(forms);
    EXPECT_EQ(g.nodes.size(), 3u);
    EXPECT_EQ(g.edges.size(), 2u);
    EXPECT_TRUE(g.edges.count({"a", "b"}));
    EXPECT_TRUE(g.edges.count({"b", "c"}));
}

TEST(TransitiveClosure, ChainAndEmpty) {
    auto g = build_graph({form("a", "is", "b"), form("b", "is", "c")});
    g = transitive_closure(g);
    EXPECT_EQ(g.closure.size(), 3u);
    EXPECT_TRUE(g.closure.count({"a", "c"}));
    EXPECT_FALSE(g.closure.count({"a", "a"}));

    const auto empty = transitive_closure(ReasoningGraph{});
    EXPECT_TRUE(empty.closure.empty());
}

TEST(TransitiveClosure, SelfLoopsOnlyWithCycles) {
    auto g = build_graph({form("a", "is", "b"), form("b", "is", "a")});
    g = transitive_closure(g);
    EXPECT_TRUE(g.closure.count({"a", "a"}));
    EXPECT_TRUE(g.closure.count({"b", "b"}));
}

TEST(TransitiveClosure, MatchesFloydWarshallOracle) {
    std::mt19937_64 rng(71);
    for (int it = 0; it < 1000; ++it) {
        const std::size_t n = 1 + rng() % 8;
        std::vector<std::vector<bool>> adj;
        auto g = random_graph(rng, n, 25, &adj);
        g = transitive_closure(g);
        const auto want = oracles::floyd_warshall_closure(adj);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const bool got =
                    g.closure.count({"n" + std::to_string(i), "n" + std::to_string(j)}) > 0;
                ASSERT_EQ(got, want[i][j]) << "it " << it << " pair " << i << "," << j;
            }
        }
    }
}

TEST(TransitiveClosure, IdempotentAndMonotone) {
    std::mt19937_64 rng(73);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = 2 + rng() % 6;
        std::vector<std::vector<bool>> adj;
        auto g = random_graph(rng, n, 30, &adj);
        g = transitive_closure(g);
        // idempotence: closing a graph whose edges are the closure changes nothing
        ReasoningGraph g2;
        g2.nodes = g.nodes;
        g2.edges = g.closure;
        g2 = transitive_closure(g2);
        EXPECT_EQ(g2.closure, g.closure);
        // monotonicity: adding an edge never removes closure pairs
        ReasoningGraph g3;
        g3.nodes = g.nodes;
        g3.edges = g.edges;
        g3.edges.emplace("n0", "n" + std::to_string(n - 1));
        g3 = transitive_closure(g3);
        for (const auto& e : g.closure) EXPECT_TRUE(g3.closure.count(e));
    }
}

TEST(Consistency, BasicsAndSymmetry) {
    EXPECT_DOUBLE_EQ(consistency({"a b", "c"}, {"a b", "c"}), 1.0);
    EXPECT_DOUBLE_EQ(consistency({"aa bb"}, {"cc dd"}), 0.0);
    // W_F = {x,y,z}, W_B = {y,z,w} -> 2/4
    EXPECT_DOUBLE_EQ(consistency({"x y", "z"}, {"y z", "w"}), 0.5);
    EXPECT_DOUBLE_EQ(consistency({"x y", "z"}, {"y z", "w"}),
                     consistency({"y z", "w"}, {"x y", "z"}));
}

TEST(Transitivity, ChainExample) {
    const std::vector<LogicalForm> chain = {form("a", "r", "b"), form("b", "r", "c"),
                                            form("c", "r", "d")};
    EXPECT_NEAR(transitivity(chain), 2.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(transitivity({form("a", "r", "b")}), 0.0);  // T < 2
    EXPECT_DOUBLE_EQ(transitivity({}), 0.0);
}

TEST(Transitivity, SimpleChainFormula) {
    // a chain of length T links exactly its T-1 consecutive pairs
    for (std::size_t t = 2; t <= 7; ++t) {
        std::vector<LogicalForm> chain;
        for (std::size_t i = 0; i < t; ++i) {
            chain.push_back(form("e" + std::to_string(i), "r", "e" + std::to_string(i + 1)));
        }
        const double want =
            double(t - 1) / (double(t) * double(t - 1) / 2.0);
        EXPECT_NEAR(transitivity(chain), want, 1e-12) << "t=" << t;
    }
    // fully linked: every form shares the same object=subject entity
    const std::vector<LogicalForm> full = {form("x", "r", "x"), form("x", "r", "x"),
                                           form("x", "r", "x")};
    EXPECT_DOUBLE_EQ(transitivity(full), 1.0);
}

TEST(Transitivity, MatchesBruteForceOracle) {
    std::mt19937_64 rng(79);
    const char* pool[] = {"", "a", "b", "c"};  // empty entities included on purpose
    for (int it = 0; it < 1000; ++it) {
        const std::size_t t = rng() % 7;
        std::vector<LogicalForm> forms;
        std::vector<oracles::FormLite> lite;
        for (std::size_t i = 0; i < t; ++i) {
            const std::string s = pool[rng() % 4];
            const std::string o = pool[rng() % 4];
            forms.push_back(form(s, "r", o));
            lite.push_back({s, o});
        }
        EXPECT_DOUBLE_EQ(transitivity(forms), oracles::pairwise_transitivity(lite));
        if (t >= 2) {
            EXPECT_DOUBLE_EQ(flow_transitivity(forms),
                             oracles::pairwise_flow_transitivity(lite));
        }
    }
}

TEST(FlowTransitivity, ChainExampleAndBounds) {
    const std::vector<LogicalForm> chain = {form("a", "r", "b"), form("b", "r", "c"),
                                            form("c", "r", "d")};
    EXPECT_NEAR(flow_transitivity(chain), 0.5 * (2.0 / 3.0 + 0.2), 1e-12);  // 0.43333...
    EXPECT_THROW(flow_transitivity({form("a", "r", "b")}), std::invalid_argument);

    // no links, no overlaps
    const std::vector<LogicalForm> disjoint = {form("a", "r", "b"), form("c", "r", "d")};
    EXPECT_DOUBLE_EQ(flow_transitivity(disjoint), 0.0);

    // >= 10 overlapping pairs saturate the phi term
    std::vector<LogicalForm> shared;
    for (int i = 0; i < 6; ++i) shared.push_back(form("hub", "r", "x" + std::to_string(i)));
    // C(6,2) = 15 pairs, all share "hub": phi term = min(1.5, 1.0) = 1.0; no links
    EXPECT_DOUBLE_EQ(flow_transitivity(shared), 0.5 * (0.0 + 1.0));
}

TEST(FlowTransitivity, InUnitIntervalOnRandomInputs) {
    std::mt19937_64 rng(83);
    const char* pool[] = {"a", "b", "c", "d", "e"};
    for (int it = 0; it < 500; ++it) {
        const std::size_t t = 2 + rng() % 5;
        std::vector<LogicalForm> forms;
        for (std::size_t i = 0; i < t; ++i) {
            forms.push_back(form(pool[rng() % 5], "r", pool[rng() % 5]));
        }
        const double ft = flow_transitivity(forms);
        EXPECT_GE(ft, 0.0);
        EXPECT_LE(ft, 1.0);
    }
}

TEST(EvaluatePair, ComposesScores) {
    ReasoningTrace fwd;
    fwd.steps = {"Paris is the capital", "capital was founded long ago"};
    ReasoningTrace bwd;
    bwd.steps = {"the capital is Paris"};
    const auto r = evaluate_pair(fwd, bwd, 2);
    EXPECT_EQ(r.forward_len, 2u);
    EXPECT_EQ(r.backward_len, 1u);
    EXPECT_EQ(r.category, HopCategory::three_hop);
    EXPECT_GT(r.consistency, 0.0);
    EXPECT_GE(r.transitivity, 0.0);
    EXPECT_LE(r.flow_transitivity, 1.0);
}

TEST(EvaluatePair, IdenticalSingleLinkChains) {
    ReasoningTrace fwd;
    fwd.steps = {"a is b"};
    const auto r = evaluate_pair(fwd, fwd, 0);
    EXPECT_DOUBLE_EQ(r.consistency, 1.0);
    EXPECT_DOUBLE_EQ(r.flow_transitivity, 0.0);  // T < 2 convention
    EXPECT_EQ(r.category, HopCategory::one_hop);
}

TEST(EvaluatePair, FixtureAggregateMatchesOracle) {
    std::mt19937_64 rng(89);
    std::vector<std::pair<HopCategory, double>> cons_items;
    std::vector<ConsistencyResult> results;
    for (int i = 0; i < 20; ++i) {
        ReasoningTrace fwd;
        ReasoningTrace bwd;
        const int steps = 1 + int(rng() % 4);
        for (int s = 0; s < steps; ++s) {
            fwd.steps.push_back(oracles::random_word(rng) + " is " +
                                oracles::random_word(rng));
            bwd.steps.push_back(oracles::random_word(rng) + " was " +
                                oracles::random_word(rng));
        }
        const int hops = int(rng() % 5);
        const auto r = evaluate_pair(fwd, bwd, hops);
        results.push_back(r);
        cons_items.emplace_back(r.category, r.consistency);
    }
    // mean consistency per category matches the independent accumulator
    std::vector<std::pair<HopCategory, double>> got_items;
    for (const auto& r : results) got_items.emplace_back(r.category, r.consistency);
    const auto want = oracles::group_means(cons_items);
    const auto got = oracles::group_means(got_items);
    ASSERT_EQ(got.size(), want.size());
    for (const auto& [k, v] : want) EXPECT_NEAR(got.at(k), v, 1e-12);
}

TEST(EdgeList, TabSeparatedDump) {
    const auto g = build_graph({form("a", "is", "b"), form("b", "is", "c")});
    EXPECT_EQ(to_edge_list(g), "a\tb\nb\tc\n");
}
