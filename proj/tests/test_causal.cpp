#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lfgeo/fixtures.hpp"

using namespace lfgeo;
using namespace lfgeo::causal;

namespace {

CausalDag chain() { return CausalDag({{"X"}, {"Y"}, {"Z"}}, {{"X", "Y"}, {"Y", "Z"}}); }
CausalDag collider() { return CausalDag({{"X"}, {"C"}, {"Z"}}, {{"X", "C"}, {"Z", "C"}}); }

bool contains(const std::vector<CiStatement>& v, const CiStatement& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

// Joint table over (X, Y, A, B, L) from a function of the assignment.
template <class F>
JointDistribution<Rational> bell_joint(int latent, F&& f) {
    const std::vector<std::string> names{"X", "Y", "A", "B", "L"};
    const std::vector<int> cards{2, 2, 2, 2, latent};
    JointDistribution<Rational> shape(names, cards, std::vector<Rational>(static_cast<std::size_t>(16 * latent), Rational(0)));
    std::vector<Rational> table(shape.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto v = shape.assignment(i);
        table[i] = f(v[0], v[1], v[2], v[3], v[4]);
    }
    return JointDistribution<Rational>(names, cards, std::move(table));
}

// Random DAG on n binary nodes: a random order, each forward edge kept with probability 1/2.
CausalDag random_dag(std::mt19937_64& rng, int n) {
    std::vector<Node> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({"V" + std::to_string(i), NodeKind::Observed, 2 + (i % 2)});
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<std::string, std::string>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng() & 1) edges.emplace_back(nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])].name,
                                              nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])].name);
    return CausalDag(std::move(nodes), std::move(edges));
}

}  // namespace

TEST(CausalDag, Validation) {
    EXPECT_THROW(CausalDag({{"X"}, {"Y"}}, {{"X", "Y"}, {"Y", "X"}}), StructuralError);
    EXPECT_THROW(CausalDag({{"X"}}, {{"X", "X"}}), StructuralError);
    EXPECT_THROW(CausalDag({{"X"}, {"Y"}}, {{"X", "Y"}, {"X", "Y"}}), StructuralError);
    EXPECT_THROW(CausalDag({{"X"}}, {{"X", "Q"}}), StructuralError);
    EXPECT_THROW(CausalDag({{"X"}, {"X"}}, {}), StructuralError);
    EXPECT_THROW(CausalDag({{"X", NodeKind::Observed, 0}}, {}), StructuralError);
}

TEST(CiStatement, Validation) {
    EXPECT_THROW(CiStatement({}, {"B"}), StructuralError);
    EXPECT_THROW(CiStatement({"A"}, {"A"}), StructuralError);
    EXPECT_THROW(CiStatement({"A"}, {"B"}, {"A"}), StructuralError);
}

TEST(DSeparation, Chain) {
    EXPECT_TRUE(d_separated(chain(), CiStatement({"X"}, {"Z"}, {"Y"})));
    EXPECT_FALSE(d_separated(chain(), CiStatement({"X"}, {"Z"})));
}

TEST(DSeparation, Collider) {
    EXPECT_TRUE(d_separated(collider(), CiStatement({"X"}, {"Z"})));
    EXPECT_FALSE(d_separated(collider(), CiStatement({"X"}, {"Z"}, {"C"})));
}

TEST(DSeparation, ColliderDescendantOpensPath) {
    const CausalDag g({{"X"}, {"C"}, {"Z"}, {"D"}}, {{"X", "C"}, {"Z", "C"}, {"C", "D"}});
    EXPECT_FALSE(d_separated(g, CiStatement({"X"}, {"Z"}, {"D"})));
}

TEST(DSeparation, BellDag) {
    const auto g = bell_dag();
    EXPECT_TRUE(d_separated(g, CiStatement({"A"}, {"Y"}, {"X", "L"})));
    EXPECT_TRUE(d_separated(g, CiStatement({"A"}, {"Y"}, {"X"})));
    EXPECT_FALSE(d_separated(g, CiStatement({"A"}, {"B"}, {"X", "Y"})));
    EXPECT_TRUE(d_separated(g, CiStatement({"A"}, {"B"}, {"L"})));
    EXPECT_THROW(d_separated(g, CiStatement({"A"}, {"Q"})), StructuralError);
}

TEST(ImpliedCis, Chain) {
    const auto cis = implied_cis(chain(), false);
    EXPECT_TRUE(contains(cis, CiStatement({"X"}, {"Z"}, {"Y"})));
    EXPECT_FALSE(contains(cis, CiStatement({"X"}, {"Z"})));
}

TEST(ImpliedCis, EdgelessGraphImpliesEverything) {
    const CausalDag g({{"P"}, {"Q"}, {"R"}}, {});
    EXPECT_EQ(implied_cis(g, false).size(), 6u);
}

TEST(ImpliedCis, BellDagObservedOnly) {
    const auto cis = implied_cis(bell_dag(), true);
    EXPECT_TRUE(contains(cis, CiStatement({"A"}, {"Y"}, {"X"})));
    EXPECT_TRUE(contains(cis, CiStatement({"B"}, {"X"}, {"Y"})));
    EXPECT_TRUE(contains(cis, CiStatement({"X"}, {"Y"})));
    for (const auto& s : cis)
        for (const auto* part : {&s.a, &s.b, &s.z}) EXPECT_TRUE(std::find(part->begin(), part->end(), "L") == part->end());
    EXPECT_TRUE(std::is_sorted(cis.begin(), cis.end()));
}

TEST(ImpliedCis, CapIsEnforced) {
    std::vector<Node> nodes;
    for (int i = 0; i < 9; ++i) nodes.push_back({"N" + std::to_string(i)});
    EXPECT_THROW(implied_cis(CausalDag(nodes, {}), false), CapExceeded);
}

TEST(Cmc, MarkovFactorizationPassesExactly) {
    std::mt19937_64 rng(3);
    const auto g = bell_dag();
    const auto d = markov_joint(g, random_cpts(g, rng));
    d.validate(Rational(0));
    const auto rep = cmc_check(g, d, Rational(0));
    EXPECT_TRUE(cmc_passes(rep));
    for (const auto& r : rep) EXPECT_EQ(r.residual, 0);
}

TEST(Cmc, PrBoxWithPointMassLatentFails) {
    const auto g = bell_dag(2);
    const auto d = bell_joint(2, [](int x, int y, int a, int b, int l) {
        if (l != 0) return Rational(0);
        return ((a ^ b) == (x & y)) ? Rational(1, 8) : Rational(0);
    });
    const auto rep = cmc_check(g, d, Rational(0));
    EXPECT_FALSE(cmc_passes(rep));
    const auto a = std::find_if(rep.begin(), rep.end(), [](const auto& r) { return r.node == "A"; });
    ASSERT_NE(a, rep.end());
    EXPECT_FALSE(a->passes);
    EXPECT_GT(a->residual, 0);
}

TEST(Cmc, SingleNodeIsVacuous) {
    const CausalDag g({{"S", NodeKind::Observed, 3}}, {});
    const JointDistribution<Rational> d({"S"}, {3}, {Rational(1, 2), Rational(1, 3), Rational(1, 6)});
    EXPECT_TRUE(cmc_passes(cmc_check(g, d, Rational(0))));
}

TEST(Cmc, CardinalityMismatchThrows) {
    const CausalDag g({{"S", NodeKind::Observed, 2}}, {});
    const JointDistribution<Rational> d({"S"}, {3}, {Rational(1, 2), Rational(1, 3), Rational(1, 6)});
    EXPECT_THROW(cmc_check(g, d, Rational(0)), StructuralError);
}

TEST(Faithfulness, StoredSeedHolds) {
    const auto fx = fixtures::load("faithful_bell_dag.json");
    const auto g = io::dag_from_json(fx["dag"]);
    std::mt19937_64 rng(fx["seed"].get<std::uint64_t>());
    const auto d = markov_joint(g, random_cpts(g, rng));
    const auto rep = faithfulness_check(g, d, Rational(0));
    EXPECT_TRUE(rep.holds);
    EXPECT_TRUE(rep.extra_cis.empty());
    EXPECT_TRUE(rep.missing_cis.empty());
    EXPECT_EQ(io::to_json(rep).dump(), fx["faithfulness"].dump());
}

TEST(Faithfulness, EngineeredNoSignallingIsFineTuned) {
    // X -> B exists, but B = X xor L with L uniform hides the dependence on average.
    const auto g = bell_dag(2, {{"X", "B"}});
    const auto tuned = bell_joint(2, [](int x, int, int a, int b, int l) {
        return (a == l && b == (x ^ l)) ? Rational(1, 8) : Rational(0);
    });
    const auto rep = faithfulness_check(g, tuned, Rational(0));
    EXPECT_FALSE(rep.holds);
    EXPECT_TRUE(contains(rep.extra_cis, CiStatement({"B"}, {"X"}, {"Y"})));
    EXPECT_TRUE(cmc_passes(cmc_check(g, tuned, Rational(0))));
}

TEST(Faithfulness, SignallingDistributionMissesImpliedCis) {
    const auto g = bell_dag(2);
    const auto d = bell_joint(2, [](int, int y, int a, int b, int l) {
        return (l == 0 && a == y && b == 0) ? Rational(1, 4) : Rational(0);
    });
    const auto rep = faithfulness_check(g, d, Rational(0));
    EXPECT_FALSE(rep.holds);
    EXPECT_FALSE(rep.missing_cis.empty());
    EXPECT_TRUE(contains(rep.missing_cis, CiStatement({"A"}, {"Y"}, {"X"})));
}

TEST(CausalProperties, DSeparationIsSoundOnRandomMarkovTables) {
    std::mt19937_64 rng(777);
    for (int t = 0; t < 50; ++t) {
        const auto g = random_dag(rng, 3 + t % 3);
        const auto d = markov_joint(g, random_cpts(g, rng, 13));
        for (const auto& s : implied_cis(g, false)) ASSERT_EQ(ci_residual(d, s), 0) << "dag " << t << " " << s.to_string();
        const auto cmc = cmc_check(g, d, Rational(0));
        EXPECT_TRUE(cmc_passes(cmc)) << "dag " << t;
        const auto f = faithfulness_check(g, d, Rational(0));
        EXPECT_TRUE(f.missing_cis.empty());
        if (f.holds) {
            EXPECT_TRUE(cmc_passes(cmc));
        }
    }
}

TEST(CausalProperties, FloatTablesWithinTolerance) {
    std::mt19937_64 rng(778);
    const auto g = random_dag(rng, 4);
    const auto exact = markov_joint(g, random_cpts(g, rng));
    std::vector<double> table;
    for (const auto& v : exact.table()) table.push_back(to_double(v));
    const JointDistribution<double> d(exact.names(), exact.cards(), table);
    for (const auto& s : implied_cis(g, false)) EXPECT_LE(ci_residual(d, s), 1e-9);
    EXPECT_TRUE(cmc_passes(cmc_check(g, d, 1e-9)));
}

TEST(BellDagScan, FamilyShape) {
    const auto fam = bell_dag_family(4);
    EXPECT_EQ(fam.size(), 192u);
    for (const auto& g : fam) {
        EXPECT_TRUE(g.parents(g.index("X")).empty());
        EXPECT_TRUE(g.parents(g.index("Y")).empty());
        EXPECT_TRUE(g.parents(g.index("L")).empty());
        EXPECT_EQ(g.node(g.index("L")).kind, NodeKind::Latent);
    }
}

TEST(BellDagScan, QuantumChshDichotomy) {
    const auto b = fixtures::quantum_chsh_behavior();
    EXPECT_GT(evaluate_inequality(chsh_inequality(binary_scenario(2)), b), Rational(28284, 10000));
    const auto rep = bell_dag_scan(b);
    EXPECT_EQ(rep.rows.size(), 192u);
    EXPECT_TRUE(rep.dichotomy_holds());
    EXPECT_EQ(rep.faithful_reproducing, 0u);
    EXPECT_FALSE(rep.behavior_in_lhv);
    for (const auto& r : rep.rows) {
        EXPECT_TRUE(r.classification == ScanClass::UnableToReproduce || r.classification == ScanClass::FineTuned);
        // Screening given L implies screening without L when L is a root; the converse fails.
        if (r.ns_implied) {
            EXPECT_TRUE(r.lhv_forced);
        }
    }
}

TEST(BellDagScan, PrBoxDichotomyMatchesFixture) {
    const auto rep = bell_dag_scan(pr_box(binary_scenario(2)));
    EXPECT_TRUE(rep.dichotomy_holds());
    const auto fx = fixtures::load("bell_dag_scan.json")["pr_box"];
    std::size_t unable = 0;
    for (const auto& r : rep.rows) unable += r.classification == ScanClass::UnableToReproduce;
    EXPECT_EQ(unable, fx["unable_to_reproduce"].get<std::size_t>());
    EXPECT_EQ(rep.rows.size() - unable, fx["fine_tuned"].get<std::size_t>());
}

TEST(BellDagScan, RejectsNonViolatingOrSignalling) {
    const Scenario sc = binary_scenario(2);
    EXPECT_THROW(bell_dag_scan(enumerate_lhv_vertices(sc).front()), PreconditionError);
    auto sig = RationalBehavior::zeros(sc);
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y) sig(y, 1, x, y) = 1;
    EXPECT_THROW(bell_dag_scan(sig), PreconditionError);
    EXPECT_THROW(bell_dag_scan(pr_box(binary_scenario(3))), PreconditionError);
    EXPECT_THROW(bell_dag_scan(pr_box(sc), 5), PreconditionError);
}

TEST(BellDagScan, CsvShape) {
    const auto csv = scan_csv(bell_dag_scan(pr_box(binary_scenario(2))));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "dag_id,edges,ns_implied,lhv_forced,classification");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 193);
    EXPECT_NE(csv.find("0,,true,true,UNABLE_TO_REPRODUCE"), std::string::npos);
}

TEST(CausalJson, DagRoundTrip) {
    const auto g = bell_dag(3, {{"A", "B"}});
    const auto j = io::to_json(g);
    const auto back = io::dag_from_json(j);
    EXPECT_EQ(io::to_json(back).dump(), j.dump());
    EXPECT_EQ(back.node(back.index("L")).cardinality, 3);
    EXPECT_THROW(io::dag_from_json(io::Json::parse(R"({"nodes":[{"name":"X","kind":"weird","card":2}],"edges":[]})")),
                 StructuralError);
}
