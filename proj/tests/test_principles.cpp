#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lfgeo/fixtures.hpp"

using namespace lfgeo;
using namespace lfgeo::principles;

namespace {

const std::vector<std::string> kAll{"Bell64", "Bell76", "LF"};

NameSet without(NameSet s, const NameSet& drop) {
    for (const auto& d : drop) s.erase(d);
    return s;
}

bool subset(const NameSet& a, const NameSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

}  // namespace

TEST(DefaultGraph, Shape) {
    const auto g = default_graph();
    EXPECT_EQ(g.principles.size(), 15u);
    EXPECT_NO_THROW(g.validate());
    const NameSet conclusions{"RPCC",     "LocalCausality",     "RelativisticCausalArrow", "InterventionistCausation",
                              "Locality", "NoSuperdeterminism", "LocalAction"};
    for (const auto& r : g.rules) {
        EXPECT_TRUE(conclusions.count(r.conclusion)) << r.conclusion;
        EXPECT_FALSE(r.note.empty());
    }
    EXPECT_EQ(g.rules.size(), 7u);
    EXPECT_EQ(g.basic().size(), 8u);
    EXPECT_EQ(g.theorem("LF").bundles.size(), 2u);
    for (const auto& t : g.theorems)
        for (const auto& b : t.bundles) {
            EXPECT_TRUE(b.count("AOE"));
            EXPECT_TRUE(b.count("SpaceTime"));
        }
}

TEST(DefaultGraph, ValidationRejectsBadGraphs) {
    auto g = default_graph();
    g.rules.push_back({{"LocalAction"}, "PCC", ""});
    g.rules.push_back({{"PCC"}, "LocalAction", ""});
    EXPECT_THROW(g.validate(), StructuralError);

    auto h = default_graph();
    h.rules.push_back({{"Unknown"}, "PCC", ""});
    EXPECT_THROW(h.validate(), StructuralError);

    auto e = default_graph();
    e.rules.push_back({{}, "PCC", ""});
    EXPECT_THROW(e.validate(), StructuralError);

    auto t = default_graph();
    t.theorems.push_back({"Empty", {{}}});
    EXPECT_THROW(t.validate(), StructuralError);
}

TEST(Closure, AllBasicPrinciples) {
    const auto g = default_graph();
    const auto cl = closure(g, full_position());
    EXPECT_TRUE(cl.count("LocalCausality"));
    EXPECT_TRUE(cl.count("LocalAction"));
    EXPECT_EQ(cl, g.principles);
}

TEST(Closure, Empty) { EXPECT_TRUE(closure(default_graph(), Position{}).empty()); }

TEST(Closure, CausalCoreMatchesFixture) {
    const auto g = default_graph();
    const Position p{{"TemporalCausalArrow", "RelativisticCausality", "IndependentInterventions", "PCC"}};
    const auto cl = closure(g, p);
    for (const char* n : {"RelativisticCausalArrow", "InterventionistCausation", "Locality", "NoSuperdeterminism", "LocalAction"})
        EXPECT_TRUE(cl.count(n)) << n;
    EXPECT_FALSE(cl.count("LocalCausality"));
    EXPECT_EQ(cl.size(), 9u);
    EXPECT_EQ(io::Json(cl), fixtures::load("minimal_repairs.json")["closure_causal_core"]);
}

TEST(Closure, UnknownNameThrows) { EXPECT_THROW(closure(default_graph(), Position{{"Telepathy"}}), PreconditionError); }

TEST(Consistency, QcmSurvivesBellTheorems) {
    const auto c = consistent(default_graph(), qcm_position(), {"Bell64", "Bell76"});
    EXPECT_TRUE(c.ok);
    EXPECT_TRUE(c.violated.empty());
}

TEST(Consistency, QcmFallsToLf) {
    const auto c = consistent(default_graph(), qcm_position(), kAll);
    EXPECT_FALSE(c.ok);
    const Violation expected{"LF", {"AOE", "SpaceTime", "LocalAction"}};
    EXPECT_NE(std::find(c.violated.begin(), c.violated.end(), expected), c.violated.end());
    for (const auto& v : c.violated) EXPECT_EQ(v.theorem, "LF");
}

TEST(Consistency, DroppingRelativisticCausalityRestoresConsistency) {
    const Position p{without(qcm_position().held, {"RelativisticCausality"})};
    EXPECT_TRUE(consistent(default_graph(), p, kAll).ok);
}

TEST(Consistency, TheoremNamesAreCaseInsensitive) {
    const auto g = default_graph();
    EXPECT_FALSE(consistent(g, qcm_position(), {"bell64", "BELL76", "lf"}).ok);
    EXPECT_THROW(consistent(g, qcm_position(), {"Kochen"}), PreconditionError);
}

TEST(MinimalRepairs, QcmAgainstLf) {
    const auto g = default_graph();
    const auto reps = minimal_repairs(g, qcm_position(), {"LF"});
    for (const char* n : {"AOE", "RelativisticCausality", "TemporalCausalArrow", "IndependentInterventions", "PCC", "SpaceTime"})
        EXPECT_NE(std::find(reps.begin(), reps.end(), NameSet{n}), reps.end()) << n;
    for (const auto& r : reps) EXPECT_FALSE(r.count("DecorrelatingExplanation"));
    EXPECT_EQ(reps.size(), 6u);
}

TEST(MinimalRepairs, TrivialCases) {
    const auto g = default_graph();
    const auto ok = minimal_repairs(g, qcm_position(), {"Bell64"});
    ASSERT_EQ(ok.size(), 1u);
    EXPECT_TRUE(ok[0].empty());
    const auto empty = minimal_repairs(g, Position{}, kAll);
    ASSERT_EQ(empty.size(), 1u);
    EXPECT_TRUE(empty[0].empty());
}

TEST(MinimalRepairs, MatchStoredExhaustiveSearch) {
    const auto g = default_graph();
    const auto fx = fixtures::load("minimal_repairs.json");
    EXPECT_EQ(io::Json(minimal_repairs(g, qcm_position(), {"LF"})), fx["qcm_lf"]);
    EXPECT_EQ(io::Json(minimal_repairs(g, qcm_position(), kAll)), fx["qcm_all"]);
    EXPECT_EQ(io::Json(minimal_repairs(g, full_position(), kAll)), fx["full_all"]);
}

TEST(MinimalRepairs, FullPositionCannotAvoidTheCausalCore) {
    const NameSet core{"AOE", "SpaceTime", "TemporalCausalArrow", "RelativisticCausality", "IndependentInterventions", "PCC"};
    const auto reps = minimal_repairs(default_graph(), full_position(), kAll);
    ASSERT_FALSE(reps.empty());
    for (const auto& r : reps)
        EXPECT_TRUE(std::any_of(r.begin(), r.end(), [&](const std::string& n) { return core.count(n) > 0; }));
}

TEST(MinimalRepairs, OrderedBySizeThenLexicographic) {
    const auto reps = minimal_repairs(default_graph(), full_position(), kAll);
    for (std::size_t i = 1; i < reps.size(); ++i) {
        EXPECT_LE(reps[i - 1].size(), reps[i].size());
        if (reps[i - 1].size() == reps[i].size()) {
            EXPECT_TRUE(std::lexicographical_compare(reps[i - 1].begin(), reps[i - 1].end(), reps[i].begin(), reps[i].end()));
        }
    }
}

TEST(PrincipleProperties, ClosureIsMonotoneAndIdempotent) {
    const auto g = default_graph();
    const std::vector<std::string> names(g.principles.begin(), g.principles.end());
    std::mt19937_64 rng(41);
    for (int t = 0; t < 200; ++t) {
        Position small, big;
        for (const auto& n : names) {
            const auto r = rng() % 4;
            if (r == 0) small.held.insert(n);
            if (r <= 1) big.held.insert(n);
        }
        const auto cs = closure(g, small), cb = closure(g, big);
        EXPECT_TRUE(subset(cs, cb));
        EXPECT_EQ(closure(g, Position{cb}), cb);
        EXPECT_TRUE(subset(big.held, cb));
    }
}

TEST(PrincipleProperties, RepairsWorkAndAreMinimal) {
    const auto g = default_graph();
    std::mt19937_64 rng(42);
    for (int t = 0; t < 40; ++t) {
        Position p;
        for (const auto& n : g.principles)
            if (rng() % 3 != 0) p.held.insert(n);
        std::vector<std::string> falsified;
        for (const auto& th : kAll)
            if (rng() & 1) falsified.push_back(th);
        for (const auto& r : minimal_repairs(g, p, falsified)) {
            EXPECT_TRUE(subset(r, p.held));
            EXPECT_TRUE(consistent(g, Position{without(p.held, r)}, falsified).ok);
            for (const auto& n : r) {
                NameSet smaller = r;
                smaller.erase(n);
                EXPECT_FALSE(consistent(g, Position{without(p.held, smaller)}, falsified).ok);
            }
        }
    }
}

TEST(PrincipleJson, GraphAndPositionRoundTrip) {
    const auto g = default_graph();
    const auto j = io::to_json(g);
    EXPECT_EQ(io::to_json(io::graph_from_json(j)).dump(), j.dump());
    const auto p = io::position_from_json(io::Json::parse(R"(["AOE","PCC"])"));
    EXPECT_EQ(p.held, (NameSet{"AOE", "PCC"}));
    EXPECT_EQ(io::position_from_json(io::Json::parse(R"({"held":["AOE"]})")).held, NameSet{"AOE"});
    const auto c = io::to_json(consistent(g, qcm_position(), kAll));
    EXPECT_EQ(c.dump(), R"({"ok":false,"violated":[["LF",["AOE","Locality","NoSuperdeterminism","SpaceTime"]],)"
                        R"(["LF",["AOE","LocalAction","SpaceTime"]]]})");
}
