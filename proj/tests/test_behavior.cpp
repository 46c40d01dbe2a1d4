#include <gtest/gtest.h>

#include <random>

#include "lfgeo/behavior.hpp"
#include "lfgeo/coordinates.hpp"
#include "lfgeo/json_io.hpp"

using namespace lfgeo;

namespace {

const Scenario k22 = binary_scenario(2);

// Independent CHSH evaluation through correlators E(x,y) = sum_ab (-1)^(a+b) p(ab|xy).
Rational chsh_by_correlators(const RationalBehavior& p) {
    auto E = [&](int x, int y) {
        Rational s = 0;
        for (int a = 1; a <= 2; ++a)
            for (int b = 1; b <= 2; ++b) s += ((a + b) % 2 == 0 ? 1 : -1) * p(a, b, x, y);
        return s;
    };
    return E(1, 1) + E(1, 2) + E(2, 1) - E(2, 2);
}

RationalBehavior random_mixture(std::mt19937_64& rng, const Scenario& sc) {
    const auto strategies = all_deterministic_strategies(sc);
    std::uniform_int_distribution<std::size_t> pick(0, strategies.size() - 1);
    std::uniform_int_distribution<int> w(1, 50);
    auto b = deterministic_behavior(strategies[pick(rng)], sc);
    for (int k = 0; k < 4; ++k) {
        const Rational lambda(w(rng), 51);
        b = mixture(lambda, b, deterministic_behavior(strategies[pick(rng)], sc));
    }
    return b;
}

}  // namespace

TEST(Scenario, IndexIsABijectionInForEachOrder) {
    const Scenario sc{3, 2, 2, 3};
    std::size_t expected = 0;
    sc.for_each([&](int a, int b, int x, int y) { EXPECT_EQ(sc.index(a, b, x, y), expected++); });
    EXPECT_EQ(expected, sc.size());
}

TEST(Scenario, RejectsZeroCounts) {
    EXPECT_THROW((Scenario{0, 2, 2, 2}.validate()), StructuralError);
    EXPECT_THROW(RationalBehavior::zeros(Scenario{2, 2, 0, 2}), StructuralError);
}

TEST(ValidateBehavior, UniformPassesWithZeroResiduals) {
    for (const Scenario& sc : {k22, binary_scenario(3), Scenario{2, 3, 3, 2}}) {
        const auto r = validate_behavior(uniform_behavior(sc), Rational(0));
        EXPECT_TRUE(r.ok());
        EXPECT_EQ(r.max_violation, 0);
    }
}

TEST(ValidateBehavior, PrBoxIsNoSignalling) {
    const auto r = validate_behavior(pr_box(k22), Rational(0));
    EXPECT_TRUE(r.is_no_signalling);
    EXPECT_TRUE(r.ok());
}

TEST(ValidateBehavior, PerturbedEntryBreaksNormalization) {
    auto b = uniform_behavior(k22);
    b(1, 1, 2, 1) += Rational(1, 10);
    const auto r = validate_behavior(b, Rational(0));
    EXPECT_FALSE(r.is_normalized);
    EXPECT_TRUE(r.is_nonnegative);
    EXPECT_EQ(r.normalization_residual, Rational(1, 10));
    EXPECT_EQ(r.max_violation, Rational(1, 10));
}

TEST(ValidateBehavior, DetectsSignallingAndNegativity) {
    // Alice's outcome copies Bob's setting: normalized, signalling.
    auto b = RationalBehavior::zeros(k22);
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y) b(y, 1, x, y) = 1;
    auto r = validate_behavior(b, Rational(0));
    EXPECT_TRUE(r.is_normalized);
    EXPECT_FALSE(r.is_no_signalling);
    EXPECT_EQ(r.signalling_residual, 1);

    auto n = uniform_behavior(k22);
    n(1, 1, 1, 1) = Rational(-1, 4);
    n(1, 2, 1, 1) = Rational(3, 4);
    r = validate_behavior(n, Rational(0));
    EXPECT_FALSE(r.is_nonnegative);
    EXPECT_EQ(r.negativity_residual, Rational(1, 4));
}

TEST(ValidateBehavior, ToleranceControlsFlags) {
    auto b = uniform_behavior<double>(k22);
    b(1, 1, 1, 1) += 1e-12;
    EXPECT_FALSE(validate_behavior(b, 0.0).is_normalized);
    EXPECT_TRUE(validate_behavior(b, 1e-10).is_normalized);
}

TEST(Behavior, MissingEntriesAreStructuralErrors) {
    std::vector<Entry<Rational>> entries;
    k22.for_each([&](int a, int b, int x, int y) {
        if (!(a == 2 && b == 2 && x == 2 && y == 2)) entries.push_back({a, b, x, y, Rational(1, 4)});
    });
    EXPECT_THROW(RationalBehavior::from_entries(k22, entries), StructuralError);
    entries.push_back({2, 2, 2, 2, Rational(1, 4)});
    EXPECT_NO_THROW(RationalBehavior::from_entries(k22, entries));
    entries.push_back({2, 2, 2, 2, Rational(1, 4)});
    EXPECT_THROW(RationalBehavior::from_entries(k22, entries), StructuralError);
    EXPECT_THROW(RationalBehavior(k22, std::vector<Rational>(15)), StructuralError);
}

TEST(DeterministicBehavior, ConstantStrategy) {
    const auto b = deterministic_behavior(DeterministicStrategy{{1, 1}, {1, 1}}, k22);
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y) EXPECT_EQ(b(1, 1, x, y), 1);
}

TEST(DeterministicBehavior, AliceCopiesSetting) {
    const auto b = deterministic_behavior(DeterministicStrategy{{1, 2}, {2, 2}}, k22);
    k22.for_each([&](int a, int bb, int x, int y) { EXPECT_EQ(b(a, bb, x, y), (a == x && bb == 2) ? 1 : 0); });
}

TEST(DeterministicBehavior, RejectsOutOfRange) {
    EXPECT_THROW(deterministic_behavior(DeterministicStrategy{{1, 3}, {1, 1}}, k22), PreconditionError);
    EXPECT_THROW(deterministic_behavior(DeterministicStrategy{{1}, {1, 1}}, k22), PreconditionError);
}

TEST(DeterministicBehavior, EveryStrategyValidatesWithZeroResiduals) {
    for (const Scenario& sc : {k22, binary_scenario(3), Scenario{2, 3, 3, 2}}) {
        for (const auto& s : all_deterministic_strategies(sc)) {
            const auto r = validate_behavior(deterministic_behavior(s, sc), Rational(0));
            EXPECT_TRUE(r.ok());
            EXPECT_EQ(r.max_violation, 0);
        }
    }
}

TEST(DeterministicBehavior, StrategyCountAndCap) {
    EXPECT_EQ(all_deterministic_strategies(k22).size(), 16u);
    EXPECT_EQ(all_deterministic_strategies(binary_scenario(3)).size(), 64u);
    EXPECT_THROW(all_deterministic_strategies(binary_scenario(3), 63), CapExceeded);
}

TEST(EvaluateInequality, ChshOnPrBoxIsFour) {
    const auto chsh = chsh_inequality(k22);
    EXPECT_EQ(evaluate_inequality(chsh, pr_box(k22)), 4);
    EXPECT_EQ(chsh_by_correlators(pr_box(k22)), 4);
}

TEST(EvaluateInequality, ChshOnUniformIsZero) { EXPECT_EQ(evaluate_inequality(chsh_inequality(k22), uniform_behavior(k22)), 0); }

TEST(EvaluateInequality, ChshMaxOverDeterministicStrategiesIsTwo) {
    const auto chsh = chsh_inequality(k22);
    Rational best = -100;
    for (const auto& s : all_deterministic_strategies(k22)) {
        const auto b = deterministic_behavior(s, k22);
        const Rational v = evaluate_inequality(chsh, b);
        EXPECT_EQ(v, chsh_by_correlators(b));
        best = std::max(best, v);
    }
    EXPECT_EQ(best, 2);
    EXPECT_EQ(chsh.bound, 2);
}

TEST(EvaluateInequality, ScenarioMismatchThrows) {
    EXPECT_THROW(evaluate_inequality(chsh_inequality(k22), uniform_behavior(binary_scenario(3))), PreconditionError);
}

TEST(EvaluateInequality, IsLinearUnderMixtures) {
    std::mt19937_64 rng(11);
    const auto chsh = chsh_inequality(binary_scenario(3), 2, 3, 1, 3);
    const Scenario sc = binary_scenario(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto b1 = random_mixture(rng, sc);
        const auto b2 = random_mixture(rng, sc);
        const Rational lambda(static_cast<long>(rng() % 101), 100);
        EXPECT_EQ(evaluate_inequality(chsh, mixture(lambda, b1, b2)),
                  lambda * evaluate_inequality(chsh, b1) + (1 - lambda) * evaluate_inequality(chsh, b2));
    }
}

TEST(Inequality, GreaterEqualFlipsToLessEqual) {
    auto chsh = chsh_inequality(k22);
    Inequality ge(k22, chsh.coeffs, chsh.bound, Sense::GreaterEqual);
    const auto le = ge.as_less_equal();
    EXPECT_EQ(le.sense, Sense::LessEqual);
    EXPECT_EQ(le.bound, -2);
    EXPECT_EQ(le.coeffs[0], -chsh.coeffs[0]);
    EXPECT_TRUE(violates(ge, uniform_behavior(k22)));
    EXPECT_FALSE(violates(le, pr_box(k22)));
}

TEST(Json, BehaviorRoundTripsExactly) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto b = random_mixture(rng, binary_scenario(3));
        const auto text = io::to_json(b).dump();
        EXPECT_EQ(io::behavior_from_json(io::Json::parse(text)), b);
        EXPECT_EQ(io::to_json(io::behavior_from_json(io::Json::parse(text))).dump(), text);
    }
}

TEST(Json, BehaviorFormatMatchesExternalShape) {
    const auto j = io::to_json(uniform_behavior(binary_scenario(3)));
    EXPECT_EQ(j["scenario"]["x"], 3);
    EXPECT_EQ(j["p"].size(), 36u);
    EXPECT_EQ(j["p"][0].dump(), R"({"a":1,"b":1,"x":1,"y":1,"num":1,"den":4})");
}

TEST(Json, HugeIntegersSurviveAsStrings) {
    auto b = uniform_behavior(k22);
    const Rational tiny(Integer(1), Integer("100000000000000000000000000000"));
    b(1, 1, 1, 1) += tiny;
    b(1, 2, 1, 1) -= tiny;
    EXPECT_EQ(io::behavior_from_json(io::Json::parse(io::to_json(b).dump())), b);
}

TEST(Json, InequalityRoundTrips) {
    const auto chsh = chsh_inequality(binary_scenario(3), 1, 3, 2, 3);
    const auto back = io::inequality_from_json(io::Json::parse(io::to_json(chsh).dump()));
    EXPECT_EQ(back, chsh);
    EXPECT_EQ(back.name, chsh.name);
}

TEST(Json, MalformedInputsAreStructuralErrors) {
    EXPECT_THROW(io::behavior_from_json(io::Json::parse(R"({"scenario":{"x":2,"y":2,"a":2,"b":2},"p":[]})")), StructuralError);
    EXPECT_THROW(io::behavior_from_json(io::Json::parse(R"({"p":[]})")), StructuralError);
    EXPECT_THROW(io::rational_from_json(io::Json::parse(R"({"num":1,"den":0})")), StructuralError);
    EXPECT_THROW(io::rational_from_json(io::Json::parse(R"({"num":"1x","den":2})")), StructuralError);
    EXPECT_THROW(io::parse_scenario("2,2,2"), StructuralError);
    EXPECT_EQ(io::parse_scenario("3,3,2,2"), binary_scenario(3));
}

TEST(NsCoordinates, RoundTripOnNoSignallingBehaviors) {
    std::mt19937_64 rng(3);
    for (const Scenario& sc : {k22, binary_scenario(3)}) {
        const NsCoordinates cg(sc);
        EXPECT_EQ(cg.dimension(), sc == k22 ? 8u : 15u);
        for (int trial = 0; trial < 20; ++trial) {
            const auto b = random_mixture(rng, sc);
            EXPECT_EQ(cg.from_coordinates(cg.to_coordinates(b)), b);
        }
        EXPECT_EQ(cg.from_coordinates(cg.to_coordinates(pr_box(sc))), pr_box(sc));
    }
}

TEST(NsCoordinates, FunctionalAgreesWithTableEvaluation) {
    std::mt19937_64 rng(4);
    const Scenario sc = binary_scenario(3);
    const NsCoordinates cg(sc);
    const auto chsh = chsh_inequality(sc, 1, 3, 2, 3);
    const auto [g, offset] = cg.functional_in_coordinates(chsh.coeffs);
    for (int trial = 0; trial < 20; ++trial) {
        const auto b = random_mixture(rng, sc);
        const auto c = cg.to_coordinates(b);
        Rational v = offset;
        for (std::size_t i = 0; i < c.size(); ++i) v += g[i] * c[i];
        EXPECT_EQ(v, evaluate_inequality(chsh, b));
    }
}

TEST(Rationalize, BestRationalIsClose) {
    EXPECT_EQ(best_rational(0.5, 10), Rational(1, 2));
    EXPECT_EQ(best_rational(-0.333333333, 100), Rational(-1, 3));
    EXPECT_EQ(best_rational(3.14159265358979, 1000), Rational(355, 113));
    EXPECT_THROW(best_rational(std::nan(""), 10), PreconditionError);
}

TEST(Rationalize, BehaviorStaysNormalized) {
    FloatBehavior f = uniform_behavior<double>(k22);
    f(1, 1, 1, 1) = 0.1 + 1e-13;
    f(1, 2, 1, 1) = 0.4 - 1e-13;
    const auto r = rationalize_behavior(f, 1000);
    EXPECT_TRUE(validate_behavior(r, Rational(0)).ok());
}
