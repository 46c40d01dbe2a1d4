#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lfgeo/fixtures.hpp"
#include "lfgeo/quantum.hpp"

using namespace lfgeo;
using namespace lfgeo::quantum;

namespace {

const double kTsirelson = 2 * std::sqrt(2.0);

double max_abs_diff(const FloatBehavior& l, const FloatBehavior& r) {
    double m = 0;
    for (std::size_t i = 0; i < l.table().size(); ++i) m = std::max(m, std::fabs(l.table()[i] - r.table()[i]));
    return m;
}

// Singlet correlator in the z-x plane: E(x,y) = -cos(tx - ty), marginals uniform.
double singlet_probability(int a, int b, double ta, double tb) {
    const double sa = a == 1 ? 1 : -1, sb = b == 1 ? 1 : -1;
    return 0.25 * (1 - sa * sb * std::cos(ta - tb));
}

Inequality positivity(const Scenario& sc, int a, int b, int x, int y) {
    auto f = Inequality::zeros(sc);
    f.coeff(a, b, x, y) = -1;
    return f;
}

}  // namespace

TEST(PureState, Validation) {
    EXPECT_THROW(PureState({1.0, 1.0}, 1), PreconditionError);
    EXPECT_THROW(PureState({1.0, 0.0, 0.0}, 2), StructuralError);
    EXPECT_THROW(PureState({}, 0), StructuralError);
    EXPECT_NEAR(singlet().norm(), 1.0, 1e-15);
    EXPECT_THROW(product_state({1, 3}), StructuralError);
}

TEST(QubitMeasurement, ProjectorsAreIdempotentAndComplete) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 2 * kPi);
    for (int t = 0; t < 50; ++t) {
        const QubitMeasurement m{u(rng), u(rng)};
        const auto p1 = m.projector(1), p2 = m.projector(2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                EXPECT_NEAR(std::abs(p1[i][j] + p2[i][j] - (i == j ? 1.0 : 0.0)), 0, 1e-12);
                Complex sq = 0;
                for (int k = 0; k < 2; ++k) sq += p1[i][k] * p1[k][j];
                EXPECT_NEAR(std::abs(sq - p1[i][j]), 0, 1e-12);
            }
    }
    EXPECT_THROW(QubitMeasurement{}.projector(3), StructuralError);
}

TEST(BornBehavior, SingletZBasisAnticorrelates) {
    const auto p = born_behavior(singlet(), {QubitMeasurement{0, 0}}, {QubitMeasurement{0, 0}});
    EXPECT_NEAR(p(1, 2, 1, 1), 0.5, 1e-12);
    EXPECT_NEAR(p(2, 1, 1, 1), 0.5, 1e-12);
    EXPECT_NEAR(p(1, 1, 1, 1), 0.0, 1e-12);
    EXPECT_NEAR(p(2, 2, 1, 1), 0.0, 1e-12);
}

TEST(BornBehavior, ProductEigenstate) {
    const auto p = born_behavior(product_state({1, 1}), {QubitMeasurement{}}, {QubitMeasurement{}});
    EXPECT_NEAR(p(1, 1, 1, 1), 1.0, 1e-12);
    const auto q = born_behavior(product_state({2, 1}), {QubitMeasurement{}}, {QubitMeasurement{}});
    EXPECT_NEAR(q(2, 1, 1, 1), 1.0, 1e-12);
}

TEST(BornBehavior, ChshOptimalAnglesReachTsirelson) {
    const auto p = born_behavior(singlet(), {{0, 0}, {kPi / 2, 0}}, {{kPi / 4, 0}, {3 * kPi / 4, 0}});
    double e[2][2];
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 2; ++y) e[x - 1][y - 1] = p(1, 1, x, y) + p(2, 2, x, y) - p(1, 2, x, y) - p(2, 1, x, y);
    // Largest |CHSH| over the position of the minus sign.
    double best = 0;
    for (int k = 0; k < 4; ++k) {
        double s = 0;
        for (int i = 0; i < 4; ++i) s += (i == k ? -1 : 1) * e[i / 2][i % 2];
        best = std::max(best, std::fabs(s));
    }
    EXPECT_NEAR(best, kTsirelson, 1e-6);
}

TEST(BornBehavior, MatchesClosedFormCorrelators) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 2 * kPi);
    for (int t = 0; t < 20; ++t) {
        const std::vector<QubitMeasurement> al{{u(rng), 0}, {u(rng), 0}, {u(rng), 0}};
        const std::vector<QubitMeasurement> bo{{u(rng), 0}, {u(rng), 0}};
        const auto p = born_behavior(singlet(), al, bo);
        p.scenario().for_each([&](int a, int b, int x, int y) {
            EXPECT_NEAR(p(a, b, x, y), singlet_probability(a, b, al[x - 1].theta, bo[y - 1].theta), 1e-12);
        });
    }
}

TEST(BornBehavior, RejectsBadInputs) {
    EXPECT_THROW(born_behavior(singlet(), {}, {QubitMeasurement{}}), PreconditionError);
    EXPECT_THROW(born_behavior(product_state({1}), {QubitMeasurement{}}, {QubitMeasurement{}}), StructuralError);
}

TEST(EwfsBehavior, DilationEquivalenceOnRandomConfigs) {
    std::mt19937_64 rng(20240517);
    for (int t = 0; t < 100; ++t) {
        const auto cfg = random_config(rng, 1 + t % 2, 1 + (t / 2) % 2);
        const auto e = ewfs_behavior(cfg);
        const auto b = born_behavior(cfg.shared_state, cfg.effective_alice(), cfg.effective_bob());
        ASSERT_LE(max_abs_diff(e, b), 1e-10) << "config " << t;
        const auto rep = validate_behavior(e, 1e-10);
        EXPECT_TRUE(rep.ok()) << "config " << t;
    }
}

TEST(EwfsBehavior, SettingInFriendBasisDuplicatesVaultRow) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        auto cfg = random_config(rng, 1, 2);
        cfg.alice_settings[0] = cfg.charlie_basis;
        const auto e = ewfs_behavior(cfg);
        e.scenario().for_each([&](int a, int b, int x, int y) {
            if (x == 1) {
                EXPECT_NEAR(e(a, b, 1, y), e(a, b, 2, y), 1e-10);
            }
        });
    }
}

TEST(EwfsBehavior, SingletWithChshSettingsViolatesEmbeddedChsh) {
    EwfsConfig cfg;
    cfg.charlie_basis = {0, 0};
    cfg.debbie_basis = {0, 0};
    cfg.alice_settings = {{kPi / 2, 0}, {kPi / 4, 0}};
    cfg.bob_settings = {{kPi / 4, 0}, {3 * kPi / 4, 0}};
    const auto p = ewfs_behavior(cfg);
    ASSERT_EQ(p.scenario(), binary_scenario(3));
    // Best CHSH relabeling over settings {1,2} of both parties.
    double best = -1e9;
    for (const auto& f : fixtures::embedded_chsh_family(binary_scenario(3), 1, 2, 1, 2))
        best = std::max(best, evaluate_inequality(f, p) - to_double(f.bound));
    EXPECT_GT(best, 0.1);
}

TEST(OptimizeViolation, TsirelsonOnEmbeddedChsh) {
    const auto chsh = chsh_inequality(binary_scenario(2));
    const auto r = optimize_violation(chsh, 50, 7);
    EXPECT_GE(r.value, kTsirelson - 1e-3);
    EXPECT_LE(r.value, kTsirelson + 1e-9);
    const auto g = tsirelson_grid(chsh, 360);
    EXPECT_NEAR(g.value, kTsirelson, 2e-3);
    EXPECT_NEAR(r.value, g.value, 2e-3);
}

TEST(OptimizeViolation, ChshEmbeddedIn3x3) {
    const auto chsh = chsh_inequality(binary_scenario(3), 1, 2, 1, 2);
    EXPECT_GE(optimize_violation(chsh, 30, 11).value, kTsirelson - 1e-3);
}

TEST(OptimizeViolation, PositivityIsNeverViolated) {
    const Scenario sc = binary_scenario(2);
    for (int seed = 0; seed < 4; ++seed) {
        const auto f = positivity(sc, 1 + seed % 2, 1 + seed / 2, 2, 1);
        const auto r = optimize_violation(f, 5, static_cast<std::uint64_t>(seed));
        EXPECT_LE(r.value, to_double(f.bound) + 1e-12);
        EXPECT_NEAR(r.value, 0.0, 1e-9);
    }
}

TEST(OptimizeViolation, DeterministicAndMonotone) {
    const auto chsh = chsh_inequality(binary_scenario(3), 2, 3, 1, 3);
    const auto a = optimize_violation(chsh, 6, 99);
    const auto b = optimize_violation(chsh, 6, 99);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.history, b.history);
    ASSERT_EQ(a.history.size(), 7u);
    for (std::size_t k = 1; k < a.history.size(); ++k) EXPECT_GE(a.history[k], a.history[k - 1]);
    EXPECT_EQ(a.history.back(), a.value);
    EXPECT_NEAR(evaluate_inequality(chsh, ewfs_behavior(a.config)), a.value, 1e-12);
}

TEST(OptimizeViolation, GreaterEqualSenseIsFlipped) {
    auto chsh = chsh_inequality(binary_scenario(2));
    const auto le = optimize_violation(chsh, 10, 3);
    chsh = chsh.as_less_equal();
    for (auto& c : chsh.coeffs) c = -c;
    chsh.bound = -chsh.bound;
    chsh.sense = Sense::GreaterEqual;
    EXPECT_EQ(optimize_violation(chsh, 10, 3).value, le.value);
}

TEST(OptimizeViolation, RejectsBadInputs) {
    EXPECT_THROW(optimize_violation(chsh_inequality(binary_scenario(2)), 0, 1), PreconditionError);
    EXPECT_THROW(optimize_violation(Inequality::zeros(Scenario{2, 2, 3, 2}), 3, 1), PreconditionError);
    EXPECT_THROW(optimize_violation(Inequality::zeros(Scenario{1, 2, 2, 2}), 3, 1), PreconditionError);
}

TEST(TsirelsonGrid, ResolutionOneIsTheZeroAnglePoint) {
    const auto chsh = chsh_inequality(binary_scenario(2));
    const auto g = tsirelson_grid(chsh, 1);
    const auto p = born_behavior(singlet(), {{0, 0}, {0, 0}}, {{0, 0}, {0, 0}});
    EXPECT_NEAR(g.value, evaluate_inequality(chsh, p), 1e-12);
}

TEST(TsirelsonGrid, ArgmaxReproducesValue) {
    const auto chsh = chsh_inequality(binary_scenario(3), 1, 3, 2, 3);
    const auto g = tsirelson_grid(chsh, 48);
    std::vector<QubitMeasurement> al, bo;
    for (double t : g.alice_angles()) al.push_back({t, 0});
    for (double t : g.bob_angles()) bo.push_back({t, 0});
    EXPECT_NEAR(evaluate_inequality(chsh, born_behavior(singlet(), al, bo)), g.value, 1e-12);
    EXPECT_EQ(g.alice_index[0], 0);
}

TEST(TsirelsonGrid, OptimizerSeededFromGridNeverLoses) {
    const Scenario sc = binary_scenario(3);
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> coef(-2, 2);
    for (int t = 0; t < 4; ++t) {
        auto f = Inequality::zeros(sc);
        for (auto& c : f.coeffs) c = coef(rng);
        const auto g = tsirelson_grid(f, 24);
        const auto r = optimize_violation(f, 3, g.params());
        EXPECT_GE(r.value + 1e-6, g.value);
    }
}

TEST(TsirelsonGrid, CapIsEnforced) {
    EXPECT_THROW(tsirelson_grid(chsh_inequality(binary_scenario(3)), 360, 1e6), CapExceeded);
    EXPECT_THROW(tsirelson_grid(chsh_inequality(binary_scenario(2)), 0), PreconditionError);
}

TEST(EwfsParams, FromSingletMatchesBorn) {
    const auto p = EwfsParams::from_singlet(0.3, {1.1, 2.0}, 0.7, {2.5});
    const auto e = ewfs_behavior(p.config());
    const auto b = born_behavior(singlet(), {{0.3, 0}, {1.1, 0}, {2.0, 0}}, {{0.7, 0}, {2.5, 0}});
    EXPECT_LE(max_abs_diff(e, b), 1e-10);
}

TEST(QuantumFixture, StoredLfViolationReproduces) {
    const auto fx = fixtures::load("quantum_lf_violation_3x3.json");
    const auto f = io::inequality_from_json(fx["facet"]);
    const auto& opt = fx["optimizer"];
    const auto r = optimize_violation(f, opt["steps"].get<int>(), opt["seed"].get<std::uint64_t>());
    EXPECT_EQ(r.value, opt["value"].get<double>());
    EXPECT_GT(r.value, to_double(f.bound));
    EXPECT_NEAR(r.value, fx["grid"]["value"].get<double>(), 2e-3);
}
