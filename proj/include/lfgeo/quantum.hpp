#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "lfgeo/behavior.hpp"
#include "lfgeo/error.hpp"
#include "lfgeo/parallel.hpp"

namespace lfgeo::quantum {

using Complex = std::complex<double>;
using Matrix2 = std::array<std::array<Complex, 2>, 2>;

inline constexpr double kPi = 3.14159265358979323846;

/// Pure state on qubit_count qubits; qubit 0 is the most significant bit of the basis index.
/// Basis state |0> of a qubit is the +z eigenstate, which carries outcome label 1.
struct PureState {
    std::vector<Complex> amplitudes;
    int qubit_count = 0;

    PureState() = default;
    PureState(std::vector<Complex> amps, int qubits) : amplitudes(std::move(amps)), qubit_count(qubits) { validate(); }

    double norm() const {
        double s = 0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }

    void validate() const {
        if (qubit_count < 1 || qubit_count > 20) throw StructuralError("qubit count out of range");
        if (amplitudes.size() != (std::size_t{1} << qubit_count))
            throw StructuralError("amplitude vector length must be 2^qubit_count");
        if (std::fabs(norm() - 1.0) > 1e-12) throw PreconditionError("state is not normalized within 1e-12");
    }
};

/// (|01> - |10>) / sqrt 2.
inline PureState singlet() {
    const double h = 1.0 / std::sqrt(2.0);
    return PureState({0.0, h, -h, 0.0}, 2);
}

/// cos(alpha)|00> + sin(alpha)|11>.
inline PureState schmidt_state(double alpha) {
    return PureState({std::cos(alpha), 0.0, 0.0, std::sin(alpha)}, 2);
}

/// Product of z eigenstates given by outcome labels (1 = +z, 2 = -z), one per qubit.
inline PureState product_state(const std::vector<int>& labels) {
    if (labels.empty()) throw StructuralError("product state needs at least one qubit");
    std::size_t idx = 0;
    for (int l : labels) {
        if (l != 1 && l != 2) throw StructuralError("product state labels must be 1 or 2");
        idx = (idx << 1) | static_cast<std::size_t>(l - 1);
    }
    std::vector<Complex> amps(std::size_t{1} << labels.size(), 0.0);
    amps[idx] = 1.0;
    return PureState(std::move(amps), static_cast<int>(labels.size()));
}

/// Projective qubit measurement along n = (sin t cos p, sin t sin p, cos t);
/// outcome 1 projects onto +n, outcome 2 onto -n.
struct QubitMeasurement {
    double theta = 0;
    double phi = 0;

    Matrix2 projector(int outcome) const {
        if (outcome != 1 && outcome != 2) throw StructuralError("qubit outcomes are 1 or 2");
        const double s = outcome == 1 ? 0.5 : -0.5;
        const double nx = std::sin(theta) * std::cos(phi), ny = std::sin(theta) * std::sin(phi), nz = std::cos(theta);
        Matrix2 m;
        m[0][0] = 0.5 + s * nz;
        m[1][1] = 0.5 - s * nz;
        m[0][1] = s * Complex(nx, -ny);
        m[1][0] = s * Complex(nx, ny);
        return m;
    }
};

namespace detail {

// Applies a single-qubit operator to `qubit` of an n-qubit state in place.
inline void apply1(std::vector<Complex>& psi, int n, int qubit, const Matrix2& m) {
    const std::size_t bit = std::size_t{1} << (n - 1 - qubit);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (i & bit) continue;
        const Complex a0 = psi[i], a1 = psi[i | bit];
        psi[i] = m[0][0] * a0 + m[0][1] * a1;
        psi[i | bit] = m[1][0] * a0 + m[1][1] * a1;
    }
}

// Controlled-copy in `basis`: Pi_1 (x) I + Pi_2 (x) X on (control, target). Self-inverse.
inline void controlled_copy(std::vector<Complex>& psi, int n, int control, int target, const QubitMeasurement& basis) {
    const Matrix2 p1 = basis.projector(1), p2 = basis.projector(2);
    const std::size_t cbit = std::size_t{1} << (n - 1 - control);
    const std::size_t tbit = std::size_t{1} << (n - 1 - target);
    std::vector<Complex> out(psi.size(), 0.0);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (psi[i] == Complex(0.0)) continue;
        const int c = (i & cbit) ? 1 : 0;
        for (int c2 = 0; c2 < 2; ++c2) {
            const std::size_t base = c2 ? (i | cbit) : (i & ~cbit);
            // Pi_1 part leaves the target alone; Pi_2 part flips it.
            out[base] += p1[static_cast<std::size_t>(c2)][static_cast<std::size_t>(c)] * psi[i];
            out[base ^ tbit] += p2[static_cast<std::size_t>(c2)][static_cast<std::size_t>(c)] * psi[i];
        }
    }
    psi = std::move(out);
}

inline double outcome_probability(std::vector<Complex> psi, int n, const std::vector<std::pair<int, Matrix2>>& projs) {
    for (const auto& [q, m] : projs) apply1(psi, n, q, m);
    double s = 0;
    for (const auto& a : psi) s += std::norm(a);
    return s;
}

inline Matrix2 z_projector(int outcome) { return QubitMeasurement{0.0, 0.0}.projector(outcome); }

}  // namespace detail

/// p(a,b|x,y) = <psi| P_a^x (x) P_b^y |psi> on a two-qubit state.
inline FloatBehavior born_behavior(const PureState& state, const std::vector<QubitMeasurement>& alice,
                                   const std::vector<QubitMeasurement>& bob) {
    state.validate();
    if (state.qubit_count != 2) throw StructuralError("born_behavior needs a two-qubit state");
    if (alice.empty() || bob.empty()) throw PreconditionError("measurement lists must be nonempty");
    const Scenario sc{static_cast<int>(alice.size()), static_cast<int>(bob.size()), 2, 2};
    auto out = FloatBehavior::zeros(sc);
    sc.for_each([&](int a, int b, int x, int y) {
        out(a, b, x, y) = detail::outcome_probability(
            state.amplitudes, 2,
            {{0, alice[static_cast<std::size_t>(x - 1)].projector(a)}, {1, bob[static_cast<std::size_t>(y - 1)].projector(b)}});
    });
    return out;
}

/// Two sealed friend labs (Charlie, Debbie) inside the superobservers' (Alice, Bob) labs.
/// Setting 1 of each superobserver asks the friend; settings >= 2 reverse the friend's
/// measurement and measure the particle directly.
struct EwfsConfig {
    PureState shared_state = singlet();
    QubitMeasurement charlie_basis;
    QubitMeasurement debbie_basis;
    std::vector<QubitMeasurement> alice_settings;  // settings x = 2, 3, ...
    std::vector<QubitMeasurement> bob_settings;    // settings y = 2, 3, ...

    Scenario scenario() const {
        return Scenario{1 + static_cast<int>(alice_settings.size()), 1 + static_cast<int>(bob_settings.size()), 2, 2};
    }

    void validate() const {
        shared_state.validate();
        if (shared_state.qubit_count != 2) throw StructuralError("EWFS shared state must have two qubits");
    }

    std::vector<QubitMeasurement> effective_alice() const {
        std::vector<QubitMeasurement> m{charlie_basis};
        m.insert(m.end(), alice_settings.begin(), alice_settings.end());
        return m;
    }
    std::vector<QubitMeasurement> effective_bob() const {
        std::vector<QubitMeasurement> m{debbie_basis};
        m.insert(m.end(), bob_settings.begin(), bob_settings.end());
        return m;
    }
};

/// Register order: Alice's particle, Charlie's record, Bob's particle, Debbie's record.
inline FloatBehavior ewfs_behavior(const EwfsConfig& cfg) {
    cfg.validate();
    constexpr int n = 4;
    constexpr int kA = 0, kC = 1, kB = 2, kD = 3;
    std::vector<Complex> psi(16, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t a = i >> 1, b = i & 1;
        psi[(a << 3) | (b << 1)] = cfg.shared_state.amplitudes[i];
    }
    detail::controlled_copy(psi, n, kA, kC, cfg.charlie_basis);
    detail::controlled_copy(psi, n, kB, kD, cfg.debbie_basis);

    const Scenario sc = cfg.scenario();
    auto out = FloatBehavior::zeros(sc);
    for (int x = 1; x <= sc.x_count; ++x)
        for (int y = 1; y <= sc.y_count; ++y) {
            std::vector<Complex> phi = psi;
            if (x >= 2) detail::controlled_copy(phi, n, kA, kC, cfg.charlie_basis);
            if (y >= 2) detail::controlled_copy(phi, n, kB, kD, cfg.debbie_basis);
            for (int a = 1; a <= 2; ++a)
                for (int b = 1; b <= 2; ++b) {
                    std::vector<std::pair<int, Matrix2>> projs;
                    projs.emplace_back(x == 1 ? kC : kA, x == 1 ? detail::z_projector(a)
                                                                : cfg.alice_settings[static_cast<std::size_t>(x - 2)].projector(a));
                    projs.emplace_back(y == 1 ? kD : kB, y == 1 ? detail::z_projector(b)
                                                                : cfg.bob_settings[static_cast<std::size_t>(y - 2)].projector(b));
                    out(a, b, x, y) = detail::outcome_probability(phi, n, projs);
                }
        }
    return out;
}

/// Random config: Haar-like random two-qubit state and uniformly random Bloch directions.
inline EwfsConfig random_config(std::mt19937_64& rng, int extra_alice, int extra_bob) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Complex> amps(4);
    double s = 0;
    for (auto& a : amps) {
        a = Complex(g(rng), g(rng));
        s += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(s);
    auto direction = [&] { return QubitMeasurement{std::acos(1.0 - 2.0 * u(rng)), 2.0 * kPi * u(rng)}; };
    EwfsConfig cfg;
    cfg.shared_state = PureState(std::move(amps), 2);
    cfg.charlie_basis = direction();
    cfg.debbie_basis = direction();
    for (int i = 0; i < extra_alice; ++i) cfg.alice_settings.push_back(direction());
    for (int i = 0; i < extra_bob; ++i) cfg.bob_settings.push_back(direction());
    return cfg;
}

// ---------------------------------------------------------------------------------------------
// Optimization over real (z-x plane) configurations

/// Real EWFS parameters: state cos(alpha)|00> + sin(alpha)|11>, all directions with phi = 0.
struct EwfsParams {
    double alpha = kPi / 4;
    double charlie = 0;
    std::vector<double> alice;  // x >= 2
    double debbie = 0;
    std::vector<double> bob;    // y >= 2

    std::vector<double> flat() const {
        std::vector<double> v{alpha, charlie};
        v.insert(v.end(), alice.begin(), alice.end());
        v.push_back(debbie);
        v.insert(v.end(), bob.begin(), bob.end());
        return v;
    }

    void assign(const std::vector<double>& v) {
        std::size_t k = 0;
        alpha = v[k++];
        charlie = v[k++];
        for (auto& t : alice) t = v[k++];
        debbie = v[k++];
        for (auto& t : bob) t = v[k++];
    }

    EwfsConfig config() const {
        EwfsConfig cfg;
        cfg.shared_state = schmidt_state(alpha);
        cfg.charlie_basis = {charlie, 0.0};
        cfg.debbie_basis = {debbie, 0.0};
        for (double t : alice) cfg.alice_settings.push_back({t, 0.0});
        for (double t : bob) cfg.bob_settings.push_back({t, 0.0});
        return cfg;
    }

    /// The singlet with the given z-x angles, rewritten in Schmidt form: the singlet equals
    /// (I (x) iY)|Phi+> up to phase, so Bob's side angles shift by pi.
    static EwfsParams from_singlet(double charlie, std::vector<double> alice, double debbie, std::vector<double> bob) {
        EwfsParams p;
        p.alpha = kPi / 4;
        p.charlie = charlie;
        p.alice = std::move(alice);
        p.debbie = debbie + kPi;
        for (double& t : bob) t += kPi;
        p.bob = std::move(bob);
        return p;
    }
};

struct OptimizeResult {
    EwfsConfig config;
    EwfsParams params;
    double value = 0;             // of the inequality written with sense <=
    std::vector<double> history;  // best value after each sweep; history[0] is the start
    std::uint64_t seed = 0;
    int steps = 0;
};

namespace detail {

inline void require_binary(const Scenario& sc) {
    if (sc.a_count != 2 || sc.b_count != 2) throw PreconditionError("EWFS behaviors have binary outcomes");
    if (!sc.supports_friends()) throw PreconditionError("EWFS scenario needs at least two settings per party");
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double objective(const Inequality& le, const EwfsParams& p) { return evaluate_inequality(le, ewfs_behavior(p.config())); }

inline OptimizeResult ascend(const Inequality& ineq, int steps, EwfsParams start) {
    if (steps < 1) throw PreconditionError("steps must be positive");
    const Inequality le = ineq.as_less_equal();
    const Scenario& sc = le.scenario;
    require_binary(sc);
    if (static_cast<int>(start.alice.size()) != sc.x_count - 1 || static_cast<int>(start.bob.size()) != sc.y_count - 1)
        throw PreconditionError("starting configuration does not match the inequality's scenario");

    std::vector<double> v = start.flat();
    EwfsParams work = start;
    auto f = [&](const std::vector<double>& params) {
        work.assign(params);
        return objective(le, work);
    };
    double best = f(v);
    OptimizeResult res;
    res.history.push_back(best);
    constexpr int kScan = 24;
    constexpr double kGolden = 0.6180339887498949;
    for (int sweep = 0; sweep < steps; ++sweep) {
        for (std::size_t k = 0; k < v.size(); ++k) {
            // Angles live on a circle; the Schmidt angle on [0, pi/2] covers all real Schmidt states.
            const bool is_alpha = k == 0;
            const double span = is_alpha ? kPi / 2 : 2 * kPi;
            const double h = span / kScan;
            std::vector<double> trial = v;
            double scan_best = best;
            double scan_arg = v[k];
            for (int i = 0; i < kScan; ++i) {
                trial[k] = is_alpha ? h * i : v[k] + h * i;
                const double val = f(trial);
                if (val > scan_best) {
                    scan_best = val;
                    scan_arg = trial[k];
                }
            }
            // Golden-section refinement on the bracket around the best scan point.
            double lo = scan_arg - h, hi = scan_arg + h;
            if (is_alpha) {
                lo = std::max(lo, 0.0);
                hi = std::min(hi, kPi / 2);
            }
            double c = hi - kGolden * (hi - lo), d = lo + kGolden * (hi - lo);
            trial[k] = c;
            double fc = f(trial);
            trial[k] = d;
            double fd = f(trial);
            for (int it = 0; it < 40; ++it) {
                if (fc > fd) {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - kGolden * (hi - lo);
                    trial[k] = c;
                    fc = f(trial);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + kGolden * (hi - lo);
                    trial[k] = d;
                    fd = f(trial);
                }
            }
            double cand_arg = fc > fd ? c : d;
            double cand = std::max(fc, fd);
            if (scan_best > cand) {
                cand = scan_best;
                cand_arg = scan_arg;
            }
            if (cand > best) {
                best = cand;
                v[k] = cand_arg;
            }
        }
        res.history.push_back(best);
    }
    res.params = start;
    res.params.assign(v);
    res.config = res.params.config();
    res.value = best;
    res.steps = steps;
    return res;
}

}  // namespace detail

/// Coordinate ascent of the inequality's left-hand side (sense <=) over real EWFS
/// configurations from a seeded random start. Deterministic in (ineq, steps, seed).
inline OptimizeResult optimize_violation(const Inequality& ineq, int steps, std::uint64_t seed) {
    const Scenario& sc = ineq.scenario;
    detail::require_binary(sc);
    std::mt19937_64 rng(seed);
    EwfsParams start;
    start.alpha = detail::unit_draw(rng) * kPi / 2;
    start.charlie = detail::unit_draw(rng) * 2 * kPi;
    start.alice.resize(static_cast<std::size_t>(sc.x_count - 1));
    for (auto& t : start.alice) t = detail::unit_draw(rng) * 2 * kPi;
    start.debbie = detail::unit_draw(rng) * 2 * kPi;
    start.bob.resize(static_cast<std::size_t>(sc.y_count - 1));
    for (auto& t : start.bob) t = detail::unit_draw(rng) * 2 * kPi;
    auto res = detail::ascend(ineq, steps, std::move(start));
    res.seed = seed;
    return res;
}

/// Same ascent from an explicit starting point.
inline OptimizeResult optimize_violation(const Inequality& ineq, int steps, const EwfsParams& start) {
    return detail::ascend(ineq, steps, start);
}

// ---------------------------------------------------------------------------------------------
// Grid oracle

struct GridResult {
    double value = -std::numeric_limits<double>::infinity();
    int resolution = 0;
    std::vector<int> alice_index;  // grid index of every Alice angle; entry 0 (Charlie) is 0
    std::vector<int> bob_index;    // grid index of every Bob angle; entry 0 is Debbie
    std::vector<double> alice_angles() const { return angles(alice_index); }
    std::vector<double> bob_angles() const { return angles(bob_index); }

    /// Start point for optimize_violation at the grid maximizer.
    EwfsParams params() const {
        const auto a = alice_angles(), b = bob_angles();
        return EwfsParams::from_singlet(a[0], {a.begin() + 1, a.end()}, b[0], {b.begin() + 1, b.end()});
    }

private:
    std::vector<double> angles(const std::vector<int>& idx) const {
        std::vector<double> out;
        for (int i : idx) out.push_back(2 * kPi * i / resolution);
        return out;
    }
};

/// Exhaustive maximum of the inequality's left-hand side (sense <=) over the singlet with
/// every direction on the z-x grid 2 pi k / resolution. Charlie's angle is pinned to 0 (the
/// singlet is rotation invariant and so is the grid); Bob's angles are maximized one setting
/// at a time, which is exact because the functional is linear in each Bob column.
inline GridResult tsirelson_grid(const Inequality& ineq, int resolution, double cap = 1e9) {
    if (resolution < 1) throw PreconditionError("resolution must be positive");
    const Inequality le = ineq.as_less_equal();
    const Scenario& sc = le.scenario;
    if (sc.a_count != 2 || sc.b_count != 2) throw PreconditionError("grid oracle needs binary outcomes");
    const double cells = std::pow(double(resolution), sc.x_count - 1) * sc.y_count * resolution;
    if (cells > cap) throw CapExceeded("grid size exceeds cap");

    // pair[d][a][b]: singlet probabilities when the angle difference is 2 pi d / resolution.
    std::vector<std::array<std::array<double, 2>, 2>> pair(static_cast<std::size_t>(resolution));
    for (int d = 0; d < resolution; ++d) {
        const auto p = born_behavior(singlet(), {QubitMeasurement{2 * kPi * d / resolution, 0}}, {QubitMeasurement{0, 0}});
        for (int a = 1; a <= 2; ++a)
            for (int b = 1; b <= 2; ++b) pair[static_cast<std::size_t>(d)][a - 1][b - 1] = p(a, b, 1, 1);
    }
    std::vector<double> coeff(le.coeffs.size());
    for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] = to_double(le.coeffs[i]);

    std::size_t outer = 1;
    for (int x = 2; x <= sc.x_count; ++x) outer *= static_cast<std::size_t>(resolution);

    struct Best {
        double value = -std::numeric_limits<double>::infinity();
        std::vector<int> alice, bob;
    };
    // Chunked so each worker keeps a private best; merged in chunk order.
    const std::size_t chunks = std::min<std::size_t>(outer, 64);
    std::vector<Best> partial(chunks);
    parallel_for(chunks, [&](std::size_t ch) {
        Best local;
        std::vector<int> alice(static_cast<std::size_t>(sc.x_count), 0);
        std::vector<int> bob(static_cast<std::size_t>(sc.y_count), 0);
        const std::size_t begin = outer * ch / chunks, end = outer * (ch + 1) / chunks;
        for (std::size_t o = begin; o < end; ++o) {
            std::size_t rem = o;
            for (int x = sc.x_count; x >= 2; --x) {
                alice[static_cast<std::size_t>(x - 1)] = static_cast<int>(rem % static_cast<std::size_t>(resolution));
                rem /= static_cast<std::size_t>(resolution);
            }
            double total = 0;
            for (int y = 1; y <= sc.y_count; ++y) {
                double col_best = -std::numeric_limits<double>::infinity();
                int col_arg = 0;
                for (int tb = 0; tb < resolution; ++tb) {
                    double s = 0;
                    for (int x = 1; x <= sc.x_count; ++x) {
                        int d = (alice[static_cast<std::size_t>(x - 1)] - tb) % resolution;
                        if (d < 0) d += resolution;
                        const auto& pr = pair[static_cast<std::size_t>(d)];
                        for (int a = 1; a <= 2; ++a)
                            for (int b = 1; b <= 2; ++b) s += coeff[sc.index(a, b, x, y)] * pr[a - 1][b - 1];
                    }
                    if (s > col_best) {
                        col_best = s;
                        col_arg = tb;
                    }
                }
                total += col_best;
                bob[static_cast<std::size_t>(y - 1)] = col_arg;
            }
            if (total > local.value) {
                local.value = total;
                local.alice = alice;
                local.bob = bob;
            }
        }
        partial[ch] = std::move(local);
    });
    GridResult res;
    res.resolution = resolution;
    for (auto& p : partial)
        if (p.value > res.value) {
            res.value = p.value;
            res.alice_index = std::move(p.alice);
            res.bob_index = std::move(p.bob);
        }
    return res;
}

}  // namespace lfgeo::quantum
