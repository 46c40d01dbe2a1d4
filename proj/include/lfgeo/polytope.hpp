#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lfgeo/behavior.hpp"
#include "lfgeo/coordinates.hpp"
#include "lfgeo/double_description.hpp"
#include "lfgeo/error.hpp"
#include "lfgeo/fourier_motzkin.hpp"
#include "lfgeo/parallel.hpp"
#include "lfgeo/rational.hpp"
#include "lfgeo/simplex.hpp"

namespace lfgeo {

enum class PolytopeKind { LHV, LF, NS };

inline std::string to_string(PolytopeKind k) {
    switch (k) {
        case PolytopeKind::LHV: return "LHV";
        case PolytopeKind::LF: return "LF";
        case PolytopeKind::NS: return "NS";
    }
    return "?";
}

inline PolytopeKind parse_kind(const std::string& s) {
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (u == "LHV") return PolytopeKind::LHV;
    if (u == "LF") return PolytopeKind::LF;
    if (u == "NS") return PolytopeKind::NS;
    throw StructuralError("unknown polytope kind '" + s + "'");
}

struct PolytopeCaps {
    double max_strategies = 1e6;     // a^x * b^y for vertex enumeration
    int max_settings = 3;            // per party, for facet enumeration
    int max_outcomes = 2;            // per setting, for facet enumeration
    std::size_t max_rows = 500'000;  // intermediate inequality bound
};

// ---------------------------------------------------------------------------------------------
// LHV vertices

inline std::vector<RationalBehavior> enumerate_lhv_vertices(const Scenario& sc, const PolytopeCaps& caps = {}) {
    std::vector<RationalBehavior> out;
    for (const auto& s : all_deterministic_strategies(sc, caps.max_strategies))
        out.push_back(deterministic_behavior<Rational>(s, sc));
    return out;
}

// ---------------------------------------------------------------------------------------------
// LF extension

/// Joint distribution q(a,b,c,d|x,y) over the superobservers' outcomes (a,b) and the friends'
/// outcomes (c,d), where c ranges over Alice's setting-1 outcomes and d over Bob's.
class LfExtension {
public:
    LfExtension() = default;
    explicit LfExtension(Scenario sc)
        : sc_(sc), q_(sc.size() * static_cast<std::size_t>(sc.a_count * sc.b_count), Rational(0)) {}

    const Scenario& scenario() const { return sc_; }
    std::size_t index(int a, int b, int c, int d, int x, int y) const {
        return sc_.index(a, b, x, y) * static_cast<std::size_t>(sc_.a_count * sc_.b_count) +
               static_cast<std::size_t>((c - 1) * sc_.b_count + (d - 1));
    }
    const Rational& operator()(int a, int b, int c, int d, int x, int y) const { return q_[index(a, b, c, d, x, y)]; }
    Rational& operator()(int a, int b, int c, int d, int x, int y) { return q_[index(a, b, c, d, x, y)]; }
    const std::vector<Rational>& table() const { return q_; }

    /// p(a,b|x,y) = sum over friend outcomes.
    RationalBehavior marginal() const {
        auto p = RationalBehavior::zeros(sc_);
        sc_.for_each([&](int a, int b, int x, int y) {
            Rational s = 0;
            for (int c = 1; c <= sc_.a_count; ++c)
                for (int d = 1; d <= sc_.b_count; ++d) s += (*this)(a, b, c, d, x, y);
            p(a, b, x, y) = s;
        });
        return p;
    }

    /// Empty string when every defining constraint holds exactly, else the first failure.
    std::string check() const {
        const int A = sc_.a_count, B = sc_.b_count;
        for (const auto& v : q_)
            if (v < 0) return "negative entry";
        for (int x = 1; x <= sc_.x_count; ++x)
            for (int y = 1; y <= sc_.y_count; ++y) {
                Rational total = 0;
                for (int a = 1; a <= A; ++a)
                    for (int b = 1; b <= B; ++b)
                        for (int c = 1; c <= A; ++c)
                            for (int d = 1; d <= B; ++d) {
                                const Rational& v = (*this)(a, b, c, d, x, y);
                                total += v;
                                if (v != 0 && ((x == 1 && a != c) || (y == 1 && b != d))) return "protocol consistency";
                            }
                if (total != 1) return "normalization";
            }
        for (int c = 1; c <= A; ++c)
            for (int d = 1; d <= B; ++d) {
                auto friends = [&](int x, int y) {
                    Rational s = 0;
                    for (int a = 1; a <= A; ++a)
                        for (int b = 1; b <= B; ++b) s += (*this)(a, b, c, d, x, y);
                    return s;
                };
                const Rational ref = friends(1, 1);
                for (int x = 1; x <= sc_.x_count; ++x)
                    for (int y = 1; y <= sc_.y_count; ++y)
                        if (friends(x, y) != ref) return "no-superdeterminism";
                for (int x = 1; x <= sc_.x_count; ++x)
                    for (int a = 1; a <= A; ++a) {
                        auto alice = [&](int y) {
                            Rational s = 0;
                            for (int b = 1; b <= B; ++b) s += (*this)(a, b, c, d, x, y);
                            return s;
                        };
                        for (int y = 2; y <= sc_.y_count; ++y)
                            if (alice(y) != alice(1)) return "locality (Alice)";
                    }
                for (int y = 1; y <= sc_.y_count; ++y)
                    for (int b = 1; b <= B; ++b) {
                        auto bob = [&](int x) {
                            Rational s = 0;
                            for (int a = 1; a <= A; ++a) s += (*this)(a, b, c, d, x, y);
                            return s;
                        };
                        for (int x = 2; x <= sc_.x_count; ++x)
                            if (bob(x) != bob(1)) return "locality (Bob)";
                    }
            }
        return {};
    }

private:
    Scenario sc_;
    std::vector<Rational> q_;
};

namespace detail {

/// Variables and equality rows of the LF extension. Variables are the q entries not forced to
/// zero by protocol consistency.
struct LfSystem {
    Scenario sc;
    std::vector<std::array<int, 6>> vars;  // (a, b, c, d, x, y)
    std::vector<std::vector<Rational>> rows;
    std::vector<long> marginal_of_row;  // p-table index for marginal rows, -1 otherwise

    explicit LfSystem(Scenario s) : sc(s) {
        if (!sc.supports_friends()) throw PreconditionError("LF needs at least two settings per party");
        const int A = sc.a_count, B = sc.b_count;
        std::vector<long> var_of(sc.size() * static_cast<std::size_t>(A * B), -1);
        LfExtension shape(sc);
        sc.for_each([&](int a, int b, int x, int y) {
            for (int c = 1; c <= A; ++c)
                for (int d = 1; d <= B; ++d) {
                    if ((x == 1 && a != c) || (y == 1 && b != d)) continue;
                    var_of[shape.index(a, b, c, d, x, y)] = static_cast<long>(vars.size());
                    vars.push_back({a, b, c, d, x, y});
                }
        });
        const std::size_t n = vars.size();
        auto var = [&](int a, int b, int c, int d, int x, int y) { return var_of[shape.index(a, b, c, d, x, y)]; };
        auto add = [&](std::vector<Rational>& row, long v, int sign) {
            if (v >= 0) row[static_cast<std::size_t>(v)] += sign;
        };
        // Marginals.
        sc.for_each([&](int a, int b, int x, int y) {
            std::vector<Rational> row(n, Rational(0));
            for (int c = 1; c <= A; ++c)
                for (int d = 1; d <= B; ++d) add(row, var(a, b, c, d, x, y), 1);
            rows.push_back(std::move(row));
            marginal_of_row.push_back(static_cast<long>(sc.index(a, b, x, y)));
        });
        // Friends' outcomes independent of the later interventions.
        for (int c = 1; c <= A; ++c)
            for (int d = 1; d <= B; ++d)
                for (int x = 1; x <= sc.x_count; ++x)
                    for (int y = 1; y <= sc.y_count; ++y) {
                        if (x == 1 && y == 1) continue;
                        std::vector<Rational> row(n, Rational(0));
                        for (int a = 1; a <= A; ++a)
                            for (int b = 1; b <= B; ++b) {
                                add(row, var(a, b, c, d, x, y), 1);
                                add(row, var(a, b, c, d, 1, 1), -1);
                            }
                        rows.push_back(std::move(row));
                        marginal_of_row.push_back(-1);
                    }
        // Locality for each party.
        for (int c = 1; c <= A; ++c)
            for (int d = 1; d <= B; ++d) {
                for (int x = 1; x <= sc.x_count; ++x)
                    for (int a = 1; a <= A; ++a)
                        for (int y = 2; y <= sc.y_count; ++y) {
                            std::vector<Rational> row(n, Rational(0));
                            for (int b = 1; b <= B; ++b) {
                                add(row, var(a, b, c, d, x, y), 1);
                                add(row, var(a, b, c, d, x, 1), -1);
                            }
                            rows.push_back(std::move(row));
                            marginal_of_row.push_back(-1);
                        }
                for (int y = 1; y <= sc.y_count; ++y)
                    for (int b = 1; b <= B; ++b)
                        for (int x = 2; x <= sc.x_count; ++x) {
                            std::vector<Rational> row(n, Rational(0));
                            for (int a = 1; a <= A; ++a) {
                                add(row, var(a, b, c, d, x, y), 1);
                                add(row, var(a, b, c, d, 1, y), -1);
                            }
                            rows.push_back(std::move(row));
                            marginal_of_row.push_back(-1);
                        }
            }
    }

    LfExtension extension(const std::vector<Rational>& x) const {
        LfExtension q(sc);
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const auto& v = vars[i];
            q(v[0], v[1], v[2], v[3], v[4], v[5]) = x[i];
        }
        return q;
    }

    /// Objective over q for a p-space functional.
    std::vector<Rational> objective(const std::vector<Rational>& coeffs) const {
        std::vector<Rational> c(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const auto& v = vars[i];
            c[i] = coeffs[sc.index(v[0], v[1], v[4], v[5])];
        }
        return c;
    }
};

inline void require_matching(const Scenario& a, const Scenario& b) {
    if (!(a == b)) throw PreconditionError("scenario mismatch: " + a.label() + " vs " + b.label());
}

inline void require_normalized(const RationalBehavior& b) {
    const auto rep = validate_behavior(b, Rational(0));
    if (!rep.is_normalized) throw PreconditionError("behavior is not normalized");
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Maximization

/// Exact maximum of the inequality's left-hand side over the polytope (sense is ignored).
inline Rational max_over_polytope(PolytopeKind kind, const Inequality& ineq, const PolytopeCaps& caps = {}) {
    const Scenario& sc = ineq.scenario;
    switch (kind) {
        case PolytopeKind::LHV: {
            std::optional<Rational> best;
            for (const auto& v : enumerate_lhv_vertices(sc, caps)) {
                Rational val = evaluate_inequality(ineq, v);
                if (!best || val > *best) best = std::move(val);
            }
            return *best;
        }
        case PolytopeKind::LF: {
            detail::LfSystem sys(sc);
            std::vector<std::vector<Rational>> A;
            std::vector<Rational> b;
            for (std::size_t r = 0; r < sys.rows.size(); ++r)
                if (sys.marginal_of_row[r] < 0) {
                    A.push_back(sys.rows[r]);
                    b.emplace_back(0);
                }
            std::vector<Rational> norm(sys.vars.size(), Rational(0));
            for (std::size_t i = 0; i < sys.vars.size(); ++i)
                if (sys.vars[i][4] == 1 && sys.vars[i][5] == 1) norm[i] = 1;
            A.push_back(std::move(norm));
            b.emplace_back(1);
            auto res = lp::maximize(A, b, sys.objective(ineq.coeffs));
            if (res.status != lp::Status::Optimal) throw InternalError("LF maximization did not reach an optimum");
            return res.value;
        }
        case PolytopeKind::NS: {
            std::vector<std::vector<Rational>> A;
            std::vector<Rational> b;
            const std::size_t n = sc.size();
            for (int x = 1; x <= sc.x_count; ++x)
                for (int y = 1; y <= sc.y_count; ++y) {
                    std::vector<Rational> row(n, Rational(0));
                    for (int a = 1; a <= sc.a_count; ++a)
                        for (int bb = 1; bb <= sc.b_count; ++bb) row[sc.index(a, bb, x, y)] = 1;
                    A.push_back(std::move(row));
                    b.emplace_back(1);
                }
            for (int x = 1; x <= sc.x_count; ++x)
                for (int a = 1; a <= sc.a_count; ++a)
                    for (int y = 2; y <= sc.y_count; ++y) {
                        std::vector<Rational> row(n, Rational(0));
                        for (int bb = 1; bb <= sc.b_count; ++bb) {
                            row[sc.index(a, bb, x, y)] += 1;
                            row[sc.index(a, bb, x, 1)] -= 1;
                        }
                        A.push_back(std::move(row));
                        b.emplace_back(0);
                    }
            for (int y = 1; y <= sc.y_count; ++y)
                for (int bb = 1; bb <= sc.b_count; ++bb)
                    for (int x = 2; x <= sc.x_count; ++x) {
                        std::vector<Rational> row(n, Rational(0));
                        for (int a = 1; a <= sc.a_count; ++a) {
                            row[sc.index(a, bb, x, y)] += 1;
                            row[sc.index(a, bb, 1, y)] -= 1;
                        }
                        A.push_back(std::move(row));
                        b.emplace_back(0);
                    }
            auto res = lp::maximize(A, b, ineq.coeffs);
            if (res.status != lp::Status::Optimal) throw InternalError("NS maximization did not reach an optimum");
            return res.value;
        }
    }
    throw InternalError("unknown polytope kind");
}

// ---------------------------------------------------------------------------------------------
// Membership

struct WeightedVertex {
    DeterministicStrategy strategy;
    Rational weight;
};

struct MembershipResult {
    PolytopeKind kind = PolytopeKind::NS;
    bool inside = false;
    std::vector<WeightedVertex> decomposition;  // LHV, inside
    std::optional<LfExtension> extension;       // LF, inside
    std::optional<Inequality> separator;        // outside
};

namespace detail {

// Tightens a valid separating functional to its polytope maximum and normalizes it.
inline Inequality finish_separator(PolytopeKind kind, std::vector<Rational> coeffs, const Scenario& sc,
                                   const PolytopeCaps& caps) {
    Inequality ineq(sc, std::move(coeffs), Rational(0));
    ineq = ineq.normalized();
    ineq.bound = max_over_polytope(kind, ineq, caps);
    ineq = ineq.normalized();
    ineq.name = "separator-" + to_string(kind);
    return ineq;
}

}  // namespace detail

inline MembershipResult membership(PolytopeKind kind, const RationalBehavior& b, const PolytopeCaps& caps = {}) {
    detail::require_normalized(b);
    const Scenario& sc = b.scenario();
    MembershipResult out;
    out.kind = kind;
    switch (kind) {
        case PolytopeKind::LHV: {
            const auto strategies = all_deterministic_strategies(sc, caps.max_strategies);
            const std::size_t n = strategies.size();
            std::vector<std::vector<Rational>> A(sc.size(), std::vector<Rational>(n, Rational(0)));
            for (std::size_t k = 0; k < n; ++k) {
                const auto& s = strategies[k];
                for (int x = 1; x <= sc.x_count; ++x)
                    for (int y = 1; y <= sc.y_count; ++y)
                        A[sc.index(s.alice_map[static_cast<std::size_t>(x - 1)], s.bob_map[static_cast<std::size_t>(y - 1)], x, y)][k] = 1;
            }
            auto res = lp::feasible(A, b.table());
            if (res.status == lp::Status::Optimal) {
                out.inside = true;
                for (std::size_t k = 0; k < n; ++k)
                    if (res.x[k] != 0) out.decomposition.push_back({strategies[k], res.x[k]});
            } else {
                out.separator = detail::finish_separator(kind, res.farkas, sc, caps);
            }
            return out;
        }
        case PolytopeKind::LF: {
            detail::LfSystem sys(sc);
            std::vector<Rational> rhs(sys.rows.size(), Rational(0));
            for (std::size_t r = 0; r < sys.rows.size(); ++r)
                if (sys.marginal_of_row[r] >= 0) rhs[r] = b.table()[static_cast<std::size_t>(sys.marginal_of_row[r])];
            auto res = lp::feasible(sys.rows, rhs);
            if (res.status == lp::Status::Optimal) {
                out.inside = true;
                out.extension = sys.extension(res.x);
            } else {
                std::vector<Rational> coeffs(sc.size(), Rational(0));
                for (std::size_t r = 0; r < sys.rows.size(); ++r)
                    if (sys.marginal_of_row[r] >= 0) coeffs[static_cast<std::size_t>(sys.marginal_of_row[r])] += res.farkas[r];
                out.separator = detail::finish_separator(kind, std::move(coeffs), sc, caps);
            }
            return out;
        }
        case PolytopeKind::NS: {
            const auto rep = validate_behavior(b, Rational(0));
            if (rep.ok()) {
                out.inside = true;
                return out;
            }
            std::vector<Rational> coeffs(sc.size(), Rational(0));
            if (!rep.is_nonnegative) {
                const auto it = std::min_element(b.table().begin(), b.table().end());
                coeffs[static_cast<std::size_t>(it - b.table().begin())] = -1;
            } else {
                // A violated marginal equality, oriented so that b exceeds it.
                bool found = false;
                for (int x = 1; x <= sc.x_count && !found; ++x)
                    for (int a = 1; a <= sc.a_count && !found; ++a)
                        for (int y = 2; y <= sc.y_count && !found; ++y) {
                            const Rational d = b.alice_marginal(a, x, y) - b.alice_marginal(a, x, 1);
                            if (d == 0) continue;
                            const int sign = d > 0 ? 1 : -1;
                            for (int bb = 1; bb <= sc.b_count; ++bb) {
                                coeffs[sc.index(a, bb, x, y)] += sign;
                                coeffs[sc.index(a, bb, x, 1)] -= sign;
                            }
                            found = true;
                        }
                for (int y = 1; y <= sc.y_count && !found; ++y)
                    for (int bb = 1; bb <= sc.b_count && !found; ++bb)
                        for (int x = 2; x <= sc.x_count && !found; ++x) {
                            const Rational d = b.bob_marginal(bb, y, x) - b.bob_marginal(bb, y, 1);
                            if (d == 0) continue;
                            const int sign = d > 0 ? 1 : -1;
                            for (int a = 1; a <= sc.a_count; ++a) {
                                coeffs[sc.index(a, bb, x, y)] += sign;
                                coeffs[sc.index(a, bb, 1, y)] -= sign;
                            }
                            found = true;
                        }
            }
            out.separator = detail::finish_separator(kind, std::move(coeffs), sc, caps);
            return out;
        }
    }
    throw InternalError("unknown polytope kind");
}

/// Re-checks a membership certificate exactly against the queried behavior.
inline bool certificate_valid(const MembershipResult& r, const RationalBehavior& b, const PolytopeCaps& caps = {}) {
    const Scenario& sc = b.scenario();
    if (r.inside) {
        switch (r.kind) {
            case PolytopeKind::LHV: {
                auto sum = RationalBehavior::zeros(sc);
                Rational total = 0;
                for (const auto& wv : r.decomposition) {
                    if (wv.weight < 0) return false;
                    total += wv.weight;
                    const auto v = deterministic_behavior<Rational>(wv.strategy, sc);
                    for (std::size_t i = 0; i < sum.table().size(); ++i) sum.table()[i] += wv.weight * v.table()[i];
                }
                return total == 1 && sum == b;
            }
            case PolytopeKind::LF:
                return r.extension && r.extension->check().empty() && r.extension->marginal() == b;
            case PolytopeKind::NS:
                return validate_behavior(b, Rational(0)).ok();
        }
        return false;
    }
    if (!r.separator) return false;
    const Inequality& s = *r.separator;
    return evaluate_inequality(s, b) > s.bound && max_over_polytope(r.kind, s, caps) == s.bound;
}

// ---------------------------------------------------------------------------------------------
// Facets

namespace detail {

inline void check_facet_caps(const Scenario& sc, const PolytopeCaps& caps) {
    if (sc.x_count > caps.max_settings || sc.y_count > caps.max_settings || sc.a_count > caps.max_outcomes ||
        sc.b_count > caps.max_outcomes)
        throw CapExceeded("scenario " + sc.label() + " exceeds the facet enumeration caps");
}

inline std::vector<Inequality> to_canonical_facets(const NsCoordinates& cg, const std::vector<dd::HalfSpace>& hs,
                                                   const std::string& prefix) {
    std::vector<Inequality> out;
    out.reserve(hs.size());
    for (const auto& h : hs) out.push_back(cg.inequality_from_coordinates(h.normal, h.offset));
    std::sort(out.begin(), out.end(), lexicographic_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i].name = prefix + "-" + std::to_string(i + 1);
    return out;
}

/// Positivity constraints of a behavior table written in coordinates: -p(a,b|x,y)(coords) <= 0.
inline std::vector<dd::HalfSpace> positivity_in_coordinates(const NsCoordinates& cg) {
    const Scenario& sc = cg.scenario();
    std::vector<dd::HalfSpace> out;
    sc.for_each([&](int a, int b, int x, int y) {
        auto unit = Inequality::zeros(sc);
        unit.coeff(a, b, x, y) = -1;
        auto [g, offset] = cg.functional_in_coordinates(unit.coeffs);
        out.push_back({std::move(g), Rational(-offset)});
    });
    return out;
}

}  // namespace detail

/// The LF extension system with p written in no-signalling coordinates, ready for projection.
inline fm::LinearSystem lf_projection_system(const Scenario& sc) {
    detail::LfSystem sys(sc);
    const NsCoordinates cg(sc);
    const std::size_t D = cg.dimension();
    const std::size_t n = sys.vars.size();
    fm::LinearSystem out;
    out.keep = D;
    out.columns = D + n;
    // p(a,b|x,y) as an affine function of the coordinates: gradient and offset per table cell.
    const auto zero = cg.from_coordinates(std::vector<Rational>(D, Rational(0)));
    std::vector<std::vector<Rational>> grad(sc.size(), std::vector<Rational>(D, Rational(0)));
    for (std::size_t k = 0; k < D; ++k) {
        std::vector<Rational> e(D, Rational(0));
        e[k] = 1;
        const auto p = cg.from_coordinates(e);
        for (std::size_t i = 0; i < sc.size(); ++i) grad[i][k] = p.table()[i] - zero.table()[i];
    }
    for (std::size_t r = 0; r < sys.rows.size(); ++r) {
        std::vector<Rational> row(D + n, Rational(0));
        for (std::size_t j = 0; j < n; ++j) row[D + j] = sys.rows[r][j];
        Rational rhs = 0;
        if (sys.marginal_of_row[r] >= 0) {
            const auto cell = static_cast<std::size_t>(sys.marginal_of_row[r]);
            for (std::size_t k = 0; k < D; ++k) row[k] = -grad[cell][k];
            rhs = zero.table()[cell];
        }
        out.eq_rows.push_back(std::move(row));
        out.eq_rhs.push_back(std::move(rhs));
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Rational> row(D + n, Rational(0));
        row[D + j] = -1;
        out.le_rows.push_back(std::move(row));
        out.le_rhs.emplace_back(0);
    }
    return out;
}

/// A point strictly inside the LF extension system of `lf_projection_system`: the uniform
/// behavior with q spread uniformly over the entries protocol consistency leaves free.
inline std::vector<Rational> lf_interior_point(const Scenario& sc) {
    detail::LfSystem sys(sc);
    const NsCoordinates cg(sc);
    std::vector<Rational> v = cg.to_coordinates(uniform_behavior<Rational>(sc));
    for (const auto& var : sys.vars) {
        int free_count = sc.a_count * sc.b_count;
        if (var[4] != 1) free_count *= sc.a_count;
        if (var[5] != 1) free_count *= sc.b_count;
        v.emplace_back(1, free_count);
    }
    return v;
}

/// Complete, irredundant facet list in canonical form, sorted lexicographically.
/// Facets describe the polytope inside the no-signalling subspace.
inline std::vector<Inequality> enumerate_facets(PolytopeKind kind, const Scenario& sc, const PolytopeCaps& caps = {},
                                                fm::Stats* stats = nullptr) {
    detail::check_facet_caps(sc, caps);
    const NsCoordinates cg(sc);
    switch (kind) {
        case PolytopeKind::LHV: {
            std::vector<std::vector<Rational>> pts;
            for (const auto& v : enumerate_lhv_vertices(sc, caps)) pts.push_back(cg.to_coordinates(v));
            return detail::to_canonical_facets(cg, dd::hull_facets(pts), "lhv");
        }
        case PolytopeKind::LF: {
            fm::Options opt;
            opt.max_rows = caps.max_rows;
            opt.interior = lf_interior_point(sc);
            return detail::to_canonical_facets(cg, fm::project(lf_projection_system(sc), opt, stats), "lf");
        }
        case PolytopeKind::NS: {
            fm::LinearSystem sys;
            sys.keep = cg.dimension();
            sys.columns = cg.dimension();
            for (auto& h : detail::positivity_in_coordinates(cg)) {
                sys.le_rows.push_back(std::move(h.normal));
                sys.le_rhs.push_back(std::move(h.offset));
            }
            return detail::to_canonical_facets(cg, fm::project(sys, {}, stats), "ns");
        }
    }
    throw InternalError("unknown polytope kind");
}

/// True when b lies in the no-signalling subspace and satisfies every listed inequality.
inline bool satisfies_all(const std::vector<Inequality>& facets, const RationalBehavior& b) {
    const auto rep = validate_behavior(b, Rational(0));
    if (!rep.is_normalized || !rep.is_no_signalling) return false;
    for (const auto& f : facets)
        if (violates(f, b)) return false;
    return true;
}

// ---------------------------------------------------------------------------------------------
// Vertices of the NS and LF polytopes (used by the hull route and fixture search)

/// Vertices of the no-signalling polytope, by vertex enumeration of its positivity facets.
inline std::vector<RationalBehavior> ns_vertices(const Scenario& sc) {
    const NsCoordinates cg(sc);
    std::vector<RationalBehavior> out;
    for (const auto& v : dd::polytope_vertices(detail::positivity_in_coordinates(cg))) out.push_back(cg.from_coordinates(v));
    return out;
}

/// Candidate extreme points of the LF polytope: the friends' outcomes (c, d) are fixed, so
/// setting 1 of each party is deterministic, and the remaining settings carry a no-signalling
/// vertex of the reduced scenario. The LF polytope is the convex hull of these points.
inline std::vector<RationalBehavior> lf_vertex_candidates(const Scenario& sc) {
    if (!sc.supports_friends()) throw PreconditionError("LF needs at least two settings per party");
    const Scenario sub{sc.x_count - 1, sc.y_count - 1, sc.a_count, sc.b_count};
    const auto subs = ns_vertices(sub);
    std::vector<RationalBehavior> out;
    for (int c = 1; c <= sc.a_count; ++c)
        for (int d = 1; d <= sc.b_count; ++d)
            for (const auto& s : subs) {
                auto p = RationalBehavior::zeros(sc);
                sc.for_each([&](int a, int b, int x, int y) {
                    Rational v;
                    if (x == 1 && y == 1)
                        v = (a == c && b == d) ? 1 : 0;
                    else if (x == 1)
                        v = a == c ? s.bob_marginal(b, y - 1, 1) : Rational(0);
                    else if (y == 1)
                        v = b == d ? s.alice_marginal(a, x - 1, 1) : Rational(0);
                    else
                        v = s(a, b, x - 1, y - 1);
                    p(a, b, x, y) = v;
                });
                out.push_back(std::move(p));
            }
    return out;
}

// ---------------------------------------------------------------------------------------------
// 2D slices

struct SlicePoint {
    int theta_index = 0;
    Rational f1, f2;
};

struct SliceData {
    Inequality f1, f2;
    int resolution = 0;
    std::vector<std::pair<PolytopeKind, std::vector<SlicePoint>>> polygons;
};

namespace detail {

// Maximizer of a functional over the polytope, as a behavior.
inline RationalBehavior argmax_over_polytope(PolytopeKind kind, const Inequality& ineq, const PolytopeCaps& caps) {
    const Scenario& sc = ineq.scenario;
    if (kind == PolytopeKind::LHV) {
        std::optional<RationalBehavior> best;
        Rational best_val;
        for (auto& v : enumerate_lhv_vertices(sc, caps)) {
            Rational val = evaluate_inequality(ineq, v);
            if (!best || val > best_val) {
                best_val = val;
                best = std::move(v);
            }
        }
        return *best;
    }
    if (kind == PolytopeKind::LF) {
        detail::LfSystem sys(sc);
        std::vector<std::vector<Rational>> A;
        std::vector<Rational> b;
        for (std::size_t r = 0; r < sys.rows.size(); ++r)
            if (sys.marginal_of_row[r] < 0) {
                A.push_back(sys.rows[r]);
                b.emplace_back(0);
            }
        std::vector<Rational> norm(sys.vars.size(), Rational(0));
        for (std::size_t i = 0; i < sys.vars.size(); ++i)
            if (sys.vars[i][4] == 1 && sys.vars[i][5] == 1) norm[i] = 1;
        A.push_back(std::move(norm));
        b.emplace_back(1);
        auto res = lp::maximize(A, b, sys.objective(ineq.coeffs));
        if (res.status != lp::Status::Optimal) throw InternalError("LF maximization failed");
        return sys.extension(res.x).marginal();
    }
    // NS: optimize over no-signalling coordinates subject to positivity.
    const NsCoordinates cg(sc);
    const auto pos = positivity_in_coordinates(cg);
    // Variables: coordinates split as u - w (free), slacks for each positivity row.
    const std::size_t D = cg.dimension(), m = pos.size();
    std::vector<std::vector<Rational>> A(m, std::vector<Rational>(2 * D + m, Rational(0)));
    std::vector<Rational> b(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < D; ++k) {
            A[i][k] = pos[i].normal[k];
            A[i][D + k] = -pos[i].normal[k];
        }
        A[i][2 * D + i] = 1;
        b[i] = pos[i].offset;
    }
    auto [g, offset] = cg.functional_in_coordinates(ineq.coeffs);
    std::vector<Rational> c(2 * D + m, Rational(0));
    for (std::size_t k = 0; k < D; ++k) {
        c[k] = g[k];
        c[D + k] = -g[k];
    }
    auto res = lp::maximize(A, b, c);
    if (res.status != lp::Status::Optimal) throw InternalError("NS maximization failed");
    std::vector<Rational> coords(D);
    for (std::size_t k = 0; k < D; ++k) coords[k] = res.x[k] - res.x[D + k];
    return cg.from_coordinates(coords);
}

}  // namespace detail

/// Support points of the 2D images {(f1(b), f2(b))} of each polytope, one per direction
/// theta_k = 2 pi k / resolution. Directions are rationalized (denominator <= 10^6) so every
/// optimization is exact.
inline SliceData slice_2d(const std::vector<PolytopeKind>& kinds, const Inequality& f1, const Inequality& f2,
                          int resolution, const PolytopeCaps& caps = {}) {
    if (resolution < 1) throw PreconditionError("resolution must be positive");
    detail::require_matching(f1.scenario, f2.scenario);
    const NsCoordinates cg(f1.scenario);
    {
        auto g1 = cg.functional_in_coordinates(f1.coeffs).first;
        auto g2 = cg.functional_in_coordinates(f2.coeffs).first;
        // Rank-2 test on the coordinate representations.
        std::size_t i = 0;
        while (i < g1.size() && g1[i] == 0) ++i;
        bool zero1 = i == g1.size();
        bool dependent = zero1;
        if (!zero1) {
            const Rational ratio = g2[i] / g1[i];
            dependent = true;
            for (std::size_t k = 0; k < g1.size(); ++k)
                if (g2[k] != ratio * g1[k]) dependent = false;
        }
        if (dependent) throw PreconditionError("slice basis is degenerate (f1, f2 linearly dependent)");
    }
    SliceData out;
    out.f1 = f1;
    out.f2 = f2;
    out.resolution = resolution;
    const double two_pi = 2.0 * std::acos(-1.0);
    for (PolytopeKind kind : kinds) {
        std::vector<SlicePoint> pts(static_cast<std::size_t>(resolution));
        parallel_for(static_cast<std::size_t>(resolution), [&](std::size_t k) {
            const double theta = two_pi * static_cast<double>(k) / resolution;
            const Rational d1 = best_rational(std::cos(theta), 1'000'000);
            const Rational d2 = best_rational(std::sin(theta), 1'000'000);
            Inequality dir = Inequality::zeros(f1.scenario);
            for (std::size_t i = 0; i < dir.coeffs.size(); ++i) dir.coeffs[i] = d1 * f1.coeffs[i] + d2 * f2.coeffs[i];
            const auto b = detail::argmax_over_polytope(kind, dir, caps);
            pts[k] = SlicePoint{static_cast<int>(k), evaluate_inequality(f1, b), evaluate_inequality(f2, b)};
        });
        out.polygons.emplace_back(kind, std::move(pts));
    }
    return out;
}

}  // namespace lfgeo
