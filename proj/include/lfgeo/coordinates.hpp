#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lfgeo/behavior.hpp"

namespace lfgeo {

/// Affine coordinates of the no-signalling subspace (Collins-Gisin form):
/// Alice marginals p(a|x) for a < a_count, Bob marginals p(b|y) for b < b_count, and joint
/// p(a,b|x,y) for a < a_count, b < b_count. Marginals are read at the other party's setting 1.
///
/// Every no-signalling, normalized behavior is determined by these numbers, and every linear
/// functional restricted to that subspace has a unique representation in them. Facet lists
/// are canonicalized here.
class NsCoordinates {
public:
    explicit NsCoordinates(Scenario sc) : sc_(sc) {
        sc_.validate();
        alice_ = sc_.x_count * (sc_.a_count - 1);
        bob_ = sc_.y_count * (sc_.b_count - 1);
        joint_ = sc_.x_count * sc_.y_count * (sc_.a_count - 1) * (sc_.b_count - 1);
    }

    const Scenario& scenario() const { return sc_; }
    std::size_t dimension() const { return static_cast<std::size_t>(alice_ + bob_ + joint_); }

    std::size_t alice_index(int a, int x) const {
        return static_cast<std::size_t>((x - 1) * (sc_.a_count - 1) + (a - 1));
    }
    std::size_t bob_index(int b, int y) const {
        return static_cast<std::size_t>(alice_ + (y - 1) * (sc_.b_count - 1) + (b - 1));
    }
    std::size_t joint_index(int a, int b, int x, int y) const {
        return static_cast<std::size_t>(
            alice_ + bob_ +
            (((x - 1) * sc_.y_count + (y - 1)) * (sc_.a_count - 1) + (a - 1)) * (sc_.b_count - 1) + (b - 1));
    }

    template <class T>
    std::vector<T> to_coordinates(const Behavior<T>& p) const {
        std::vector<T> c(dimension(), T(0));
        for (int x = 1; x <= sc_.x_count; ++x)
            for (int a = 1; a < sc_.a_count; ++a) c[alice_index(a, x)] = p.alice_marginal(a, x, 1);
        for (int y = 1; y <= sc_.y_count; ++y)
            for (int b = 1; b < sc_.b_count; ++b) c[bob_index(b, y)] = p.bob_marginal(b, y, 1);
        for (int x = 1; x <= sc_.x_count; ++x)
            for (int y = 1; y <= sc_.y_count; ++y)
                for (int a = 1; a < sc_.a_count; ++a)
                    for (int b = 1; b < sc_.b_count; ++b) c[joint_index(a, b, x, y)] = p(a, b, x, y);
        return c;
    }

    /// The unique normalized no-signalling table with the given coordinates.
    template <class T>
    Behavior<T> from_coordinates(const std::vector<T>& c) const {
        if (c.size() != dimension()) throw StructuralError("coordinate vector has wrong dimension");
        const int A = sc_.a_count, B = sc_.b_count;
        auto out = Behavior<T>::zeros(sc_);
        for (int x = 1; x <= sc_.x_count; ++x)
            for (int y = 1; y <= sc_.y_count; ++y) {
                T corner(1);
                for (int a = 1; a < A; ++a) corner -= c[alice_index(a, x)];
                for (int b = 1; b < B; ++b) corner -= c[bob_index(b, y)];
                for (int a = 1; a < A; ++a)
                    for (int b = 1; b < B; ++b) {
                        const T& j = c[joint_index(a, b, x, y)];
                        out(a, b, x, y) = j;
                        corner += j;
                    }
                for (int a = 1; a < A; ++a) {
                    T v = c[alice_index(a, x)];
                    for (int b = 1; b < B; ++b) v -= c[joint_index(a, b, x, y)];
                    out(a, B, x, y) = v;
                }
                for (int b = 1; b < B; ++b) {
                    T v = c[bob_index(b, y)];
                    for (int a = 1; a < A; ++a) v -= c[joint_index(a, b, x, y)];
                    out(A, b, x, y) = v;
                }
                out(A, B, x, y) = corner;
            }
        return out;
    }

    /// Writes a p-space functional restricted to the subspace as g . coords + offset.
    std::pair<std::vector<Rational>, Rational> functional_in_coordinates(const std::vector<Rational>& coeffs) const {
        if (coeffs.size() != sc_.size()) throw StructuralError("functional has wrong size");
        auto eval = [&](const std::vector<Rational>& c) {
            const auto p = from_coordinates(c);
            Rational s = 0;
            for (std::size_t i = 0; i < coeffs.size(); ++i)
                if (coeffs[i] != 0) s += coeffs[i] * p.table()[i];
            return s;
        };
        std::vector<Rational> point(dimension(), Rational(0));
        const Rational offset = eval(point);
        std::vector<Rational> g(dimension());
        for (std::size_t i = 0; i < dimension(); ++i) {
            point[i] = 1;
            g[i] = eval(point) - offset;
            point[i] = 0;
        }
        return {std::move(g), offset};
    }

    /// p-space coefficients of the functional p -> g . coords(p).
    std::vector<Rational> functional_in_table(const std::vector<Rational>& g) const {
        if (g.size() != dimension()) throw StructuralError("coordinate functional has wrong dimension");
        std::vector<Rational> c(sc_.size(), Rational(0));
        for (int x = 1; x <= sc_.x_count; ++x)
            for (int a = 1; a < sc_.a_count; ++a) {
                const Rational& w = g[alice_index(a, x)];
                if (w == 0) continue;
                for (int b = 1; b <= sc_.b_count; ++b) c[sc_.index(a, b, x, 1)] += w;
            }
        for (int y = 1; y <= sc_.y_count; ++y)
            for (int b = 1; b < sc_.b_count; ++b) {
                const Rational& w = g[bob_index(b, y)];
                if (w == 0) continue;
                for (int a = 1; a <= sc_.a_count; ++a) c[sc_.index(a, b, 1, y)] += w;
            }
        for (int x = 1; x <= sc_.x_count; ++x)
            for (int y = 1; y <= sc_.y_count; ++y)
                for (int a = 1; a < sc_.a_count; ++a)
                    for (int b = 1; b < sc_.b_count; ++b) c[sc_.index(a, b, x, y)] += g[joint_index(a, b, x, y)];
        return c;
    }

    /// Inequality g . coords <= bound, written in canonical p-space form.
    Inequality inequality_from_coordinates(const std::vector<Rational>& g, const Rational& bound) const {
        return Inequality(sc_, functional_in_table(g), bound).normalized();
    }

    /// Canonical representative of an inequality modulo the subspace's equalities:
    /// sense <=, integer coefficients, gcd 1.
    Inequality canonical(const Inequality& ineq) const {
        const Inequality le = ineq.as_less_equal();
        auto [g, offset] = functional_in_coordinates(le.coeffs);
        Inequality out = inequality_from_coordinates(g, le.bound - offset);
        out.name = ineq.name;
        return out;
    }

private:
    Scenario sc_;
    int alice_ = 0, bob_ = 0, joint_ = 0;
};

/// Rationalizes a float behavior through its no-signalling coordinates, so the result is
/// exactly normalized and no-signalling. Lossy; throws if rounding pushes an entry below zero.
inline RationalBehavior rationalize_behavior(const FloatBehavior& b, std::int64_t max_den = 1'000'000'000) {
    const NsCoordinates cg(b.scenario());
    std::vector<Rational> exact;
    for (double c : cg.to_coordinates(b)) exact.push_back(best_rational(c, max_den));
    RationalBehavior out = cg.from_coordinates(exact);
    for (const auto& v : out.table())
        if (v < 0) throw PreconditionError("rationalized behavior has a negative entry; raise max_den");
    return out;
}

}  // namespace lfgeo
