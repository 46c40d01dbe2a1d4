#pragma once

#include <boost/dynamic_bitset.hpp>

#include <cstddef>
#include <utility>
#include <vector>

#include "lfgeo/error.hpp"
#include "lfgeo/rational.hpp"

namespace lfgeo::dd {

using IntVector = std::vector<Integer>;

inline IntVector primitive(IntVector v) {
    Integer g = 0;
    for (const auto& x : v) g = boost::multiprecision::gcd(g, x);
    if (g > 1)
        for (auto& x : v) x /= g;
    return v;
}

inline IntVector to_integer_row(const std::vector<Rational>& v) {
    const auto prim = primitive_integer_vector(v);
    IntVector out;
    out.reserve(prim.size());
    for (const auto& x : prim) out.push_back(numerator_of(x));
    return out;
}

inline Integer dot(const IntVector& a, const IntVector& b) {
    Integer s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
    return s;
}

/// Indices of a maximal linearly independent subset of rows (greedy, in order).
inline std::vector<std::size_t> independent_rows(const std::vector<IntVector>& rows, std::size_t dim) {
    std::vector<std::vector<Rational>> basis;  // reduced echelon rows
    std::vector<std::size_t> pivots, chosen;
    for (std::size_t r = 0; r < rows.size() && chosen.size() < dim; ++r) {
        std::vector<Rational> v(rows[r].begin(), rows[r].end());
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (v[pivots[k]] == 0) continue;
            Rational f = v[pivots[k]];
            for (std::size_t j = 0; j < dim; ++j)
                if (basis[k][j] != 0) v[j] -= f * basis[k][j];
        }
        std::size_t p = dim;
        for (std::size_t j = 0; j < dim; ++j)
            if (v[j] != 0) {
                p = j;
                break;
            }
        if (p == dim) continue;
        Rational inv = 1 / v[p];
        for (auto& x : v) x *= inv;
        for (auto& b : basis)
            if (b[p] != 0) {
                Rational f = b[p];
                for (std::size_t j = 0; j < dim; ++j) b[j] -= f * v[j];
            }
        basis.push_back(std::move(v));
        pivots.push_back(p);
        chosen.push_back(r);
    }
    return chosen;
}

/// Extreme rays of the pointed cone { z : rows[i] . z >= 0 } by the double description
/// method with the combinatorial adjacency test. Throws if the cone is not pointed or the
/// ray count exceeds `max_rays`.
inline std::vector<IntVector> extreme_rays(const std::vector<IntVector>& rows, std::size_t max_rays = 2'000'000) {
    if (rows.empty()) throw PreconditionError("double description needs at least one constraint");
    const std::size_t d = rows.front().size();
    const std::size_t m = rows.size();
    const auto init = independent_rows(rows, d);
    if (init.size() != d) throw PreconditionError("cone is not pointed (constraint matrix rank deficient)");

    // Inverse of the initial square system; its columns are the initial rays.
    std::vector<std::vector<Rational>> aug(d, std::vector<Rational>(2 * d, Rational(0)));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) aug[i][j] = Rational(rows[init[i]][j]);
        aug[i][d + i] = 1;
    }
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        while (aug[piv][col] == 0) ++piv;
        std::swap(aug[piv], aug[col]);
        Rational inv = 1 / aug[col][col];
        for (auto& x : aug[col]) x *= inv;
        for (std::size_t i = 0; i < d; ++i)
            if (i != col && aug[i][col] != 0) {
                Rational f = aug[i][col];
                for (std::size_t j = 0; j < 2 * d; ++j) aug[i][j] -= f * aug[col][j];
            }
    }

    struct Ray {
        IntVector z;
        boost::dynamic_bitset<> zeros;
    };
    std::vector<Ray> rays;
    std::vector<bool> processed(m, false);
    for (std::size_t i : init) processed[i] = true;
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<Rational> col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = aug[i][d + j];
        Ray r{to_integer_row(col), boost::dynamic_bitset<>(m)};
        for (std::size_t k = 0; k < d; ++k)
            if (k != j) r.zeros.set(init[k]);
        rays.push_back(std::move(r));
    }

    for (std::size_t h = 0; h < m; ++h) {
        if (processed[h]) continue;
        processed[h] = true;
        std::vector<Integer> s(rays.size());
        std::vector<std::size_t> pos, neg, zero;
        for (std::size_t k = 0; k < rays.size(); ++k) {
            s[k] = dot(rows[h], rays[k].z);
            if (s[k] > 0)
                pos.push_back(k);
            else if (s[k] < 0)
                neg.push_back(k);
            else
                zero.push_back(k);
        }
        if (neg.empty()) {
            for (std::size_t k : zero) rays[k].zeros.set(h);
            continue;
        }
        std::vector<Ray> next;
        next.reserve(pos.size() + zero.size());
        for (std::size_t k : pos) next.push_back(rays[k]);
        for (std::size_t k : zero) {
            next.push_back(rays[k]);
            next.back().zeros.set(h);
        }
        for (std::size_t p : pos)
            for (std::size_t n : neg) {
                boost::dynamic_bitset<> common = rays[p].zeros & rays[n].zeros;
                if (common.count() + 2 < d) continue;
                bool adjacent = true;
                for (std::size_t k = 0; k < rays.size() && adjacent; ++k) {
                    if (k == p || k == n) continue;
                    if (common.is_subset_of(rays[k].zeros)) adjacent = false;
                }
                if (!adjacent) continue;
                IntVector z(d);
                for (std::size_t i = 0; i < d; ++i) z[i] = s[p] * rays[n].z[i] - s[n] * rays[p].z[i];
                common.set(h);
                next.push_back(Ray{primitive(std::move(z)), std::move(common)});
                if (next.size() > max_rays) throw CapExceeded("double description ray count exceeds cap");
            }
        rays = std::move(next);
    }
    std::vector<IntVector> out;
    out.reserve(rays.size());
    for (auto& r : rays) out.push_back(std::move(r.z));
    return out;
}

/// A half-space normal . v <= offset.
struct HalfSpace {
    std::vector<Rational> normal;
    Rational offset;
};

/// Facets of the convex hull of full-dimensional points.
inline std::vector<HalfSpace> hull_facets(const std::vector<std::vector<Rational>>& points) {
    if (points.empty()) throw PreconditionError("hull of an empty point set");
    const std::size_t dim = points.front().size();
    // (b, -g) . (1, v) >= 0  for every point.
    std::vector<IntVector> rows;
    rows.reserve(points.size());
    for (const auto& p : points) {
        std::vector<Rational> r;
        r.reserve(dim + 1);
        r.emplace_back(1);
        r.insert(r.end(), p.begin(), p.end());
        rows.push_back(to_integer_row(r));
    }
    std::vector<HalfSpace> out;
    for (const auto& z : extreme_rays(rows)) {
        HalfSpace hs;
        hs.offset = Rational(z[0]);
        hs.normal.reserve(dim);
        for (std::size_t i = 1; i <= dim; ++i) hs.normal.emplace_back(-z[i]);
        out.push_back(std::move(hs));
    }
    return out;
}

/// Vertices of the bounded, full-dimensional polytope { v : normal_i . v <= offset_i }.
inline std::vector<std::vector<Rational>> polytope_vertices(const std::vector<HalfSpace>& halfspaces) {
    if (halfspaces.empty()) throw PreconditionError("vertex enumeration needs constraints");
    const std::size_t dim = halfspaces.front().normal.size();
    // (t, v):  t * offset - normal . v >= 0,  t >= 0.
    std::vector<IntVector> rows;
    for (const auto& hs : halfspaces) {
        std::vector<Rational> r;
        r.push_back(hs.offset);
        for (const auto& g : hs.normal) r.emplace_back(-g);
        rows.push_back(to_integer_row(r));
    }
    IntVector t(dim + 1, Integer(0));
    t[0] = 1;
    rows.push_back(t);
    std::vector<std::vector<Rational>> out;
    for (const auto& z : extreme_rays(rows)) {
        if (z[0] == 0) throw PreconditionError("polytope is unbounded");
        std::vector<Rational> v;
        v.reserve(dim);
        for (std::size_t i = 1; i <= dim; ++i) v.emplace_back(z[i], z[0]);
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace lfgeo::dd
