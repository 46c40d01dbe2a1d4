#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "lfgeo/error.hpp"
#include "lfgeo/rational.hpp"

namespace lfgeo::lp {

enum class Status { Optimal, Infeasible, Unbounded };

/// Outcome of `maximize c.x  s.t.  A x = b, x >= 0`.
///
/// Optimal:    `x` attains `value`; `dual` satisfies  dual^T A >= c  and  dual.b == value.
/// Infeasible: `farkas` satisfies  farkas^T A <= 0  and  farkas.b > 0.
/// Unbounded:  no extra data.
struct Result {
    Status status = Status::Infeasible;
    Rational value = 0;
    std::vector<Rational> x;
    std::vector<Rational> dual;
    std::vector<Rational> farkas;
    std::size_t pivots = 0;
};

/// Dense two-phase tableau simplex over exact rationals with Bland's rule.
class Tableau {
public:
    Tableau(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b)
        : m_(A.size()), n_(A.empty() ? 0 : A.front().size()) {
        if (b.size() != m_) throw StructuralError("LP rhs size mismatch");
        cols_ = n_ + m_ + 1;
        t_.assign(m_, std::vector<Rational>(cols_, Rational(0)));
        flipped_.assign(m_, false);
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            if (A[i].size() != n_) throw StructuralError("LP matrix is ragged");
            flipped_[i] = b[i] < 0;
            for (std::size_t j = 0; j < n_; ++j)
                if (A[i][j] != 0) t_[i][j] = flipped_[i] ? Rational(-A[i][j]) : A[i][j];
            t_[i][n_ + i] = 1;
            t_[i][cols_ - 1] = flipped_[i] ? Rational(-b[i]) : b[i];
            basis_[i] = n_ + i;
        }
    }

    Result maximize(const std::vector<Rational>& c) {
        if (c.size() != n_) throw StructuralError("LP objective size mismatch");
        Result res;

        // Phase 1: maximize -sum(artificials).
        obj_.assign(cols_, Rational(0));
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (t_[i][j] != 0) obj_[j] -= t_[i][j];
        for (std::size_t i = 0; i < m_; ++i) obj_[cols_ - 1] -= t_[i][cols_ - 1];
        if (!iterate(n_ + m_, res.pivots)) throw InternalError("phase 1 reported unbounded");

        if (obj_[cols_ - 1] < 0) {
            res.status = Status::Infeasible;
            res.farkas.resize(m_);
            for (std::size_t i = 0; i < m_; ++i) {
                Rational y = obj_[n_ + i] - 1;
                res.farkas[i] = flipped_[i] ? y : Rational(-y);
            }
            return res;
        }

        // Drive artificials out of the basis where possible; rows where that fails are redundant.
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            for (std::size_t j = 0; j < n_; ++j)
                if (t_[i][j] != 0) {
                    pivot(i, j);
                    ++res.pivots;
                    break;
                }
        }

        // Phase 2.
        obj_.assign(cols_, Rational(0));
        for (std::size_t j = 0; j < n_; ++j) obj_[j] = -c[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t bj = basis_[i];
            if (bj >= n_ || c[bj] == 0) continue;
            const Rational cb = c[bj];
            for (std::size_t j = 0; j < cols_; ++j)
                if (t_[i][j] != 0) obj_[j] += cb * t_[i][j];
        }
        if (!iterate(n_, res.pivots)) {
            res.status = Status::Unbounded;
            return res;
        }
        res.status = Status::Optimal;
        res.value = obj_[cols_ - 1];
        res.x.assign(n_, Rational(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) res.x[basis_[i]] = t_[i][cols_ - 1];
        res.dual.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) res.dual[i] = flipped_[i] ? Rational(-obj_[n_ + i]) : obj_[n_ + i];
        return res;
    }

private:
    // Runs Bland pivots with entering columns restricted to [0, limit). False when unbounded.
    bool iterate(std::size_t limit, std::size_t& pivots) {
        while (true) {
            std::size_t enter = limit;
            for (std::size_t j = 0; j < limit; ++j)
                if (obj_[j] < 0) {
                    enter = j;
                    break;
                }
            if (enter == limit) return true;
            std::size_t leave = m_;
            Rational best_ratio;
            for (std::size_t i = 0; i < m_; ++i) {
                if (t_[i][enter] <= 0) continue;
                Rational ratio = t_[i][cols_ - 1] / t_[i][enter];
                if (leave == m_ || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = std::move(ratio);
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
            ++pivots;
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        std::vector<Rational>& row = t_[r];
        const Rational inv = 1 / row[c];
        nz_.clear();
        for (std::size_t j = 0; j < cols_; ++j)
            if (row[j] != 0) {
                row[j] *= inv;
                nz_.push_back(j);
            }
        auto eliminate = [&](std::vector<Rational>& target) {
            if (target[c] == 0) return;
            const Rational f = target[c];
            for (std::size_t j : nz_) target[j] -= f * row[j];
        };
        for (std::size_t i = 0; i < m_; ++i)
            if (i != r) eliminate(t_[i]);
        eliminate(obj_);
        basis_[r] = c;
    }

    std::size_t m_, n_, cols_ = 0;
    std::vector<std::vector<Rational>> t_;
    std::vector<Rational> obj_;
    std::vector<std::size_t> basis_;
    std::vector<bool> flipped_;
    std::vector<std::size_t> nz_;
};

/// maximize c.x  s.t.  A x = b, x >= 0.
inline Result maximize(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b,
                       const std::vector<Rational>& c) {
    Tableau t(A, b);
    return t.maximize(c);
}

/// Feasibility of A x = b, x >= 0 (objective zero). Infeasible results carry a Farkas vector.
inline Result feasible(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b) {
    const std::size_t n = A.empty() ? 0 : A.front().size();
    return maximize(A, b, std::vector<Rational>(n, Rational(0)));
}

/// Outcome of a support query: whether g.x <= h is implied, and otherwise a point x of the
/// system with g.x > h (the maximizer when one exists; empty if the system is unbounded in g).
struct Support {
    bool implied = false;
    std::vector<Rational> x;
};

inline Support support_exact(const std::vector<std::vector<Rational>>& rows, const std::vector<Rational>& rhs,
                             const std::vector<Rational>& g, const Rational& h) {
    const std::size_t n = g.size();
    const std::size_t m = rows.size();
    Support out;
    if (m == 0) {
        out.implied = std::all_of(g.begin(), g.end(), [](const Rational& v) { return v == 0; }) && 0 <= h;
        if (!out.implied && std::all_of(g.begin(), g.end(), [](const Rational& v) { return v == 0; }))
            out.x.assign(n, Rational(0));
        return out;
    }
    std::vector<std::vector<Rational>> A(n, std::vector<Rational>(m, Rational(0)));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (rows[i][k] != 0) A[k][i] = rows[i][k];
    std::vector<Rational> cost(m);
    for (std::size_t i = 0; i < m; ++i) cost[i] = -rhs[i];
    Result r = maximize(A, g, cost);
    if (r.status == Status::Infeasible) return out;
    if (r.status == Status::Unbounded) throw InternalError("redundancy dual unbounded: primal system infeasible");
    out.implied = -r.value <= h;
    if (!out.implied) {
        out.x.resize(n);
        for (std::size_t k = 0; k < n; ++k) out.x[k] = -r.dual[k];
    }
    return out;
}

/// Exact-LP version of `implied_by`.
inline bool implied_by_exact(const std::vector<std::vector<Rational>>& rows, const std::vector<Rational>& rhs,
                             const std::vector<Rational>& g, const Rational& h) {
    return support_exact(rows, rhs, g, h).implied;
}

namespace detail {

/// Floating-point two-phase simplex for  min c.u  s.t.  M u = g, u >= 0  (M is n x m).
/// Only the final basis is used; callers certify it exactly. Returns the basic column per
/// row, or an empty vector when the solve fails or ends with an artificial in the basis.
inline std::vector<std::size_t> float_basis(const std::vector<std::vector<double>>& M, const std::vector<double>& g,
                                            const std::vector<double>& c) {
    const std::size_t n = M.size();
    const std::size_t m = c.size();
    const std::size_t cols = m + n + 1;
    constexpr double eps = 1e-9;
    std::vector<std::vector<double>> t(n, std::vector<double>(cols, 0.0));
    std::vector<std::size_t> basis(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sgn = g[i] < 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < m; ++j) t[i][j] = sgn * M[i][j];
        t[i][m + i] = 1.0;
        t[i][cols - 1] = sgn * g[i];
        basis[i] = m + i;
    }
    std::vector<double> obj(cols, 0.0);
    auto pivot = [&](std::size_t r, std::size_t col) {
        const double inv = 1.0 / t[r][col];
        for (auto& v : t[r]) v *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == r) continue;
            const double f = t[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[r][j];
        }
        const double f = obj[col];
        if (f != 0.0)
            for (std::size_t j = 0; j < cols; ++j) obj[j] -= f * t[r][j];
        basis[r] = col;
    };
    // Reduced-cost row for minimization: entering columns have obj[j] < -eps.
    auto run = [&](std::size_t limit) {
        std::size_t degenerate = 0;
        for (std::size_t iter = 0; iter < 50 * (n + m); ++iter) {
            const bool bland = degenerate > 2 * n;
            std::size_t enter = limit;
            double best = -eps;
            for (std::size_t j = 0; j < limit; ++j)
                if (obj[j] < best) {
                    enter = j;
                    if (bland) break;
                    best = obj[j];
                }
            if (enter == limit) return true;
            std::size_t leave = n;
            double ratio = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (t[i][enter] <= eps) continue;
                const double r = t[i][cols - 1] / t[i][enter];
                if (leave == n || r < ratio - eps || (r <= ratio + eps && basis[i] < basis[leave])) {
                    leave = i;
                    ratio = r;
                }
            }
            if (leave == n) return false;
            degenerate = ratio <= eps ? degenerate + 1 : 0;
            pivot(leave, enter);
        }
        return false;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (j < m || j == cols - 1) obj[j] -= t[i][j];
    if (!run(m + n) || obj[cols - 1] < -1e-7) return {};
    for (std::size_t i = 0; i < n; ++i) {
        if (basis[i] < m) continue;
        std::size_t enter = m;
        for (std::size_t j = 0; j < m; ++j)
            if (std::abs(t[i][j]) > 1e-7) {
                enter = j;
                break;
            }
        if (enter == m) return {};
        pivot(i, enter);
    }
    std::fill(obj.begin(), obj.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) obj[j] = c[j];
    for (std::size_t i = 0; i < n; ++i) {
        const double cb = c[basis[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) obj[j] -= cb * t[i][j];
    }
    if (!run(m)) return {};
    return basis;
}

/// Solves the square system S z = r exactly; empty when S is singular. Rows are scaled to
/// integers, eliminated fraction-free (Bareiss), then back-substituted.
inline std::vector<Rational> solve_square(const std::vector<std::vector<Rational>>& S, const std::vector<Rational>& r) {
    const std::size_t n = S.size();
    std::vector<std::vector<Integer>> M(n, std::vector<Integer>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        Integer l = denominator_of(r[i]);
        for (const auto& v : S[i]) l = boost::multiprecision::lcm(l, denominator_of(v));
        for (std::size_t j = 0; j < n; ++j) M[i][j] = numerator_of(S[i][j]) * (l / denominator_of(S[i][j]));
        M[i][n] = numerator_of(r[i]) * (l / denominator_of(r[i]));
    }
    Integer prev = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && M[p][k] == 0) ++p;
        if (p == n) return {};
        std::swap(M[p], M[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j <= n; ++j) M[i][j] = (M[k][k] * M[i][j] - M[i][k] * M[k][j]) / prev;
            M[i][k] = 0;
        }
        prev = M[k][k];
    }
    std::vector<Rational> z(n);
    for (std::size_t i = n; i-- > 0;) {
        Rational acc(M[i][n]);
        for (std::size_t j = i + 1; j < n; ++j)
            if (M[i][j] != 0) acc -= Rational(M[i][j]) * z[j];
        z[i] = acc / Rational(M[i][i]);
    }
    return z;
}

}  // namespace detail

/// Row storage for repeated redundancy questions against subsets of one system.
struct RowSet {
    std::vector<std::vector<Rational>> rows;
    std::vector<Rational> rhs;
    std::vector<std::vector<double>> rows_d;
    std::vector<double> rhs_d;

    RowSet(std::vector<std::vector<Rational>> r, std::vector<Rational> b) : rows(std::move(r)), rhs(std::move(b)) {
        rows_d.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::vector<double> d(rows[i].size());
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = to_double(rows[i][k]);
            rows_d.push_back(std::move(d));
            rhs_d.push_back(to_double(rhs[i]));
        }
    }
};

struct ImpliedStats {
    std::size_t calls = 0;
    std::size_t exact_fallbacks = 0;
};

/// Decides whether `g.x <= h` is implied by the rows of `set` listed in `active` (free x).
/// A floating-point simplex proposes an optimal basis for  max g.x  over those rows; the
/// verdict is then certified exactly from that basis (dual multipliers u >= 0 with
/// u.rows = g, and the primal vertex feasible for every active row). When the certificate
/// does not check out, the exact LP decides. Assumes the system is feasible.
inline Support support(const RowSet& set, const std::vector<std::size_t>& active, const std::vector<Rational>& g,
                       const Rational& h, ImpliedStats* stats = nullptr) {
    const std::size_t n = g.size();
    const std::size_t m = active.size();
    if (stats) ++stats->calls;
    auto exact = [&] {
        if (stats) ++stats->exact_fallbacks;
        std::vector<std::vector<Rational>> rows;
        std::vector<Rational> rhs;
        rows.reserve(m);
        for (std::size_t i : active) {
            rows.push_back(set.rows[i]);
            rhs.push_back(set.rhs[i]);
        }
        return support_exact(rows, rhs, g, h);
    };
    if (m < n) return exact();
    std::vector<std::vector<double>> M(n, std::vector<double>(m));
    std::vector<double> gd(n), cd(m);
    for (std::size_t c = 0; c < m; ++c) {
        const auto& row = set.rows_d[active[c]];
        for (std::size_t k = 0; k < n; ++k) M[k][c] = row[k];
        cd[c] = set.rhs_d[active[c]];
    }
    for (std::size_t k = 0; k < n; ++k) gd[k] = to_double(g[k]);
    const auto basis = detail::float_basis(M, gd, cd);
    if (basis.size() != n) return exact();

    // Float estimate of the optimum picks which side to certify.
    double estimate = 0;
    {
        std::vector<std::vector<double>> Bt(n, std::vector<double>(n + 1));
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < n; ++k) Bt[k][r] = set.rows_d[active[basis[r]]][k];
        }
        for (std::size_t k = 0; k < n; ++k) Bt[k][n] = gd[k];
        // Partial-pivot Gaussian elimination for the float multipliers.
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t p = c;
            for (std::size_t i = c + 1; i < n; ++i)
                if (std::abs(Bt[i][c]) > std::abs(Bt[p][c])) p = i;
            std::swap(Bt[p], Bt[c]);
            if (Bt[c][c] == 0.0) return exact();
            for (std::size_t i = c + 1; i < n; ++i) {
                const double f = Bt[i][c] / Bt[c][c];
                if (f == 0.0) continue;
                for (std::size_t j = c; j <= n; ++j) Bt[i][j] -= f * Bt[c][j];
            }
        }
        std::vector<double> ud(n);
        for (std::size_t i = n; i-- > 0;) {
            double acc = Bt[i][n];
            for (std::size_t j = i + 1; j < n; ++j) acc -= Bt[i][j] * ud[j];
            ud[i] = acc / Bt[i][i];
        }
        for (std::size_t r = 0; r < n; ++r) estimate += ud[r] * set.rhs_d[active[basis[r]]];
    }
    if (estimate <= to_double(h) + 1e-7) {
        // Redundant side: exact multipliers u >= 0 with u.rows = g and u.rhs <= h.
        std::vector<std::vector<Rational>> ABt(n, std::vector<Rational>(n));
        std::vector<Rational> bB(n);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t i = active[basis[r]];
            bB[r] = set.rhs[i];
            for (std::size_t k = 0; k < n; ++k) ABt[k][r] = set.rows[i][k];
        }
        const auto u = detail::solve_square(ABt, g);
        if (u.empty()) return exact();
        Rational value = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (u[r] < 0) return exact();
            value += u[r] * bB[r];
        }
        if (value <= h) return Support{true, {}};
        return exact();
    }
    std::vector<std::vector<Rational>> AB(n);
    std::vector<Rational> bB(n);
    for (std::size_t r = 0; r < n; ++r) {
        AB[r] = set.rows[active[basis[r]]];
        bB[r] = set.rhs[active[basis[r]]];
    }
    const auto x = detail::solve_square(AB, bB);
    if (x.empty()) return exact();
    {
        Rational gx = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (g[k] != 0) gx += g[k] * x[k];
        if (gx <= h) return exact();
    }
    // A feasible x attains value > h, so the inequality is not implied. Rows whose float slack
    // exceeds a bound on the rounding error are skipped; the rest are checked exactly.
    std::vector<double> xd(n);
    for (std::size_t k = 0; k < n; ++k) xd[k] = to_double(x[k]);
    for (std::size_t c = 0; c < m; ++c) {
        const std::size_t i = active[c];
        double approx = 0, magnitude = std::abs(set.rhs_d[i]);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = set.rows_d[i][k] * xd[k];
            approx += t;
            magnitude += std::abs(t);
        }
        if (approx < set.rhs_d[i] - 1e-9 * (magnitude + 1.0)) continue;
        Rational lhs = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (set.rows[i][k] != 0) lhs += set.rows[i][k] * x[k];
        if (lhs > set.rhs[i]) return exact();
    }
    return Support{false, x};
}

inline bool implied_by(const RowSet& set, const std::vector<std::size_t>& active, const std::vector<Rational>& g,
                       const Rational& h, ImpliedStats* stats = nullptr) {
    return support(set, active, g, h, stats).implied;
}

/// Single-shot form of the above over all rows.
inline bool implied_by(const std::vector<std::vector<Rational>>& rows, const std::vector<Rational>& rhs,
                       const std::vector<Rational>& g, const Rational& h) {
    const RowSet set(rows, rhs);
    std::vector<std::size_t> active(rows.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
    return implied_by(set, active, g, h);
}

}  // namespace lfgeo::lp
