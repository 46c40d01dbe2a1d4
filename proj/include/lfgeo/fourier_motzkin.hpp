#pragma once

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lfgeo/double_description.hpp"
#include "lfgeo/error.hpp"
#include "lfgeo/rational.hpp"
#include "lfgeo/simplex.hpp"

namespace lfgeo::fm {

/// Linear system over variables v = (kept..., eliminated...). The first `keep` columns
/// survive the projection.
struct LinearSystem {
    std::size_t keep = 0;
    std::size_t columns = 0;
    std::vector<std::vector<Rational>> eq_rows;  // row . v == rhs
    std::vector<Rational> eq_rhs;
    std::vector<std::vector<Rational>> le_rows;  // row . v <= rhs
    std::vector<Rational> le_rhs;
};

struct Options {
    std::size_t max_rows = 500'000;
    bool prune_each_round = true;
    /// History-based shortcuts. Only sound without intermediate pruning.
    bool chernikov = false;
    bool rank_test = false;
    /// Optional point satisfying every inequality strictly (and the equalities), over all
    /// columns. Enables output-sensitive pruning.
    std::vector<Rational> interior;
    /// Called after each elimination round with (columns left to eliminate, rows before
    /// pruning, rows after pruning).
    std::function<void(std::size_t, std::size_t, std::size_t)> on_round;
};

struct Stats {
    std::size_t eliminated_by_equalities = 0;
    std::size_t rounds = 0;
    std::size_t peak_rows = 0;
    std::size_t lp_calls = 0;
    std::size_t exact_fallbacks = 0;
    std::size_t degenerate_rays = 0;
    std::size_t rank_dropped = 0;
};

namespace detail {

struct Row {
    dd::IntVector a;  // coefficients over the current columns
    Integer rhs;
    boost::dynamic_bitset<> history;
};

inline void make_primitive(Row& r) {
    Integer g = boost::multiprecision::abs(r.rhs);
    for (const auto& x : r.a) g = boost::multiprecision::gcd(g, x);
    if (g > 1) {
        for (auto& x : r.a) x /= g;
        r.rhs /= g;
    }
}

inline bool all_zero(const dd::IntVector& a, std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i)
        if (a[i] != 0) return false;
    return true;
}

// Removes exact duplicates (keeping the earliest) and trivially true rows.
// Throws if a row reads 0 <= negative.
inline void dedupe(std::vector<Row>& rows) {
    std::map<std::pair<dd::IntVector, Integer>, std::size_t> seen;
    std::vector<Row> out;
    out.reserve(rows.size());
    for (auto& r : rows) {
        if (all_zero(r.a, 0, r.a.size())) {
            if (r.rhs < 0) throw InternalError("projection produced an infeasible row");
            continue;
        }
        auto key = std::make_pair(r.a, r.rhs);
        auto it = seen.find(key);
        if (it != seen.end()) {
            // Keep the smaller history so Chernikov's rule stays as permissive as possible.
            if (r.history.count() < out[it->second].history.count()) out[it->second].history = r.history;
            continue;
        }
        seen.emplace(std::move(key), out.size());
        out.push_back(std::move(r));
    }
    rows = std::move(out);
}

// Sequential LP redundancy removal over the first `width` columns: each row is tested
// against the rows still kept.
inline void prune(std::vector<Row>& rows, std::size_t width, Stats& stats) {
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    a.reserve(rows.size());
    for (const auto& r : rows) {
        a.emplace_back(r.a.begin(), r.a.begin() + static_cast<std::ptrdiff_t>(width));
        b.emplace_back(r.rhs);
    }
    const lp::RowSet set(std::move(a), std::move(b));
    std::vector<bool> keep(rows.size(), true);
    lp::ImpliedStats is;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::size_t> active;
        active.reserve(rows.size());
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (j != i && keep[j]) active.push_back(j);
        if (lp::implied_by(set, active, set.rows[i], set.rhs[i], &is)) keep[i] = false;
    }
    stats.lp_calls += is.calls;
    stats.exact_fallbacks += is.exact_fallbacks;
    std::vector<Row> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (keep[i]) out.push_back(std::move(rows[i]));
    rows = std::move(out);
}

// Rank of an integer matrix modulo the prime 2^61 - 1 (never exceeds the rational rank).
inline std::size_t rank_mod_p(std::vector<std::vector<std::uint64_t>> M) {
    constexpr std::uint64_t p = (std::uint64_t{1} << 61) - 1;
    auto mul = [](std::uint64_t a, std::uint64_t b) {
        const unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
        std::uint64_t lo = static_cast<std::uint64_t>(r & p), hi = static_cast<std::uint64_t>(r >> 61);
        std::uint64_t s = lo + hi;
        return s >= p ? s - p : s;
    };
    auto power = [&](std::uint64_t b, std::uint64_t e) {
        std::uint64_t r = 1;
        while (e) {
            if (e & 1) r = mul(r, b);
            b = mul(b, b);
            e >>= 1;
        }
        return r;
    };
    const std::size_t rows = M.size(), cols = rows ? M[0].size() : 0;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && M[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(M[piv], M[rank]);
        const std::uint64_t inv = power(M[rank][c], p - 2);
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (M[i][c] == 0) continue;
            const std::uint64_t f = mul(M[i][c], inv);
            for (std::size_t j = c; j < cols; ++j) {
                const std::uint64_t t = mul(f, M[rank][j]);
                M[i][j] = M[i][j] >= t ? M[i][j] - t : M[i][j] + p - t;
            }
        }
        ++rank;
    }
    return rank;
}

inline std::size_t rank_exact(const std::vector<std::vector<Integer>>& A) {
    std::vector<std::vector<Rational>> M;
    for (const auto& r : A) M.emplace_back(r.begin(), r.end());
    const std::size_t rows = M.size(), cols = rows ? M[0].size() : 0;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && M[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(M[piv], M[rank]);
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (M[i][c] == 0) continue;
            const Rational f = M[i][c] / M[rank][c];
            for (std::size_t j = c; j < cols; ++j) M[i][j] -= f * M[rank][j];
        }
        ++rank;
    }
    return rank;
}

// A combined row can only be irredundant when its multiplier vector is an extreme ray of the
// projection cone, i.e. the history rows restricted to the eliminated columns have rank
// |history| - 1.
inline bool extreme_combination(const boost::dynamic_bitset<>& history, const std::vector<dd::IntVector>& initial,
                                const std::vector<std::size_t>& eliminated) {
    const std::size_t h = history.count();
    if (h <= 2) return true;
    constexpr std::uint64_t p = (std::uint64_t{1} << 61) - 1;
    const Integer P(p);
    std::vector<std::vector<std::uint64_t>> Mp;
    std::vector<std::vector<Integer>> M;
    for (std::size_t i = history.find_first(); i != boost::dynamic_bitset<>::npos; i = history.find_next(i)) {
        std::vector<std::uint64_t> rp;
        std::vector<Integer> r;
        for (std::size_t c : eliminated) {
            Integer v = initial[i][c] % P;
            if (v < 0) v += P;
            rp.push_back(v.convert_to<std::uint64_t>());
            r.push_back(initial[i][c]);
        }
        Mp.push_back(std::move(rp));
        M.push_back(std::move(r));
    }
    if (rank_mod_p(std::move(Mp)) == h - 1) return true;
    return rank_exact(M) == h - 1;
}

// Clarkson's output-sensitive redundancy removal. `z` must satisfy every row strictly. Each
// LP runs over the rows already known to be facets plus the candidate (relaxed by 1 so the
// LP stays bounded); a non-implied candidate yields a point beyond it, and shooting the ray
// from z to that point certifies the first facet it crosses. Returns false (rows untouched)
// when z is not strictly interior.
inline bool prune_clarkson(std::vector<Row>& rows, std::size_t width, const std::vector<Rational>& z, Stats& stats) {
    const std::size_t m = rows.size();
    std::vector<Rational> slack(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rational s = Rational(rows[i].rhs);
        for (std::size_t k = 0; k < width; ++k)
            if (rows[i].a[k] != 0) s -= Rational(rows[i].a[k]) * z[k];
        if (s <= 0) return false;
        slack[i] = std::move(s);
    }
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    a.reserve(2 * m);
    for (const auto& r : rows) {
        a.emplace_back(r.a.begin(), r.a.begin() + static_cast<std::ptrdiff_t>(width));
        b.emplace_back(r.rhs);
    }
    for (std::size_t i = 0; i < m; ++i) {
        a.push_back(a[i]);
        b.push_back(b[i] + 1);
    }
    const lp::RowSet set(std::move(a), std::move(b));
    std::vector<double> zd(width);
    for (std::size_t k = 0; k < width; ++k) zd[k] = to_double(z[k]);

    enum class State { Unknown, Facet, Redundant };
    std::vector<State> state(m, State::Unknown);
    std::vector<std::size_t> facets;
    lp::ImpliedStats is;

    // First row crossed by the ray z + t (x - z), t in (0, 1]; m if the crossing is not unique.
    auto shoot = [&](const std::vector<Rational>& x) -> std::size_t {
        std::vector<Rational> dir(width);
        std::vector<double> dird(width);
        for (std::size_t k = 0; k < width; ++k) {
            dir[k] = x[k] - z[k];
            dird[k] = to_double(dir[k]);
        }
        // Float screening, then exact comparison of the near-minimal crossings. Rows whose
        // float denominator is not clearly resolved are always compared exactly.
        std::vector<double> td(m, std::numeric_limits<double>::infinity());
        std::vector<bool> unsure(m, false);
        double tmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (state[j] == State::Redundant) continue;
            double den = 0, mag = 0;
            for (std::size_t k = 0; k < width; ++k) {
                const double t = set.rows_d[j][k] * dird[k];
                den += t;
                mag += std::abs(t);
            }
            if (std::abs(den) <= 1e-6 * mag) {
                unsure[j] = true;
                continue;
            }
            if (den < 0) continue;
            td[j] = to_double(slack[j]) / den;
            tmin = std::min(tmin, td[j]);
        }
        std::optional<Rational> best;
        std::size_t arg = m;
        bool tie = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (!unsure[j] && !(td[j] <= tmin * (1 + 1e-6))) continue;
            Rational den = 0;
            for (std::size_t k = 0; k < width; ++k)
                if (set.rows[j][k] != 0) den += set.rows[j][k] * dir[k];
            if (den <= 0) continue;
            Rational t = slack[j] / den;
            if (!best || t < *best) {
                best = std::move(t);
                arg = j;
                tie = false;
            } else if (t == *best) {
                tie = true;
            }
        }
        return tie ? m : arg;
    };

    for (std::size_t i = 0; i < m; ++i) {
        while (state[i] == State::Unknown) {
            std::vector<std::size_t> active = facets;
            active.push_back(m + i);
            const auto sup = lp::support(set, active, set.rows[i], set.rhs[i], &is);
            if (sup.implied) {
                state[i] = State::Redundant;
                break;
            }
            const std::size_t hit = sup.x.empty() ? m : shoot(sup.x);
            if (hit == m) {
                // Degenerate crossing: decide this row against all remaining rows directly.
                ++stats.degenerate_rays;
                std::vector<std::size_t> others;
                for (std::size_t j = 0; j < m; ++j)
                    if (j != i && state[j] != State::Redundant) others.push_back(j);
                if (lp::implied_by(set, others, set.rows[i], set.rhs[i], &is)) {
                    state[i] = State::Redundant;
                } else {
                    state[i] = State::Facet;
                    facets.push_back(i);
                }
                break;
            }
            state[hit] = State::Facet;
            facets.push_back(hit);
        }
    }
    stats.lp_calls += is.calls;
    stats.exact_fallbacks += is.exact_fallbacks;
    std::vector<Row> out;
    for (std::size_t i = 0; i < m; ++i)
        if (state[i] == State::Facet) out.push_back(std::move(rows[i]));
    rows = std::move(out);
    return true;
}

}  // namespace detail

/// Projects { v : eq, le } onto its first `keep` coordinates. Equalities are solved first
/// (pivoting only on eliminated columns), then the remaining eliminated columns are removed
/// by Fourier-Motzkin with LP redundancy pruning after every round. The result is irredundant.
inline std::vector<dd::HalfSpace> project(const LinearSystem& sys, const Options& opt = {}, Stats* stats_out = nullptr) {
    Stats stats;
    const std::size_t n = sys.columns;
    const std::size_t keep = sys.keep;
    if (keep > n) throw StructuralError("projection keeps more columns than exist");

    // Reduced row echelon form of the equalities on eliminated columns.
    std::vector<std::vector<Rational>> eq = sys.eq_rows;
    std::vector<Rational> eq_rhs = sys.eq_rhs;
    std::vector<std::size_t> pivot_col;
    std::vector<std::size_t> pivot_row;
    {
        std::size_t r = 0;
        for (std::size_t c = keep; c < n && r < eq.size(); ++c) {
            std::size_t p = r;
            while (p < eq.size() && eq[p][c] == 0) ++p;
            if (p == eq.size()) continue;
            std::swap(eq[p], eq[r]);
            std::swap(eq_rhs[p], eq_rhs[r]);
            Rational inv = 1 / eq[r][c];
            for (auto& v : eq[r]) v *= inv;
            eq_rhs[r] *= inv;
            for (std::size_t i = 0; i < eq.size(); ++i) {
                if (i == r || eq[i][c] == 0) continue;
                Rational f = eq[i][c];
                for (std::size_t j = 0; j < n; ++j)
                    if (eq[r][j] != 0) eq[i][j] -= f * eq[r][j];
                eq_rhs[i] -= f * eq_rhs[r];
            }
            pivot_col.push_back(c);
            pivot_row.push_back(r);
            ++r;
        }
        for (std::size_t i = r; i < eq.size(); ++i) {
            for (std::size_t j = 0; j < n; ++j)
                if (eq[i][j] != 0)
                    throw PreconditionError("equalities constrain the kept coordinates; project onto their solution set first");
            if (eq_rhs[i] != 0) throw PreconditionError("projection system is infeasible");
        }
    }
    stats.eliminated_by_equalities = pivot_col.size();

    // Column map: kept columns first, then eliminated columns that are still free.
    std::vector<bool> is_pivot(n, false);
    for (std::size_t c : pivot_col) is_pivot[c] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = keep; c < n; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    const std::size_t width0 = keep + free_cols.size();
    auto compress = [&](const std::vector<Rational>& full) {
        std::vector<Rational> out(width0);
        for (std::size_t c = 0; c < keep; ++c) out[c] = full[c];
        for (std::size_t k = 0; k < free_cols.size(); ++k) out[keep + k] = full[free_cols[k]];
        return out;
    };

    // Substitute pivot variables into the inequalities.
    std::vector<detail::Row> rows;
    std::vector<dd::IntVector> initial;  // substituted rows, indexed like the history bits
    const std::size_t m0 = sys.le_rows.size();
    for (std::size_t i = 0; i < m0; ++i) {
        std::vector<Rational> row = sys.le_rows[i];
        Rational rhs = sys.le_rhs[i];
        for (std::size_t k = 0; k < pivot_col.size(); ++k) {
            const std::size_t c = pivot_col[k];
            if (row[c] == 0) continue;
            Rational f = row[c];
            const auto& e = eq[pivot_row[k]];
            for (std::size_t j = 0; j < n; ++j)
                if (e[j] != 0) row[j] -= f * e[j];
            rhs -= f * eq_rhs[pivot_row[k]];
        }
        auto compact = compress(row);
        compact.push_back(rhs);
        auto ints = dd::to_integer_row(compact);
        initial.emplace_back(ints.begin(), ints.end() - 1);
        detail::Row r;
        r.rhs = ints.back();
        ints.pop_back();
        r.a = std::move(ints);
        r.history = boost::dynamic_bitset<>(m0);
        r.history.set(i);
        rows.push_back(std::move(r));
    }
    detail::dedupe(rows);

    std::vector<Rational> z;
    if (!opt.interior.empty()) {
        if (opt.interior.size() != n) throw StructuralError("interior point has the wrong number of columns");
        z = compress(opt.interior);
        // A small generic shift breaks the symmetry of hand-built interior points, which
        // otherwise sends rays through lower-dimensional faces. Strictness is rechecked exactly.
        for (std::size_t k = 0; k < z.size(); ++k) z[k] += Rational(Integer(static_cast<long>((k * k * 7919 + k * 104729) % 997) + 1), Integer(100'000'000));
    }
    auto prune = [&](std::size_t width) {
        if (!z.empty() && detail::prune_clarkson(rows, width, z, stats)) return;
        detail::prune(rows, width, stats);
    };

    std::size_t width = width0;
    std::size_t eliminated = 0;
    std::vector<std::size_t> col_id(width0);  // current position -> column in `initial`
    for (std::size_t c = 0; c < width0; ++c) col_id[c] = c;
    std::vector<std::size_t> gone;            // eliminated columns, as `initial` indices
    while (width > keep) {
        // Pick the column with the fewest generated pairs.
        std::size_t best = width;
        std::size_t best_cost = 0;
        for (std::size_t c = keep; c < width; ++c) {
            std::size_t pos = 0, neg = 0;
            for (const auto& r : rows) {
                if (r.a[c] > 0) ++pos;
                if (r.a[c] < 0) ++neg;
            }
            std::size_t cost = pos * neg;
            if (best == width || cost < best_cost) {
                best = c;
                best_cost = cost;
            }
        }
        std::vector<detail::Row> next, pos, neg;
        for (auto& r : rows) {
            if (r.a[best] > 0)
                pos.push_back(std::move(r));
            else if (r.a[best] < 0)
                neg.push_back(std::move(r));
            else
                next.push_back(std::move(r));
        }
        ++eliminated;
        gone.push_back(col_id[best]);
        for (const auto& p : pos)
            for (const auto& q : neg) {
                boost::dynamic_bitset<> hist = p.history | q.history;
                if (opt.chernikov && hist.count() > eliminated + 1) continue;  // Chernikov: redundant
                detail::Row r;
                const Integer fp = -q.a[best];
                const Integer fq = p.a[best];
                r.a.resize(width);
                for (std::size_t j = 0; j < width; ++j) r.a[j] = fp * p.a[j] + fq * q.a[j];
                r.rhs = fp * p.rhs + fq * q.rhs;
                r.history = std::move(hist);
                detail::make_primitive(r);
                next.push_back(std::move(r));
                if (next.size() > opt.max_rows) throw CapExceeded("Fourier-Motzkin row count exceeds the configured bound");
            }
        // Drop the eliminated column by swapping it to the end.
        for (auto& r : next) {
            std::swap(r.a[best], r.a[width - 1]);
            r.a.pop_back();
        }
        std::swap(col_id[best], col_id[width - 1]);
        col_id.pop_back();
        if (!z.empty()) {
            std::swap(z[best], z[width - 1]);
            z.pop_back();
        }
        --width;
        {
            // Filter before deduplication: a duplicate may carry a non-extreme history while
            // another copy of the same inequality carries an extreme one.
            std::vector<detail::Row> kept;
            kept.reserve(next.size());
            for (auto& r : next)
                if (!opt.rank_test || detail::extreme_combination(r.history, initial, gone)) kept.push_back(std::move(r));
            stats.rank_dropped += next.size() - kept.size();
            rows = std::move(kept);
        }
        detail::dedupe(rows);
        stats.peak_rows = std::max(stats.peak_rows, rows.size());
        const std::size_t before = rows.size();
        if (opt.prune_each_round || width == keep) prune(width);
        if (opt.on_round) opt.on_round(width - keep, before, rows.size());
        ++stats.rounds;
    }
    if (width0 == keep) prune(width);

    std::vector<dd::HalfSpace> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        dd::HalfSpace hs;
        hs.normal.assign(r.a.begin(), r.a.end());
        hs.offset = Rational(r.rhs);
        out.push_back(std::move(hs));
    }
    if (stats_out) *stats_out = stats;
    return out;
}

}  // namespace lfgeo::fm
