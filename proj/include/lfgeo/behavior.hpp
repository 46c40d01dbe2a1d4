#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lfgeo/error.hpp"
#include "lfgeo/rational.hpp"

namespace lfgeo {

/// Setting and outcome counts of a bipartite scenario. Settings and outcomes are 1-based;
/// setting 1 of each party is the "open the vault" setting in the friend scenario.
struct Scenario {
    int x_count = 2;
    int y_count = 2;
    int a_count = 2;
    int b_count = 2;

    friend bool operator==(const Scenario&, const Scenario&) = default;

    void validate() const {
        if (x_count < 1 || y_count < 1 || a_count < 1 || b_count < 1)
            throw StructuralError("scenario counts must all be >= 1");
    }

    bool supports_friends() const { return x_count >= 2 && y_count >= 2; }

    std::size_t size() const {
        return static_cast<std::size_t>(x_count) * static_cast<std::size_t>(y_count) *
               static_cast<std::size_t>(a_count) * static_cast<std::size_t>(b_count);
    }

    /// Flat index of p(a,b|x,y); all arguments 1-based.
    std::size_t index(int a, int b, int x, int y) const {
        return ((static_cast<std::size_t>(x - 1) * static_cast<std::size_t>(y_count) +
                 static_cast<std::size_t>(y - 1)) * static_cast<std::size_t>(a_count) +
                static_cast<std::size_t>(a - 1)) * static_cast<std::size_t>(b_count) +
               static_cast<std::size_t>(b - 1);
    }

    bool in_range(int a, int b, int x, int y) const {
        return a >= 1 && a <= a_count && b >= 1 && b <= b_count && x >= 1 && x <= x_count &&
               y >= 1 && y <= y_count;
    }

    /// Calls f(a, b, x, y) over the whole index set in flat-index order.
    template <class F>
    void for_each(F&& f) const {
        for (int x = 1; x <= x_count; ++x)
            for (int y = 1; y <= y_count; ++y)
                for (int a = 1; a <= a_count; ++a)
                    for (int b = 1; b <= b_count; ++b) f(a, b, x, y);
    }

    std::string label() const {
        return std::to_string(x_count) + "," + std::to_string(y_count) + "," +
               std::to_string(a_count) + "," + std::to_string(b_count);
    }
};

inline Scenario binary_scenario(int settings) { return Scenario{settings, settings, 2, 2}; }

namespace detail {

inline Rational abs_value(const Rational& v) { return abs(v); }
inline double abs_value(double v) { return std::fabs(v); }

template <class T>
T to_scalar(const Rational& r) {
    if constexpr (std::is_same_v<T, Rational>) {
        return r;
    } else {
        return to_double(r);
    }
}

}  // namespace detail

/// A single (a, b, x, y) table cell; used when building tables from sparse input.
template <class T>
struct Entry {
    int a, b, x, y;
    T value;
};

/// Conditional distribution p(a,b|x,y). The table is always complete; missing input cells
/// are rejected at construction.
template <class T>
class Behavior {
public:
    using value_type = T;

    Behavior() = default;

    Behavior(Scenario sc, std::vector<T> table) : scenario_(sc), p_(std::move(table)) {
        scenario_.validate();
        if (p_.size() != scenario_.size())
            throw StructuralError("behavior table has " + std::to_string(p_.size()) +
                                  " entries, scenario needs " + std::to_string(scenario_.size()));
    }

    static Behavior zeros(Scenario sc) {
        sc.validate();
        return Behavior(sc, std::vector<T>(sc.size(), T(0)));
    }

    /// Builds a table from explicit cells; every index must appear exactly once.
    static Behavior from_entries(Scenario sc, const std::vector<Entry<T>>& entries) {
        sc.validate();
        std::vector<T> table(sc.size(), T(0));
        std::vector<bool> seen(sc.size(), false);
        for (const auto& e : entries) {
            if (!sc.in_range(e.a, e.b, e.x, e.y))
                throw StructuralError("entry index out of range for scenario " + sc.label());
            auto i = sc.index(e.a, e.b, e.x, e.y);
            if (seen[i]) throw StructuralError("duplicate table entry");
            seen[i] = true;
            table[i] = e.value;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            throw StructuralError("behavior table is missing entries");
        return Behavior(sc, std::move(table));
    }

    const Scenario& scenario() const { return scenario_; }
    const std::vector<T>& table() const { return p_; }
    std::vector<T>& table() { return p_; }

    const T& operator()(int a, int b, int x, int y) const { return p_[scenario_.index(a, b, x, y)]; }
    T& operator()(int a, int b, int x, int y) { return p_[scenario_.index(a, b, x, y)]; }

    /// Alice's marginal p(a|x) computed with Bob's setting y.
    T alice_marginal(int a, int x, int y) const {
        T s(0);
        for (int b = 1; b <= scenario_.b_count; ++b) s += (*this)(a, b, x, y);
        return s;
    }
    T bob_marginal(int b, int y, int x) const {
        T s(0);
        for (int a = 1; a <= scenario_.a_count; ++a) s += (*this)(a, b, x, y);
        return s;
    }

    friend bool operator==(const Behavior&, const Behavior&) = default;

private:
    Scenario scenario_;
    std::vector<T> p_;
};

using RationalBehavior = Behavior<Rational>;
using FloatBehavior = Behavior<double>;

enum class Sense { LessEqual, GreaterEqual };

inline std::string to_string(Sense s) { return s == Sense::LessEqual ? "<=" : ">="; }

/// Linear functional sum coeffs(a,b,x,y) p(a,b|x,y) compared against a bound.
struct Inequality {
    Scenario scenario;
    std::vector<Rational> coeffs;
    Rational bound = 0;
    Sense sense = Sense::LessEqual;
    std::string name;  // optional label, not part of equality

    Inequality() = default;
    Inequality(Scenario sc, std::vector<Rational> c, Rational b, Sense s = Sense::LessEqual,
               std::string label = {})
        : scenario(sc), coeffs(std::move(c)), bound(std::move(b)), sense(s), name(std::move(label)) {
        scenario.validate();
        if (coeffs.size() != scenario.size())
            throw StructuralError("inequality coefficients do not match scenario size");
    }

    static Inequality zeros(Scenario sc) {
        return Inequality(sc, std::vector<Rational>(sc.size(), Rational(0)), Rational(0));
    }

    const Rational& coeff(int a, int b, int x, int y) const { return coeffs[scenario.index(a, b, x, y)]; }
    Rational& coeff(int a, int b, int x, int y) { return coeffs[scenario.index(a, b, x, y)]; }

    /// Same constraint written with sense <=.
    Inequality as_less_equal() const {
        if (sense == Sense::LessEqual) return *this;
        Inequality out = *this;
        for (auto& c : out.coeffs) c = -c;
        out.bound = -bound;
        out.sense = Sense::LessEqual;
        return out;
    }

    /// Sense <=, integer coefficients and bound with overall gcd 1.
    Inequality normalized() const {
        Inequality le = as_less_equal();
        std::vector<Rational> all = le.coeffs;
        all.push_back(le.bound);
        all = primitive_integer_vector(all);
        le.bound = all.back();
        all.pop_back();
        le.coeffs = std::move(all);
        return le;
    }

    friend bool operator==(const Inequality& l, const Inequality& r) {
        return l.scenario == r.scenario && l.coeffs == r.coeffs && l.bound == r.bound && l.sense == r.sense;
    }
};

/// Lexicographic order on (coeffs, bound); used to sort canonical facet lists.
inline bool lexicographic_less(const Inequality& l, const Inequality& r) {
    if (l.coeffs != r.coeffs)
        return std::lexicographical_compare(l.coeffs.begin(), l.coeffs.end(), r.coeffs.begin(), r.coeffs.end());
    return l.bound < r.bound;
}

/// Local deterministic response functions; outcomes 1-based, index 0 is setting 1.
struct DeterministicStrategy {
    std::vector<int> alice_map;
    std::vector<int> bob_map;

    void validate(const Scenario& sc) const {
        if (static_cast<int>(alice_map.size()) != sc.x_count || static_cast<int>(bob_map.size()) != sc.y_count)
            throw PreconditionError("strategy is not total on the scenario's settings");
        for (int a : alice_map)
            if (a < 1 || a > sc.a_count) throw PreconditionError("alice strategy outcome out of range");
        for (int b : bob_map)
            if (b < 1 || b > sc.b_count) throw PreconditionError("bob strategy outcome out of range");
    }
};

template <class T>
struct ValidationReport {
    bool is_normalized = true;
    bool is_nonnegative = true;
    bool is_no_signalling = true;
    T normalization_residual = T(0);
    T negativity_residual = T(0);
    T signalling_residual = T(0);
    T max_violation = T(0);

    bool ok() const { return is_normalized && is_nonnegative && is_no_signalling; }
};

template <class T>
ValidationReport<T> validate_behavior(const Behavior<T>& b, const T& tol) {
    const Scenario& sc = b.scenario();
    ValidationReport<T> r;
    for (const auto& v : b.table())
        if (v < 0) r.negativity_residual = std::max(r.negativity_residual, T(-v));
    for (int x = 1; x <= sc.x_count; ++x)
        for (int y = 1; y <= sc.y_count; ++y) {
            T s(0);
            for (int a = 1; a <= sc.a_count; ++a)
                for (int bb = 1; bb <= sc.b_count; ++bb) s += b(a, bb, x, y);
            r.normalization_residual = std::max(r.normalization_residual, detail::abs_value(T(s - 1)));
        }
    for (int x = 1; x <= sc.x_count; ++x)
        for (int a = 1; a <= sc.a_count; ++a)
            for (int y = 2; y <= sc.y_count; ++y) {
                T d = b.alice_marginal(a, x, y) - b.alice_marginal(a, x, 1);
                r.signalling_residual = std::max(r.signalling_residual, detail::abs_value(d));
            }
    for (int y = 1; y <= sc.y_count; ++y)
        for (int bb = 1; bb <= sc.b_count; ++bb)
            for (int x = 2; x <= sc.x_count; ++x) {
                T d = b.bob_marginal(bb, y, x) - b.bob_marginal(bb, y, 1);
                r.signalling_residual = std::max(r.signalling_residual, detail::abs_value(d));
            }
    r.is_normalized = r.normalization_residual <= tol;
    r.is_nonnegative = r.negativity_residual <= tol;
    r.is_no_signalling = r.signalling_residual <= tol;
    r.max_violation = std::max({r.normalization_residual, r.negativity_residual, r.signalling_residual});
    return r;
}

template <class T = Rational>
Behavior<T> deterministic_behavior(const DeterministicStrategy& s, const Scenario& sc) {
    s.validate(sc);
    auto out = Behavior<T>::zeros(sc);
    for (int x = 1; x <= sc.x_count; ++x)
        for (int y = 1; y <= sc.y_count; ++y)
            out(s.alice_map[static_cast<std::size_t>(x - 1)], s.bob_map[static_cast<std::size_t>(y - 1)], x, y) = T(1);
    return out;
}

template <class T>
T evaluate_inequality(const Inequality& ineq, const Behavior<T>& b) {
    if (!(ineq.scenario == b.scenario())) throw PreconditionError("inequality and behavior scenarios differ");
    T s(0);
    for (std::size_t i = 0; i < ineq.coeffs.size(); ++i) {
        if (ineq.coeffs[i] == 0) continue;
        s += detail::to_scalar<T>(ineq.coeffs[i]) * b.table()[i];
    }
    return s;
}

/// True when the behavior violates the inequality (strictly, beyond `tol`).
template <class T>
bool violates(const Inequality& ineq, const Behavior<T>& b, const T& tol = T(0)) {
    T v = evaluate_inequality(ineq, b);
    T bound = detail::to_scalar<T>(ineq.bound);
    return ineq.sense == Sense::LessEqual ? v > bound + tol : v < bound - tol;
}

/// Entrywise lambda*b1 + (1-lambda)*b2.
template <class T>
Behavior<T> mixture(const T& lambda, const Behavior<T>& b1, const Behavior<T>& b2) {
    if (!(b1.scenario() == b2.scenario())) throw PreconditionError("mixture of behaviors on different scenarios");
    std::vector<T> t(b1.table().size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = lambda * b1.table()[i] + (T(1) - lambda) * b2.table()[i];
    return Behavior<T>(b1.scenario(), std::move(t));
}

template <class T = Rational>
Behavior<T> uniform_behavior(const Scenario& sc) {
    sc.validate();
    T v = T(1) / T(sc.a_count * sc.b_count);
    return Behavior<T>(sc, std::vector<T>(sc.size(), v));
}

/// Binary-outcome PR box: p = 1/2 iff a xor b == (x-1)(y-1) mod 2.
template <class T = Rational>
Behavior<T> pr_box(const Scenario& sc) {
    if (sc.a_count != 2 || sc.b_count != 2) throw PreconditionError("PR box needs binary outcomes");
    auto out = Behavior<T>::zeros(sc);
    sc.for_each([&](int a, int b, int x, int y) {
        int parity = ((a - 1) ^ (b - 1));
        if (parity == ((x - 1) * (y - 1)) % 2) out(a, b, x, y) = T(1) / T(2);
    });
    return out;
}

/// CHSH functional E(x1,y1)+E(x1,y2)+E(x2,y1)-E(x2,y2) with E(x,y) = sum (-1)^(a+b) p(a,b|x,y),
/// on binary outcomes, bound 2.
inline Inequality chsh_inequality(const Scenario& sc, int x1 = 1, int x2 = 2, int y1 = 1, int y2 = 2) {
    if (sc.a_count != 2 || sc.b_count != 2) throw PreconditionError("CHSH needs binary outcomes");
    if (x1 < 1 || x2 > sc.x_count || y1 < 1 || y2 > sc.y_count || x1 > sc.x_count || y1 > sc.y_count || x2 < 1 || y2 < 1 || x1 == x2 || y1 == y2)
        throw PreconditionError("CHSH settings out of range");
    auto ineq = Inequality::zeros(sc);
    ineq.bound = 2;
    ineq.name = "chsh";
    auto add = [&](int x, int y, int sign) {
        for (int a = 1; a <= 2; ++a)
            for (int b = 1; b <= 2; ++b) ineq.coeff(a, b, x, y) += (a == b ? sign : -sign);
    };
    add(x1, y1, 1);
    add(x1, y2, 1);
    add(x2, y1, 1);
    add(x2, y2, -1);
    return ineq;
}

/// Every deterministic strategy on the scenario, in mixed-radix order (Alice's setting 1 slowest).
inline std::vector<DeterministicStrategy> all_deterministic_strategies(const Scenario& sc, double cap = 1e6) {
    sc.validate();
    double count = std::pow(double(sc.a_count), sc.x_count) * std::pow(double(sc.b_count), sc.y_count);
    if (count > cap) throw CapExceeded("deterministic strategy count exceeds cap");
    std::vector<DeterministicStrategy> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<int> digits(static_cast<std::size_t>(sc.x_count + sc.y_count), 1);
    auto radix = [&](std::size_t i) { return i < static_cast<std::size_t>(sc.x_count) ? sc.a_count : sc.b_count; };
    while (true) {
        DeterministicStrategy s;
        s.alice_map.assign(digits.begin(), digits.begin() + sc.x_count);
        s.bob_map.assign(digits.begin() + sc.x_count, digits.end());
        out.push_back(std::move(s));
        std::size_t i = digits.size();
        while (i > 0) {
            --i;
            if (digits[i] < radix(i)) {
                ++digits[i];
                break;
            }
            digits[i] = 1;
            if (i == 0) return out;
        }
    }
}

}  // namespace lfgeo
