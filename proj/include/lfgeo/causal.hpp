#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <iterator>
#include <tuple>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lfgeo/behavior.hpp"
#include "lfgeo/error.hpp"
#include "lfgeo/parallel.hpp"
#include "lfgeo/polytope.hpp"
#include "lfgeo/rational.hpp"

namespace lfgeo::causal {

enum class NodeKind { Observed, Latent };

struct Node {
    std::string name;
    NodeKind kind = NodeKind::Observed;
    int cardinality = 2;
};

/// Directed acyclic graph; validated on construction.
class CausalDag {
public:
    CausalDag() = default;
    CausalDag(std::vector<Node> nodes, std::vector<std::pair<std::string, std::string>> edges)
        : nodes_(std::move(nodes)), edges_(std::move(edges)) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].cardinality < 1) throw StructuralError("node '" + nodes_[i].name + "' has cardinality < 1");
            if (!index_.emplace(nodes_[i].name, i).second)
                throw StructuralError("duplicate node name '" + nodes_[i].name + "'");
        }
        parents_.assign(nodes_.size(), {});
        children_.assign(nodes_.size(), {});
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& [from, to] : edges_) {
            const std::size_t u = index(from), v = index(to);
            if (u == v) throw StructuralError("self-loop on '" + from + "'");
            if (!seen.emplace(u, v).second) throw StructuralError("duplicate edge " + from + "->" + to);
            parents_[v].push_back(u);
            children_[u].push_back(v);
        }
        for (auto& p : parents_) std::sort(p.begin(), p.end());
        for (auto& c : children_) std::sort(c.begin(), c.end());
        order_ = topological_order();
    }

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }
    const std::vector<std::size_t>& parents(std::size_t v) const { return parents_[v]; }
    const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }
    const std::vector<std::size_t>& order() const { return order_; }

    std::size_t index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw StructuralError("unknown node '" + name + "'");
        return it->second;
    }

    bool has_edge(std::size_t u, std::size_t v) const {
        return std::binary_search(children_[u].begin(), children_[u].end(), v);
    }

    /// Nodes reachable from v along directed edges, including v.
    std::vector<bool> descendants(std::size_t v) const {
        std::vector<bool> seen(size(), false);
        std::vector<std::size_t> stack{v};
        seen[v] = true;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t c : children_[u])
                if (!seen[c]) {
                    seen[c] = true;
                    stack.push_back(c);
                }
        }
        return seen;
    }

private:
    std::vector<std::size_t> topological_order() const {
        std::vector<std::size_t> indeg(size(), 0), out;
        for (std::size_t v = 0; v < size(); ++v) indeg[v] = parents_[v].size();
        std::vector<std::size_t> ready;
        for (std::size_t v = 0; v < size(); ++v)
            if (indeg[v] == 0) ready.push_back(v);
        while (!ready.empty()) {
            std::sort(ready.begin(), ready.end(), std::greater<>());
            const std::size_t u = ready.back();
            ready.pop_back();
            out.push_back(u);
            for (std::size_t c : children_[u])
                if (--indeg[c] == 0) ready.push_back(c);
        }
        if (out.size() != size()) throw StructuralError("graph has a directed cycle");
        return out;
    }

    std::vector<Node> nodes_;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> parents_, children_;
    std::vector<std::size_t> order_;
};

/// A ⫫ B | Z over node names. Stored sorted; A and B are ordered so that A precedes B.
struct CiStatement {
    std::vector<std::string> a, b, z;

    CiStatement() = default;
    CiStatement(std::vector<std::string> a_, std::vector<std::string> b_, std::vector<std::string> z_ = {})
        : a(std::move(a_)), b(std::move(b_)), z(std::move(z_)) {
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::sort(z.begin(), z.end());
        if (a.empty() || b.empty()) throw StructuralError("CI statement needs nonempty A and B");
        std::set<std::string> all;
        for (const auto* part : {&a, &b, &z})
            for (const auto& n : *part)
                if (!all.insert(n).second) throw StructuralError("CI statement sets must be disjoint");
    }

    /// Same statement with A and B in canonical order (symmetry of independence).
    CiStatement normalized() const {
        CiStatement out = *this;
        if (out.b < out.a) std::swap(out.a, out.b);
        return out;
    }

    std::string to_string() const {
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
            return s;
        };
        return "(" + join(a) + " _||_ " + join(b) + " | {" + join(z) + "})";
    }

    friend bool operator==(const CiStatement&, const CiStatement&) = default;
    friend bool operator<(const CiStatement& l, const CiStatement& r) {
        if (l.z.size() != r.z.size()) return l.z.size() < r.z.size();
        return std::tie(l.a, l.b, l.z) < std::tie(r.a, r.b, r.z);
    }
};

// ---------------------------------------------------------------------------------------------
// d-separation

/// Bayes-ball reachability: true iff every path between A and B is blocked given Z.
inline bool d_separated(const CausalDag& g, const CiStatement& stmt) {
    const std::size_t n = g.size();
    std::vector<bool> inA(n, false), inB(n, false), inZ(n, false);
    for (const auto& s : stmt.a) inA[g.index(s)] = true;
    for (const auto& s : stmt.b) inB[g.index(s)] = true;
    for (const auto& s : stmt.z) inZ[g.index(s)] = true;
    // Nodes with a descendant in Z (including Z itself) open colliders.
    std::vector<bool> anc(n, false);
    {
        std::vector<std::size_t> stack;
        for (std::size_t v = 0; v < n; ++v)
            if (inZ[v]) {
                anc[v] = true;
                stack.push_back(v);
            }
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t p : g.parents(u))
                if (!anc[p]) {
                    anc[p] = true;
                    stack.push_back(p);
                }
        }
    }
    // State: (node, arrived from a child = going up, or from a parent = going down).
    std::vector<std::array<bool, 2>> visited(n, {false, false});
    std::vector<std::pair<std::size_t, int>> stack;
    for (std::size_t v = 0; v < n; ++v)
        if (inA[v]) stack.emplace_back(v, 0);
    while (!stack.empty()) {
        auto [v, dir] = stack.back();
        stack.pop_back();
        if (visited[v][static_cast<std::size_t>(dir)]) continue;
        visited[v][static_cast<std::size_t>(dir)] = true;
        if (inB[v]) return false;
        if (dir == 0) {  // arrived from a child (or start)
            if (inZ[v]) continue;
            for (std::size_t p : g.parents(v)) stack.emplace_back(p, 0);
            for (std::size_t c : g.children(v)) stack.emplace_back(c, 1);
        } else {  // arrived from a parent
            if (!inZ[v])
                for (std::size_t c : g.children(v)) stack.emplace_back(c, 1);
            if (anc[v])
                for (std::size_t p : g.parents(v)) stack.emplace_back(p, 0);
        }
    }
    return true;
}

/// Every singleton-pair statement (X ⫫ Y | Z) over the chosen nodes that d-separation implies,
/// for every conditioning set Z of the remaining chosen nodes. Ordered by |Z|, then names.
inline std::vector<CiStatement> implied_cis(const CausalDag& g, bool observed_only, std::size_t max_nodes = 8) {
    if (g.size() > max_nodes) throw CapExceeded("implied_cis enumerates at most " + std::to_string(max_nodes) + " nodes");
    std::vector<std::string> names;
    for (const auto& nd : g.nodes())
        if (!observed_only || nd.kind == NodeKind::Observed) names.push_back(nd.name);
    std::sort(names.begin(), names.end());
    std::vector<CiStatement> out;
    const std::size_t k = names.size();
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            std::vector<std::size_t> rest;
            for (std::size_t r = 0; r < k; ++r)
                if (r != i && r != j) rest.push_back(r);
            for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()); ++mask) {
                std::vector<std::string> z;
                for (std::size_t r = 0; r < rest.size(); ++r)
                    if (mask & (std::size_t{1} << r)) z.push_back(names[rest[r]]);
                CiStatement s({names[i]}, {names[j]}, z);
                if (d_separated(g, s)) out.push_back(std::move(s));
            }
        }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------------------------
// Joint distributions

/// Table over full assignments of the listed variables, in mixed radix with the first
/// variable slowest.
template <class T>
class JointDistribution {
public:
    JointDistribution() = default;
    JointDistribution(std::vector<std::string> names, std::vector<int> cards, std::vector<T> table)
        : names_(std::move(names)), cards_(std::move(cards)), p_(std::move(table)) {
        if (names_.size() != cards_.size()) throw StructuralError("names and cardinalities differ in length");
        std::size_t n = 1;
        for (int c : cards_) {
            if (c < 1) throw StructuralError("cardinality must be >= 1");
            n *= static_cast<std::size_t>(c);
        }
        if (p_.size() != n) throw StructuralError("joint table has the wrong size");
    }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<int>& cards() const { return cards_; }
    const std::vector<T>& table() const { return p_; }
    std::size_t size() const { return p_.size(); }

    std::size_t position(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        throw StructuralError("unknown variable '" + name + "'");
    }

    std::vector<int> assignment(std::size_t flat) const {
        std::vector<int> v(cards_.size());
        for (std::size_t i = cards_.size(); i-- > 0;) {
            v[i] = static_cast<int>(flat % static_cast<std::size_t>(cards_[i]));
            flat /= static_cast<std::size_t>(cards_[i]);
        }
        return v;
    }

    /// Sum of the table over assignments, grouped by the values of `vars`.
    std::map<std::vector<int>, T> marginal(const std::vector<std::size_t>& vars) const {
        std::map<std::vector<int>, T> out;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            const auto full = assignment(i);
            std::vector<int> key;
            key.reserve(vars.size());
            for (std::size_t v : vars) key.push_back(full[v]);
            auto [it, inserted] = out.emplace(std::move(key), p_[i]);
            if (!inserted) it->second += p_[i];
        }
        return out;
    }

    void validate(const T& tol) const {
        T total(0);
        for (const auto& v : p_) {
            if (v < T(0) - tol) throw PreconditionError("joint distribution has a negative entry");
            total += v;
        }
        if (lfgeo::detail::abs_value(T(total - 1)) > tol) throw PreconditionError("joint distribution does not sum to 1");
    }

private:
    std::vector<std::string> names_;
    std::vector<int> cards_;
    std::vector<T> p_;
};

namespace detail {

template <class T>
bool close(const T& a, const T& b, const T& tol) {
    return lfgeo::detail::abs_value(T(a - b)) <= tol;
}

// Positions of the DAG's nodes inside the distribution; checks cardinalities.
template <class T>
std::vector<std::size_t> align(const CausalDag& g, const JointDistribution<T>& d) {
    if (d.names().size() != g.size()) throw StructuralError("distribution and DAG have different node sets");
    std::vector<std::size_t> pos(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        pos[v] = d.position(g.node(v).name);
        if (d.cards()[pos[v]] != g.node(v).cardinality)
            throw StructuralError("cardinality mismatch for node '" + g.node(v).name + "'");
    }
    return pos;
}

}  // namespace detail

/// Largest |p(a,b,z) p(z) - p(a,z) p(b,z)| over assignments: zero iff A ⫫ B | Z in d.
template <class T>
T ci_residual(const JointDistribution<T>& d, const CiStatement& s) {
    std::vector<std::size_t> A, B, Z;
    for (const auto& n : s.a) A.push_back(d.position(n));
    for (const auto& n : s.b) B.push_back(d.position(n));
    for (const auto& n : s.z) Z.push_back(d.position(n));
    std::vector<std::size_t> abz = A, az = A, bz = B;
    abz.insert(abz.end(), B.begin(), B.end());
    abz.insert(abz.end(), Z.begin(), Z.end());
    az.insert(az.end(), Z.begin(), Z.end());
    bz.insert(bz.end(), Z.begin(), Z.end());
    const auto pabz = d.marginal(abz), paz = d.marginal(az), pbz = d.marginal(bz), pz = d.marginal(Z);
    T worst(0);
    // Enumerate all (a, b, z) value combinations, including zero-probability ones.
    std::vector<int> cards;
    for (std::size_t v : abz) cards.push_back(d.cards()[v]);
    std::vector<int> val(cards.size(), 0);
    while (true) {
        std::vector<int> a(val.begin(), val.begin() + static_cast<std::ptrdiff_t>(A.size()));
        std::vector<int> b(val.begin() + static_cast<std::ptrdiff_t>(A.size()), val.begin() + static_cast<std::ptrdiff_t>(A.size() + B.size()));
        std::vector<int> z(val.begin() + static_cast<std::ptrdiff_t>(A.size() + B.size()), val.end());
        auto get = [](const std::map<std::vector<int>, T>& m, const std::vector<int>& k) {
            auto it = m.find(k);
            return it == m.end() ? T(0) : it->second;
        };
        std::vector<int> akey = a, bkey = b;
        akey.insert(akey.end(), z.begin(), z.end());
        bkey.insert(bkey.end(), z.begin(), z.end());
        const T lhs = get(pabz, val) * get(pz, z);
        const T rhs = get(paz, akey) * get(pbz, bkey);
        worst = std::max(worst, lfgeo::detail::abs_value(T(lhs - rhs)));
        std::size_t i = val.size();
        while (i > 0) {
            --i;
            if (++val[i] < cards[i]) break;
            val[i] = 0;
            if (i == 0) return worst;
        }
        if (val.empty()) return worst;
    }
}

template <class T>
struct CmcNodeReport {
    std::string node;
    bool passes = true;
    T residual = T(0);
};

/// Checks p(X | Nd(X), Pa(X)) = p(X | Pa(X)) for every node X, i.e. X ⫫ Nd(X) \ Pa(X) | Pa(X).
template <class T>
std::vector<CmcNodeReport<T>> cmc_check(const CausalDag& g, const JointDistribution<T>& d, const T& tol) {
    detail::align(g, d);
    std::vector<CmcNodeReport<T>> out;
    for (std::size_t v = 0; v < g.size(); ++v) {
        CmcNodeReport<T> r;
        r.node = g.node(v).name;
        const auto desc = g.descendants(v);
        std::vector<std::string> nd, pa;
        for (std::size_t p : g.parents(v)) pa.push_back(g.node(p).name);
        for (std::size_t u = 0; u < g.size(); ++u) {
            if (desc[u] || std::find(g.parents(v).begin(), g.parents(v).end(), u) != g.parents(v).end()) continue;
            nd.push_back(g.node(u).name);
        }
        if (!nd.empty()) {
            r.residual = ci_residual(d, CiStatement({r.node}, nd, pa));
            r.passes = r.residual <= tol;
        }
        out.push_back(std::move(r));
    }
    return out;
}

template <class T>
bool cmc_passes(const std::vector<CmcNodeReport<T>>& report) {
    return std::all_of(report.begin(), report.end(), [](const auto& r) { return r.passes; });
}

/// Distribution marginalized onto the observed nodes, in DAG node order.
template <class T>
JointDistribution<T> observed_marginal(const CausalDag& g, const JointDistribution<T>& d) {
    const auto pos = detail::align(g, d);
    std::vector<std::size_t> vars;
    std::vector<std::string> names;
    std::vector<int> cards;
    for (std::size_t v = 0; v < g.size(); ++v)
        if (g.node(v).kind == NodeKind::Observed) {
            vars.push_back(pos[v]);
            names.push_back(g.node(v).name);
            cards.push_back(g.node(v).cardinality);
        }
    const auto m = d.marginal(vars);
    std::size_t total = 1;
    for (int c : cards) total *= static_cast<std::size_t>(c);
    std::vector<T> table(total, T(0));
    for (const auto& [key, val] : m) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < key.size(); ++i) idx = idx * static_cast<std::size_t>(cards[i]) + static_cast<std::size_t>(key[i]);
        table[idx] = val;
    }
    return JointDistribution<T>(std::move(names), std::move(cards), std::move(table));
}

struct FaithfulnessReport {
    bool holds = true;
    std::vector<CiStatement> extra_cis;    // hold in the distribution, not implied by the graph
    std::vector<CiStatement> missing_cis;  // implied by the graph, fail in the distribution
};

/// Compares singleton CIs among observed nodes holding in d against those d-separation implies.
template <class T>
FaithfulnessReport faithfulness_check(const CausalDag& g, const JointDistribution<T>& d, const T& tol,
                                      std::size_t max_nodes = 8) {
    const auto implied = implied_cis(g, true, max_nodes);
    const auto obs = observed_marginal(g, d);
    std::vector<std::string> names = obs.names();
    std::sort(names.begin(), names.end());
    FaithfulnessReport rep;
    const std::size_t k = names.size();
    std::vector<CiStatement> holding;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            std::vector<std::size_t> rest;
            for (std::size_t r = 0; r < k; ++r)
                if (r != i && r != j) rest.push_back(r);
            for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()); ++mask) {
                std::vector<std::string> z;
                for (std::size_t r = 0; r < rest.size(); ++r)
                    if (mask & (std::size_t{1} << r)) z.push_back(names[rest[r]]);
                CiStatement s({names[i]}, {names[j]}, z);
                if (ci_residual(obs, s) <= tol) holding.push_back(std::move(s));
            }
        }
    std::sort(holding.begin(), holding.end());
    std::set_difference(holding.begin(), holding.end(), implied.begin(), implied.end(), std::back_inserter(rep.extra_cis));
    std::set_difference(implied.begin(), implied.end(), holding.begin(), holding.end(), std::back_inserter(rep.missing_cis));
    rep.holds = rep.extra_cis.empty() && rep.missing_cis.empty();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Markov parameterizations

/// Conditional tables p(v | parents) for every node, indexed [node][parent assignment][value];
/// parent assignments in mixed radix over the sorted parent list.
template <class T>
using Cpts = std::vector<std::vector<std::vector<T>>>;

/// Joint table of the factorization prod_v p(v | pa(v)), variables in DAG node order.
template <class T>
JointDistribution<T> markov_joint(const CausalDag& g, const Cpts<T>& cpt) {
    std::vector<std::string> names;
    std::vector<int> cards;
    for (const auto& nd : g.nodes()) {
        names.push_back(nd.name);
        cards.push_back(nd.cardinality);
    }
    std::size_t total = 1;
    for (int c : cards) total *= static_cast<std::size_t>(c);
    JointDistribution<T> shape(names, cards, std::vector<T>(total, T(0)));
    std::vector<T> table(total);
    for (std::size_t i = 0; i < total; ++i) {
        const auto val = shape.assignment(i);
        T p(1);
        for (std::size_t v = 0; v < g.size() && p != T(0); ++v) {
            std::size_t pa = 0;
            for (std::size_t u : g.parents(v)) pa = pa * static_cast<std::size_t>(cards[u]) + static_cast<std::size_t>(val[u]);
            p *= cpt[v][pa][static_cast<std::size_t>(val[v])];
        }
        table[i] = p;
    }
    return JointDistribution<T>(std::move(names), std::move(cards), std::move(table));
}

/// Random rational conditional tables with strictly positive entries (denominators up to `den`).
inline Cpts<Rational> random_cpts(const CausalDag& g, std::mt19937_64& rng, int den = 97) {
    Cpts<Rational> cpt(g.size());
    std::uniform_int_distribution<int> w(1, den);
    for (std::size_t v = 0; v < g.size(); ++v) {
        std::size_t rows = 1;
        for (std::size_t u : g.parents(v)) rows *= static_cast<std::size_t>(g.node(u).cardinality);
        const int card = g.node(v).cardinality;
        cpt[v].resize(rows);
        for (auto& row : cpt[v]) {
            std::vector<int> raw(static_cast<std::size_t>(card));
            int sum = 0;
            for (auto& r : raw) sum += (r = w(rng));
            for (int r : raw) row.emplace_back(r, sum);
        }
    }
    return cpt;
}

// ---------------------------------------------------------------------------------------------
// Bell DAG scan

/// X, Y settings, A, B outcomes, L the latent common cause; each of the four is binary.
inline CausalDag bell_dag(int latent_cardinality = 4, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    std::vector<std::pair<std::string, std::string>> edges{{"L", "A"}, {"L", "B"}, {"X", "A"}, {"Y", "B"}};
    edges.insert(edges.end(), extra.begin(), extra.end());
    return CausalDag({{"X", NodeKind::Observed, 2},
                      {"Y", NodeKind::Observed, 2},
                      {"A", NodeKind::Observed, 2},
                      {"B", NodeKind::Observed, 2},
                      {"L", NodeKind::Latent, latent_cardinality}},
                     std::move(edges));
}

enum class ScanClass { UnableToReproduce, FineTuned, FaithfulReproducing };

inline std::string to_string(ScanClass c) {
    switch (c) {
        case ScanClass::UnableToReproduce: return "UNABLE_TO_REPRODUCE";
        case ScanClass::FineTuned: return "FINE_TUNED";
        case ScanClass::FaithfulReproducing: return "FAITHFUL_REPRODUCING";
    }
    return "?";
}

struct ScanRow {
    int dag_id = 0;
    std::vector<std::pair<std::string, std::string>> edges;
    bool ns_implied = false;
    bool lhv_forced = false;
    ScanClass classification = ScanClass::FineTuned;
};

struct ScanReport {
    std::vector<ScanRow> rows;
    bool behavior_in_lhv = false;
    std::size_t faithful_reproducing = 0;
    bool dichotomy_holds() const { return faithful_reproducing == 0; }
};

/// Every DAG over {X, Y, A, B, L} with L latent and X, Y, L roots: the optional edges
/// L->A, L->B, X->A, X->B, Y->A, Y->B, plus at most one of A->B, B->A (192 graphs).
inline std::vector<CausalDag> bell_dag_family(int latent_cardinality) {
    const std::vector<std::pair<std::string, std::string>> optional{{"L", "A"}, {"L", "B"}, {"X", "A"},
                                                                     {"X", "B"}, {"Y", "A"}, {"Y", "B"}};
    std::vector<CausalDag> out;
    for (int mask = 0; mask < 64; ++mask)
        for (int ab = 0; ab < 3; ++ab) {
            std::vector<std::pair<std::string, std::string>> edges;
            for (int i = 0; i < 6; ++i)
                if (mask & (1 << i)) edges.push_back(optional[static_cast<std::size_t>(i)]);
            if (ab == 1) edges.emplace_back("A", "B");
            if (ab == 2) edges.emplace_back("B", "A");
            out.emplace_back(std::vector<Node>{{"X", NodeKind::Observed, 2},
                                               {"Y", NodeKind::Observed, 2},
                                               {"A", NodeKind::Observed, 2},
                                               {"B", NodeKind::Observed, 2},
                                               {"L", NodeKind::Latent, latent_cardinality}},
                             std::move(edges));
        }
    return out;
}

/// Classifies every DAG of the family against a CHSH-violating no-signalling behavior.
///
/// ns_implied: the graph itself implies the no-signalling CIs (A ⫫ Y | X) and (B ⫫ X | Y).
/// lhv_forced: the graph screens A from Y given {X, L} and B from X given {Y, L}, so the
/// Markov condition forces p(ab|xy) = sum_l p(l) p(a|x,l) p(b|y,l), an LHV behavior.
/// A graph forcing LHV cannot reproduce b (b is outside LHV by exact LP); any other graph
/// can reproduce b only if its parameters produce the no-signalling CIs without the graph
/// implying them, i.e. by fine-tuning.
inline ScanReport bell_dag_scan(const RationalBehavior& b, int latent_cardinality = 4) {
    const Scenario sc = b.scenario();
    if (!(sc == binary_scenario(2))) throw PreconditionError("bell_dag_scan needs a 2x2 binary behavior");
    if (latent_cardinality < 1 || latent_cardinality > 4) throw PreconditionError("latent cardinality must be in 1..4");
    const auto rep = validate_behavior(b, Rational(0));
    if (!rep.ok()) throw PreconditionError("behavior is not a normalized no-signalling behavior");
    bool violates_chsh = false;
    for (const auto& f : enumerate_facets(PolytopeKind::LHV, sc))
        if (violates(f, b)) violates_chsh = true;
    if (!violates_chsh) throw PreconditionError("behavior violates no Bell inequality");

    ScanReport out;
    out.behavior_in_lhv = membership(PolytopeKind::LHV, b).inside;
    const auto family = bell_dag_family(latent_cardinality);
    out.rows.resize(family.size());
    parallel_for(family.size(), [&](std::size_t i) {
        const CausalDag& g = family[i];
        ScanRow row;
        row.dag_id = static_cast<int>(i);
        row.edges = g.edges();
        row.ns_implied = d_separated(g, CiStatement({"A"}, {"Y"}, {"X"})) && d_separated(g, CiStatement({"B"}, {"X"}, {"Y"}));
        row.lhv_forced = d_separated(g, CiStatement({"A"}, {"Y"}, {"X", "L"})) &&
                         d_separated(g, CiStatement({"B"}, {"X"}, {"Y", "L"}));
        if (row.lhv_forced && !out.behavior_in_lhv)
            row.classification = ScanClass::UnableToReproduce;
        else if (!row.ns_implied)
            row.classification = ScanClass::FineTuned;
        else
            row.classification = ScanClass::FaithfulReproducing;
        out.rows[i] = std::move(row);
    });
    for (const auto& r : out.rows)
        if (r.classification == ScanClass::FaithfulReproducing) ++out.faithful_reproducing;
    return out;
}

inline std::string scan_csv(const ScanReport& rep) {
    std::ostringstream os;
    os << "dag_id,edges,ns_implied,lhv_forced,classification\n";
    for (const auto& r : rep.rows) {
        os << r.dag_id << ",";
        for (std::size_t i = 0; i < r.edges.size(); ++i) os << (i ? ";" : "") << r.edges[i].first << "->" << r.edges[i].second;
        os << "," << (r.ns_implied ? "true" : "false") << "," << (r.lhv_forced ? "true" : "false") << ","
           << to_string(r.classification) << "\n";
    }
    return os.str();
}

}  // namespace lfgeo::causal
