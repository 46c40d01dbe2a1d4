#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lfgeo/error.hpp"
#include "lfgeo/parallel.hpp"

namespace lfgeo::principles {

using NameSet = std::set<std::string>;

struct Rule {
    NameSet premises;
    std::string conclusion;
    std::string note;  // plain-language source of the rule
};

struct Theorem {
    std::string name;
    std::vector<NameSet> bundles;
};

/// Horn-clause implication graph over named principles.
struct PrincipleGraph {
    NameSet principles;
    std::vector<Rule> rules;
    std::vector<Theorem> theorems;

    const Theorem& theorem(const std::string& name) const {
        for (const auto& t : theorems)
            if (t.name == name) return t;
        throw PreconditionError("unknown theorem '" + name + "'");
    }

    /// Rejects unknown names, empty premise sets and rules whose conclusion feeds back into
    /// its own premises.
    void validate() const {
        auto known = [&](const std::string& n, const char* where) {
            if (!principles.count(n)) throw StructuralError(std::string("unknown principle '") + n + "' in " + where);
        };
        for (const auto& r : rules) {
            if (r.premises.empty()) throw StructuralError("rule for '" + r.conclusion + "' has no premises");
            for (const auto& p : r.premises) known(p, "rule premises");
            known(r.conclusion, "rule conclusion");
        }
        for (const auto& t : theorems)
            for (const auto& b : t.bundles) {
                if (b.empty()) throw StructuralError("theorem '" + t.name + "' has an empty bundle");
                for (const auto& p : b) known(p, "theorem bundle");
            }
        // Dependency graph conclusion <- premise; reject cycles.
        std::map<std::string, NameSet> deps;
        for (const auto& r : rules) deps[r.conclusion].insert(r.premises.begin(), r.premises.end());
        std::map<std::string, int> colour;
        std::function<void(const std::string&)> visit = [&](const std::string& n) {
            colour[n] = 1;
            for (const auto& p : deps[n]) {
                if (colour[p] == 1) throw StructuralError("rules are cyclic through '" + p + "'");
                if (colour[p] == 0) visit(p);
            }
            colour[n] = 2;
        };
        for (const auto& n : principles)
            if (colour[n] == 0) visit(n);
    }

    /// Principles that never appear as a rule conclusion.
    NameSet basic() const {
        NameSet out = principles;
        for (const auto& r : rules) out.erase(r.conclusion);
        return out;
    }
};

struct Position {
    NameSet held;
};

inline void require_position(const PrincipleGraph& g, const Position& pos) {
    for (const auto& n : pos.held)
        if (!g.principles.count(n)) throw PreconditionError("position holds unknown principle '" + n + "'");
}

inline PrincipleGraph default_graph() {
    PrincipleGraph g;
    g.principles = {"AOE",
                    "SpaceTime",
                    "NoSuperdeterminism",
                    "Locality",
                    "Predetermination",
                    "LocalCausality",
                    "RPCC",
                    "PCC",
                    "DecorrelatingExplanation",
                    "RelativisticCausalArrow",
                    "TemporalCausalArrow",
                    "RelativisticCausality",
                    "IndependentInterventions",
                    "InterventionistCausation",
                    "LocalAction"};
    g.rules = {
        {{"PCC", "DecorrelatingExplanation"}, "RPCC",
         "Reichenbach's principle follows from the common cause principle plus decorrelating explanation"},
        {{"RPCC", "RelativisticCausalArrow"}, "LocalCausality",
         "Local causality is the conjunction of the relativistic causal arrow and Reichenbach's principle"},
        {{"TemporalCausalArrow", "RelativisticCausality"}, "RelativisticCausalArrow",
         "A temporal causal arrow plus relativistic causality gives the relativistic causal arrow"},
        {{"IndependentInterventions", "PCC"}, "InterventionistCausation",
         "Independent interventions plus the common cause principle give interventionist causation"},
        {{"RelativisticCausalArrow", "InterventionistCausation"}, "Locality",
         "The relativistic causal arrow plus interventionist causation imply locality"},
        {{"RelativisticCausalArrow", "InterventionistCausation"}, "NoSuperdeterminism",
         "The relativistic causal arrow plus interventionist causation imply no-superdeterminism"},
        {{"RelativisticCausalArrow", "InterventionistCausation"}, "LocalAction",
         "The relativistic causal arrow plus interventionist causation imply local action"},
    };
    g.theorems = {
        {"Bell64",
         {{"AOE", "SpaceTime", "NoSuperdeterminism", "Locality", "Predetermination"},
          {"AOE", "SpaceTime", "LocalAction", "Predetermination"}}},
        {"Bell76",
         {{"AOE", "SpaceTime", "NoSuperdeterminism", "LocalCausality"},
          {"AOE", "SpaceTime", "LocalAction", "LocalCausality"}}},
        {"LF", {{"AOE", "SpaceTime", "NoSuperdeterminism", "Locality"}, {"AOE", "SpaceTime", "LocalAction"}}},
    };
    return g;
}

/// Least fixed point of forward chaining from the held principles.
inline NameSet closure(const PrincipleGraph& g, const Position& pos) {
    require_position(g, pos);
    NameSet out = pos.held;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : g.rules) {
            if (out.count(r.conclusion)) continue;
            if (std::all_of(r.premises.begin(), r.premises.end(), [&](const std::string& p) { return out.count(p) > 0; })) {
                out.insert(r.conclusion);
                changed = true;
            }
        }
    }
    return out;
}

struct Violation {
    std::string theorem;
    NameSet bundle;
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct Consistency {
    bool ok = true;
    std::vector<Violation> violated;
};

/// Case-insensitive theorem lookup, so "bell64" names Bell64.
inline std::string theorem_name(const PrincipleGraph& g, const std::string& name) {
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    for (const auto& t : g.theorems)
        if (lower(t.name) == lower(name)) return t.name;
    throw PreconditionError("unknown theorem '" + name + "'");
}

inline Consistency consistent(const PrincipleGraph& g, const Position& pos, const std::vector<std::string>& falsified) {
    std::vector<const Theorem*> ts;
    for (const auto& name : falsified) ts.push_back(&g.theorem(theorem_name(g, name)));
    const NameSet cl = closure(g, pos);
    Consistency out;
    for (const Theorem* t : ts)
        for (const auto& b : t->bundles)
            if (std::includes(cl.begin(), cl.end(), b.begin(), b.end())) out.violated.push_back({t->name, b});
    out.ok = out.violated.empty();
    return out;
}

namespace detail {

inline bool name_set_less(const NameSet& l, const NameSet& r) {
    if (l.size() != r.size()) return l.size() < r.size();
    return std::lexicographical_compare(l.begin(), l.end(), r.begin(), r.end());
}

}  // namespace detail

/// Every inclusion-minimal retraction R of the held set that restores consistency, ordered by
/// size and then lexicographically.
inline std::vector<NameSet> minimal_repairs(const PrincipleGraph& g, const Position& pos,
                                            const std::vector<std::string>& falsified) {
    require_position(g, pos);
    for (const auto& name : falsified) theorem_name(g, name);
    const std::vector<std::string> held(pos.held.begin(), pos.held.end());
    if (held.size() > 20) throw CapExceeded("minimal_repairs searches at most 20 held principles");
    const std::size_t total = std::size_t{1} << held.size();
    std::vector<char> works(total, 0);
    parallel_for(total, [&](std::size_t mask) {
        Position rest;
        for (std::size_t i = 0; i < held.size(); ++i)
            if (!(mask & (std::size_t{1} << i))) rest.held.insert(held[i]);
        works[mask] = consistent(g, rest, falsified).ok ? 1 : 0;
    });
    std::vector<NameSet> out;
    for (std::size_t mask = 0; mask < total; ++mask) {
        if (!works[mask]) continue;
        bool minimal = true;
        for (std::size_t i = 0; i < held.size() && minimal; ++i)
            if ((mask & (std::size_t{1} << i)) && works[mask & ~(std::size_t{1} << i)]) minimal = false;
        if (!minimal) continue;
        NameSet r;
        for (std::size_t i = 0; i < held.size(); ++i)
            if (mask & (std::size_t{1} << i)) r.insert(held[i]);
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), detail::name_set_less);
    return out;
}

/// The quantum-causal-model camp: keeps the causal principles, drops decorrelating explanation,
/// predetermination and (as derived) local causality.
inline Position qcm_position() {
    return {{"AOE", "SpaceTime", "PCC", "IndependentInterventions", "TemporalCausalArrow", "RelativisticCausality"}};
}

/// Full commitment: every basic principle, plus NoSuperdeterminism and Locality held outright
/// (both are also derivable).
inline Position full_position() {
    return {{"AOE", "SpaceTime", "NoSuperdeterminism", "Locality", "Predetermination", "PCC", "DecorrelatingExplanation",
             "TemporalCausalArrow", "RelativisticCausality", "IndependentInterventions"}};
}

}  // namespace lfgeo::principles
