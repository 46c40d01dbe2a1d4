#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lfgeo/behavior.hpp"
#include "lfgeo/causal.hpp"
#include "lfgeo/error.hpp"
#include "lfgeo/polytope.hpp"
#include "lfgeo/principles.hpp"
#include "lfgeo/quantum.hpp"
#include "lfgeo/rational.hpp"

namespace lfgeo::io {

using Json = nlohmann::ordered_json;

namespace detail {

// Integers that fit in 64 bits are written as JSON numbers, larger ones as decimal strings.
inline Json integer_to_json(const Integer& v) {
    if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
        return v.convert_to<std::int64_t>();
    return v.str();
}

inline Integer integer_from_json(const Json& j, const char* what) {
    if (j.is_number_integer()) return Integer(j.get<std::int64_t>());
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
        if (s.size() == start || s.find_first_not_of("0123456789", start) != std::string::npos)
            throw StructuralError(std::string("'") + what + "' is not an integer");
        return Integer(s);
    }
    throw StructuralError(std::string("'") + what + "' must be an integer");
}

inline const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw StructuralError(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <class T>
T get(const Json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw StructuralError(std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Rationals, scenarios, behaviors, inequalities

inline Json to_json(const Rational& r) {
    return Json{{"num", detail::integer_to_json(numerator_of(r))}, {"den", detail::integer_to_json(denominator_of(r))}};
}

inline Rational rational_from_json(const Json& j) {
    const Integer num = detail::integer_from_json(detail::field(j, "num"), "num");
    const Integer den = detail::integer_from_json(detail::field(j, "den"), "den");
    if (den == 0) throw StructuralError("zero denominator");
    return Rational(num, den);
}

inline Json to_json(const Scenario& sc) {
    return Json{{"x", sc.x_count}, {"y", sc.y_count}, {"a", sc.a_count}, {"b", sc.b_count}};
}

inline Scenario scenario_from_json(const Json& j) {
    Scenario sc{detail::get<int>(j, "x"), detail::get<int>(j, "y"), detail::get<int>(j, "a"), detail::get<int>(j, "b")};
    sc.validate();
    return sc;
}

/// Parses "x,y,a,b".
inline Scenario parse_scenario(const std::string& text) {
    std::vector<int> v;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string part = text.substr(pos, comma - pos);
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
            throw StructuralError("scenario must be four positive integers x,y,a,b");
        v.push_back(std::stoi(part));
        pos = comma + 1;
    }
    if (v.size() != 4) throw StructuralError("scenario must be four positive integers x,y,a,b");
    Scenario sc{v[0], v[1], v[2], v[3]};
    sc.validate();
    return sc;
}

namespace detail {

template <class F>
Json table_entries(const Scenario& sc, F&& value) {
    Json arr = Json::array();
    sc.for_each([&](int a, int b, int x, int y) {
        Json e{{"a", a}, {"b", b}, {"x", x}, {"y", y}};
        const Json cell = value(sc.index(a, b, x, y));
        for (auto it = cell.begin(); it != cell.end(); ++it) e[it.key()] = *it;
        arr.push_back(std::move(e));
    });
    return arr;
}

inline std::vector<Rational> rational_table(const Scenario& sc, const Json& arr, const char* key) {
    if (!arr.is_array()) throw StructuralError(std::string("'") + key + "' must be an array");
    std::vector<Entry<Rational>> entries;
    for (const auto& e : arr)
        entries.push_back({get<int>(e, "a"), get<int>(e, "b"), get<int>(e, "x"), get<int>(e, "y"), rational_from_json(e)});
    return RationalBehavior::from_entries(sc, entries).table();
}

}  // namespace detail

inline Json to_json(const RationalBehavior& b) {
    return Json{{"scenario", to_json(b.scenario())},
                {"p", detail::table_entries(b.scenario(), [&](std::size_t i) { return to_json(b.table()[i]); })}};
}

/// Float tables carry a "value" per entry instead of num/den.
inline Json to_json(const FloatBehavior& b) {
    return Json{{"scenario", to_json(b.scenario())},
                {"p", detail::table_entries(b.scenario(), [&](std::size_t i) { return Json{{"value", b.table()[i]}}; })}};
}

inline RationalBehavior behavior_from_json(const Json& j) {
    const Scenario sc = scenario_from_json(detail::field(j, "scenario"));
    return RationalBehavior(sc, detail::rational_table(sc, detail::field(j, "p"), "p"));
}

inline Json to_json(const Inequality& ineq) {
    Json j{{"scenario", to_json(ineq.scenario)}};
    if (!ineq.name.empty()) j["name"] = ineq.name;
    j["coeffs"] = detail::table_entries(ineq.scenario, [&](std::size_t i) { return to_json(ineq.coeffs[i]); });
    j["bound"] = to_json(ineq.bound);
    j["sense"] = to_string(ineq.sense);
    return j;
}

inline Inequality inequality_from_json(const Json& j) {
    const Scenario sc = scenario_from_json(detail::field(j, "scenario"));
    const std::string sense = detail::get<std::string>(j, "sense");
    if (sense != "<=" && sense != ">=") throw StructuralError("sense must be \"<=\" or \">=\"");
    Inequality out(sc, detail::rational_table(sc, detail::field(j, "coeffs"), "coeffs"),
                   rational_from_json(detail::field(j, "bound")), sense == "<=" ? Sense::LessEqual : Sense::GreaterEqual);
    if (j.contains("name")) out.name = detail::get<std::string>(j, "name");
    return out;
}

/// Accepts a single inequality object, an array of them, or {"inequalities": [...]}.
inline std::vector<Inequality> inequalities_from_json(const Json& j) {
    std::vector<Inequality> out;
    const Json* arr = &j;
    if (j.is_object() && j.contains("inequalities")) arr = &j.at("inequalities");
    if (arr->is_array()) {
        for (const auto& e : *arr) out.push_back(inequality_from_json(e));
    } else {
        out.push_back(inequality_from_json(*arr));
    }
    return out;
}

inline Json to_json(const std::vector<Inequality>& list) {
    Json arr = Json::array();
    for (const auto& f : list) arr.push_back(to_json(f));
    return Json{{"count", list.size()}, {"inequalities", std::move(arr)}};
}

// ---------------------------------------------------------------------------------------------
// Polytope results

inline Json to_json(const DeterministicStrategy& s) { return Json{{"alice", s.alice_map}, {"bob", s.bob_map}}; }

inline Json to_json(const MembershipResult& r) {
    Json j{{"kind", to_string(r.kind)}, {"inside", r.inside}};
    if (!r.decomposition.empty()) {
        Json arr = Json::array();
        for (const auto& w : r.decomposition) arr.push_back(Json{{"strategy", to_json(w.strategy)}, {"weight", to_json(w.weight)}});
        j["decomposition"] = std::move(arr);
    }
    if (r.extension) {
        const Scenario& sc = r.extension->scenario();
        Json arr = Json::array();
        sc.for_each([&](int a, int b, int x, int y) {
            for (int c = 1; c <= sc.a_count; ++c)
                for (int d = 1; d <= sc.b_count; ++d) {
                    const Rational& v = (*r.extension)(a, b, c, d, x, y);
                    if (v == 0) continue;
                    Json e{{"a", a}, {"b", b}, {"c", c}, {"d", d}, {"x", x}, {"y", y}};
                    e["num"] = detail::integer_to_json(numerator_of(v));
                    e["den"] = detail::integer_to_json(denominator_of(v));
                    arr.push_back(std::move(e));
                }
        });
        j["extension"] = std::move(arr);
    }
    if (r.separator) j["separator"] = to_json(*r.separator);
    return j;
}

inline std::string slice_csv(const SliceData& s) {
    std::string out = "kind,theta_index,f1,f2\n";
    char buf[64];
    for (const auto& [kind, pts] : s.polygons)
        for (const auto& p : pts) {
            out += to_string(kind) + "," + std::to_string(p.theta_index) + ",";
            std::snprintf(buf, sizeof buf, "%.12g", to_double(p.f1));
            out += buf;
            out += ",";
            std::snprintf(buf, sizeof buf, "%.12g", to_double(p.f2));
            out += buf;
            out += "\n";
        }
    return out;
}

inline Json to_json(const SliceData& s) {
    Json polys = Json::array();
    for (const auto& [kind, pts] : s.polygons) {
        Json arr = Json::array();
        for (const auto& p : pts) arr.push_back(Json{{"theta_index", p.theta_index}, {"f1", to_json(p.f1)}, {"f2", to_json(p.f2)}});
        polys.push_back(Json{{"kind", to_string(kind)}, {"points", std::move(arr)}});
    }
    return Json{{"resolution", s.resolution}, {"f1", to_json(s.f1)}, {"f2", to_json(s.f2)}, {"polygons", std::move(polys)}};
}

// ---------------------------------------------------------------------------------------------
// Quantum

inline Json to_json(const quantum::QubitMeasurement& m) { return Json{{"theta", m.theta}, {"phi", m.phi}}; }

inline quantum::QubitMeasurement measurement_from_json(const Json& j) {
    return {detail::get<double>(j, "theta"), detail::get<double>(j, "phi")};
}

inline Json to_json(const quantum::PureState& s) {
    Json amps = Json::array();
    for (const auto& a : s.amplitudes) amps.push_back(Json::array({a.real(), a.imag()}));
    return Json{{"qubits", s.qubit_count}, {"amplitudes", std::move(amps)}};
}

inline quantum::PureState state_from_json(const Json& j) {
    const auto& arr = detail::field(j, "amplitudes");
    if (!arr.is_array()) throw StructuralError("'amplitudes' must be an array of [re, im] pairs");
    std::vector<quantum::Complex> amps;
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw StructuralError("amplitudes must be [re, im] pairs");
        amps.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return quantum::PureState(std::move(amps), detail::get<int>(j, "qubits"));
}

inline Json to_json(const quantum::EwfsConfig& c) {
    Json alice = Json::array(), bob = Json::array();
    for (const auto& m : c.alice_settings) alice.push_back(to_json(m));
    for (const auto& m : c.bob_settings) bob.push_back(to_json(m));
    return Json{{"state", to_json(c.shared_state)},
                {"charlie", to_json(c.charlie_basis)},
                {"debbie", to_json(c.debbie_basis)},
                {"alice", std::move(alice)},
                {"bob", std::move(bob)}};
}

inline quantum::EwfsConfig ewfs_config_from_json(const Json& j) {
    quantum::EwfsConfig c;
    c.shared_state = state_from_json(detail::field(j, "state"));
    c.charlie_basis = measurement_from_json(detail::field(j, "charlie"));
    c.debbie_basis = measurement_from_json(detail::field(j, "debbie"));
    for (const auto& m : detail::field(j, "alice")) c.alice_settings.push_back(measurement_from_json(m));
    for (const auto& m : detail::field(j, "bob")) c.bob_settings.push_back(measurement_from_json(m));
    c.validate();
    return c;
}

inline Json to_json(const quantum::OptimizeResult& r, const std::string& ineq_id) {
    return Json{{"value", r.value},   {"config", to_json(r.config)}, {"ineq_id", ineq_id},
                {"seed", r.seed},     {"steps", r.steps},            {"history", r.history}};
}

inline Json to_json(const quantum::GridResult& g, const std::string& ineq_id) {
    return Json{{"value", g.value},
                {"ineq_id", ineq_id},
                {"resolution", g.resolution},
                {"alice_index", g.alice_index},
                {"bob_index", g.bob_index},
                {"alice_angles", g.alice_angles()},
                {"bob_angles", g.bob_angles()}};
}

// ---------------------------------------------------------------------------------------------
// Causal models

inline Json to_json(const causal::CausalDag& g) {
    Json nodes = Json::array(), edges = Json::array();
    for (const auto& n : g.nodes())
        nodes.push_back(Json{{"name", n.name}, {"kind", n.kind == causal::NodeKind::Latent ? "latent" : "observed"}, {"card", n.cardinality}});
    for (const auto& [u, v] : g.edges()) edges.push_back(Json::array({u, v}));
    return Json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline causal::CausalDag dag_from_json(const Json& j) {
    std::vector<causal::Node> nodes;
    for (const auto& n : detail::field(j, "nodes")) {
        causal::Node node;
        node.name = detail::get<std::string>(n, "name");
        const std::string kind = n.contains("kind") ? detail::get<std::string>(n, "kind") : "observed";
        if (kind != "observed" && kind != "latent") throw StructuralError("node kind must be observed or latent");
        node.kind = kind == "latent" ? causal::NodeKind::Latent : causal::NodeKind::Observed;
        node.cardinality = n.contains("card") ? detail::get<int>(n, "card") : 2;
        nodes.push_back(std::move(node));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : detail::field(j, "edges")) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            throw StructuralError("edges must be [from, to] name pairs");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return causal::CausalDag(std::move(nodes), std::move(edges));
}

/// {"nodes":[{"name","card"}...], "table":[{"num","den"}...]} with the first node slowest.
inline causal::JointDistribution<Rational> joint_from_json(const Json& j) {
    std::vector<std::string> names;
    std::vector<int> cards;
    for (const auto& n : detail::field(j, "nodes")) {
        names.push_back(detail::get<std::string>(n, "name"));
        cards.push_back(n.contains("card") ? detail::get<int>(n, "card") : 2);
    }
    std::vector<Rational> table;
    for (const auto& e : detail::field(j, "table")) table.push_back(rational_from_json(e));
    return causal::JointDistribution<Rational>(std::move(names), std::move(cards), std::move(table));
}

inline Json to_json(const causal::JointDistribution<Rational>& d) {
    Json nodes = Json::array(), table = Json::array();
    for (std::size_t i = 0; i < d.names().size(); ++i) nodes.push_back(Json{{"name", d.names()[i]}, {"card", d.cards()[i]}});
    for (const auto& v : d.table()) table.push_back(to_json(v));
    return Json{{"nodes", std::move(nodes)}, {"table", std::move(table)}};
}

inline Json to_json(const causal::CiStatement& s) { return Json{{"a", s.a}, {"b", s.b}, {"z", s.z}}; }

inline causal::CiStatement ci_from_json(const Json& j) {
    return causal::CiStatement(detail::get<std::vector<std::string>>(j, "a"), detail::get<std::vector<std::string>>(j, "b"),
                               j.contains("z") ? detail::get<std::vector<std::string>>(j, "z") : std::vector<std::string>{});
}

inline Json to_json(const std::vector<causal::CmcNodeReport<Rational>>& rep) {
    Json nodes = Json::array();
    for (const auto& r : rep) nodes.push_back(Json{{"node", r.node}, {"passes", r.passes}, {"residual", to_json(r.residual)}});
    return Json{{"passes", causal::cmc_passes(rep)}, {"nodes", std::move(nodes)}};
}

inline Json to_json(const causal::FaithfulnessReport& r) {
    Json extra = Json::array(), missing = Json::array();
    for (const auto& s : r.extra_cis) extra.push_back(to_json(s));
    for (const auto& s : r.missing_cis) missing.push_back(to_json(s));
    return Json{{"holds", r.holds}, {"extra_cis", std::move(extra)}, {"missing_cis", std::move(missing)}};
}

// ---------------------------------------------------------------------------------------------
// Principles

inline Json to_json(const principles::PrincipleGraph& g) {
    Json rules = Json::array(), theorems = Json::array();
    for (const auto& r : g.rules) rules.push_back(Json{{"premises", r.premises}, {"conclusion", r.conclusion}, {"note", r.note}});
    for (const auto& t : g.theorems) theorems.push_back(Json{{"name", t.name}, {"bundles", t.bundles}});
    return Json{{"principles", g.principles}, {"rules", std::move(rules)}, {"theorems", std::move(theorems)}};
}

inline principles::PrincipleGraph graph_from_json(const Json& j) {
    principles::PrincipleGraph g;
    g.principles = detail::get<principles::NameSet>(j, "principles");
    for (const auto& r : detail::field(j, "rules"))
        g.rules.push_back({detail::get<principles::NameSet>(r, "premises"), detail::get<std::string>(r, "conclusion"),
                           r.contains("note") ? detail::get<std::string>(r, "note") : std::string()});
    for (const auto& t : detail::field(j, "theorems"))
        g.theorems.push_back({detail::get<std::string>(t, "name"), detail::get<std::vector<principles::NameSet>>(t, "bundles")});
    g.validate();
    return g;
}

/// Accepts {"held": [...]} or a bare array of names.
inline principles::Position position_from_json(const Json& j) {
    if (j.is_array()) {
        try {
            return {j.get<principles::NameSet>()};
        } catch (const nlohmann::json::exception&) {
            throw StructuralError("position must be an array of principle names");
        }
    }
    return {detail::get<principles::NameSet>(j, "held")};
}

inline Json to_json(const principles::Position& p) { return Json{{"held", p.held}}; }

inline Json to_json(const principles::Consistency& c) {
    Json v = Json::array();
    for (const auto& x : c.violated) v.push_back(Json::array({x.theorem, x.bundle}));
    return Json{{"ok", c.ok}, {"violated", std::move(v)}};
}

/// Repairs, each echoed with the rules whose premises it touches.
inline Json repairs_to_json(const principles::PrincipleGraph& g, const std::vector<principles::NameSet>& repairs) {
    Json arr = Json::array();
    for (const auto& r : repairs) {
        Json rules = Json::array();
        for (const auto& rule : g.rules)
            for (const auto& p : rule.premises)
                if (r.count(p)) {
                    rules.push_back(Json{{"premises", rule.premises}, {"conclusion", rule.conclusion}, {"note", rule.note}});
                    break;
                }
        arr.push_back(Json{{"retract", r}, {"rules", std::move(rules)}});
    }
    return arr;
}

}  // namespace lfgeo::io
