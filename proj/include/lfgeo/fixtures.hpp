#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lfgeo/causal.hpp"
#include "lfgeo/coordinates.hpp"
#include "lfgeo/json_io.hpp"
#include "lfgeo/polytope.hpp"
#include "lfgeo/principles.hpp"
#include "lfgeo/quantum.hpp"
#include "lfgeo/simplex.hpp"

namespace lfgeo::fixtures {

using io::Json;

inline std::string default_dir() {
#ifdef LFGEO_SOURCE_DIR
    return std::string(LFGEO_SOURCE_DIR) + "/fixtures";
#else
    return "fixtures";
#endif
}

inline Json load(const std::string& name, const std::string& dir = default_dir()) {
    const std::string path = dir + "/" + name;
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open fixture " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError("fixture " + path + " is not valid JSON: " + e.what());
    }
}

/// Writes `j` with one-space indentation, or compactly when `indent` is negative.
inline void save(const Json& j, const std::string& name, const std::string& dir = default_dir(), int indent = 1) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name);
    if (!out) throw StructuralError("cannot write fixture " + dir + "/" + name);
    out << j.dump(indent) << "\n";
}

// ---------------------------------------------------------------------------------------------
// Oracles

/// The 8 non-positivity LHV facets of the 2x2 binary scenario moved onto Alice settings
/// (x1, x2) and Bob settings (y1, y2) of a larger binary scenario.
inline std::vector<Inequality> embedded_chsh_family(const Scenario& sc, int x1, int x2, int y1, int y2) {
    const Scenario small = binary_scenario(2);
    std::vector<Inequality> out;
    for (const auto& f : enumerate_facets(PolytopeKind::LHV, small)) {
        if (f.bound == 0) continue;  // positivity
        auto g = Inequality::zeros(sc);
        g.bound = f.bound;
        small.for_each([&](int a, int b, int x, int y) { g.coeff(a, b, x == 1 ? x1 : x2, y == 1 ? y1 : y2) = f.coeff(a, b, x, y); });
        g.name = "chsh-" + std::to_string(out.size() + 1);
        out.push_back(std::move(g));
    }
    return out;
}

/// Maximizer of `target` over the no-signalling polytope cut by `extra` (all <= in p-space),
/// when its value exceeds the target's bound.
inline std::optional<RationalBehavior> ns_violation(const Inequality& target, const std::vector<Inequality>& extra) {
    const Scenario& sc = target.scenario;
    const NsCoordinates cg(sc);
    std::vector<std::vector<Rational>> rows;
    std::vector<Rational> rhs;
    for (const auto& h : detail::positivity_in_coordinates(cg)) {
        rows.push_back(h.normal);
        rhs.push_back(h.offset);
    }
    for (const auto& e : extra) {
        const auto le = e.as_less_equal();
        auto [g, off] = cg.functional_in_coordinates(le.coeffs);
        rows.push_back(std::move(g));
        rhs.push_back(le.bound - off);
    }
    const auto le = target.as_less_equal();
    auto [g, off] = cg.functional_in_coordinates(le.coeffs);
    const auto sup = lp::support_exact(rows, rhs, g, le.bound - off);
    if (sup.implied || sup.x.empty()) return std::nullopt;
    return cg.from_coordinates(sup.x);
}

/// First LF vertex candidate that lies outside LHV.
inline RationalBehavior lf_vertex_outside_lhv(const Scenario& sc) {
    for (const auto& v : lf_vertex_candidates(sc))
        if (!membership(PolytopeKind::LHV, v).inside) return v;
    throw InternalError("every LF vertex candidate is local");
}

/// LF facets that are neither positivity constraints nor LHV facets.
inline std::vector<Inequality> genuine_lf_facets(const std::vector<Inequality>& lf, const std::vector<Inequality>& lhv) {
    std::vector<Inequality> out;
    for (const auto& f : lf) {
        if (std::binary_search(lhv.begin(), lhv.end(), f, lexicographic_less)) continue;
        out.push_back(f);
    }
    return out;
}

/// The quantum CHSH point: singlet, friends in the z basis, Alice (0, pi/2), Bob (5pi/4, 3pi/4),
/// rationalized with denominators up to `max_den`.
inline RationalBehavior quantum_chsh_behavior(std::int64_t max_den = 1'000'000) {
    using namespace quantum;
    const auto f = born_behavior(singlet(), {{0, 0}, {kPi / 2, 0}}, {{5 * kPi / 4, 0}, {3 * kPi / 4, 0}});
    return rationalize_behavior(f, max_den);
}

/// LF facets as the double-description hull of the LF vertex set. Independent of the
/// projection route and much faster on 3x3.
inline std::vector<Inequality> lf_facets_by_hull(const Scenario& sc) {
    const NsCoordinates cg(sc);
    std::vector<std::vector<Rational>> pts;
    for (const auto& v : lf_vertex_candidates(sc)) pts.push_back(cg.to_coordinates(v));
    return detail::to_canonical_facets(cg, dd::hull_facets(pts), "lf");
}

/// Quantum violation of a facet: optimizer from a seed plus grid cross-check.
struct QuantumViolation {
    quantum::OptimizeResult opt;
    quantum::GridResult grid;
};

inline QuantumViolation quantum_violation(const Inequality& facet, int steps, std::uint64_t seed, int resolution) {
    return {quantum::optimize_violation(facet, steps, seed), quantum::tsirelson_grid(facet, resolution)};
}

// ---------------------------------------------------------------------------------------------
// Regeneration

struct RegenOptions {
    std::string dir = default_dir();
    bool include_projection_3x3 = false;  // Fourier-Motzkin on the 3x3 LF system (hours)
    std::function<void(const std::string&)> log;
};

inline Json facet_list_json(const std::vector<Inequality>& facets) { return io::to_json(facets); }

inline void save_facets(const std::vector<Inequality>& facets, const std::string& name, const std::string& dir) {
    save(facet_list_json(facets), name, dir, -1);
}

inline std::vector<Inequality> load_facets(const std::string& name, const std::string& dir = default_dir()) {
    return io::inequalities_from_json(load(name, dir));
}

inline void regen(const RegenOptions& opt) {
    auto say = [&](const std::string& s) {
        if (opt.log) opt.log(s);
    };
    const Scenario s2 = binary_scenario(2), s3 = binary_scenario(3);

    say("facets 2x2");
    const auto lhv2 = enumerate_facets(PolytopeKind::LHV, s2);
    const auto lf2 = enumerate_facets(PolytopeKind::LF, s2);
    const auto ns2 = enumerate_facets(PolytopeKind::NS, s2);
    save_facets(lhv2, "lhv_facets_2x2.json", opt.dir);
    save_facets(lf2, "lf_facets_2x2.json", opt.dir);
    save_facets(ns2, "ns_facets_2x2.json", opt.dir);
    save(Json{{"lf_equals_lhv", lf2 == lhv2}, {"lf_count", lf2.size()}, {"lhv_count", lhv2.size()}}, "two_setting_lf.json", opt.dir);

    say("pr box LF verdict");
    {
        const auto pr = pr_box(s2);
        const auto r = membership(PolytopeKind::LF, pr);
        save(Json{{"behavior", io::to_json(pr)}, {"membership", io::to_json(r)}, {"certificate_valid", certificate_valid(r, pr)}},
             "pr_box_lf_2x2.json", opt.dir);
    }

    say("facets 3x3 (LHV, NS)");
    const auto lhv3 = enumerate_facets(PolytopeKind::LHV, s3);
    save_facets(lhv3, "lhv_facets_3x3.json", opt.dir);
    save_facets(enumerate_facets(PolytopeKind::NS, s3), "ns_facets_3x3.json", opt.dir);

    std::vector<Inequality> lf3;
    if (opt.include_projection_3x3) {
        say("facets 3x3 (LF, Fourier-Motzkin)");
        lf3 = enumerate_facets(PolytopeKind::LF, s3);
        if (lf3 != lf_facets_by_hull(s3)) throw InternalError("projected LF facets disagree with the vertex hull");
    } else {
        say("facets 3x3 (LF, hull of LF vertices)");
        lf3 = lf_facets_by_hull(s3);
    }
    save_facets(lf3, "lf_facets_3x3.json", opt.dir);

    say("strict inclusions 3x3");
    {
        const auto v = lf_vertex_outside_lhv(s3);
        const auto in_lf = membership(PolytopeKind::LF, v);
        const auto out_lhv = membership(PolytopeKind::LHV, v);
        save(Json{{"behavior", io::to_json(v)}, {"lf", io::to_json(in_lf)}, {"lhv", io::to_json(out_lhv)}}, "lf_outside_lhv_3x3.json",
             opt.dir);
    }
    {
        const auto local23 = embedded_chsh_family(s3, 2, 3, 2, 3);
        std::optional<RationalBehavior> found;
        Inequality violated;
        for (const auto& f : genuine_lf_facets(lf3, lhv3)) {
            if ((found = ns_violation(f, local23))) {
                violated = f;
                break;
            }
        }
        if (!found)
            for (const auto& f : lf3)
                if ((found = ns_violation(f, local23))) {
                    violated = f;
                    break;
                }
        if (!found) throw InternalError("no NS behavior local on settings {2,3} violates an LF facet");
        const auto r = membership(PolytopeKind::LF, *found);
        save(Json{{"behavior", io::to_json(*found)}, {"violated_facet", io::to_json(violated)}, {"lf", io::to_json(r)}},
             "ns_outside_lf_3x3.json", opt.dir);
    }

    say("quantum violation of a genuine LF facet");
    {
        // Screen every genuine facet on a coarse grid, then confirm the best few properly.
        const auto genuine = genuine_lf_facets(lf3, lhv3);
        std::vector<std::pair<double, std::size_t>> screened;
        for (std::size_t i = 0; i < genuine.size(); ++i) {
            const auto g = quantum::tsirelson_grid(genuine[i], 24);
            screened.emplace_back(g.value - to_double(genuine[i].bound), i);
        }
        std::stable_sort(screened.begin(), screened.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
        bool stored = false;
        for (std::size_t k = 0; k < std::min<std::size_t>(screened.size(), 10) && !stored; ++k) {
            const auto& f = genuine[screened[k].second];
            const auto qv = quantum_violation(f, 60, 20240601, 360);
            const double bound = to_double(f.bound);
            if (!(qv.opt.value > bound) || std::abs(qv.opt.value - qv.grid.value) > 2e-3) continue;
            const auto rational = rationalize_behavior(quantum::ewfs_behavior(qv.opt.config), 1'000'000);
            const auto lf = membership(PolytopeKind::LF, rational);
            if (lf.inside) continue;
            save(Json{{"facet", io::to_json(f)},
                      {"optimizer", io::to_json(qv.opt, f.name)},
                      {"grid", io::to_json(qv.grid, f.name)},
                      {"rationalized_behavior", io::to_json(rational)},
                      {"lf", io::to_json(lf)}},
                 "quantum_lf_violation_3x3.json", opt.dir);
            stored = true;
        }
        if (!stored) throw InternalError("no genuine LF facet passed the quantum cross-check");
    }

    say("tsirelson");
    {
        const auto chsh = chsh_inequality(s2);
        const auto o = quantum::optimize_violation(chsh, 50, 7);
        const auto g = quantum::tsirelson_grid(chsh, 360);
        save(Json{{"optimizer", io::to_json(o, "chsh")}, {"grid", io::to_json(g, "chsh")}}, "tsirelson_chsh.json", opt.dir);
    }

    say("causal");
    {
        const auto g = causal::bell_dag(4);
        std::mt19937_64 rng(1234);
        const auto d = causal::markov_joint(g, causal::random_cpts(g, rng));
        const auto rep = causal::faithfulness_check(g, d, Rational(0));
        save(Json{{"seed", 1234}, {"dag", io::to_json(g)}, {"faithfulness", io::to_json(rep)}}, "faithful_bell_dag.json", opt.dir);

        Json scans = Json::object();
        for (const auto& [name, b] : std::vector<std::pair<std::string, RationalBehavior>>{{"quantum_chsh", quantum_chsh_behavior()},
                                                                                           {"pr_box", pr_box(s2)}}) {
            const auto rep2 = causal::bell_dag_scan(b);
            std::size_t unable = 0, tuned = 0;
            for (const auto& r : rep2.rows) {
                if (r.classification == causal::ScanClass::UnableToReproduce) ++unable;
                if (r.classification == causal::ScanClass::FineTuned) ++tuned;
            }
            scans[name] = Json{{"dags", rep2.rows.size()},
                               {"unable_to_reproduce", unable},
                               {"fine_tuned", tuned},
                               {"faithful_reproducing", rep2.faithful_reproducing}};
        }
        save(scans, "bell_dag_scan.json", opt.dir);
    }

    say("principles");
    {
        using namespace principles;
        const auto g = default_graph();
        auto repairs = [&](const Position& p, const std::vector<std::string>& f) {
            Json arr = Json::array();
            for (const auto& r : minimal_repairs(g, p, f)) arr.push_back(r);
            return arr;
        };
        const std::vector<std::string> all{"Bell64", "Bell76", "LF"};
        save(Json{{"qcm", qcm_position().held},
                  {"full", full_position().held},
                  {"qcm_lf", repairs(qcm_position(), {"LF"})},
                  {"qcm_all", repairs(qcm_position(), all)},
                  {"full_all", repairs(full_position(), all)},
                  {"closure_causal_core",
                   closure(g, Position{{"TemporalCausalArrow", "RelativisticCausality", "IndependentInterventions", "PCC"}})}},
             "minimal_repairs.json", opt.dir);
    }
}

}  // namespace lfgeo::fixtures
