#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lfgeo/fixtures.hpp"

using namespace lfgeo;
using io::Json;

namespace {

constexpr const char* kVersion = "0.3.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StructuralError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string out;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        out += buf;
    }
    return out;
}

struct Run {
    std::vector<std::string> argv;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Json load(const std::string& path) {
        const std::string text = read_file(path);
        inputs.emplace_back(path, sha256_hex(text));
        try {
            return Json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw StructuralError("malformed JSON in '" + path + "': " + e.what());
        }
    }

    void emit(const std::string& body) {
        if (out.empty()) {
            std::cout << body;
            return;
        }
        write(out, body);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        Json in = Json::array();
        for (const auto& [p, d] : inputs) in.push_back(Json{{"path", p}, {"sha256", d}});
        Json m{{"command_line", argv},
               {"seed", seed ? Json(*seed) : Json(nullptr)},
               {"tool_version", kVersion},
               {"inputs", std::move(in)},
               {"output", Json{{"path", out}, {"sha256", sha256_hex(body)}}},
               {"wall_time_seconds", wall}};
        write(out + ".manifest.json", m.dump(2) + "\n");
    }

    void emit(const Json& j) { emit(j.dump(2) + "\n"); }

    static void write(const std::string& path, const std::string& body) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw StructuralError("cannot write '" + path + "'");
        f << body;
    }
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

Inequality load_inequality(Run& run, const std::string& path) { return io::inequality_from_json(run.load(path)); }

std::string ineq_id(const Inequality& f, const std::string& path) { return f.name.empty() ? path : f.name; }

principles::Position load_position(Run& run, const std::string& spec) {
    if (spec == "qcm") return principles::qcm_position();
    if (spec == "full") return principles::full_position();
    return io::position_from_json(run.load(spec));
}

Json error_json(const char* type, const std::string& msg) { return Json{{"error", Json{{"type", type}, {"message", msg}}}}; }

}  // namespace

int main(int argc, char** argv) {
    Run run;
    run.argv.assign(argv, argv + argc);

    CLI::App app{"Local friendliness toolkit: behavior polytopes, EWFS simulation, causal models, principle graphs"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);
    app.add_option("--out", run.out, "Output path (a manifest is written next to it); stdout when omitted");

    std::function<void()> action;

    // polytope ------------------------------------------------------------------------------
    auto* poly = app.add_subcommand("polytope", "Vertices, facets, membership, optimization and slices");
    poly->require_subcommand(1);
    std::string scenario_text = "2,2,2,2", kind_text = "lhv", kinds_text = "lhv,lf,ns", behavior_path, ineq_path, f1_path,
                f2_path, format = "json";
    double cap = 0;
    int resolution = 64;

    auto* pv = poly->add_subcommand("vertices", "Deterministic LHV vertices");
    pv->add_option("--scenario", scenario_text, "x,y,a,b counts")->capture_default_str();
    pv->add_option("--cap", cap, "Maximum number of deterministic strategies");
    pv->callback([&] {
        action = [&] {
            PolytopeCaps caps;
            if (cap > 0) caps.max_strategies = cap;
            const Scenario sc = io::parse_scenario(scenario_text);
            Json arr = Json::array();
            for (const auto& s : all_deterministic_strategies(sc, caps.max_strategies)) arr.push_back(io::to_json(s));
            run.emit(Json{{"scenario", io::to_json(sc)}, {"count", arr.size()}, {"vertices", std::move(arr)}});
        };
    });

    auto* pf = poly->add_subcommand("facets", "Complete irredundant facet list");
    pf->add_option("--kind", kind_text, "lhv, lf or ns")->capture_default_str();
    pf->add_option("--scenario", scenario_text, "x,y,a,b counts")->capture_default_str();
    pf->add_option("--cap", cap, "Bound on intermediate inequality rows");
    pf->callback([&] {
        action = [&] {
            PolytopeCaps caps;
            if (cap > 0) caps.max_rows = static_cast<std::size_t>(cap);
            run.emit(io::to_json(enumerate_facets(parse_kind(kind_text), io::parse_scenario(scenario_text), caps)));
        };
    });

    auto* pm = poly->add_subcommand("member", "Exact membership with certificate");
    pm->add_option("--kind", kind_text, "lhv, lf or ns")->capture_default_str();
    pm->add_option("--behavior", behavior_path, "Behavior JSON")->required();
    pm->callback([&] {
        action = [&] { run.emit(io::to_json(membership(parse_kind(kind_text), io::behavior_from_json(run.load(behavior_path))))); };
    });

    auto* pmax = poly->add_subcommand("max", "Exact maximum of an inequality's left-hand side");
    pmax->add_option("--kind", kind_text, "lhv, lf or ns")->capture_default_str();
    pmax->add_option("--ineq", ineq_path, "Inequality JSON")->required();
    pmax->callback([&] {
        action = [&] {
            const auto f = load_inequality(run, ineq_path);
            const Rational v = max_over_polytope(parse_kind(kind_text), f);
            run.emit(Json{{"kind", to_string(parse_kind(kind_text))},
                          {"ineq_id", ineq_id(f, ineq_path)},
                          {"value", io::to_json(v)},
                          {"bound", io::to_json(f.as_less_equal().bound)}});
        };
    });

    auto* ps = poly->add_subcommand("slice", "Support points of 2D projections");
    ps->add_option("--kinds", kinds_text, "Comma-separated kinds")->capture_default_str();
    ps->add_option("--f1", f1_path, "First functional (inequality JSON)")->required();
    ps->add_option("--f2", f2_path, "Second functional (inequality JSON)")->required();
    ps->add_option("--resolution", resolution, "Number of directions")->capture_default_str();
    ps->add_option("--format", format, "json or csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
    ps->callback([&] {
        action = [&] {
            std::vector<PolytopeKind> kinds;
            for (const auto& k : split(kinds_text, ',')) kinds.push_back(parse_kind(k));
            const auto s = slice_2d(kinds, load_inequality(run, f1_path), load_inequality(run, f2_path), resolution);
            if (format == "csv")
                run.emit(io::slice_csv(s));
            else
                run.emit(io::to_json(s));
        };
    });

    // quantum -------------------------------------------------------------------------------
    auto* qu = app.add_subcommand("quantum", "EWFS simulation and violation search");
    qu->require_subcommand(1);
    std::string input_path, config_path;
    int steps = 50;
    std::uint64_t seed = 1;
    int grid_resolution = 360;

    auto* qb = qu->add_subcommand("born", "Born-rule behavior of a two-qubit state");
    qb->add_option("--input", input_path, "JSON {state, alice:[{theta,phi}], bob:[...]}")->required();
    qb->callback([&] {
        action = [&] {
            const Json j = run.load(input_path);
            std::vector<quantum::QubitMeasurement> al, bo;
            for (const auto& m : io::detail::field(j, "alice")) al.push_back(io::measurement_from_json(m));
            for (const auto& m : io::detail::field(j, "bob")) bo.push_back(io::measurement_from_json(m));
            run.emit(io::to_json(quantum::born_behavior(io::state_from_json(io::detail::field(j, "state")), al, bo)));
        };
    });

    auto* qe = qu->add_subcommand("ewfs", "Behavior of an extended Wigner's friend configuration");
    qe->add_option("--config", config_path, "EwfsConfig JSON")->required();
    qe->callback([&] { action = [&] { run.emit(io::to_json(quantum::ewfs_behavior(io::ewfs_config_from_json(run.load(config_path))))); }; });

    auto* qo = qu->add_subcommand("optimize", "Coordinate ascent of an inequality over EWFS configurations");
    qo->add_option("--ineq", ineq_path, "Inequality JSON")->required();
    qo->add_option("--steps", steps, "Sweeps")->capture_default_str();
    qo->add_option("--seed", seed, "Initialization seed")->capture_default_str();
    qo->callback([&] {
        action = [&] {
            run.seed = seed;
            const auto f = load_inequality(run, ineq_path);
            run.emit(io::to_json(quantum::optimize_violation(f, steps, seed), ineq_id(f, ineq_path)));
        };
    });

    auto* qg = qu->add_subcommand("grid", "Exhaustive z-x grid maximum on the singlet");
    qg->add_option("--ineq", ineq_path, "Inequality JSON")->required();
    qg->add_option("--resolution", grid_resolution, "Grid points per angle")->capture_default_str();
    qg->add_option("--cap", cap, "Maximum grid cells");
    qg->callback([&] {
        action = [&] {
            const auto f = load_inequality(run, ineq_path);
            run.emit(io::to_json(quantum::tsirelson_grid(f, grid_resolution, cap > 0 ? cap : 1e9), ineq_id(f, ineq_path)));
        };
    });

    // causal --------------------------------------------------------------------------------
    auto* ca = app.add_subcommand("causal", "DAGs, d-separation, Markov and faithfulness checks");
    ca->require_subcommand(1);
    std::string dag_path, dist_path, a_text, b_text, z_text;
    double tol = 0;
    int latent = 4;

    auto* cd = ca->add_subcommand("dsep", "d-separation test");
    cd->add_option("--dag", dag_path, "DAG JSON")->required();
    cd->add_option("--a", a_text, "Comma-separated node set")->required();
    cd->add_option("--b", b_text, "Comma-separated node set")->required();
    cd->add_option("--z", z_text, "Comma-separated conditioning set");
    cd->callback([&] {
        action = [&] {
            const auto g = io::dag_from_json(run.load(dag_path));
            const causal::CiStatement s(split(a_text, ','), split(b_text, ','), split(z_text, ','));
            run.emit(Json{{"statement", io::to_json(s)}, {"d_separated", causal::d_separated(g, s)}});
        };
    });

    auto tolerance = [&] { return best_rational(tol, 1'000'000'000'000LL); };

    auto* cc = ca->add_subcommand("cmc", "Causal Markov condition per node");
    cc->add_option("--dag", dag_path, "DAG JSON")->required();
    cc->add_option("--dist", dist_path, "Joint distribution JSON")->required();
    cc->add_option("--tol", tol, "Tolerance (0 = exact)")->capture_default_str();
    cc->callback([&] {
        action = [&] {
            const auto g = io::dag_from_json(run.load(dag_path));
            const auto d = io::joint_from_json(run.load(dist_path));
            const auto rep = causal::cmc_check(g, d, tolerance());
            run.emit(Json{{"passes", causal::cmc_passes(rep)}, {"nodes", io::to_json(rep)}});
        };
    });

    auto* cfa = ca->add_subcommand("faithful", "Faithfulness report on observed nodes");
    cfa->add_option("--dag", dag_path, "DAG JSON")->required();
    cfa->add_option("--dist", dist_path, "Joint distribution JSON")->required();
    cfa->add_option("--tol", tol, "Tolerance (0 = exact)")->capture_default_str();
    cfa->callback([&] {
        action = [&] {
            const auto g = io::dag_from_json(run.load(dag_path));
            run.emit(io::to_json(causal::faithfulness_check(g, io::joint_from_json(run.load(dist_path)), tolerance())));
        };
    });

    auto* cs = ca->add_subcommand("scan-bell", "Fine-tuning scan of the Bell DAG family");
    cs->add_option("--behavior", behavior_path, "2x2 behavior JSON")->required();
    cs->add_option("--latent", latent, "Latent cardinality (1..4)")->capture_default_str();
    cs->add_option("--format", format, "csv or json")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
    cs->callback([&] {
        action = [&] {
            const auto rep = causal::bell_dag_scan(io::behavior_from_json(run.load(behavior_path)), latent);
            if (format == "csv") {
                run.emit(causal::scan_csv(rep));
                return;
            }
            Json rows = Json::array();
            for (const auto& r : rep.rows) {
                Json edges = Json::array();
                for (const auto& [u, v] : r.edges) edges.push_back(Json::array({u, v}));
                rows.push_back(Json{{"dag_id", r.dag_id},
                                    {"edges", std::move(edges)},
                                    {"ns_implied", r.ns_implied},
                                    {"lhv_forced", r.lhv_forced},
                                    {"classification", causal::to_string(r.classification)}});
            }
            run.emit(Json{{"dags", rep.rows.size()},
                          {"behavior_in_lhv", rep.behavior_in_lhv},
                          {"faithful_reproducing", rep.faithful_reproducing},
                          {"dichotomy_holds", rep.dichotomy_holds()},
                          {"rows", std::move(rows)}});
        };
    });

    // principles ----------------------------------------------------------------------------
    auto* pr = app.add_subcommand("principles", "Implication graph, consistency and repairs");
    pr->require_subcommand(1);
    std::string position_spec, falsified_text, graph_path;
    auto graph = [&] {
        if (graph_path.empty()) return principles::default_graph();
        auto g = io::graph_from_json(run.load(graph_path));
        g.validate();
        return g;
    };

    auto* psh = pr->add_subcommand("show", "Print the implication graph");
    psh->add_option("--graph", graph_path, "Graph JSON (default: built-in)");
    psh->callback([&] { action = [&] { run.emit(io::to_json(graph())); }; });

    auto* pc = pr->add_subcommand("check", "Consistency of a position with falsified theorems");
    pc->add_option("--position", position_spec, "Position JSON, or qcm / full")->required();
    pc->add_option("--falsified", falsified_text, "Comma-separated theorem names")->required();
    pc->add_option("--graph", graph_path, "Graph JSON (default: built-in)");
    pc->callback([&] {
        action = [&] {
            const auto g = graph();
            run.emit(io::to_json(principles::consistent(g, load_position(run, position_spec), split(falsified_text, ','))));
        };
    });

    auto* prp = pr->add_subcommand("repair", "Inclusion-minimal retractions restoring consistency");
    prp->add_option("--position", position_spec, "Position JSON, or qcm / full")->required();
    prp->add_option("--falsified", falsified_text, "Comma-separated theorem names")->required();
    prp->add_option("--graph", graph_path, "Graph JSON (default: built-in)");
    prp->callback([&] {
        action = [&] {
            const auto g = graph();
            run.emit(io::repairs_to_json(g, principles::minimal_repairs(g, load_position(run, position_spec), split(falsified_text, ','))));
        };
    });

    // fixtures ------------------------------------------------------------------------------
    auto* fx = app.add_subcommand("fixtures", "Committed reference data");
    fx->require_subcommand(1);
    std::string fixture_dir = fixtures::default_dir();
    bool with_projection = false;
    auto* fr = fx->add_subcommand("regen", "Re-derive every fixture from its oracle");
    fr->add_option("--dir", fixture_dir, "Fixture directory")->capture_default_str();
    fr->add_flag("--with-projection", with_projection, "Derive the 3x3 LF facets by projection (hours) instead of the vertex hull");
    fr->callback([&] {
        action = [&] {
            fixtures::RegenOptions opt;
            opt.dir = fixture_dir;
            opt.include_projection_3x3 = with_projection;
            opt.log = [](const std::string& s) { std::cerr << "regen: " << s << "\n"; };
            fixtures::regen(opt);
            run.emit(Json{{"dir", fixture_dir}, {"projection_3x3", with_projection}});
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        action();
    } catch (const CapExceeded& e) {
        std::cerr << error_json("cap_exceeded", e.what()).dump() << "\n";
        return 1;
    } catch (const StructuralError& e) {
        std::cerr << error_json("structural", e.what()).dump() << "\n";
        return 1;
    } catch (const PreconditionError& e) {
        std::cerr << error_json("precondition", e.what()).dump() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << error_json("internal", e.what()).dump() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << error_json("structural", e.what()).dump() << "\n";
        return 1;
    }
    return 0;
}
