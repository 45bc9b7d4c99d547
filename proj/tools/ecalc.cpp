// Command line front end.  Five subcommands: check a formula on a model,
// step a scenario interactively, explore a scenario's reachable transition
// system, decide bisimilarity of two models, and run the randomized property
// suites.  Exit codes: 0 everything passed, 1 a check failed, 2 bad input,
// 3 exploration was truncated but nothing failed.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ecalc/model_io.hpp"
#include "ecalc/properties.hpp"
#include "ecalc/scenario.hpp"

namespace {

using namespace ecalc;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kBadInput = 2;
constexpr int kTruncated = 3;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    long ms() const {
        auto dt = std::chrono::steady_clock::now() - t0;
        return (long)std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
    }
};

// Timing is the one nondeterministic part of a report; it goes to stderr so
// stdout stays byte-identical across runs with the same inputs and seed.
void print_elapsed(const Timer& t) { std::fprintf(stderr, "elapsed: %ld ms\n", t.ms()); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

PointedModel require_kripke(const std::string& path) {
    AnyModel any = load_any_model(path);
    if (auto* pm = std::get_if<PointedModel>(&any)) return *pm;
    throw InputError(path + ": expected a Kripke model file, got an action model");
}

std::string point_name(const PointedModel& pm) { return pm.model->states[pm.point].str(); }

// Labels along a shortest path from the root to `node`.
std::vector<std::string> path_to(const Lts& lts, int node) {
    std::vector<int> via(lts.nodes.size(), -1); // incoming edge index
    std::vector<char> seen(lts.nodes.size(), 0);
    std::vector<int> queue{lts.root};
    seen[lts.root] = 1;
    for (size_t h = 0; h < queue.size() && !seen[node]; ++h)
        for (size_t e = 0; e < lts.edges.size(); ++e)
            if (lts.edges[e].from == queue[h] && !seen[lts.edges[e].to]) {
                seen[lts.edges[e].to] = 1;
                via[lts.edges[e].to] = (int)e;
                queue.push_back(lts.edges[e].to);
            }
    std::vector<std::string> steps;
    for (int n = node; via[n] >= 0; n = lts.edges[via[n]].from)
        steps.push_back(lts.edges[via[n]].lbl.str());
    std::reverse(steps.begin(), steps.end());
    return steps;
}

int cmd_check(const std::string& model_path, const std::string& formula_src, bool table) {
    Timer t;
    PointedModel pm = require_kripke(model_path);
    Universe u;
    u.agents = {pm.model->agents.begin(), pm.model->agents.end()};
    u.atoms = {pm.model->atoms.begin(), pm.model->atoms.end()};
    std::string base = std::filesystem::path(model_path).parent_path().string();
    Form f = parse_formula(formula_src, u, file_model_resolver(base));
    std::cout << "check " << model_path << " '" << formula_src << "'\n";
    bool at_point = eval(pm, f);
    std::cout << "at " << point_name(pm) << ": " << (at_point ? "true" : "false") << "\n";
    if (table)
        for (size_t s = 0; s < pm.model->states.size(); ++s)
            std::cout << "  " << pm.model->states[s].str()
                      << ((int)s == pm.point ? " *" : "") << ": "
                      << (eval_at(pm.model, (int)s, f) ? "true" : "false") << "\n";
    print_elapsed(t);
    return at_point ? kPass : kFail;
}

int cmd_step(const std::string& path, bool list_only) {
    Timer t;
    ScenarioSpec sc = load_scenario(path);
    Configuration cfg{sc.system, sc.model};
    std::cout << "step " << path << "\n";
    for (;;) {
        std::cout << "system: " << to_source(cfg.sys) << "\n"
                  << "state: " << point_name(cfg.state) << " ("
                  << cfg.state.model->states.size() << " states)\n";
        std::vector<SysTrans> ts = esys_transitions(cfg, sc.universe);
        if (ts.empty()) {
            std::cout << "no transitions\n";
            break;
        }
        for (size_t i = 0; i < ts.size(); ++i)
            std::cout << "  [" << i << "] " << ts[i].lbl.str() << "  ->  "
                      << to_source(ts[i].succ.sys) << "   state "
                      << point_name(ts[i].succ.state) << "\n";
        if (list_only) break;
        int pick = -1;
        for (;;) {
            std::cout << "step> " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) {
                std::cout << "\n";
                print_elapsed(t);
                return kPass;
            }
            size_t a = line.find_first_not_of(" \t");
            size_t b = line.find_last_not_of(" \t");
            line = a == std::string::npos ? "" : line.substr(a, b - a + 1);
            if (line == "q" || line == "quit") {
                print_elapsed(t);
                return kPass;
            }
            try {
                size_t used = 0;
                pick = std::stoi(line, &used);
                if (used == line.size() && 0 <= pick && pick < (int)ts.size()) break;
            } catch (const std::exception&) {
            }
            // bad input leaves the configuration untouched
            std::cout << "choose an index between 0 and " << ts.size() - 1 << "\n";
        }
        std::cout << "-- " << ts[pick].lbl.str() << "\n";
        cfg = ts[pick].succ;
    }
    print_elapsed(t);
    return kPass;
}

int cmd_explore(const std::string& path, const std::optional<std::string>& out, LtsFormat fmt,
                const std::optional<std::string>& mode, std::optional<int> max_depth,
                std::optional<int> max_nodes, std::optional<int> max_kripke, bool no_quotient) {
    Timer t;
    ScenarioSpec sc = load_scenario(path);
    if (mode) sc.mode = *mode == "open" ? ExploreMode::Open : ExploreMode::Closed;
    if (max_depth) sc.bounds.max_depth = *max_depth;
    if (max_nodes) sc.bounds.max_nodes = *max_nodes;
    if (max_kripke) sc.bounds.max_kripke = *max_kripke;
    if (no_quotient) sc.quotient = false;
    std::cout << "explore " << path << "\n";
    ScenarioReport rep = run_scenario(sc);
    const Lts& lts = rep.lts;
    std::cout << "mode: " << (sc.mode == ExploreMode::Open ? "open" : "closed")
              << "  nodes: " << lts.nodes.size() << "  edges: " << lts.edges.size()
              << "  truncated: " << (lts.truncated ? "yes" : "no") << "\n";

    std::string stem = std::filesystem::path(path).stem().string();
    std::string cex_dir = out ? std::filesystem::path(*out).parent_path().string() : std::string();
    int cex_n = 0;
    for (const AssertionResult& a : rep.assertions) {
        std::cout << "assertion [" << assert_scope_name(a.claim.scope) << "] " << a.claim.source
                  << ": " << (a.pass ? "pass" : "FAIL") << "\n";
        if (a.pass) continue;
        int node = a.failing_nodes.front();
        auto steps = path_to(lts, node);
        std::cout << "  false at " << a.failing_nodes.size() << " node(s); first is node "
                  << node << " (depth " << lts.nodes[node].depth << ")\n"
                  << "  reached by: " << (steps.empty() ? "(root)" : join(steps, ", ")) << "\n"
                  << "  system: " << lts.nodes[node].sys_src << "\n";
        std::string cex = (cex_dir.empty() ? stem : cex_dir + "/" + stem) + ".cex" +
                          std::to_string(cex_n++) + ".json";
        write_file(cex, save_model(lts.nodes[node].state));
        std::cout << "  counterexample model: " << cex << "\n"
                  << "  replay: ecalc check " << cex << " '" << a.claim.source << "'\n";
    }
    for (const TraceResult& tr : rep.traces)
        std::cout << "trace [" << join(tr.pattern, ", ") << "]: "
                  << (tr.found ? "found" : "MISSING") << "\n";
    if (out) {
        write_file(*out, export_lts(lts, fmt));
        std::cout << "lts written to " << *out << "\n";
    }
    bool ok = rep.all_pass();
    std::cout << "result: " << (ok ? (lts.truncated ? "pass (truncated)" : "pass") : "FAIL") << "\n";
    print_elapsed(t);
    if (!ok) return kFail;
    return lts.truncated ? kTruncated : kPass;
}

int cmd_bisim(const std::string& left_path, const std::string& right_path, bool show_witness) {
    Timer t;
    PointedModel a = require_kripke(left_path);
    PointedModel b = require_kripke(right_path);
    std::vector<std::pair<StateId, StateId>> wit;
    bool same = bisimilar(a, b, &wit);
    std::cout << "bisim " << left_path << " " << right_path << "\n"
              << "bisimilar: " << (same ? "true" : "false") << "\n";
    if (same && show_witness)
        for (const auto& [l, r] : wit)
            std::cout << "  " << l.str() << " ~ " << r.str() << "\n";
    if (!same) {
        std::string pa = point_name(a), pb = point_name(b);
        std::vector<std::string> of_a, of_b;
        for (const auto& [l, r] : wit) {
            if (l.str() == pa) of_a.push_back(r.str());
            if (r.str() == pb) of_b.push_back(l.str());
        }
        std::cout << "  left point " << pa << " matches on the right: "
                  << (of_a.empty() ? "(no state)" : join(of_a, ", ")) << "\n"
                  << "  right point " << pb << " matches on the left: "
                  << (of_b.empty() ? "(no state)" : join(of_b, ", ")) << "\n";
    }
    print_elapsed(t);
    return same ? kPass : kFail;
}

int cmd_props(PropertyOptions opts, bool corrupt, const std::string& out_dir) {
    Timer t;
    if (corrupt) opts.update = corrupted_update;
    std::cout << "props seed=" << opts.seed << " count=" << opts.count
              << (corrupt ? " corrupt-update" : "") << "\n";
    std::vector<PropertyResult> results = run_property_suites(opts);
    bool all = true;
    for (const PropertyResult& r : results) {
        std::cout << (r.pass() ? "pass " : "FAIL ") << r.name << "  (seeds " << r.seeds_run
                  << ", hits " << r.hits;
        if (!r.pass()) std::cout << ", failures " << r.failures;
        std::cout << ")\n";
        if (r.pass()) continue;
        all = false;
        std::cout << "  first failing seed: " << *r.first_failing_seed << "\n";
        if (!r.detail.empty()) std::cout << "  " << r.detail << "\n";
        if (r.cex_model) {
            std::string p = (out_dir.empty() ? "" : out_dir + "/") + "cex-" + r.name + ".json";
            write_file(p, save_model(*r.cex_model));
            std::cout << "  counterexample model: " << p << "\n";
        }
        std::cout << "  replay: ecalc props --seed " << *r.first_failing_seed << " --count 1"
                  << (corrupt ? " --corrupt-update" : "") << "\n";
    }
    std::cout << "result: " << (all ? "pass" : "FAIL") << "\n";
    print_elapsed(t);
    return all ? kPass : kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interpreter and checker for an epistemic process calculus"};
    app.require_subcommand(1);

    std::string model_path, formula_src, scenario_path, left_path, right_path;
    std::string out, format = "structured", mode;
    bool table = false, list_only = false, show_witness = false;
    bool no_quotient = false, corrupt = false;
    int max_depth = 0, max_nodes = 0, max_kripke = 0;
    PropertyOptions popt;

    auto* check = app.add_subcommand("check", "evaluate a formula at a model's point");
    check->add_option("model", model_path, "Kripke model file")->required();
    check->add_option("formula", formula_src, "formula over the model's agents and atoms")
        ->required();
    check->add_flag("--table", table, "also print the truth value at every state");

    auto* step = app.add_subcommand("step", "walk a scenario one transition at a time");
    step->add_option("scenario", scenario_path, "scenario file")->required();
    step->add_flag("--list", list_only, "print the enabled transitions and exit");

    auto* explore =
        app.add_subcommand("explore", "build the reachable transition system of a scenario "
                                      "and check its assertions and traces");
    explore->add_option("scenario", scenario_path, "scenario file")->required();
    explore->add_option("--out", out, "write the transition system to this file")
        ->envname("ECALC_OUT");
    explore->add_option("--format", format, "transition system format")
        ->check(CLI::IsMember({"structured", "dot-graph"}))
        ->envname("ECALC_FORMAT");
    explore
        ->add_option("--mode", mode,
                     "closed: internal moves only; open: the environment may feed facts")
        ->check(CLI::IsMember({"closed", "open"}))
        ->envname("ECALC_MODE");
    explore->add_option("--max-depth", max_depth, "exploration depth bound")
        ->envname("ECALC_MAX_DEPTH");
    explore->add_option("--max-nodes", max_nodes, "node count bound")->envname("ECALC_MAX_NODES");
    explore->add_option("--max-kripke", max_kripke, "state count bound per reached model")
        ->envname("ECALC_MAX_KRIPKE");
    explore
        ->add_flag("--no-quotient", no_quotient,
                   "store reached models as-is instead of minimizing them")
        ->envname("ECALC_NO_QUOTIENT");

    auto* bisim = app.add_subcommand("bisim", "decide bisimilarity of two pointed models");
    bisim->add_option("left", left_path, "first model file")->required();
    bisim->add_option("right", right_path, "second model file")->required();
    bisim->add_flag("--witness", show_witness, "print the matched state pairs");

    auto* props = app.add_subcommand("props", "run the randomized property suites");
    props->add_option("--seed", popt.seed, "base seed")->envname("ECALC_SEED");
    props->add_option("--count", popt.count, "iterations per suite")->envname("ECALC_COUNT");
    props->add_option("--max-states", popt.max_states, "random model size cap");
    props->add_option("--max-agents", popt.max_agents, "agent count cap");
    props->add_option("--max-atoms", popt.max_atoms, "atom count cap");
    props->add_option("--invariance-pairs", popt.invariance_pairs,
                      "model pairs checked by the invariance suite");
    props->add_option("--invariance-formulas", popt.invariance_formulas,
                      "formulas checked per pair");
    props->add_option("--out", out, "directory for counterexample files")->envname("ECALC_OUT");
    props->add_flag("--corrupt-update", corrupt, "run against a deliberately broken update")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kBadInput;
    }

    try {
        if (*check) return cmd_check(model_path, formula_src, table);
        if (*step) return cmd_step(scenario_path, list_only);
        if (*explore) {
            auto given = [&](const std::string& name) { return explore->count(name) > 0; };
            return cmd_explore(scenario_path,
                               given("--out") ? std::optional(out) : std::nullopt,
                               lts_format_of(format),
                               given("--mode") ? std::optional(mode) : std::nullopt,
                               given("--max-depth") ? std::optional(max_depth) : std::nullopt,
                               given("--max-nodes") ? std::optional(max_nodes) : std::nullopt,
                               given("--max-kripke") ? std::optional(max_kripke) : std::nullopt,
                               no_quotient);
        }
        if (*bisim) return cmd_bisim(left_path, right_path, show_witness);
        if (*props) return cmd_props(popt, corrupt, props->count("--out") ? out : std::string());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    }
    return kBadInput;
}
