#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecalc/model_io.hpp"

namespace ecalc {

// A scenario file bundles one runnable experiment: universe, initial pointed
// model (inline or a sibling file), system source, environment feeds, bounds,
// and the claims to check over the explored graph.
//
//   {"universe": {"names":[..],"atoms":[..],"agents":[..]},
//    "model": {..kripke..} | {"file":"m.json"},
//    "system": "[a!p.0]@A || [a?(chi).0]@B",
//    "mode": "closed" | "open",
//    "feeds": {"chan": ["q1","q2"]},
//    "bounds": {"max_depth":64,"max_nodes":4096,"max_kripke":4096},
//    "quotient": true,
//    "assertions": [{"scope":"all-terminal","formula":"K[B] p"}],
//    "expected_traces": [["A>B:a!p"]]}

enum class AssertScope { Root, AllReachable, AllTerminal };

inline AssertScope assert_scope_of(const std::string& s) {
    if (s == "root") return AssertScope::Root;
    if (s == "all-reachable") return AssertScope::AllReachable;
    if (s == "all-terminal") return AssertScope::AllTerminal;
    throw InputError("unknown assertion scope '" + s +
                     "' (want root, all-reachable or all-terminal)");
}

inline const char* assert_scope_name(AssertScope s) {
    switch (s) {
    case AssertScope::Root: return "root";
    case AssertScope::AllReachable: return "all-reachable";
    case AssertScope::AllTerminal: return "all-terminal";
    }
    return "?";
}

struct ScenarioAssertion {
    AssertScope scope = AssertScope::Root;
    Form formula;
    std::string source;
};

struct ScenarioSpec {
    Universe universe;
    PointedModel model;
    ESys system;
    std::string system_src;
    ExploreMode mode = ExploreMode::Closed;
    FeedScript feeds;
    ExploreBounds bounds;
    bool quotient = true;
    std::vector<ScenarioAssertion> assertions;
    std::vector<std::vector<std::string>> expected_traces;
};

struct AssertionResult {
    ScenarioAssertion claim;
    bool pass = false;
    std::vector<int> failing_nodes; // node ids where the formula is false
};

struct TraceResult {
    std::vector<std::string> pattern;
    bool found = false;
};

struct ScenarioReport {
    Lts lts;
    std::vector<AssertionResult> assertions;
    std::vector<TraceResult> traces;

    bool all_pass() const {
        for (const AssertionResult& a : assertions)
            if (!a.pass) return false;
        for (const TraceResult& t : traces)
            if (!t.found) return false;
        return true;
    }
};

namespace detail {

inline std::set<std::string> string_set(const Json& j, const std::string& where,
                                        const std::string& what) {
    std::set<std::string> out;
    for (const std::string& s : need_string_array(j, where, what)) {
        if (!out.insert(s).second) io_fail(where, "duplicate " + what + " entry '" + s + "'");
    }
    return out;
}

} // namespace detail

inline ScenarioSpec scenario_from_json(const nlohmann::json& j, const std::string& where,
                                       const std::string& base_dir) {
    using detail::Json;
    auto fail = [&](const std::string& msg) { detail::io_fail(where, msg); };
    if (!j.is_object()) fail("scenario must be a JSON object");

    ScenarioSpec sc;
    const Json& uni = detail::need(j, "universe", where);
    if (!uni.is_object()) fail("'universe' must be an object");
    for (const std::string& s : detail::string_set(detail::need(uni, "names", where), where, "name"))
        sc.universe.names.insert(Name{s});
    for (const std::string& s : detail::string_set(detail::need(uni, "atoms", where), where, "atom"))
        sc.universe.atoms.insert(AtomId{s});
    for (const std::string& s :
         detail::string_set(detail::need(uni, "agents", where), where, "agent"))
        sc.universe.agents.insert(AgentId{s});
    auto probs = universe_problems(sc.universe);
    if (!probs.empty()) fail(probs.front());

    const Json& mj = detail::need(j, "model", where);
    if (mj.is_object() && mj.contains("file")) {
        std::filesystem::path p(detail::need_string(mj["file"], where, "'model.file'"));
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        sc.model = load_model(p.string());
    } else {
        sc.model = model_from_json(mj, where + ": model");
    }
    std::vector<AgentId> want_agents(sc.universe.agents.begin(), sc.universe.agents.end());
    std::vector<AtomId> want_atoms(sc.universe.atoms.begin(), sc.universe.atoms.end());
    if (sc.model.model->agents != want_agents)
        fail("model agents differ from the declared universe");
    if (sc.model.model->atoms != want_atoms)
        fail("model atoms differ from the declared universe");

    sc.system_src = detail::need_string(detail::need(j, "system", where), where, "'system'");
    try {
        sc.system = parse_esystem(sc.system_src, sc.universe);
    } catch (const ParseError& e) {
        fail(std::string("system: ") + e.what());
    }

    if (j.contains("mode")) {
        std::string m = detail::need_string(j["mode"], where, "'mode'");
        if (m == "closed")
            sc.mode = ExploreMode::Closed;
        else if (m == "open")
            sc.mode = ExploreMode::Open;
        else
            fail("unknown mode '" + m + "' (want closed or open)");
    }

    if (j.contains("feeds")) {
        const Json& feeds = j["feeds"];
        if (!feeds.is_object()) fail("'feeds' must be an object keyed by channel");
        std::set<Name> free = free_names(sc.system);
        for (auto it = feeds.begin(); it != feeds.end(); ++it) {
            Name ch{it.key()};
            if (!sc.universe.names.count(ch)) fail("feed channel '" + it.key() + "' is not a declared name");
            if (!free.count(ch))
                fail("feed channel '" + it.key() + "' is not free in the system");
            auto& script = sc.feeds[ch];
            for (const std::string& s :
                 detail::need_string_array(it.value(), where, "feeds['" + it.key() + "']")) {
                if (!sc.universe.atoms.count(AtomId{s}))
                    fail("feed fact '" + s + "' is not a declared atom");
                script.push_back(AtomId{s});
            }
        }
    }

    if (j.contains("bounds")) {
        const Json& b = j["bounds"];
        if (!b.is_object()) fail("'bounds' must be an object");
        auto dim = [&](const char* key, int& slot) {
            if (!b.contains(key)) return;
            if (!b[key].is_number_integer() || b[key].get<int>() < 0)
                fail(std::string("bounds.") + key + " must be a non-negative integer");
            slot = b[key].get<int>();
        };
        dim("max_depth", sc.bounds.max_depth);
        dim("max_nodes", sc.bounds.max_nodes);
        dim("max_kripke", sc.bounds.max_kripke);
    }
    if (j.contains("quotient")) {
        if (!j["quotient"].is_boolean()) fail("'quotient' must be a boolean");
        sc.quotient = j["quotient"].get<bool>();
    }

    ActionModelResolver resolver = file_model_resolver(base_dir);
    if (j.contains("assertions")) {
        if (!j["assertions"].is_array()) fail("'assertions' must be an array");
        for (const Json& a : j["assertions"]) {
            if (!a.is_object()) fail("assertion entries must be objects");
            ScenarioAssertion claim;
            claim.scope = assert_scope_of(
                detail::need_string(detail::need(a, "scope", where), where, "'scope'"));
            claim.source =
                detail::need_string(detail::need(a, "formula", where), where, "'formula'");
            try {
                claim.formula = parse_formula(claim.source, sc.universe, resolver);
            } catch (const ParseError& e) {
                fail("assertion '" + claim.source + "': " + e.what());
            }
            sc.assertions.push_back(std::move(claim));
        }
    }

    if (j.contains("expected_traces")) {
        if (!j["expected_traces"].is_array()) fail("'expected_traces' must be an array");
        for (const Json& t : j["expected_traces"])
            sc.expected_traces.push_back(
                detail::need_string_array(t, where, "expected trace"));
    }
    return sc;
}

inline ScenarioSpec load_scenario(const std::string& path) {
    return scenario_from_json(detail::parse_json(detail::read_file(path), path), path,
                              std::filesystem::path(path).parent_path().string());
}

inline ScenarioReport run_scenario(const ScenarioSpec& sc) {
    ScenarioReport rep;
    rep.lts = explore(Configuration{sc.system, sc.model}, sc.universe, sc.mode, sc.feeds,
                      sc.bounds, sc.quotient);

    std::vector<int> terminals = rep.lts.terminals();
    for (const ScenarioAssertion& claim : sc.assertions) {
        AssertionResult res;
        res.claim = claim;
        res.pass = true;
        auto check_node = [&](int id) {
            if (!eval(rep.lts.nodes[(size_t)id].state, claim.formula)) {
                res.pass = false;
                res.failing_nodes.push_back(id);
            }
        };
        switch (claim.scope) {
        case AssertScope::Root: check_node(rep.lts.root); break;
        case AssertScope::AllReachable:
            for (size_t i = 0; i < rep.lts.nodes.size(); ++i) check_node((int)i);
            break;
        case AssertScope::AllTerminal:
            for (int t : terminals) check_node(t);
            break;
        }
        rep.assertions.push_back(std::move(res));
    }

    for (const std::vector<std::string>& pat : sc.expected_traces)
        rep.traces.push_back(TraceResult{pat, lts_has_trace(rep.lts, pat)});
    return rep;
}

} // namespace ecalc
