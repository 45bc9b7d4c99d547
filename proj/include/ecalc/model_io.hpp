#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ecalc/errors.hpp"
#include "ecalc/explore.hpp"
#include "ecalc/parse.hpp"

namespace ecalc {

// Model files are JSON with explicit keys so diffs stay readable:
//   {"kind":"kripke","agents":[..],"atoms":[..],"states":[..],"point":"w0",
//    "rel":{"A":[["w0","w1"],..]},"val":{"p":["w0",..]}}
//   {"kind":"action","agents":[..],"atoms":[..],"points":[..],"point":"e0",
//    "rel":{..},"pre":{"e0":"<formula>",..}}
// Action files carry the atom universe because preconditions are parsed.

namespace detail {

using Json = nlohmann::json;

[[noreturn]] inline void io_fail(const std::string& where, const std::string& msg) {
    throw InputError(where + ": " + msg);
}

inline const Json& need(const Json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) io_fail(where, std::string("missing key '") + key + "'");
    return *it;
}

inline std::string need_string(const Json& j, const std::string& where, const std::string& what) {
    if (!j.is_string()) io_fail(where, what + " must be a string");
    return j.get<std::string>();
}

inline std::vector<std::string> need_string_array(const Json& j, const std::string& where,
                                                  const std::string& what) {
    if (!j.is_array()) io_fail(where, what + " must be an array");
    std::vector<std::string> out;
    for (const Json& e : j) out.push_back(need_string(e, where, what + " entry"));
    return out;
}

inline int id_index(const std::vector<std::string>& ids, const std::string& s) {
    for (size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == s) return (int)i;
    return -1;
}

// Shared shape of both file kinds: id list + per-agent relation pairs.
inline std::map<AgentId, std::vector<std::set<int>>> read_rel(
    const Json& rel, const std::vector<std::string>& ids,
    const std::vector<std::string>& agents, const std::string& where) {
    if (!rel.is_object()) io_fail(where, "'rel' must be an object keyed by agent");
    std::map<AgentId, std::vector<std::set<int>>> out;
    for (auto it = rel.begin(); it != rel.end(); ++it) {
        if (id_index(agents, it.key()) < 0)
            io_fail(where, "rel over undeclared agent '" + it.key() + "'");
        auto& rows = out[AgentId{it.key()}];
        rows.resize(ids.size());
        if (!it.value().is_array())
            io_fail(where, "rel['" + it.key() + "'] must be an array of pairs");
        for (const Json& pr : it.value()) {
            if (!pr.is_array() || pr.size() != 2)
                io_fail(where, "rel['" + it.key() + "'] entries must be [from, to] pairs");
            std::string a = need_string(pr[0], where, "relation endpoint");
            std::string b = need_string(pr[1], where, "relation endpoint");
            int ia = id_index(ids, a), ib = id_index(ids, b);
            if (ia < 0) io_fail(where, "rel['" + it.key() + "'] references undeclared state '" + a + "'");
            if (ib < 0) io_fail(where, "rel['" + it.key() + "'] references undeclared state '" + b + "'");
            rows[ia].insert(ib);
        }
    }
    return out;
}

inline Json rel_to_json(const std::map<AgentId, std::vector<std::set<int>>>& rel,
                        const std::vector<std::string>& ids) {
    Json out = Json::object();
    for (const auto& [ag, rows] : rel) {
        Json pairs = Json::array();
        for (size_t i = 0; i < rows.size(); ++i)
            for (int j : rows[i]) pairs.push_back(Json::array({ids[i], ids[(size_t)j]}));
        out[ag.v] = std::move(pairs);
    }
    return out;
}

inline std::vector<std::string> unique_ids(const Json& j, const std::string& where,
                                           const char* what) {
    std::vector<std::string> ids = need_string_array(j, where, what);
    if (ids.empty()) io_fail(where, std::string(what) + " must be nonempty");
    std::set<std::string> seen;
    for (const std::string& s : ids)
        if (!seen.insert(s).second) io_fail(where, std::string("duplicate ") + what + " '" + s + "'");
    return ids;
}

inline Json parse_json(const std::string& text, const std::string& where) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) io_fail(where, "malformed JSON");
    return j;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Kripke models

inline nlohmann::json model_to_json(const PointedModel& pm) {
    using detail::Json;
    const KripkeModel& m = *pm.model;
    Json j;
    j["kind"] = "kripke";
    Json agents = Json::array(), atoms = Json::array(), states = Json::array();
    for (const AgentId& a : m.agents) agents.push_back(a.v);
    for (const AtomId& r : m.atoms) atoms.push_back(r.v);
    std::vector<std::string> ids;
    for (const StateId& s : m.states) {
        ids.push_back(s.str());
        states.push_back(s.str());
    }
    j["agents"] = std::move(agents);
    j["atoms"] = std::move(atoms);
    j["states"] = std::move(states);
    j["point"] = m.states[pm.point].str();
    j["rel"] = detail::rel_to_json(m.rel, ids);
    Json val = Json::object();
    for (const auto& [r, ss] : m.val) {
        Json where = Json::array();
        for (int s : ss) where.push_back(ids[(size_t)s]);
        val[r.v] = std::move(where);
    }
    j["val"] = std::move(val);
    return j;
}

inline PointedModel model_from_json(const nlohmann::json& j, const std::string& where) {
    using detail::Json;
    if (!j.is_object()) detail::io_fail(where, "model must be a JSON object");
    if (detail::need_string(detail::need(j, "kind", where), where, "'kind'") != "kripke")
        detail::io_fail(where, "expected kind 'kripke'");
    std::vector<std::string> agents =
        detail::need_string_array(detail::need(j, "agents", where), where, "'agents'");
    std::vector<std::string> atoms =
        detail::need_string_array(detail::need(j, "atoms", where), where, "'atoms'");
    std::vector<std::string> ids =
        detail::unique_ids(detail::need(j, "states", where), where, "state");

    KripkeModel m;
    for (const std::string& a : agents) m.agents.push_back(AgentId{a});
    for (const std::string& r : atoms) m.atoms.push_back(AtomId{r});
    for (const std::string& s : ids) m.states.push_back(base_state(s));

    m.rel = detail::read_rel(detail::need(j, "rel", where), ids, agents, where);
    const Json& val = detail::need(j, "val", where);
    if (!val.is_object()) detail::io_fail(where, "'val' must be an object keyed by atom");
    for (auto it = val.begin(); it != val.end(); ++it) {
        if (detail::id_index(atoms, it.key()) < 0)
            detail::io_fail(where, "val over undeclared atom '" + it.key() + "'");
        auto& ss = m.val[AtomId{it.key()}];
        for (const std::string& s :
             detail::need_string_array(it.value(), where, "val['" + it.key() + "']")) {
            int i = detail::id_index(ids, s);
            if (i < 0) detail::io_fail(where, "val['" + it.key() + "'] references undeclared state '" + s + "'");
            ss.insert(i);
        }
    }

    std::string pt = detail::need_string(detail::need(j, "point", where), where, "'point'");
    int pi = detail::id_index(ids, pt);
    if (pi < 0) detail::io_fail(where, "point '" + pt + "' is not a declared state");
    try {
        return PointedModel{finish_model(std::move(m)), pi};
    } catch (const InputError& e) {
        detail::io_fail(where, e.what());
    }
}

inline std::string save_model(const PointedModel& pm) { return model_to_json(pm).dump(2) + "\n"; }

inline PointedModel load_model_text(const std::string& text, const std::string& where = "<model>") {
    return model_from_json(detail::parse_json(text, where), where);
}

inline PointedModel load_model(const std::string& path) {
    return load_model_text(detail::read_file(path), path);
}

// ---------------------------------------------------------------------------
// Action models.  Preconditions are concrete formula syntax; nested
// `[am "file" point]` boxes resolve relative to the loading file's directory,
// with the loading stack guarding against cycles.

inline PointedActionModel load_action_model(const std::string& path);

namespace detail {

inline PointedActionModel action_from_json_impl(const Json& j, const std::string& where,
                                                const std::string& base_dir,
                                                std::set<std::string>& loading);

inline PointedActionModel load_action_model_impl(const std::string& path,
                                                 std::set<std::string>& loading) {
    std::error_code ec;
    std::string key = std::filesystem::weakly_canonical(path, ec).string();
    if (ec) key = path;
    if (!loading.insert(key).second)
        throw InputError(path + ": action model files form a cycle");
    Json j = parse_json(read_file(path), path);
    PointedActionModel out = action_from_json_impl(
        j, path, std::filesystem::path(path).parent_path().string(), loading);
    loading.erase(key);
    return out;
}

inline PointedActionModel action_from_json_impl(const Json& j, const std::string& where,
                                                const std::string& base_dir,
                                                std::set<std::string>& loading) {
    if (!j.is_object()) io_fail(where, "action model must be a JSON object");
    if (need_string(need(j, "kind", where), where, "'kind'") != "action")
        io_fail(where, "expected kind 'action'");
    std::vector<std::string> agents = need_string_array(need(j, "agents", where), where, "'agents'");
    std::vector<std::string> atoms = need_string_array(need(j, "atoms", where), where, "'atoms'");
    std::vector<std::string> ids = unique_ids(need(j, "points", where), where, "point");

    ActionModel am;
    for (const std::string& a : agents) am.agents.push_back(AgentId{a});
    std::sort(am.agents.begin(), am.agents.end());
    am.agents.erase(std::unique(am.agents.begin(), am.agents.end()), am.agents.end());
    am.points = ids;
    am.rel = read_rel(need(j, "rel", where), ids, agents, where);
    for (const AgentId& a : am.agents) am.rel[a].resize(ids.size());

    Universe u;
    for (const std::string& a : agents) u.agents.insert(AgentId{a});
    for (const std::string& r : atoms) u.atoms.insert(AtomId{r});
    ActionModelResolver nested = [&](const std::string& file, const std::string& point) {
        std::filesystem::path p(file);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        PointedActionModel inner = load_action_model_impl(p.string(), loading);
        int idx = inner.model->index_of_point(point);
        if (idx < 0) throw InputError(file + ": no action point '" + point + "'");
        return PointedActionModel{inner.model, idx};
    };

    const Json& pre = need(j, "pre", where);
    if (!pre.is_object()) io_fail(where, "'pre' must be an object keyed by point");
    for (auto it = pre.begin(); it != pre.end(); ++it)
        if (id_index(ids, it.key()) < 0)
            io_fail(where, "pre over undeclared point '" + it.key() + "'");
    for (const std::string& p : ids) {
        auto it = pre.find(p);
        if (it == pre.end()) io_fail(where, "missing precondition for point '" + p + "'");
        std::string src = need_string(*it, where, "pre['" + p + "']");
        try {
            am.pre.push_back(parse_formula(src, u, nested));
        } catch (const ParseError& e) {
            io_fail(where, "pre['" + p + "']: " + e.what());
        } catch (const InputError& e) {
            io_fail(where, "pre['" + p + "']: " + e.what());
        }
    }
    am.tag = {"am", where};

    std::string pt = need_string(need(j, "point", where), where, "'point'");
    int pi = id_index(ids, pt);
    if (pi < 0) io_fail(where, "point '" + pt + "' is not a declared action point");
    return PointedActionModel{std::make_shared<const ActionModel>(std::move(am)), pi};
}

} // namespace detail

inline nlohmann::json action_to_json(const PointedActionModel& pam) {
    using detail::Json;
    const ActionModel& am = *pam.model;
    Json j;
    j["kind"] = "action";
    Json agents = Json::array(), points = Json::array();
    for (const AgentId& a : am.agents) agents.push_back(a.v);
    for (const std::string& p : am.points) points.push_back(p);
    j["agents"] = std::move(agents);
    j["points"] = std::move(points);
    j["point"] = am.points[pam.point];
    j["rel"] = detail::rel_to_json(am.rel, am.points);
    Json pre = Json::object();
    std::set<std::string> atoms;
    for (size_t i = 0; i < am.points.size(); ++i) {
        pre[am.points[i]] = to_source(am.pre[i]);
        for (const AtomId& r : formula_atoms(am.pre[i])) atoms.insert(r.v);
    }
    Json atom_arr = Json::array();
    for (const std::string& r : atoms) atom_arr.push_back(r);
    j["atoms"] = std::move(atom_arr);
    j["pre"] = std::move(pre);
    return j;
}

inline std::string save_action_model(const PointedActionModel& pam) {
    return action_to_json(pam).dump(2) + "\n";
}

inline PointedActionModel action_from_json(const nlohmann::json& j,
                                           const std::string& where = "<action>",
                                           const std::string& base_dir = "") {
    std::set<std::string> loading;
    return detail::action_from_json_impl(j, where, base_dir, loading);
}

inline PointedActionModel load_action_model_text(const std::string& text,
                                                 const std::string& where = "<action>") {
    return action_from_json(detail::parse_json(text, where), where);
}

inline PointedActionModel load_action_model(const std::string& path) {
    std::set<std::string> loading;
    return detail::load_action_model_impl(path, loading);
}

// Resolver for `[am "file" point]` boxes in user formulas, rooted at base_dir.
inline ActionModelResolver file_model_resolver(const std::string& base_dir) {
    return [base_dir](const std::string& file, const std::string& point) {
        std::filesystem::path p(file);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        PointedActionModel m = load_action_model(p.string());
        int idx = m.model->index_of_point(point);
        if (idx < 0) throw InputError(file + ": no action point '" + point + "'");
        return PointedActionModel{m.model, idx};
    };
}

// Kind-dispatched load for files that may hold either model flavor.
using AnyModel = std::variant<PointedModel, PointedActionModel>;

inline AnyModel load_any_model(const std::string& path) {
    detail::Json j = detail::parse_json(detail::read_file(path), path);
    if (!j.is_object()) detail::io_fail(path, "model must be a JSON object");
    std::string kind = detail::need_string(detail::need(j, "kind", path), path, "'kind'");
    if (kind == "kripke") return model_from_json(j, path);
    if (kind == "action")
        return action_from_json(j, path, std::filesystem::path(path).parent_path().string());
    detail::io_fail(path, "unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// LTS export.  Node order is BFS discovery order, edges sort lexicographically
// by (from, label, to), so equal explorations serialize to identical bytes.

enum class LtsFormat { Structured, DotGraph };

inline LtsFormat lts_format_of(const std::string& s) {
    if (s == "structured") return LtsFormat::Structured;
    if (s == "dot-graph") return LtsFormat::DotGraph;
    throw InputError("unknown LTS format '" + s + "' (want structured or dot-graph)");
}

namespace detail {

inline std::vector<const LtsEdge*> sorted_edges(const Lts& lts) {
    std::vector<const LtsEdge*> es;
    for (const LtsEdge& e : lts.edges) es.push_back(&e);
    std::sort(es.begin(), es.end(), [](const LtsEdge* x, const LtsEdge* y) {
        if (x->from != y->from) return x->from < y->from;
        std::string lx = x->lbl.str(), ly = y->lbl.str();
        if (lx != ly) return lx < ly;
        return x->to < y->to;
    });
    return es;
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

} // namespace detail

inline std::string export_lts(const Lts& lts, LtsFormat fmt) {
    using detail::Json;
    std::vector<const LtsEdge*> es = detail::sorted_edges(lts);
    if (fmt == LtsFormat::Structured) {
        Json j;
        j["root"] = lts.root;
        j["truncated"] = lts.truncated;
        Json nodes = Json::array();
        for (size_t i = 0; i < lts.nodes.size(); ++i) {
            const LtsNode& n = lts.nodes[i];
            Json nj;
            nj["id"] = (int)i;
            nj["depth"] = n.depth;
            nj["system"] = n.sys_src;
            nj["state"] = model_to_json(n.state);
            Json fp = Json::object();
            for (const auto& [ch, pos] : n.feed_pos) fp[ch.v] = pos;
            nj["feed_pos"] = std::move(fp);
            nodes.push_back(std::move(nj));
        }
        j["nodes"] = std::move(nodes);
        Json edges = Json::array();
        for (const LtsEdge* e : es)
            edges.push_back(Json{{"from", e->from}, {"label", e->lbl.str()}, {"to", e->to}});
        j["edges"] = std::move(edges);
        return j.dump(2) + "\n";
    }

    std::vector<int> term_list = lts.terminals();
    std::set<int> terminal(term_list.begin(), term_list.end());
    std::string out = "digraph lts {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n";
    for (size_t i = 0; i < lts.nodes.size(); ++i) {
        out += "  n" + std::to_string(i) + " [label=\"" + std::to_string(i) + ": " +
               detail::dot_escape(lts.nodes[i].sys_src) + "\"";
        if ((int)i == lts.root) out += ", penwidth=2";
        if (terminal.count((int)i)) out += ", peripheries=2";
        out += "];\n";
    }
    for (const LtsEdge* e : es)
        out += "  n" + std::to_string(e->from) + " -> n" + std::to_string(e->to) +
               " [label=\"" + detail::dot_escape(e->lbl.str()) + "\"];\n";
    out += "}\n";
    return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << bytes;
}

} // namespace ecalc
