#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ecalc/bisim.hpp"
#include "ecalc/sos_system.hpp"

namespace ecalc {

// Closed systems evolve by internal moves only; open systems additionally
// accept fact inputs from the environment.
enum class ExploreMode { Closed, Open };

struct ExploreBounds {
    int max_depth = 64;
    int max_nodes = 4096;
    int max_kripke = 4096; // largest tolerated state count of a Kripke model
};

// Scripted environment injections: each scripted channel carries its own
// ordered queue of facts; unscripted channels are unconstrained.
using FeedScript = std::map<Name, std::vector<AtomId>>;

struct LtsNode {
    ESys sys;           // representative system term
    std::string sys_src; // canonical print, also part of the node identity
    PointedModel state;
    int depth = 0;
    std::map<Name, size_t> feed_pos; // per channel, next unconsumed item
};

struct LtsEdge {
    int from = 0;
    Label lbl;
    int to = 0;
};

struct Lts {
    std::vector<LtsNode> nodes;
    std::vector<LtsEdge> edges;
    int root = 0;
    bool truncated = false; // some successor was dropped due to a bound

    std::vector<int> terminals() const {
        std::vector<char> has_out(nodes.size(), 0);
        for (const auto& e : edges) has_out[e.from] = 1;
        std::vector<int> out;
        for (size_t i = 0; i < nodes.size(); ++i)
            if (!has_out[i]) out.push_back((int)i);
        return out;
    }
};

namespace detail {

inline std::string node_key(const std::string& sys_src, const PointedModel& state,
                            const std::map<Name, size_t>& feed_pos) {
    std::string key = sys_src + "\x1f" + canonical_key(state) + "\x1f";
    for (const auto& [ch, idx] : feed_pos) key += ch.v + ":" + std::to_string(idx) + ";";
    return key;
}

} // namespace detail

// Breadth-first reachability over configurations.  Node identity is the
// canonical system form plus the bisimulation-canonical state plus the feed
// position, so bisimilar states collapse into one node.  With
// `quotient_states` (the default) stored models are also replaced by their
// minimal canonical forms to keep products small; the graph is identical
// either way.
inline Lts explore(const Configuration& root, const Universe& u, ExploreMode mode,
                   const FeedScript& feeds, const ExploreBounds& bounds,
                   bool quotient_states = true) {
    auto problems = validate_configuration(root, u);
    if (!problems.empty()) throw InputError("invalid configuration: " + problems.front());
    for (const auto& [ch, facts] : feeds) {
        if (!u.names.count(ch)) throw InputError("feed on undeclared channel " + ch.v);
        for (const AtomId& f : facts)
            if (!u.atoms.count(f)) throw InputError("feed of undeclared fact " + f.v);
    }
    std::map<Name, size_t> fresh_pos;
    for (const auto& [ch, facts] : feeds) fresh_pos[ch] = 0;

    Lts lts;
    std::map<std::string, int> index;
    auto add_node = [&](const ESys& sys, const PointedModel& state, int depth,
                        std::map<Name, size_t> feed_pos) -> int {
        std::string src = to_source(alpha_canonical(prune_nil(sys)));
        std::string key = detail::node_key(src, state, feed_pos);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        if ((int)lts.nodes.size() >= bounds.max_nodes) return -1;
        PointedModel stored = quotient_states ? canonical_minimal(state) : state;
        int id = (int)lts.nodes.size();
        lts.nodes.push_back({sys, std::move(src), std::move(stored), depth,
                             std::move(feed_pos)});
        index.emplace(std::move(key), id);
        return id;
    };

    int rid = add_node(root.sys, root.state, 0, fresh_pos);
    lts.root = rid;
    for (int cur = 0; cur < (int)lts.nodes.size(); ++cur) {
        const int depth = lts.nodes[cur].depth;
        Configuration cfg{lts.nodes[cur].sys, lts.nodes[cur].state};
        // Interchangeable replication copies fire identical transitions; one
        // edge per (label, target) keeps the graph free of parallel duplicates.
        std::set<std::pair<std::string, int>> seen;
        for (const SysTrans& t : esys_transitions(cfg, u)) {
            std::map<Name, size_t> next_fpos = lts.nodes[cur].feed_pos;
            switch (t.lbl.kind) {
            case Label::Kind::Tau:
            case Label::Kind::Interact:
                break;
            case Label::Kind::AgentInFact: {
                if (mode != ExploreMode::Open) continue;
                auto sc = feeds.find(t.lbl.ch);
                if (sc != feeds.end()) {
                    // scripted channel: only its next unread fact may arrive
                    size_t pos = next_fpos[t.lbl.ch];
                    if (pos >= sc->second.size() || sc->second[pos] != t.lbl.fct)
                        continue;
                    next_fpos[t.lbl.ch] = pos + 1;
                }
                break;
            }
            default:
                continue; // half-finished external name traffic is not a system run
            }
            if ((int)t.succ.state.model->states.size() > bounds.max_kripke) {
                lts.truncated = true;
                continue;
            }
            std::string src = to_source(alpha_canonical(prune_nil(t.succ.sys)));
            std::string key = detail::node_key(src, t.succ.state, next_fpos);
            auto it = index.find(key);
            int to;
            if (it != index.end()) {
                to = it->second;
            } else {
                if (depth + 1 > bounds.max_depth) {
                    lts.truncated = true;
                    continue;
                }
                to = add_node(t.succ.sys, t.succ.state, depth + 1, next_fpos);
                if (to < 0) {
                    lts.truncated = true;
                    continue;
                }
            }
            if (seen.emplace(t.lbl.str(), to).second)
                lts.edges.push_back({cur, t.lbl, to});
        }
    }
    return lts;
}

// Glob with '*' as the only wildcard, so "A>*:b!p" or a bare "*" match labels.
inline bool glob_match(const std::string& pat, const std::string& s) {
    size_t p = 0, i = 0, star = std::string::npos, mark = 0;
    while (i < s.size()) {
        if (p < pat.size() && pat[p] == '*') {
            star = p++;
            mark = i;
        } else if (p < pat.size() && pat[p] == s[i]) {
            ++p;
            ++i;
        } else if (star != std::string::npos) {
            p = star + 1;
            i = ++mark;
        } else {
            return false;
        }
    }
    while (p < pat.size() && pat[p] == '*') ++p;
    return p == pat.size();
}

// True when the label sequence is realizable as a path from the root.
inline bool lts_has_trace(const Lts& lts, const std::vector<std::string>& pattern) {
    std::vector<std::vector<std::pair<std::string, int>>> adj(lts.nodes.size());
    for (const auto& e : lts.edges) adj[e.from].push_back({e.lbl.str(), e.to});
    std::set<std::pair<int, size_t>> seen;
    std::vector<std::pair<int, size_t>> stack{{lts.root, 0}};
    while (!stack.empty()) {
        auto [node, idx] = stack.back();
        stack.pop_back();
        if (idx == pattern.size()) return true;
        if (!seen.insert({node, idx}).second) continue;
        for (const auto& [lbl, to] : adj[node])
            if (glob_match(pattern[idx], lbl)) stack.push_back({to, idx + 1});
    }
    return false;
}

// Per-field label pattern; an unset field matches anything.
struct LabelPattern {
    std::optional<Label::Kind> kind;
    std::optional<Name> ch;
    std::optional<Name> n;
    std::optional<AtomId> fct;
    std::optional<AgentId> agent;
    std::optional<AgentId> agent2;

    bool matches(const Label& l) const {
        if (kind && *kind != l.kind) return false;
        if (ch && *ch != l.ch) return false;
        if (n && *n != l.n) return false;
        if (fct && *fct != l.fct) return false;
        if (agent && *agent != l.agent) return false;
        if (agent2 && *agent2 != l.agent2) return false;
        return true;
    }
};

// All configurations reachable from c0 via a transition sequence matching the
// patterns, deduplicated up to alpha conversion and state bisimilarity.
inline std::vector<Configuration> trace_check(const Configuration& c0, const Universe& u,
                                              const std::vector<LabelPattern>& pats) {
    auto problems = validate_configuration(c0, u);
    if (!problems.empty()) throw InputError("invalid configuration: " + problems.front());
    auto cfg_key = [](const Configuration& c) {
        return to_source(alpha_canonical(prune_nil(c.sys))) + "\x1f" + canonical_key(c.state);
    };
    std::vector<Configuration> frontier{c0};
    for (const LabelPattern& pat : pats) {
        std::vector<Configuration> next;
        std::set<std::string> next_seen;
        for (const Configuration& c : frontier)
            for (const SysTrans& t : esys_transitions(c, u)) {
                if (!pat.matches(t.lbl)) continue;
                std::string k = cfg_key(t.succ);
                if (next_seen.insert(std::move(k)).second) next.push_back(t.succ);
            }
        frontier = std::move(next);
    }
    return frontier;
}

} // namespace ecalc
