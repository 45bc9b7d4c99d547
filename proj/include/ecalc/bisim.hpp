#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "ecalc/epistemics.hpp"

namespace ecalc {

namespace detail {

// Partition refinement restricted to `live` states.  Class ids are ranks of
// sorted signatures, so on a minimal model the final ids give a canonical
// ordering that any isomorphic copy reproduces.
inline std::vector<int> refine_classes(const KripkeModel& m, const std::vector<int>& live) {
    std::vector<int> pos(m.states.size(), -1);
    for (size_t i = 0; i < live.size(); ++i) pos[live[i]] = (int)i;

    std::vector<int> ids(live.size());
    {
        std::vector<std::vector<int>> sig(live.size());
        for (size_t i = 0; i < live.size(); ++i)
            for (const AtomId& r : m.atoms)
                sig[i].push_back(m.val.at(r).count(live[i]) ? 1 : 0);
        std::map<std::vector<int>, int> rank;
        for (const auto& s : sig) rank[s];
        int next = 0;
        for (auto& [s, id] : rank) id = next++;
        for (size_t i = 0; i < live.size(); ++i) ids[i] = rank[sig[i]];
    }
    size_t classes = 0;
    for (;;) {
        std::vector<std::vector<int>> sig(live.size());
        for (size_t i = 0; i < live.size(); ++i) {
            sig[i].push_back(ids[i]);
            for (const AgentId& a : m.agents) {
                std::vector<int> succ;
                for (int t : m.rel.at(a)[live[i]])
                    if (pos[t] >= 0) succ.push_back(ids[pos[t]]);
                std::sort(succ.begin(), succ.end());
                succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
                sig[i].push_back(-1); // agent separator
                sig[i].insert(sig[i].end(), succ.begin(), succ.end());
            }
        }
        std::map<std::vector<int>, int> rank;
        for (const auto& s : sig) rank[s];
        int next = 0;
        for (auto& [s, id] : rank) id = next++;
        for (size_t i = 0; i < live.size(); ++i) ids[i] = rank[sig[i]];
        if (rank.size() == classes) break; // classes only ever split
        classes = rank.size();
    }
    return ids;
}

inline std::vector<int> all_states(const KripkeModel& m) {
    std::vector<int> v(m.states.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = (int)i;
    return v;
}

inline std::vector<int> reachable_from(const KripkeModel& m, int start) {
    std::vector<char> seen(m.states.size(), 0);
    std::vector<int> queue{start};
    seen[start] = 1;
    for (size_t h = 0; h < queue.size(); ++h)
        for (const AgentId& a : m.agents)
            for (int t : m.rel.at(a)[queue[h]])
                if (!seen[t]) {
                    seen[t] = 1;
                    queue.push_back(t);
                }
    std::sort(queue.begin(), queue.end());
    return queue;
}

// Builds the quotient of the `live` substructure under `ids`, naming blocks
// `prefix<classid>`.
inline PointedModel quotient_of(const KripkeModel& m, int point, const std::vector<int>& live,
                                const std::vector<int>& ids, const std::string& prefix) {
    std::vector<int> pos(m.states.size(), -1);
    for (size_t i = 0; i < live.size(); ++i) pos[live[i]] = (int)i;
    int nblocks = 0;
    for (int id : ids) nblocks = std::max(nblocks, id + 1);

    KripkeModel out;
    out.agents = m.agents;
    out.atoms = m.atoms;
    for (int b = 0; b < nblocks; ++b) out.states.push_back(base_state(prefix + std::to_string(b)));
    for (const AgentId& a : m.agents) {
        auto& rows = out.rel[a];
        rows.resize(nblocks);
        for (size_t i = 0; i < live.size(); ++i)
            for (int t : m.rel.at(a)[live[i]])
                if (pos[t] >= 0) rows[ids[i]].insert(ids[pos[t]]);
    }
    for (const AtomId& r : m.atoms) {
        auto& ss = out.val[r];
        for (size_t i = 0; i < live.size(); ++i)
            if (m.val.at(r).count(live[i])) ss.insert(ids[i]);
    }
    int pt = ids[pos[point]];
    return PointedModel{std::make_shared<const KripkeModel>(std::move(out)), pt};
}

} // namespace detail

// Coarsest bisimulation classes over the whole model, one id per state.
inline std::vector<int> bisim_classes(const KripkeModel& m) {
    return detail::refine_classes(m, detail::all_states(m));
}

// Quotient of the full model by bisimilarity.  Block ids follow the canonical
// class order from refinement.
inline PointedModel quotient(const PointedModel& pm) {
    auto live = detail::all_states(*pm.model);
    auto ids = detail::refine_classes(*pm.model, live);
    return detail::quotient_of(*pm.model, pm.point, live, ids, "b");
}

// Minimal canonical representative: restrict to states reachable from the
// point, quotient, and let refinement order the blocks.  Two pointed models
// get identical representatives iff they are bisimilar.
inline PointedModel canonical_minimal(const PointedModel& pm) {
    auto live = detail::reachable_from(*pm.model, pm.point);
    auto ids = detail::refine_classes(*pm.model, live);
    return detail::quotient_of(*pm.model, pm.point, live, ids, "c");
}

inline std::string canonical_key(const PointedModel& pm) {
    PointedModel c = canonical_minimal(pm);
    const KripkeModel& m = *c.model;
    std::string key = std::to_string(m.states.size()) + ";pt" + std::to_string(c.point);
    for (const AtomId& r : m.atoms) {
        key += ";v " + r.v + ":";
        for (int s : m.val.at(r)) key += std::to_string(s) + ",";
    }
    for (const AgentId& a : m.agents) {
        key += ";r " + a.v + ":";
        const auto& rows = m.rel.at(a);
        for (size_t s = 0; s < rows.size(); ++s)
            for (int t : rows[s]) key += std::to_string(s) + ">" + std::to_string(t) + ",";
    }
    return key;
}

// Decides bisimilarity of two pointed models over the same universes by
// refining their disjoint union.  With `witness`, fills every state pair
// matched by the coarsest bisimulation between the two models; on a true
// verdict that includes the pair of points, on a false one the absences
// show where the points diverge.
inline bool bisimilar(const PointedModel& a, const PointedModel& b,
                      std::vector<std::pair<StateId, StateId>>* witness = nullptr) {
    const KripkeModel& ma = *a.model;
    const KripkeModel& mb = *b.model;
    if (ma.agents != mb.agents || ma.atoms != mb.atoms)
        throw InputError("bisimilarity requires matching agent and atom universes");

    KripkeModel u;
    u.agents = ma.agents;
    u.atoms = ma.atoms;
    const int na = (int)ma.states.size();
    for (const StateId& s : ma.states) u.states.push_back(s);
    for (const StateId& s : mb.states) u.states.push_back(s);
    for (const AgentId& ag : u.agents) {
        auto& rows = u.rel[ag];
        rows.resize(u.states.size());
        const auto& ra = ma.rel.at(ag);
        for (int s = 0; s < na; ++s) rows[s] = ra[s];
        const auto& rb = mb.rel.at(ag);
        for (size_t s = 0; s < rb.size(); ++s)
            for (int t : rb[s]) rows[na + s].insert(na + t);
    }
    for (const AtomId& r : u.atoms) {
        auto& ss = u.val[r];
        for (int s : ma.val.at(r)) ss.insert(s);
        for (int s : mb.val.at(r)) ss.insert(na + s);
    }

    auto ids = detail::refine_classes(u, detail::all_states(u));
    bool same = ids[a.point] == ids[na + b.point];
    if (witness) {
        witness->clear();
        for (int s = 0; s < na; ++s)
            for (size_t t = 0; t < mb.states.size(); ++t)
                if (ids[s] == ids[na + t]) witness->push_back({ma.states[s], mb.states[t]});
    }
    return same;
}

} // namespace ecalc
