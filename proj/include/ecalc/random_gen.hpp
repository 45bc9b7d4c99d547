#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "ecalc/epistemics.hpp"

namespace ecalc {

// Deterministic per seed: mt19937_64 with a fixed draw order (edges per
// sorted agent row-major, then valuations per sorted atom, then the point).
inline PointedModel random_model(int n_states, const std::set<AgentId>& agents,
                                 const std::set<AtomId>& atoms, uint64_t seed) {
    if (n_states <= 0) throw InputError("random model needs at least one state");
    if (agents.empty()) throw InputError("random model needs at least one agent");
    std::mt19937_64 eng(seed);
    KripkeModel m;
    m.agents.assign(agents.begin(), agents.end());
    m.atoms.assign(atoms.begin(), atoms.end());
    for (int i = 0; i < n_states; ++i) m.states.push_back(base_state("w" + std::to_string(i)));
    for (const AgentId& a : m.agents) {
        auto& rows = m.rel[a];
        rows.resize(n_states);
        for (int s = 0; s < n_states; ++s)
            for (int t = 0; t < n_states; ++t)
                if (eng() & 1) rows[s].insert(t);
    }
    for (const AtomId& r : m.atoms) {
        auto& ss = m.val[r];
        for (int s = 0; s < n_states; ++s)
            if (eng() & 1) ss.insert(s);
    }
    int point = (int)(eng() % (uint64_t)n_states);
    return PointedModel{std::make_shared<const KripkeModel>(std::move(m)), point};
}

// Two indistinguishable copies of every state; bisimilar to the original by
// construction, with the identity-on-copies relation as witness.
inline PointedModel duplicate_states(const PointedModel& pm) {
    const KripkeModel& m = *pm.model;
    const int n = (int)m.states.size();
    KripkeModel out;
    out.agents = m.agents;
    out.atoms = m.atoms;
    for (int c = 0; c < 2; ++c)
        for (const StateId& s : m.states)
            out.states.push_back(base_state(s.str() + (c ? "'" : "")));
    for (const AgentId& a : m.agents) {
        auto& rows = out.rel[a];
        rows.resize(2 * n);
        const auto& orig = m.rel.at(a);
        for (int s = 0; s < n; ++s)
            for (int t : orig[s])
                for (int cs = 0; cs < 2; ++cs)
                    for (int ct = 0; ct < 2; ++ct) rows[cs * n + s].insert(ct * n + t);
    }
    for (const AtomId& r : m.atoms) {
        auto& ss = out.val[r];
        for (int s : m.val.at(r)) {
            ss.insert(s);
            ss.insert(n + s);
        }
    }
    return PointedModel{std::make_shared<const KripkeModel>(std::move(out)), pm.point};
}

// Boolean-only random formula (atoms, negation, conjunction).
inline Form random_propositional(std::mt19937_64& eng, int depth, const std::set<AtomId>& atoms) {
    std::vector<AtomId> ats(atoms.begin(), atoms.end());
    if (depth <= 0 || ats.empty()) {
        if (ats.empty() || (eng() % 8) == 0) return f_true();
        return f_atom(ats[eng() % ats.size()]);
    }
    switch (eng() % 4) {
    case 0: return f_atom(ats[eng() % ats.size()]);
    case 1: return f_not(random_propositional(eng, depth - 1, atoms));
    default:
        return f_and(random_propositional(eng, depth - 1, atoms),
                     random_propositional(eng, depth - 1, atoms));
    }
}

// Random formula over the given universes, depth-bounded.  Action boxes (the
// canned receive/interact models) appear only when permitted and well-formed.
inline Form random_formula(std::mt19937_64& eng, int depth, const std::set<AgentId>& agents,
                           const std::set<AtomId>& atoms, bool with_action_boxes = false) {
    std::vector<AgentId> ags(agents.begin(), agents.end());
    std::vector<AtomId> ats(atoms.begin(), atoms.end());
    auto pick_agent = [&] { return ags[eng() % ags.size()]; };
    auto pick_atom = [&] { return ats[eng() % ats.size()]; };
    if (depth <= 0 || ats.empty()) {
        if (ats.empty() || (eng() % 8) == 0) return f_true();
        return f_atom(pick_atom());
    }
    int kinds = 4 + (with_action_boxes && !ats.empty() ? 2 : 0);
    switch (eng() % kinds) {
    case 0: return f_atom(pick_atom());
    case 1: return f_not(random_formula(eng, depth - 1, agents, atoms, with_action_boxes));
    case 2:
        return f_and(random_formula(eng, depth - 1, agents, atoms, with_action_boxes),
                     random_formula(eng, depth - 1, agents, atoms, with_action_boxes));
    case 3:
        return f_box(pick_agent(), random_formula(eng, depth - 1, agents, atoms, with_action_boxes));
    case 4:
        return f_action_box(receive_model(pick_atom(), pick_agent(), agents),
                            random_formula(eng, depth - 1, agents, atoms, with_action_boxes));
    default: {
        if (ags.size() < 2)
            return f_box(pick_agent(),
                         random_formula(eng, depth - 1, agents, atoms, with_action_boxes));
        AgentId a = pick_agent(), b = pick_agent();
        while (b == a) b = ags[eng() % ags.size()];
        return f_action_box(interact_model(pick_atom(), a, b, agents),
                            random_formula(eng, depth - 1, agents, atoms, with_action_boxes));
    }
    }
}

} // namespace ecalc
