#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ecalc/bisim.hpp"
#include "ecalc/random_gen.hpp"

namespace ecalc {

// Seeded property suites over random models and the two constructor action
// models.  Every suite draws its own models per seed, so a reported seed
// replays the exact counterexample.  The update function is injectable so a
// deliberately broken update can prove the suites have teeth.

using UpdateFn = std::function<PointedModel(const PointedModel&, const PointedActionModel&)>;

struct PropertyOptions {
    uint64_t seed = 1;
    int count = 500; // seeds per suite
    int max_states = 5;
    int max_agents = 3;
    int max_atoms = 3;
    int invariance_pairs = 200;    // duplicated-state pairs
    int invariance_formulas = 20;  // formulas checked per pair
    UpdateFn update;               // empty: product_update
};

struct PropertyResult {
    std::string name;
    int seeds_run = 0;
    int hits = 0;     // iterations whose hypothesis held
    int failures = 0;
    std::optional<uint64_t> first_failing_seed;
    std::string detail; // first counterexample, human-readable
    std::optional<PointedModel> cex_model;

    bool pass() const { return failures == 0; }
};

// Test-only mutation: an executable update forgets every fact, which breaks
// fact-knowledge preservation and lets suites demonstrate they can fail.
inline PointedModel corrupted_update(const PointedModel& pm, const PointedActionModel& pam) {
    PointedModel u = product_update(pm, pam);
    if (u.model == pm.model) return u;
    KripkeModel m = *u.model;
    for (auto& [r, ss] : m.val) ss.clear();
    return PointedModel{std::make_shared<const KripkeModel>(std::move(m)), u.point};
}

namespace detail {

struct PropCtx {
    std::mt19937_64 eng;
    std::set<AgentId> agents;
    std::set<AtomId> atoms;
    PointedModel pm;
};

inline PropCtx make_ctx(uint64_t seed, const PropertyOptions& o, int min_agents = 1) {
    static const char* agent_pool[] = {"A", "B", "C", "D", "E"};
    static const char* atom_pool[] = {"p", "q", "r", "s1", "s2"};
    PropCtx c{std::mt19937_64(seed), {}, {}, {}};
    int na = min_agents + (int)(c.eng() % (uint64_t)std::max(1, o.max_agents - min_agents + 1));
    int nt = 1 + (int)(c.eng() % (uint64_t)std::max(1, o.max_atoms));
    int ns = 1 + (int)(c.eng() % (uint64_t)std::max(1, o.max_states));
    for (int i = 0; i < na && i < 5; ++i) c.agents.insert(AgentId{agent_pool[i]});
    for (int i = 0; i < nt && i < 5; ++i) c.atoms.insert(AtomId{atom_pool[i]});
    c.pm = random_model(ns, c.agents, c.atoms, c.eng());
    return c;
}

inline AgentId pick_agent(PropCtx& c) {
    std::vector<AgentId> v(c.agents.begin(), c.agents.end());
    return v[c.eng() % v.size()];
}
inline AtomId pick_atom(PropCtx& c) {
    std::vector<AtomId> v(c.atoms.begin(), c.atoms.end());
    return v[c.eng() % v.size()];
}

// One of the two constructor families, well-formed for the context universe.
inline PointedActionModel random_constructor(PropCtx& c, std::string* describe = nullptr) {
    AtomId q = pick_atom(c);
    if (c.agents.size() >= 2 && (c.eng() & 1)) {
        AgentId a = pick_agent(c), b = pick_agent(c);
        std::vector<AgentId> v(c.agents.begin(), c.agents.end());
        while (b == a) b = v[c.eng() % v.size()];
        if (describe) *describe = "pass " + q.v + " " + a.v + " " + b.v;
        return interact_model(q, a, b, c.agents);
    }
    AgentId b = pick_agent(c);
    if (describe) *describe = "recv " + q.v + " " + b.v;
    return receive_model(q, b, c.agents);
}

inline UpdateFn updater(const PropertyOptions& o) {
    if (o.update) return o.update;
    return [](const PointedModel& pm, const PointedActionModel& pam) {
        return product_update(pm, pam);
    };
}

template <typename Body>
PropertyResult run_suite(const std::string& name, const PropertyOptions& o, int min_agents,
                         Body body) {
    PropertyResult res;
    res.name = name;
    UpdateFn up = updater(o);
    for (int i = 0; i < o.count; ++i) {
        uint64_t seed = o.seed + (uint64_t)i;
        PropCtx c = make_ctx(seed, o, min_agents);
        ++res.seeds_run;
        std::string note;
        // body: returns false on property violation, sets hit when the
        // hypothesis applied
        bool hit = false;
        bool ok = body(c, up, hit, note);
        if (hit) ++res.hits;
        if (!ok) {
            ++res.failures;
            if (!res.first_failing_seed) {
                res.first_failing_seed = seed;
                res.detail = note;
                res.cex_model = c.pm;
            }
        }
    }
    return res;
}

} // namespace detail

// Prop: updating bisimilar states with the same action keeps them bisimilar;
// also checks the product never exceeds |W| x |points| states.
inline PropertyResult prop_update_preserves_bisimilarity(const PropertyOptions& o) {
    return detail::run_suite(
        "update-preserves-bisimilarity", o, 1,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            hit = true;
            std::string which;
            PointedActionModel pam = detail::random_constructor(c, &which);
            PointedModel twin = duplicate_states(c.pm);
            PointedModel u1 = up(c.pm, pam), u2 = up(twin, pam);
            size_t cap = c.pm.model->states.size() * pam.model->points.size();
            if (u1.model->states.size() > cap) {
                note = "product exceeded |W|x|points| after " + which;
                return false;
            }
            if (!bisimilar(u1, u2)) {
                note = "duplicated-state twin diverged after " + which;
                return false;
            }
            return true;
        });
}

// Prop: known facts stay known across any constructor update.
inline PropertyResult prop_fact_knowledge_preservation(const PropertyOptions& o) {
    return detail::run_suite(
        "fact-knowledge-preservation", o, 1,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            AgentId who = detail::pick_agent(c);
            AtomId r = detail::pick_atom(c);
            Form box = f_box(who, f_atom(r));
            if (!eval(c.pm, box)) return true;
            hit = true;
            std::string which;
            PointedActionModel pam = detail::random_constructor(c, &which);
            if (eval(up(c.pm, pam), box)) return true;
            note = "K[" + who.v + "] " + r.v + " lost after " + which;
            return false;
        });
}

// Prop: against propositional goals, one update step is transparent:
// pre(v) & [M,v]theta  <->  pre(v) & theta, at every state.
inline PropertyResult prop_precondition_composition(const PropertyOptions& o) {
    return detail::run_suite(
        "precondition-composition", o, 1,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            hit = true;
            std::string which;
            PointedActionModel pam = detail::random_constructor(c, &which);
            Form pre = pam.model->pre[pam.point];
            Form theta = random_propositional(c.eng, 3, c.atoms);
            for (int s = 0; s < (int)c.pm.model->states.size(); ++s) {
                PointedModel here{c.pm.model, s};
                bool pre_ok = eval(here, pre);
                bool lhs = pre_ok && eval(up(here, pam), theta);
                bool rhs = pre_ok && eval(here, theta);
                if (lhs != rhs) {
                    note = "state " + c.pm.model->states[s].str() + ", goal " +
                           to_source(theta) + ", update " + which;
                    return false;
                }
            }
            return true;
        });
}

// Prop: after receiving q, the receiver knows q.
inline PropertyResult prop_succ1(const PropertyOptions& o) {
    return detail::run_suite(
        "succ1", o, 1,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            hit = true;
            AtomId q = detail::pick_atom(c);
            AgentId b = detail::pick_agent(c);
            PointedModel u = up(c.pm, receive_model(q, b, c.agents));
            if (eval(u, f_box(b, f_atom(q)))) return true;
            note = "recv " + q.v + " " + b.v + " left K[" + b.v + "] " + q.v + " false";
            return false;
        });
}

// Prop: if the sender knows q, passing q makes the receiver know q, and know
// that the sender knows it.
inline PropertyResult prop_succ2(const PropertyOptions& o) {
    return detail::run_suite(
        "succ2", o, 2,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            AtomId q = detail::pick_atom(c);
            AgentId a = detail::pick_agent(c), b = detail::pick_agent(c);
            std::vector<AgentId> v(c.agents.begin(), c.agents.end());
            while (b == a) b = v[c.eng() % v.size()];
            if (!eval(c.pm, f_box(a, f_atom(q)))) return true;
            hit = true;
            PointedModel u = up(c.pm, interact_model(q, a, b, c.agents));
            if (!eval(u, f_box(b, f_atom(q)))) {
                note = "pass " + q.v + " " + a.v + " " + b.v + " left K[" + b.v + "] " +
                       q.v + " false";
                return false;
            }
            if (!eval(u, f_box(b, f_box(a, f_atom(q))))) {
                note = "pass " + q.v + " " + a.v + " " + b.v + " left K[" + b.v + "] K[" +
                       a.v + "] " + q.v + " false";
                return false;
            }
            return true;
        });
}

// Prop: two actions executable at the same state stay executable in sequence;
// the double product contains the doubly-paired point.
inline PropertyResult prop_executability_pairing(const PropertyOptions& o) {
    return detail::run_suite(
        "executability-pairing", o, 1,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            std::string w1, w2;
            PointedActionModel m1 = detail::random_constructor(c, &w1);
            PointedActionModel m2 = detail::random_constructor(c, &w2);
            if (!executable(c.pm, m1) || !executable(c.pm, m2)) return true;
            hit = true;
            PointedModel u12 = up(up(c.pm, m1), m2);
            StateId want = pair_state(pair_state(c.pm.point_id(), m1.point_id()),
                                      m2.point_id());
            if (u12.point_id() == want) return true;
            note = "after " + w1 + " then " + w2 + ": point " + u12.point_id().str() +
                   " instead of " + want.str();
            return false;
        });
}

// Prop: repeating the same constructor update changes nothing up to
// bisimilarity.
inline PropertyResult prop_idempotence(const PropertyOptions& o) {
    return detail::run_suite(
        "idempotence", o, 1,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            hit = true;
            std::string which;
            PointedActionModel pam = detail::random_constructor(c, &which);
            PointedModel once = up(c.pm, pam);
            PointedModel twice = up(once, pam);
            if (bisimilar(once, twice)) return true;
            note = "second " + which + " changed the state";
            return false;
        });
}

// Prop: two updates executable at the same state commute up to bisimilarity.
inline PropertyResult prop_commutativity(const PropertyOptions& o) {
    return detail::run_suite(
        "commutativity", o, 1,
        [](detail::PropCtx& c, const UpdateFn& up, bool& hit, std::string& note) {
            std::string w1, w2;
            PointedActionModel m1 = detail::random_constructor(c, &w1);
            PointedActionModel m2 = detail::random_constructor(c, &w2);
            if (!executable(c.pm, m1) || !executable(c.pm, m2)) return true;
            hit = true;
            PointedModel ab = up(up(c.pm, m1), m2);
            PointedModel ba = up(up(c.pm, m2), m1);
            if (bisimilar(ab, ba)) return true;
            note = w1 + " ; " + w2 + " is not " + w2 + " ; " + w1;
            return false;
        });
}

// Prop: formula truth is blind to bisimilarity-preserving surgery.
inline PropertyResult prop_bisimulation_invariance(const PropertyOptions& o) {
    PropertyResult res;
    res.name = "bisimulation-invariance";
    for (int i = 0; i < o.invariance_pairs; ++i) {
        uint64_t seed = o.seed + (uint64_t)i;
        detail::PropCtx c = detail::make_ctx(seed, o);
        PointedModel twin = duplicate_states(c.pm);
        ++res.seeds_run;
        ++res.hits;
        for (int k = 0; k < o.invariance_formulas; ++k) {
            Form f = random_formula(c.eng, 4, c.agents, c.atoms, true);
            if (eval(c.pm, f) == eval(twin, f)) continue;
            ++res.failures;
            if (!res.first_failing_seed) {
                res.first_failing_seed = seed;
                res.detail = "disagrees on " + to_source(f);
                res.cex_model = c.pm;
            }
            break;
        }
    }
    return res;
}

// The eight seeded suites (in reporting order) plus bisimulation invariance.
inline std::vector<PropertyResult> run_property_suites(const PropertyOptions& o) {
    return {
        prop_update_preserves_bisimilarity(o),
        prop_fact_knowledge_preservation(o),
        prop_precondition_composition(o),
        prop_succ1(o),
        prop_succ2(o),
        prop_executability_pairing(o),
        prop_idempotence(o),
        prop_commutativity(o),
        prop_bisimulation_invariance(o),
    };
}

} // namespace ecalc
