#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ecalc/epistemics.hpp"
#include "ecalc/sos_process.hpp"

namespace ecalc {

// System-level labels.  Name actions and tau pass through from the process
// layer unchanged; fact actions are annotated with the acting agent, and a
// completed fact handover records sender and receiver.
struct Label {
    enum class Kind { Tau, OutName, InName, BoundOut, AgentOutFact, AgentInFact, Interact };
    Kind kind = Kind::Tau;
    Name ch;
    Name n;         // name payload
    AtomId fct;     // fact payload
    AgentId agent;  // actor; sender for Interact
    AgentId agent2; // receiver for Interact

    static Label tau() { return {}; }
    static Label out_name(Name a, Name b) { return {Kind::OutName, std::move(a), std::move(b), {}, {}, {}}; }
    static Label in_name(Name a, Name b) { return {Kind::InName, std::move(a), std::move(b), {}, {}, {}}; }
    static Label bound_out(Name a, Name z) { return {Kind::BoundOut, std::move(a), std::move(z), {}, {}, {}}; }
    static Label agent_out_fact(Name a, AtomId q, AgentId ag) {
        return {Kind::AgentOutFact, std::move(a), {}, std::move(q), std::move(ag), {}};
    }
    static Label agent_in_fact(Name a, AtomId q, AgentId ag) {
        return {Kind::AgentInFact, std::move(a), {}, std::move(q), std::move(ag), {}};
    }
    static Label interact(Name a, AtomId q, AgentId from, AgentId to) {
        return {Kind::Interact, std::move(a), {}, std::move(q), std::move(from), std::move(to)};
    }

    bool operator==(const Label&) const = default;

    std::string str() const {
        switch (kind) {
        case Kind::Tau: return "tau";
        case Kind::OutName: return ch.v + "!" + n.v;
        case Kind::InName: return ch.v + "?" + n.v;
        case Kind::BoundOut: return ch.v + "!(" + n.v + ")";
        case Kind::AgentOutFact: return agent.v + ":" + ch.v + "!" + fct.v;
        case Kind::AgentInFact: return agent.v + ":" + ch.v + "?" + fct.v;
        case Kind::Interact: return agent.v + ">" + agent2.v + ":" + ch.v + "!" + fct.v;
        }
        return "?";
    }
};

inline std::set<Name> label_names(const Label& l) {
    switch (l.kind) {
    case Label::Kind::Tau: return {};
    case Label::Kind::OutName:
    case Label::Kind::InName:
    case Label::Kind::BoundOut: return {l.ch, l.n};
    default: return {l.ch};
    }
}

inline std::set<Name> label_bound_names(const Label& l) {
    if (l.kind == Label::Kind::BoundOut) return {l.n};
    return {};
}

struct Configuration {
    ESys sys;
    PointedModel state;
};

struct SysTrans {
    Label lbl;
    Configuration succ;
};

namespace detail {

inline SysTrans retarget_bound_sys(SysTrans t, std::set<Name> avoid) {
    for (const Name& n : all_names(t.succ.sys)) avoid.insert(n);
    avoid.insert(t.lbl.ch);
    avoid.insert(t.lbl.n);
    Name z2 = fresh_name(avoid);
    t.succ.sys = subst_name(t.succ.sys, z2, t.lbl.n);
    t.lbl.n = z2;
    return t;
}

inline std::vector<SysTrans> step_sys(const ESys& h, const PointedModel& state,
                                      const std::set<Name>& pool, const Name& fresh,
                                      const Universe& u) {
    std::vector<SysTrans> out;
    switch (h->kind) {
    case ESystem::Kind::AgentProc: {
        const AgentId& me = h->agent;
        for (const ProcTrans& t : step_proc(h->proc, pool, fresh, u.atoms)) {
            switch (t.act.kind) {
            case ProcAction::Kind::InFact: {
                PointedModel next = product_update(state, receive_model(t.act.fct, me, u.agents));
                out.push_back({Label::agent_in_fact(t.act.ch, t.act.fct, me),
                               {e_agent(me, t.succ), next}});
                break;
            }
            case ProcAction::Kind::OutFact: {
                // a fact leaves an agent only if the agent knows it
                if (eval(state, f_box(me, f_atom(t.act.fct))))
                    out.push_back({Label::agent_out_fact(t.act.ch, t.act.fct, me),
                                   {e_agent(me, t.succ), state}});
                break;
            }
            case ProcAction::Kind::Tau:
                out.push_back({Label::tau(), {e_agent(me, t.succ), state}});
                break;
            case ProcAction::Kind::OutName:
                out.push_back({Label::out_name(t.act.ch, t.act.n), {e_agent(me, t.succ), state}});
                break;
            case ProcAction::Kind::InName:
                out.push_back({Label::in_name(t.act.ch, t.act.n), {e_agent(me, t.succ), state}});
                break;
            case ProcAction::Kind::BoundOut:
                out.push_back({Label::bound_out(t.act.ch, t.act.n), {e_agent(me, t.succ), state}});
                break;
            }
        }
        break;
    }
    case ESystem::Kind::Par: {
        const auto TG = step_sys(h->a, state, pool, fresh, u);
        const auto TH = step_sys(h->b, state, pool, fresh, u);
        const auto fnG = free_names(h->a);
        const auto fnH = free_names(h->b);
        auto interleave = [&](const std::vector<SysTrans>& ts, const ESys& other,
                              const std::set<Name>& fn_other, bool left) {
            for (SysTrans t : ts) {
                if (t.lbl.kind == Label::Kind::BoundOut && fn_other.count(t.lbl.n)) {
                    auto avoid = pool;
                    for (const Name& n : all_names(other)) avoid.insert(n);
                    t = retarget_bound_sys(std::move(t), std::move(avoid));
                }
                t.succ.sys = left ? e_par(t.succ.sys, other) : e_par(other, t.succ.sys);
                out.push_back(std::move(t));
            }
        };
        interleave(TG, h->b, fnH, true);
        interleave(TH, h->a, fnG, false);
        auto comm_name = [&](const std::vector<SysTrans>& outs, const std::vector<SysTrans>& ins,
                             bool left) {
            for (const auto& o : outs) {
                if (o.lbl.kind != Label::Kind::OutName) continue;
                for (const auto& i : ins) {
                    if (i.lbl.kind != Label::Kind::InName || i.lbl.ch != o.lbl.ch ||
                        i.lbl.n != o.lbl.n)
                        continue;
                    ESys sys = left ? e_par(o.succ.sys, i.succ.sys) : e_par(i.succ.sys, o.succ.sys);
                    out.push_back({Label::tau(), {sys, state}});
                }
            }
        };
        comm_name(TG, TH, true);
        comm_name(TH, TG, false);
        auto close_name = [&](const std::vector<SysTrans>& bouts, const std::vector<SysTrans>& ins,
                              const ESys& insrc, bool left) {
            const auto fn_in = free_names(insrc);
            for (const SysTrans& bo : bouts) {
                if (bo.lbl.kind != Label::Kind::BoundOut) continue;
                for (const auto& i : ins) {
                    if (i.lbl.kind != Label::Kind::InName || i.lbl.ch != bo.lbl.ch ||
                        i.lbl.n != fresh)
                        continue;
                    SysTrans b = bo;
                    if (fn_in.count(b.lbl.n)) {
                        auto avoid = pool;
                        for (const Name& n : all_names(insrc)) avoid.insert(n);
                        for (const Name& n : all_names(i.succ.sys)) avoid.insert(n);
                        b = retarget_bound_sys(std::move(b), std::move(avoid));
                    }
                    ESys qi = subst_name(i.succ.sys, b.lbl.n, fresh);
                    ESys body = left ? e_par(b.succ.sys, qi) : e_par(qi, b.succ.sys);
                    out.push_back({Label::tau(), {e_res(b.lbl.n, body), state}});
                }
            }
        };
        close_name(TG, TH, h->b, true);
        close_name(TH, TG, h->a, false);
        auto handover = [&](const std::vector<SysTrans>& outs, const std::vector<SysTrans>& ins,
                            bool left) {
            for (const auto& o : outs) {
                if (o.lbl.kind != Label::Kind::AgentOutFact) continue;
                for (const auto& i : ins) {
                    if (i.lbl.kind != Label::Kind::AgentInFact || i.lbl.ch != o.lbl.ch ||
                        i.lbl.fct != o.lbl.fct)
                        continue;
                    // epistemic effect is rebuilt from the configuration's own
                    // state; the premises' private updates are discarded
                    PointedModel next = product_update(
                        state, interact_model(o.lbl.fct, o.lbl.agent, i.lbl.agent, u.agents));
                    ESys sys = left ? e_par(o.succ.sys, i.succ.sys) : e_par(i.succ.sys, o.succ.sys);
                    out.push_back({Label::interact(o.lbl.ch, o.lbl.fct, o.lbl.agent, i.lbl.agent),
                                   {sys, next}});
                }
            }
        };
        handover(TG, TH, true);
        handover(TH, TG, false);
        break;
    }
    case ESystem::Kind::Res: {
        Name z = h->binder;
        ESys body = h->a;
        if (pool.count(z)) { // shadowed pool name: rename the binder apart
            auto avoid = pool;
            for (const Name& n : all_names(body)) avoid.insert(n);
            Name z2 = fresh_name(avoid);
            body = subst_name(body, z2, z);
            z = z2;
        }
        auto inner_pool = pool;
        inner_pool.insert(z);
        for (SysTrans t : step_sys(body, state, inner_pool, fresh, u)) {
            if (t.lbl.kind == Label::Kind::BoundOut && t.lbl.n == z)
                t = retarget_bound_sys(std::move(t), inner_pool);
            if (t.lbl.kind == Label::Kind::OutName && t.lbl.n == z && t.lbl.ch != z) {
                t.lbl = Label::bound_out(t.lbl.ch, z);
                out.push_back(std::move(t));
            } else if (t.lbl.kind == Label::Kind::Interact) {
                // a completed handover is internal: it passes the restriction
                // even when the channel is the restricted name
                t.succ.sys = e_res(z, t.succ.sys);
                out.push_back(std::move(t));
            } else if (label_names(t.lbl).count(z)) {
                // restricted name cannot cross the boundary
            } else {
                t.succ.sys = e_res(z, t.succ.sys);
                out.push_back(std::move(t));
            }
        }
        break;
    }
    }
    return out;
}

inline std::vector<SysTrans> finish_sys_transitions(std::vector<SysTrans> ts) {
    std::vector<std::pair<std::pair<std::string, std::string>, size_t>> keyed;
    keyed.reserve(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) {
        Label l = ts[i].lbl;
        ESys s = ts[i].succ.sys;
        if (l.kind == Label::Kind::BoundOut) {
            s = subst_name(s, Name{"#b"}, l.n);
            l.n = Name{"#b"};
        }
        keyed.push_back({{l.str(), to_source(alpha_canonical(s))}, i});
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<SysTrans> out;
    for (size_t k = 0; k < keyed.size(); ++k) {
        if (k > 0 && keyed[k].first == keyed[k - 1].first) continue;
        out.push_back(std::move(ts[keyed[k].second]));
    }
    return out;
}

} // namespace detail

// Checks the configuration against the declared universes.  Returns problems
// as messages; empty means well-formed.
inline std::vector<std::string> validate_configuration(const Configuration& cfg,
                                                       const Universe& u) {
    std::vector<std::string> problems = validate_esystem(cfg.sys);
    for (const Name& n : free_names(cfg.sys))
        if (!u.names.count(n)) problems.push_back("undeclared name " + n.v);
    for (const AtomId& q : free_facts(cfg.sys))
        if (!u.atoms.count(q)) problems.push_back("undeclared fact " + q.v);
    for (const AgentId& a : agents_of(cfg.sys))
        if (!u.agents.count(a)) problems.push_back("undeclared agent " + a.v);
    std::vector<AgentId> uagents(u.agents.begin(), u.agents.end());
    std::vector<AtomId> uatoms(u.atoms.begin(), u.atoms.end());
    if (cfg.state.model->agents != uagents)
        problems.push_back("model agents differ from the declared universe");
    if (cfg.state.model->atoms != uatoms)
        problems.push_back("model atoms differ from the declared universe");
    return problems;
}

// All transitions of a configuration.  Fact receipt applies the receive
// update, fact emission is gated on the sender knowing the fact, a completed
// handover applies the interact update to the pre-step state.
inline std::vector<SysTrans> esys_transitions(const Configuration& cfg, const Universe& u) {
    auto problems = validate_configuration(cfg, u);
    if (!problems.empty()) throw InputError("invalid configuration: " + problems.front());
    std::set<Name> avoid = u.names;
    for (const Name& n : all_names(cfg.sys)) avoid.insert(n);
    const Name fresh = fresh_name(avoid);
    auto pool = u.names;
    pool.insert(fresh);
    return detail::finish_sys_transitions(detail::step_sys(cfg.sys, cfg.state, pool, fresh, u));
}

} // namespace ecalc
