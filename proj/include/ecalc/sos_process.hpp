#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ecalc/errors.hpp"
#include "ecalc/terms.hpp"

namespace ecalc {

// Process-level actions.  Bound outputs carry the name being extruded.
struct ProcAction {
    enum class Kind { Tau, OutName, InName, BoundOut, OutFact, InFact };
    Kind kind = Kind::Tau;
    Name ch;
    Name n;      // payload for name actions
    AtomId fct;  // payload for fact actions

    static ProcAction tau() { return {}; }
    static ProcAction out_name(Name a, Name b) { return {Kind::OutName, std::move(a), std::move(b), {}}; }
    static ProcAction in_name(Name a, Name b) { return {Kind::InName, std::move(a), std::move(b), {}}; }
    static ProcAction bound_out(Name a, Name z) { return {Kind::BoundOut, std::move(a), std::move(z), {}}; }
    static ProcAction out_fact(Name a, AtomId q) { return {Kind::OutFact, std::move(a), {}, std::move(q)}; }
    static ProcAction in_fact(Name a, AtomId q) { return {Kind::InFact, std::move(a), {}, std::move(q)}; }

    bool operator==(const ProcAction&) const = default;

    std::string str() const {
        switch (kind) {
        case Kind::Tau: return "tau";
        case Kind::OutName: return ch.v + "!" + n.v;
        case Kind::InName: return ch.v + "?" + n.v;
        case Kind::BoundOut: return ch.v + "!(" + n.v + ")";
        case Kind::OutFact: return ch.v + "!" + fct.v;
        case Kind::InFact: return ch.v + "?" + fct.v;
        }
        return "?";
    }
};

// Names occurring in the action (channel and any name payload).
inline std::set<Name> action_names(const ProcAction& a) {
    switch (a.kind) {
    case ProcAction::Kind::Tau: return {};
    case ProcAction::Kind::OutFact:
    case ProcAction::Kind::InFact: return {a.ch};
    default: return {a.ch, a.n};
    }
}

inline std::set<Name> action_bound_names(const ProcAction& a) {
    if (a.kind == ProcAction::Kind::BoundOut) return {a.n};
    return {};
}

inline std::set<Name> action_free_names(const ProcAction& a) {
    auto all = action_names(a);
    for (const Name& b : action_bound_names(a)) all.erase(b);
    return all;
}

struct ProcTrans {
    ProcAction act;
    Proc succ;
};

namespace detail {

// Renames the extruded name of a bound-output transition away from `avoid`.
inline ProcTrans retarget_bound(ProcTrans t, std::set<Name> avoid) {
    for (const Name& n : all_names(t.succ)) avoid.insert(n);
    avoid.insert(t.act.ch);
    avoid.insert(t.act.n);
    Name z2 = fresh_name(avoid);
    t.succ = subst_name(t.succ, z2, t.act.n);
    t.act.n = z2;
    return t;
}

inline std::vector<ProcTrans> step_proc(const Proc& p, const std::set<Name>& pool,
                                        const Name& fresh, const std::set<AtomId>& atoms) {
    std::vector<ProcTrans> out;
    switch (p->kind) {
    case Process::Kind::Nil:
        break;
    case Process::Kind::Act: {
        const Prefix& pre = p->pre;
        switch (pre.kind) {
        case Prefix::Kind::Tau:
            out.push_back({ProcAction::tau(), p->a});
            break;
        case Prefix::Kind::OutName:
            out.push_back({ProcAction::out_name(pre.channel, pre.name_arg), p->a});
            break;
        case Prefix::Kind::InName:
            for (const Name& c : pool)
                out.push_back({ProcAction::in_name(pre.channel, c), subst_name(p->a, c, pre.name_arg)});
            break;
        case Prefix::Kind::OutFact:
            out.push_back({ProcAction::out_fact(pre.channel, pre.fact_arg), p->a});
            break;
        case Prefix::Kind::InFact:
            for (const AtomId& q : atoms)
                out.push_back({ProcAction::in_fact(pre.channel, q), subst_fact(p->a, q, pre.fact_arg)});
            break;
        }
        break;
    }
    case Process::Kind::Sum: {
        for (auto& t : step_proc(p->a, pool, fresh, atoms)) out.push_back(std::move(t));
        for (auto& t : step_proc(p->b, pool, fresh, atoms)) out.push_back(std::move(t));
        break;
    }
    case Process::Kind::Par: {
        const auto L = step_proc(p->a, pool, fresh, atoms);
        const auto R = step_proc(p->b, pool, fresh, atoms);
        const auto fnL = free_names(p->a);
        const auto fnR = free_names(p->b);
        auto interleave = [&](const std::vector<ProcTrans>& ts, const Proc& other,
                              const std::set<Name>& fn_other, bool left) {
            for (ProcTrans t : ts) {
                if (t.act.kind == ProcAction::Kind::BoundOut && fn_other.count(t.act.n)) {
                    auto avoid = pool;
                    for (const Name& n : all_names(other)) avoid.insert(n);
                    t = retarget_bound(std::move(t), std::move(avoid));
                }
                out.push_back({t.act, left ? p_par(t.succ, other) : p_par(other, t.succ)});
            }
        };
        interleave(L, p->b, fnR, true);
        interleave(R, p->a, fnL, false);
        auto comm = [&](const std::vector<ProcTrans>& outs, const std::vector<ProcTrans>& ins,
                        bool left) {
            for (const auto& o : outs) {
                if (o.act.kind != ProcAction::Kind::OutName) continue;
                for (const auto& i : ins) {
                    if (i.act.kind != ProcAction::Kind::InName || i.act.ch != o.act.ch ||
                        i.act.n != o.act.n)
                        continue;
                    out.push_back({ProcAction::tau(),
                                   left ? p_par(o.succ, i.succ) : p_par(i.succ, o.succ)});
                }
            }
        };
        comm(L, R, true);
        comm(R, L, false);
        auto close = [&](const std::vector<ProcTrans>& bouts, const std::vector<ProcTrans>& ins,
                         const Proc& insrc, bool left) {
            const auto fn_in = free_names(insrc);
            for (const ProcTrans& bo : bouts) {
                if (bo.act.kind != ProcAction::Kind::BoundOut) continue;
                for (const auto& i : ins) {
                    if (i.act.kind != ProcAction::Kind::InName || i.act.ch != bo.act.ch ||
                        i.act.n != fresh)
                        continue;
                    ProcTrans b = bo;
                    if (fn_in.count(b.act.n)) {
                        auto avoid = pool;
                        for (const Name& n : all_names(insrc)) avoid.insert(n);
                        for (const Name& n : all_names(i.succ)) avoid.insert(n);
                        b = retarget_bound(std::move(b), std::move(avoid));
                    }
                    Proc qi = subst_name(i.succ, b.act.n, fresh);
                    Proc body = left ? p_par(b.succ, qi) : p_par(qi, b.succ);
                    out.push_back({ProcAction::tau(), p_res(b.act.n, body)});
                }
            }
        };
        close(L, R, p->b, true);
        close(R, L, p->a, false);
        break;
    }
    case Process::Kind::Res: {
        Name z = p->binder;
        Proc body = p->a;
        // binders shadowing a pool name are renamed apart, so that receiving
        // the like-named free name stays derivable across the restriction
        if (pool.count(z)) {
            auto avoid = pool;
            for (const Name& n : all_names(body)) avoid.insert(n);
            Name z2 = fresh_name(avoid);
            body = subst_name(body, z2, z);
            z = z2;
        }
        auto inner_pool = pool;
        inner_pool.insert(z);
        for (ProcTrans t : step_proc(body, inner_pool, fresh, atoms)) {
            // a bound output spelled like the binder extrudes an inner name
            if (t.act.kind == ProcAction::Kind::BoundOut && t.act.n == z)
                t = retarget_bound(std::move(t), inner_pool);
            if (t.act.kind == ProcAction::Kind::OutName && t.act.n == z && t.act.ch != z) {
                out.push_back({ProcAction::bound_out(t.act.ch, z), t.succ});
            } else if (action_names(t.act).count(z)) {
                // restricted name cannot cross the boundary
            } else {
                out.push_back({t.act, p_res(z, t.succ)});
            }
        }
        break;
    }
    case Process::Kind::Repl: {
        const auto T = step_proc(p->a, pool, fresh, atoms);
        const auto fnP = free_names(p->a);
        for (ProcTrans t : T) {
            if (t.act.kind == ProcAction::Kind::BoundOut && fnP.count(t.act.n)) {
                auto avoid = pool;
                for (const Name& n : all_names(p->a)) avoid.insert(n);
                t = retarget_bound(std::move(t), std::move(avoid));
            }
            out.push_back({t.act, p_par(t.succ, p)});
        }
        for (const auto& o : T) {
            if (o.act.kind != ProcAction::Kind::OutName) continue;
            for (const auto& i : T)
                if (i.act.kind == ProcAction::Kind::InName && i.act.ch == o.act.ch &&
                    i.act.n == o.act.n)
                    out.push_back({ProcAction::tau(), p_par(p_par(o.succ, i.succ), p)});
        }
        for (const ProcTrans& bo : T) {
            if (bo.act.kind != ProcAction::Kind::BoundOut) continue;
            for (const auto& i : T) {
                if (i.act.kind != ProcAction::Kind::InName || i.act.ch != bo.act.ch ||
                    i.act.n != fresh)
                    continue;
                ProcTrans b = bo;
                if (fnP.count(b.act.n)) {
                    auto avoid = pool;
                    for (const Name& n : all_names(p->a)) avoid.insert(n);
                    for (const Name& n : all_names(i.succ)) avoid.insert(n);
                    b = retarget_bound(std::move(b), std::move(avoid));
                }
                Proc inner = p_res(b.act.n, p_par(b.succ, subst_name(i.succ, b.act.n, fresh)));
                out.push_back({ProcAction::tau(), p_par(inner, p)});
            }
        }
        break;
    }
    }
    return out;
}

// Dedupes by label and successor-up-to-alpha, then orders deterministically.
inline std::vector<ProcTrans> finish_transitions(std::vector<ProcTrans> ts) {
    std::vector<std::pair<std::pair<std::string, std::string>, size_t>> keyed;
    keyed.reserve(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) {
        ProcAction a = ts[i].act;
        Proc s = ts[i].succ;
        if (a.kind == ProcAction::Kind::BoundOut) {
            s = subst_name(s, Name{"#b"}, a.n);
            a.n = Name{"#b"};
        }
        keyed.push_back({{a.str(), to_source(alpha_canonical(s))}, i});
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<ProcTrans> out;
    for (size_t k = 0; k < keyed.size(); ++k) {
        if (k > 0 && keyed[k].first == keyed[k - 1].first) continue;
        out.push_back(std::move(ts[keyed[k].second]));
    }
    return out;
}

} // namespace detail

// All transitions of `p` under the early scheme: inputs range over the
// declared names plus one fresh representative, fact inputs over the
// declared atoms.  Deduplicated up to alpha on successors, sorted by label.
inline std::vector<ProcTrans> proc_transitions(const Proc& p, const Universe& u) {
    for (const Name& n : free_names(p))
        if (!u.names.count(n)) throw InputError("process mentions undeclared name " + n.v);
    for (const AtomId& q : free_facts(p))
        if (!u.atoms.count(q)) throw InputError("process mentions undeclared fact " + q.v);
    std::set<Name> avoid = u.names;
    for (const Name& n : all_names(p)) avoid.insert(n);
    const Name fresh = fresh_name(avoid);
    auto pool = u.names;
    pool.insert(fresh);
    return detail::finish_transitions(detail::step_proc(p, pool, fresh, u.atoms));
}

// The fresh representative proc_transitions uses for input instantiation.
inline Name input_witness(const Proc& p, const Universe& u) {
    std::set<Name> avoid = u.names;
    for (const Name& n : all_names(p)) avoid.insert(n);
    return fresh_name(avoid);
}

} // namespace ecalc
