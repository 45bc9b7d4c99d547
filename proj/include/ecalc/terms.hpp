#pragma once

#include <cassert>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ecalc/ids.hpp"

namespace ecalc {

// ---------------------------------------------------------------------------
// Control processes
//
//   P ::= 0 | pi.P | P+P | P|P | new z (P) | !P
//   pi ::= a!c | a?(z) | a!q | a?(x) | tau      (c,z names; q,x facts)
//
// Terms are immutable; subtrees are shared freely.

struct Prefix {
    enum class Kind { OutName, InName, OutFact, InFact, Tau };
    Kind kind = Kind::Tau;
    Name channel;    // unused for Tau
    Name name_arg;   // OutName payload / InName binder
    AtomId fact_arg; // OutFact payload / InFact binder

    auto operator<=>(const Prefix&) const = default;

    static Prefix out_name(Name a, Name c) { return {Kind::OutName, std::move(a), std::move(c), {}}; }
    static Prefix in_name(Name a, Name z) { return {Kind::InName, std::move(a), std::move(z), {}}; }
    static Prefix out_fact(Name a, AtomId q) { return {Kind::OutFact, std::move(a), {}, std::move(q)}; }
    static Prefix in_fact(Name a, AtomId x) { return {Kind::InFact, std::move(a), {}, std::move(x)}; }
    static Prefix tau() { return {Kind::Tau, {}, {}, {}}; }
};

struct Process;
using Proc = std::shared_ptr<const Process>;

struct Process {
    enum class Kind { Nil, Act, Sum, Par, Res, Repl };
    Kind kind = Kind::Nil;
    Prefix pre;   // Act
    Proc a, b;    // Act/Res/Repl: a = body; Sum/Par: a,b = operands
    Name binder;  // Res

    bool operator==(const Process& o) const {
        if (kind != o.kind) return false;
        switch (kind) {
        case Kind::Nil: return true;
        case Kind::Act: return pre == o.pre && *a == *o.a;
        case Kind::Sum:
        case Kind::Par: return *a == *o.a && *b == *o.b;
        case Kind::Res: return binder == o.binder && *a == *o.a;
        case Kind::Repl: return *a == *o.a;
        }
        return false;
    }
};

inline Proc p_nil() {
    static const Proc nil = std::make_shared<Process>();
    return nil;
}
inline Proc p_act(Prefix pre, Proc cont) {
    auto n = std::make_shared<Process>();
    n->kind = Process::Kind::Act;
    n->pre = std::move(pre);
    n->a = std::move(cont);
    return n;
}
inline Proc p_sum(Proc l, Proc r) {
    auto n = std::make_shared<Process>();
    n->kind = Process::Kind::Sum;
    n->a = std::move(l);
    n->b = std::move(r);
    return n;
}
inline Proc p_par(Proc l, Proc r) {
    auto n = std::make_shared<Process>();
    n->kind = Process::Kind::Par;
    n->a = std::move(l);
    n->b = std::move(r);
    return n;
}
inline Proc p_res(Name z, Proc body) {
    auto n = std::make_shared<Process>();
    n->kind = Process::Kind::Res;
    n->binder = std::move(z);
    n->a = std::move(body);
    return n;
}
inline Proc p_repl(Proc body) {
    auto n = std::make_shared<Process>();
    n->kind = Process::Kind::Repl;
    n->a = std::move(body);
    return n;
}

inline bool proc_equal(const Proc& x, const Proc& y) { return *x == *y; }

// ---------------------------------------------------------------------------
// E-systems: agents with control processes.  Each agent occurs at most once.
//
//   H ::= [P]@A | H || H | new z (H)

struct ESystem;
using ESys = std::shared_ptr<const ESystem>;

struct ESystem {
    enum class Kind { AgentProc, Par, Res };
    Kind kind = Kind::AgentProc;
    AgentId agent; // AgentProc
    Proc proc;     // AgentProc
    ESys a, b;     // Par: a,b; Res: a = body
    Name binder;   // Res

    bool operator==(const ESystem& o) const {
        if (kind != o.kind) return false;
        switch (kind) {
        case Kind::AgentProc: return agent == o.agent && *proc == *o.proc;
        case Kind::Par: return *a == *o.a && *b == *o.b;
        case Kind::Res: return binder == o.binder && *a == *o.a;
        }
        return false;
    }
};

inline ESys e_agent(AgentId ag, Proc p) {
    auto n = std::make_shared<ESystem>();
    n->kind = ESystem::Kind::AgentProc;
    n->agent = std::move(ag);
    n->proc = std::move(p);
    return n;
}
inline ESys e_par(ESys l, ESys r) {
    auto n = std::make_shared<ESystem>();
    n->kind = ESystem::Kind::Par;
    n->a = std::move(l);
    n->b = std::move(r);
    return n;
}
inline ESys e_res(Name z, ESys body) {
    auto n = std::make_shared<ESystem>();
    n->kind = ESystem::Kind::Res;
    n->binder = std::move(z);
    n->a = std::move(body);
    return n;
}

// ---------------------------------------------------------------------------
// Free / bound identifiers

inline void collect_free_names(const Proc& p, std::set<Name>& bound, std::set<Name>& out) {
    switch (p->kind) {
    case Process::Kind::Nil: return;
    case Process::Kind::Act: {
        const Prefix& pi = p->pre;
        auto see = [&](const Name& n) { if (!bound.count(n)) out.insert(n); };
        switch (pi.kind) {
        case Prefix::Kind::OutName: see(pi.channel); see(pi.name_arg); break;
        case Prefix::Kind::InName: {
            see(pi.channel);
            bool added = bound.insert(pi.name_arg).second;
            collect_free_names(p->a, bound, out);
            if (added) bound.erase(pi.name_arg);
            return;
        }
        case Prefix::Kind::OutFact:
        case Prefix::Kind::InFact: see(pi.channel); break;
        case Prefix::Kind::Tau: break;
        }
        collect_free_names(p->a, bound, out);
        return;
    }
    case Process::Kind::Sum:
    case Process::Kind::Par:
        collect_free_names(p->a, bound, out);
        collect_free_names(p->b, bound, out);
        return;
    case Process::Kind::Res: {
        bool added = bound.insert(p->binder).second;
        collect_free_names(p->a, bound, out);
        if (added) bound.erase(p->binder);
        return;
    }
    case Process::Kind::Repl:
        collect_free_names(p->a, bound, out);
        return;
    }
}

inline std::set<Name> free_names(const Proc& p) {
    std::set<Name> bound, out;
    collect_free_names(p, bound, out);
    return out;
}

inline void collect_bound_names(const Proc& p, std::set<Name>& out) {
    switch (p->kind) {
    case Process::Kind::Nil: return;
    case Process::Kind::Act:
        if (p->pre.kind == Prefix::Kind::InName) out.insert(p->pre.name_arg);
        collect_bound_names(p->a, out);
        return;
    case Process::Kind::Sum:
    case Process::Kind::Par:
        collect_bound_names(p->a, out);
        collect_bound_names(p->b, out);
        return;
    case Process::Kind::Res:
        out.insert(p->binder);
        collect_bound_names(p->a, out);
        return;
    case Process::Kind::Repl:
        collect_bound_names(p->a, out);
        return;
    }
}

inline std::set<Name> bound_names(const Proc& p) {
    std::set<Name> out;
    collect_bound_names(p, out);
    return out;
}

// Fact identifiers occurring free in fact positions (payloads of a!q and,
// below a fact binder, uses introduced by substitution do not exist: fact
// variables occur only as binders and as OutFact payloads after substitution).
inline void collect_free_facts(const Proc& p, std::set<AtomId>& bound, std::set<AtomId>& out) {
    switch (p->kind) {
    case Process::Kind::Nil: return;
    case Process::Kind::Act: {
        const Prefix& pi = p->pre;
        if (pi.kind == Prefix::Kind::OutFact && !bound.count(pi.fact_arg)) out.insert(pi.fact_arg);
        if (pi.kind == Prefix::Kind::InFact) {
            bool added = bound.insert(pi.fact_arg).second;
            collect_free_facts(p->a, bound, out);
            if (added) bound.erase(pi.fact_arg);
            return;
        }
        collect_free_facts(p->a, bound, out);
        return;
    }
    case Process::Kind::Sum:
    case Process::Kind::Par:
        collect_free_facts(p->a, bound, out);
        collect_free_facts(p->b, bound, out);
        return;
    case Process::Kind::Res:
        collect_free_facts(p->a, bound, out);
        return;
    case Process::Kind::Repl:
        collect_free_facts(p->a, bound, out);
        return;
    }
}

inline std::set<AtomId> free_facts(const Proc& p) {
    std::set<AtomId> bound, out;
    collect_free_facts(p, bound, out);
    return out;
}

inline std::set<AtomId> bound_facts(const Proc& p) {
    std::set<AtomId> out;
    std::vector<Proc> stack{p};
    while (!stack.empty()) {
        Proc cur = stack.back();
        stack.pop_back();
        switch (cur->kind) {
        case Process::Kind::Act:
            if (cur->pre.kind == Prefix::Kind::InFact) out.insert(cur->pre.fact_arg);
            stack.push_back(cur->a);
            break;
        case Process::Kind::Sum:
        case Process::Kind::Par:
            stack.push_back(cur->a);
            stack.push_back(cur->b);
            break;
        case Process::Kind::Res:
        case Process::Kind::Repl:
            stack.push_back(cur->a);
            break;
        case Process::Kind::Nil: break;
        }
    }
    return out;
}

inline void collect_free_names(const ESys& h, std::set<Name>& bound, std::set<Name>& out) {
    switch (h->kind) {
    case ESystem::Kind::AgentProc: {
        std::set<Name> fp = free_names(h->proc);
        for (const Name& n : fp)
            if (!bound.count(n)) out.insert(n);
        return;
    }
    case ESystem::Kind::Par:
        collect_free_names(h->a, bound, out);
        collect_free_names(h->b, bound, out);
        return;
    case ESystem::Kind::Res: {
        bool added = bound.insert(h->binder).second;
        collect_free_names(h->a, bound, out);
        if (added) bound.erase(h->binder);
        return;
    }
    }
}

inline std::set<Name> free_names(const ESys& h) {
    std::set<Name> bound, out;
    collect_free_names(h, bound, out);
    return out;
}

// E-level restriction binds names only, so fact variables cross it freely.
inline std::set<AtomId> free_facts(const ESys& h) {
    std::set<AtomId> out;
    std::vector<ESys> stack{h};
    while (!stack.empty()) {
        ESys cur = stack.back();
        stack.pop_back();
        switch (cur->kind) {
        case ESystem::Kind::AgentProc: {
            auto f = free_facts(cur->proc);
            out.insert(f.begin(), f.end());
            break;
        }
        case ESystem::Kind::Par:
            stack.push_back(cur->a);
            stack.push_back(cur->b);
            break;
        case ESystem::Kind::Res:
            stack.push_back(cur->a);
            break;
        }
    }
    return out;
}

inline std::set<Name> bound_names(const ESys& h) {
    std::set<Name> out;
    std::vector<ESys> stack{h};
    while (!stack.empty()) {
        ESys cur = stack.back();
        stack.pop_back();
        switch (cur->kind) {
        case ESystem::Kind::AgentProc: collect_bound_names(cur->proc, out); break;
        case ESystem::Kind::Par:
            stack.push_back(cur->a);
            stack.push_back(cur->b);
            break;
        case ESystem::Kind::Res:
            out.insert(cur->binder);
            stack.push_back(cur->a);
            break;
        }
    }
    return out;
}

inline std::set<Name> all_names(const Proc& p) {
    std::set<Name> out = free_names(p);
    collect_bound_names(p, out);
    return out;
}

inline void collect_all_names(const ESys& h, std::set<Name>& out) {
    switch (h->kind) {
    case ESystem::Kind::AgentProc: {
        auto s = all_names(h->proc);
        out.insert(s.begin(), s.end());
        return;
    }
    case ESystem::Kind::Par:
        collect_all_names(h->a, out);
        collect_all_names(h->b, out);
        return;
    case ESystem::Kind::Res:
        out.insert(h->binder);
        collect_all_names(h->a, out);
        return;
    }
}

inline std::set<Name> all_names(const ESys& h) {
    std::set<Name> out;
    collect_all_names(h, out);
    return out;
}

inline void collect_agents(const ESys& h, std::vector<AgentId>& out) {
    switch (h->kind) {
    case ESystem::Kind::AgentProc: out.push_back(h->agent); return;
    case ESystem::Kind::Par:
        collect_agents(h->a, out);
        collect_agents(h->b, out);
        return;
    case ESystem::Kind::Res: collect_agents(h->a, out); return;
    }
}

inline std::vector<AgentId> agents_of(const ESys& h) {
    std::vector<AgentId> out;
    collect_agents(h, out);
    return out;
}

// ---------------------------------------------------------------------------
// Substitution (capture-avoiding)

inline Proc subst_name(const Proc& p, const Name& nw, const Name& old);

namespace detail {

inline Name subst_in_name(const Name& n, const Name& nw, const Name& old) {
    return n == old ? nw : n;
}

} // namespace detail

// P{nw/old}: every free occurrence of `old` becomes `nw`.  Binders that would
// capture `nw` are renamed to a fresh name first.
inline Proc subst_name(const Proc& p, const Name& nw, const Name& old) {
    if (nw == old) return p;
    switch (p->kind) {
    case Process::Kind::Nil: return p;
    case Process::Kind::Act: {
        Prefix pi = p->pre;
        pi.channel = detail::subst_in_name(pi.channel, nw, old);
        if (pi.kind == Prefix::Kind::OutName)
            pi.name_arg = detail::subst_in_name(pi.name_arg, nw, old);
        if (pi.kind == Prefix::Kind::InName) {
            if (pi.name_arg == old) // binder shadows
                return p_act(pi, p->a);
            if (pi.name_arg == nw && free_names(p->a).count(old)) {
                std::set<Name> avoid = all_names(p->a);
                avoid.insert(nw);
                avoid.insert(old);
                Name rn = fresh_name(avoid);
                Proc body = subst_name(p->a, rn, pi.name_arg);
                pi.name_arg = rn;
                return p_act(pi, subst_name(body, nw, old));
            }
            return p_act(pi, subst_name(p->a, nw, old));
        }
        return p_act(pi, subst_name(p->a, nw, old));
    }
    case Process::Kind::Sum: return p_sum(subst_name(p->a, nw, old), subst_name(p->b, nw, old));
    case Process::Kind::Par: return p_par(subst_name(p->a, nw, old), subst_name(p->b, nw, old));
    case Process::Kind::Res: {
        if (p->binder == old) return p;
        if (p->binder == nw && free_names(p->a).count(old)) {
            std::set<Name> avoid = all_names(p->a);
            avoid.insert(nw);
            avoid.insert(old);
            Name rn = fresh_name(avoid);
            Proc body = subst_name(p->a, rn, p->binder);
            return p_res(rn, subst_name(body, nw, old));
        }
        return p_res(p->binder, subst_name(p->a, nw, old));
    }
    case Process::Kind::Repl: return p_repl(subst_name(p->a, nw, old));
    }
    return p;
}

// P{q/x}: free occurrences of fact variable `x` in fact payloads become `q`.
inline Proc subst_fact(const Proc& p, const AtomId& q, const AtomId& x) {
    if (q == x) return p;
    switch (p->kind) {
    case Process::Kind::Nil: return p;
    case Process::Kind::Act: {
        Prefix pi = p->pre;
        if (pi.kind == Prefix::Kind::OutFact && pi.fact_arg == x) pi.fact_arg = q;
        if (pi.kind == Prefix::Kind::InFact) {
            if (pi.fact_arg == x) return p_act(pi, p->a);
            if (pi.fact_arg == q && free_facts(p->a).count(x)) {
                std::set<AtomId> avoid = free_facts(p->a);
                auto bf = bound_facts(p->a);
                avoid.insert(bf.begin(), bf.end());
                avoid.insert(q);
                avoid.insert(x);
                AtomId rn = fresh_fact_var(avoid);
                Proc body = subst_fact(p->a, rn, pi.fact_arg);
                pi.fact_arg = rn;
                return p_act(pi, subst_fact(body, q, x));
            }
        }
        return p_act(pi, subst_fact(p->a, q, x));
    }
    case Process::Kind::Sum: return p_sum(subst_fact(p->a, q, x), subst_fact(p->b, q, x));
    case Process::Kind::Par: return p_par(subst_fact(p->a, q, x), subst_fact(p->b, q, x));
    case Process::Kind::Res: return p_res(p->binder, subst_fact(p->a, q, x));
    case Process::Kind::Repl: return p_repl(subst_fact(p->a, q, x));
    }
    return p;
}

inline ESys subst_name(const ESys& h, const Name& nw, const Name& old) {
    if (nw == old) return h;
    switch (h->kind) {
    case ESystem::Kind::AgentProc: return e_agent(h->agent, subst_name(h->proc, nw, old));
    case ESystem::Kind::Par: return e_par(subst_name(h->a, nw, old), subst_name(h->b, nw, old));
    case ESystem::Kind::Res: {
        if (h->binder == old) return h;
        if (h->binder == nw && free_names(h->a).count(old)) {
            std::set<Name> avoid = all_names(h->a);
            avoid.insert(nw);
            avoid.insert(old);
            Name rn = fresh_name(avoid);
            ESys body = subst_name(h->a, rn, h->binder);
            return e_res(rn, subst_name(body, nw, old));
        }
        return e_res(h->binder, subst_name(h->a, nw, old));
    }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Alpha-canonical form
//
// Binding sites are renumbered in traversal order: name binders to v0, v1, ...
// and fact binders to u0, u1, ... with one shared walk over the whole term.
// Candidates that occur free anywhere in the term are skipped, so the renaming
// can never capture.  Two terms get identical canonical forms iff they are
// alpha-convertible; the map is idempotent.

namespace detail {

struct AlphaState {
    std::set<Name> free_n;   // free names of the whole term, never reused
    std::set<AtomId> free_f; // free fact ids of the whole term
    int next_n = 0;
    int next_f = 0;

    Name next_name() {
        for (;;) {
            Name cand("v" + std::to_string(next_n++));
            if (!free_n.count(cand)) return cand;
        }
    }
    AtomId next_fact() {
        for (;;) {
            AtomId cand("u" + std::to_string(next_f++));
            if (!free_f.count(cand)) return cand;
        }
    }
};

inline Proc alpha_walk(const Proc& p, AlphaState& st, std::map<Name, Name> env_n,
                       std::map<AtomId, AtomId> env_f) {
    auto ren_n = [&](const Name& n) {
        auto it = env_n.find(n);
        return it == env_n.end() ? n : it->second;
    };
    switch (p->kind) {
    case Process::Kind::Nil: return p;
    case Process::Kind::Act: {
        Prefix pi = p->pre;
        pi.channel = ren_n(pi.channel);
        switch (pi.kind) {
        case Prefix::Kind::OutName: pi.name_arg = ren_n(pi.name_arg); break;
        case Prefix::Kind::InName: {
            Name fresh = st.next_name();
            env_n[pi.name_arg] = fresh;
            pi.name_arg = fresh;
            return p_act(pi, alpha_walk(p->a, st, env_n, env_f));
        }
        case Prefix::Kind::OutFact: {
            auto it = env_f.find(pi.fact_arg);
            if (it != env_f.end()) pi.fact_arg = it->second;
            break;
        }
        case Prefix::Kind::InFact: {
            AtomId fresh = st.next_fact();
            env_f[pi.fact_arg] = fresh;
            pi.fact_arg = fresh;
            return p_act(pi, alpha_walk(p->a, st, env_n, env_f));
        }
        case Prefix::Kind::Tau: break;
        }
        return p_act(pi, alpha_walk(p->a, st, env_n, env_f));
    }
    case Process::Kind::Sum: {
        Proc l = alpha_walk(p->a, st, env_n, env_f); // left subterm numbered first
        Proc r = alpha_walk(p->b, st, env_n, env_f);
        return p_sum(std::move(l), std::move(r));
    }
    case Process::Kind::Par: {
        Proc l = alpha_walk(p->a, st, env_n, env_f);
        Proc r = alpha_walk(p->b, st, env_n, env_f);
        return p_par(std::move(l), std::move(r));
    }
    case Process::Kind::Res: {
        Name fresh = st.next_name();
        env_n[p->binder] = fresh;
        return p_res(fresh, alpha_walk(p->a, st, env_n, env_f));
    }
    case Process::Kind::Repl: return p_repl(alpha_walk(p->a, st, env_n, env_f));
    }
    return p;
}

inline ESys alpha_walk(const ESys& h, AlphaState& st, std::map<Name, Name> env_n) {
    switch (h->kind) {
    case ESystem::Kind::AgentProc:
        // outer e-level environment applies simultaneously inside the process
        return e_agent(h->agent, alpha_walk(h->proc, st, env_n, {}));
    case ESystem::Kind::Par: {
        ESys l = alpha_walk(h->a, st, env_n); // left component numbered first
        ESys r = alpha_walk(h->b, st, env_n);
        return e_par(std::move(l), std::move(r));
    }
    case ESystem::Kind::Res: {
        Name fresh = st.next_name();
        env_n[h->binder] = fresh;
        return e_res(fresh, alpha_walk(h->a, st, env_n));
    }
    }
    return h;
}

} // namespace detail

inline Proc alpha_canonical(const Proc& p) {
    detail::AlphaState st;
    st.free_n = free_names(p);
    st.free_f = free_facts(p);
    return detail::alpha_walk(p, st, {}, {});
}

inline ESys alpha_canonical(const ESys& h) {
    detail::AlphaState st;
    st.free_n = free_names(h);
    // fact ids under e-system binders are all within agent processes; their
    // free fact ids are global (facts are never name-restricted)
    std::vector<ESys> stack{h};
    while (!stack.empty()) {
        ESys cur = stack.back();
        stack.pop_back();
        switch (cur->kind) {
        case ESystem::Kind::AgentProc: {
            auto ff = free_facts(cur->proc);
            st.free_f.insert(ff.begin(), ff.end());
            break;
        }
        case ESystem::Kind::Par:
            stack.push_back(cur->a);
            stack.push_back(cur->b);
            break;
        case ESystem::Kind::Res: stack.push_back(cur->a); break;
        }
    }
    return detail::alpha_walk(h, st, {});
}

// Structural-congruence cleanup: nil operands of | and + are dropped, !0 and
// new z (0) collapse to 0.  Transitions are unaffected (0 contributes none),
// so the pruned term identifies the same behaviour with spent copies erased.
inline Proc prune_nil(const Proc& p) {
    using K = Process::Kind;
    switch (p->kind) {
    case K::Nil: return p;
    case K::Act: {
        Proc c = prune_nil(p->a);
        return c == p->a ? p : p_act(p->pre, std::move(c));
    }
    case K::Sum: {
        Proc l = prune_nil(p->a), r = prune_nil(p->b);
        if (l->kind == K::Nil) return r;
        if (r->kind == K::Nil) return l;
        return l == p->a && r == p->b ? p : p_sum(std::move(l), std::move(r));
    }
    case K::Par: {
        Proc l = prune_nil(p->a), r = prune_nil(p->b);
        if (l->kind == K::Nil) return r;
        if (r->kind == K::Nil) return l;
        return l == p->a && r == p->b ? p : p_par(std::move(l), std::move(r));
    }
    case K::Res: {
        Proc c = prune_nil(p->a);
        if (c->kind == K::Nil) return c;
        return c == p->a ? p : p_res(p->binder, std::move(c));
    }
    case K::Repl: {
        Proc c = prune_nil(p->a);
        if (c->kind == K::Nil) return c;
        return c == p->a ? p : p_repl(std::move(c));
    }
    }
    return p;
}

// Agent slots survive even when their process is spent: [0]@A stays visible.
inline ESys prune_nil(const ESys& h) {
    switch (h->kind) {
    case ESystem::Kind::AgentProc: {
        Proc p = prune_nil(h->proc);
        return p == h->proc ? h : e_agent(h->agent, std::move(p));
    }
    case ESystem::Kind::Par: {
        ESys a = prune_nil(h->a), b = prune_nil(h->b);
        return a == h->a && b == h->b ? h : e_par(std::move(a), std::move(b));
    }
    case ESystem::Kind::Res: {
        ESys a = prune_nil(h->a);
        return a == h->a ? h : e_res(h->binder, std::move(a));
    }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Printing (matches the concrete syntax accepted by the parser)

namespace detail {

inline void print_proc(const Proc& p, std::string& out, int level);

inline void print_prefix(const Prefix& pi, std::string& out) {
    switch (pi.kind) {
    case Prefix::Kind::OutName: out += pi.channel.v + "!" + pi.name_arg.v; break;
    case Prefix::Kind::InName: out += pi.channel.v + "?(" + pi.name_arg.v + ")"; break;
    case Prefix::Kind::OutFact: out += pi.channel.v + "!" + pi.fact_arg.v; break;
    case Prefix::Kind::InFact: out += pi.channel.v + "?(" + pi.fact_arg.v + ")"; break;
    case Prefix::Kind::Tau: out += "tau"; break;
    }
}

// levels: 1 sum, 2 par, 3 repl, 4 prim
inline int proc_level(const Proc& p) {
    switch (p->kind) {
    case Process::Kind::Sum: return 1;
    case Process::Kind::Par: return 2;
    case Process::Kind::Repl: return 3;
    default: return 4;
    }
}

// Right operands of + and | are parenthesized when they are the same
// connective, so right-nested trees survive the left-assoc reparse.
inline void print_child(const Proc& p, std::string& out, int op_level, bool is_right) {
    int lvl = proc_level(p);
    bool parens = is_right ? lvl <= op_level : lvl < op_level;
    if (parens) {
        out += "(";
        print_proc(p, out, 1);
        out += ")";
    } else {
        print_proc(p, out, op_level);
    }
}

inline void print_proc(const Proc& p, std::string& out, int /*level*/) {
    switch (p->kind) {
    case Process::Kind::Nil: out += "0"; return;
    case Process::Kind::Act: {
        print_prefix(p->pre, out);
        out += ".";
        // continuation parses at repl level: sums and pars need parens
        if (proc_level(p->a) <= 2) {
            out += "(";
            print_proc(p->a, out, 1);
            out += ")";
        } else {
            print_proc(p->a, out, 3);
        }
        return;
    }
    case Process::Kind::Sum: {
        // left operand may itself be a sum (left-assoc); right may not
        print_child(p->a, out, 1, false);
        out += " + ";
        print_child(p->b, out, 1, true);
        return;
    }
    case Process::Kind::Par: {
        print_child(p->a, out, 2, false);
        out += " | ";
        print_child(p->b, out, 2, true);
        return;
    }
    case Process::Kind::Res: {
        out += "new " + p->binder.v;
        Proc body = p->a;
        while (body->kind == Process::Kind::Res) {
            out += "," + body->binder.v;
            body = body->a;
        }
        out += " (";
        print_proc(body, out, 1);
        out += ")";
        return;
    }
    case Process::Kind::Repl: {
        out += "!";
        if (proc_level(p->a) <= 2) {
            out += "(";
            print_proc(p->a, out, 1);
            out += ")";
        } else {
            print_proc(p->a, out, 3);
        }
        return;
    }
    }
}

inline void print_esys(const ESys& h, std::string& out) {
    switch (h->kind) {
    case ESystem::Kind::AgentProc: {
        out += "[";
        print_proc(h->proc, out, 1);
        out += "]@" + h->agent.v;
        return;
    }
    case ESystem::Kind::Par: {
        print_esys(h->a, out);
        out += " || ";
        if (h->b->kind == ESystem::Kind::Par) {
            out += "(";
            print_esys(h->b, out);
            out += ")";
        } else {
            print_esys(h->b, out);
        }
        return;
    }
    case ESystem::Kind::Res: {
        out += "new " + h->binder.v;
        ESys body = h->a;
        while (body->kind == ESystem::Kind::Res) {
            out += "," + body->binder.v;
            body = body->a;
        }
        out += " (";
        print_esys(body, out);
        out += ")";
        return;
    }
    }
}

} // namespace detail

inline std::string to_source(const Proc& p) {
    std::string out;
    detail::print_proc(p, out, 1);
    return out;
}

inline std::string to_source(const ESys& h) {
    std::string out;
    detail::print_esys(h, out);
    return out;
}

// ---------------------------------------------------------------------------
// Validation

// Sum operands must fit SUM ::= 0 | pi.P | SUM+SUM.
inline bool sum_guarded(const Proc& p) {
    switch (p->kind) {
    case Process::Kind::Nil:
    case Process::Kind::Act: return true;
    case Process::Kind::Sum: return sum_guarded(p->a) && sum_guarded(p->b);
    default: return false;
    }
}

inline void collect_violations(const Proc& p, std::vector<std::string>& out) {
    switch (p->kind) {
    case Process::Kind::Nil: return;
    case Process::Kind::Act: collect_violations(p->a, out); return;
    case Process::Kind::Sum:
        if (!sum_guarded(p->a) || !sum_guarded(p->b))
            out.push_back("sum operand is not prefix-guarded: " + to_source(p));
        collect_violations(p->a, out);
        collect_violations(p->b, out);
        return;
    case Process::Kind::Par:
        collect_violations(p->a, out);
        collect_violations(p->b, out);
        return;
    case Process::Kind::Res:
    case Process::Kind::Repl: collect_violations(p->a, out); return;
    }
}

// Empty result means the system is well-formed.
inline std::vector<std::string> validate_esystem(const ESys& h) {
    std::vector<std::string> out;
    std::vector<AgentId> ags = agents_of(h);
    std::set<AgentId> seen;
    for (const AgentId& a : ags)
        if (!seen.insert(a).second) out.push_back("agent occurs more than once: " + a.v);
    std::vector<ESys> stack{h};
    while (!stack.empty()) {
        ESys cur = stack.back();
        stack.pop_back();
        switch (cur->kind) {
        case ESystem::Kind::AgentProc: collect_violations(cur->proc, out); break;
        case ESystem::Kind::Par:
            stack.push_back(cur->a);
            stack.push_back(cur->b);
            break;
        case ESystem::Kind::Res: stack.push_back(cur->a); break;
        }
    }
    return out;
}

} // namespace ecalc
