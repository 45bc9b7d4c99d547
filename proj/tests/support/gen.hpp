#pragma once

// Deterministic random term generation for property tests.

#include <random>
#include <vector>

#include "ecalc/terms.hpp"

namespace gen {

using namespace ecalc;

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    // uniform in [0, n)
    size_t below(size_t n) { return n ? eng() % n : 0; }
    bool coin() { return eng() & 1; }
    bool chance(int pct) { return (int)(eng() % 100) < pct; }
};

inline const std::vector<Name>& name_pool() {
    static const std::vector<Name> p{Name("a"), Name("b"), Name("c"), Name("z"), Name("w")};
    return p;
}
inline const std::vector<AtomId>& atom_pool() {
    static const std::vector<AtomId> p{AtomId("p"), AtomId("q"), AtomId("chi")};
    return p;
}

inline Name pick_name(Rng& r) { return name_pool()[r.below(name_pool().size())]; }
inline AtomId pick_atom(Rng& r) { return atom_pool()[r.below(atom_pool().size())]; }

inline Prefix random_prefix(Rng& r, bool with_facts = true) {
    switch (r.below(with_facts ? 5 : 3)) {
    case 0: return Prefix::out_name(pick_name(r), pick_name(r));
    case 1: return Prefix::in_name(pick_name(r), pick_name(r));
    case 2: return Prefix::tau();
    case 3: return Prefix::out_fact(pick_name(r), pick_atom(r));
    default: return Prefix::in_fact(pick_name(r), pick_atom(r));
    }
}

inline Proc random_guarded(Rng& r, int depth);

inline Proc random_process(Rng& r, int depth, bool with_facts = true) {
    if (depth <= 0 || r.chance(15)) return r.coin() ? p_nil() : p_act(random_prefix(r, with_facts), p_nil());
    switch (r.below(6)) {
    case 0:
    case 1: return p_act(random_prefix(r, with_facts), random_process(r, depth - 1, with_facts));
    case 2: return p_sum(random_guarded(r, depth - 1), random_guarded(r, depth - 1));
    case 3: return p_par(random_process(r, depth - 1, with_facts), random_process(r, depth - 1, with_facts));
    case 4: return p_res(pick_name(r), random_process(r, depth - 1, with_facts));
    default: return p_repl(random_process(r, depth - 1, with_facts));
    }
}

inline Proc random_guarded(Rng& r, int depth) {
    if (depth <= 0 || r.chance(40)) return p_nil();
    if (r.chance(25)) return p_sum(random_guarded(r, depth - 1), random_guarded(r, depth - 1));
    return p_act(random_prefix(r), random_process(r, depth - 1));
}

// Alpha-convertible variant: rename a random selection of binders.
inline Proc random_alpha_variant(Rng& r, const Proc& p) {
    switch (p->kind) {
    case Process::Kind::Nil: return p;
    case Process::Kind::Act: {
        Prefix pi = p->pre;
        Proc body = random_alpha_variant(r, p->a);
        if (pi.kind == Prefix::Kind::InName && r.coin()) {
            std::set<Name> avoid = free_names(body);
            avoid.erase(pi.name_arg);
            Name cand = r.coin() ? pick_name(r) : fresh_name(avoid);
            if (!avoid.count(cand) && cand != pi.name_arg) {
                body = subst_name(body, cand, pi.name_arg);
                pi.name_arg = cand;
            }
        }
        if (pi.kind == Prefix::Kind::InFact && r.coin()) {
            std::set<AtomId> avoid = free_facts(body);
            avoid.erase(pi.fact_arg);
            AtomId cand = pick_atom(r);
            if (!avoid.count(cand) && cand != pi.fact_arg) {
                body = subst_fact(body, cand, pi.fact_arg);
                pi.fact_arg = cand;
            }
        }
        return p_act(pi, body);
    }
    case Process::Kind::Sum: return p_sum(random_alpha_variant(r, p->a), random_alpha_variant(r, p->b));
    case Process::Kind::Par: return p_par(random_alpha_variant(r, p->a), random_alpha_variant(r, p->b));
    case Process::Kind::Res: {
        Proc body = random_alpha_variant(r, p->a);
        Name binder = p->binder;
        if (r.coin()) {
            std::set<Name> avoid = free_names(body);
            avoid.erase(binder);
            Name cand = r.coin() ? pick_name(r) : fresh_name(avoid);
            if (!avoid.count(cand) && cand != binder) {
                body = subst_name(body, cand, binder);
                binder = cand;
            }
        }
        return p_res(binder, body);
    }
    case Process::Kind::Repl: return p_repl(random_alpha_variant(r, p->a));
    }
    return p;
}

} // namespace gen
