#include <catch2/catch_amalgamated.hpp>

#include "ecalc/terms.hpp"
#include "support/alpha_oracle.hpp"
#include "support/gen.hpp"

using namespace ecalc;

namespace {

Name nm(const char* s) { return Name(s); }
AtomId at(const char* s) { return AtomId(s); }
AgentId ag(const char* s) { return AgentId(s); }

} // namespace

TEST_CASE("free and bound names") {
    CHECK(free_names(p_nil()).empty());
    CHECK(bound_names(p_nil()).empty());

    // a?(z).z!b.0 : z is input-bound
    Proc p1 = p_act(Prefix::in_name(nm("a"), nm("z")),
                    p_act(Prefix::out_name(nm("z"), nm("b")), p_nil()));
    CHECK(free_names(p1) == std::set<Name>{nm("a"), nm("b")});
    CHECK(bound_names(p1) == std::set<Name>{nm("z")});

    // new z (z!a.0 | z?(x).0) : only a free
    Proc body = p_par(p_act(Prefix::out_name(nm("z"), nm("a")), p_nil()),
                      p_act(Prefix::in_name(nm("z"), nm("x")), p_nil()));
    Proc p2 = p_res(nm("z"), body);
    CHECK(free_names(p2) == std::set<Name>{nm("a")});
    CHECK(bound_names(p2) == std::set<Name>{nm("z"), nm("x")});

    Proc p3 = p_res(nm("z"), p_act(Prefix::out_name(nm("a"), nm("c")), p_nil()));
    CHECK(bound_names(p3) == std::set<Name>{nm("z")});
}

TEST_CASE("free names of e-systems cross restriction") {
    ESys h = e_res(nm("b"), e_par(e_agent(ag("A"), p_act(Prefix::out_name(nm("b"), nm("c")), p_nil())),
                                  e_agent(ag("B"), p_act(Prefix::in_name(nm("b"), nm("x")), p_nil()))));
    CHECK(free_names(h) == std::set<Name>{nm("c")});
    CHECK(bound_names(h) == std::set<Name>{nm("b"), nm("x")});
}

TEST_CASE("name substitution") {
    // (z!b.0){c/z} = c!b.0
    Proc p = p_act(Prefix::out_name(nm("z"), nm("b")), p_nil());
    Proc want = p_act(Prefix::out_name(nm("c"), nm("b")), p_nil());
    CHECK(*subst_name(p, nm("c"), nm("z")) == *want);

    CHECK(*subst_name(p_nil(), nm("c"), nm("z")) == *p_nil());

    // capture: (new c (z!c.0)){c/z} must rename the binder
    Proc q = p_res(nm("c"), p_act(Prefix::out_name(nm("z"), nm("c")), p_nil()));
    Proc r = subst_name(q, nm("c"), nm("z"));
    REQUIRE(r->kind == Process::Kind::Res);
    CHECK(r->binder != nm("c"));
    // alpha-equivalent to new w (c!w.0)
    Proc expect = p_res(nm("w"), p_act(Prefix::out_name(nm("c"), nm("w")), p_nil()));
    CHECK(oracle::alpha_eq(r, expect));

    // identity substitution is alpha-neutral
    CHECK(oracle::alpha_eq(subst_name(q, nm("z"), nm("z")), q));
}

TEST_CASE("fact substitution") {
    // (a!chi.0){q/chi} = a!q.0
    Proc p = p_act(Prefix::out_fact(nm("a"), at("chi")), p_nil());
    Proc want = p_act(Prefix::out_fact(nm("a"), at("q")), p_nil());
    CHECK(*subst_fact(p, at("q"), at("chi")) == *want);

    CHECK(*subst_fact(p_nil(), at("q"), at("chi")) == *p_nil());

    // inner binder shadows: a?(chi).a!chi.0 unchanged
    Proc s = p_act(Prefix::in_fact(nm("a"), at("chi")),
                   p_act(Prefix::out_fact(nm("a"), at("chi")), p_nil()));
    CHECK(*subst_fact(s, at("q"), at("chi")) == *s);
}

TEST_CASE("alpha canonical form") {
    Proc p1 = p_act(Prefix::in_name(nm("a"), nm("z")), p_nil());
    Proc p2 = p_act(Prefix::in_name(nm("a"), nm("w")), p_nil());
    CHECK(*alpha_canonical(p1) == *alpha_canonical(p2));

    Proc q1 = p_res(nm("x"), p_res(nm("y"), p_act(Prefix::out_name(nm("x"), nm("y")), p_nil())));
    Proc q2 = p_res(nm("u"), p_res(nm("v"), p_act(Prefix::out_name(nm("u"), nm("v")), p_nil())));
    CHECK(*alpha_canonical(q1) == *alpha_canonical(q2));

    // a?(z).z!b.0 | a?(z).0 : two binding sites get distinct ids
    Proc r = p_par(p_act(Prefix::in_name(nm("a"), nm("z")),
                         p_act(Prefix::out_name(nm("z"), nm("b")), p_nil())),
                   p_act(Prefix::in_name(nm("a"), nm("z")), p_nil()));
    Proc rc = alpha_canonical(r);
    REQUIRE(rc->kind == Process::Kind::Par);
    CHECK(rc->a->pre.name_arg != rc->b->pre.name_arg);

    // canonical binders never collide with names that stay free
    Proc f = p_res(nm("v0"), p_act(Prefix::out_name(nm("v0"), nm("v1")), p_nil()));
    Proc fc = alpha_canonical(f); // v1 free: binder must skip it
    CHECK(fc->binder != nm("v1"));
    CHECK(free_names(fc) == std::set<Name>{nm("v1")});
}

TEST_CASE("alpha canonical invariants on a generated corpus") {
    gen::Rng rng(0x5eed1);
    for (int i = 0; i < 300; ++i) {
        Proc t = gen::random_process(rng, 4);
        Proc c = alpha_canonical(t);
        CHECK(oracle::alpha_eq(t, c));
        CHECK(*alpha_canonical(c) == *c); // idempotent
        // canonical binders are disjoint from the term's free names
        std::set<Name> fr = free_names(t);
        for (const Name& b : bound_names(c)) CHECK(!fr.count(b));
    }
}

TEST_CASE("canonical equality coincides with alpha-convertibility") {
    gen::Rng rng(0xabc);
    int equal_pairs = 0;
    for (int i = 0; i < 400; ++i) {
        Proc t1 = gen::random_process(rng, 3);
        Proc t2 = (i % 2 == 0) ? gen::random_alpha_variant(rng, t1) : gen::random_process(rng, 3);
        bool canon = *alpha_canonical(t1) == *alpha_canonical(t2);
        bool ref = oracle::alpha_eq(t1, t2);
        CHECK(canon == ref);
        if (ref) ++equal_pairs;
    }
    CHECK(equal_pairs >= 150); // the variant half must actually exercise equality
}

TEST_CASE("substitution respects alpha semantics on random terms") {
    gen::Rng rng(0x77);
    for (int i = 0; i < 200; ++i) {
        Proc t = gen::random_process(rng, 3);
        // renaming to a fresh name and back is alpha-neutral on free occurrences
        std::set<Name> avoid = all_names(t);
        Name f = fresh_name(avoid);
        for (const Name& old : free_names(t)) {
            Proc moved = subst_name(t, f, old);
            Proc back = subst_name(moved, old, f);
            CHECK(oracle::alpha_eq(back, t));
        }
    }
}

TEST_CASE("fresh names avoid the given set") {
    CHECK(fresh_name({}) == nm("n0"));
    CHECK(fresh_name({nm("n0")}) == nm("n1"));
    std::set<Name> avoid{nm("n0"), nm("n1"), nm("n2"), nm("x")};
    CHECK(fresh_name(avoid) == nm("n3"));
    CHECK(is_reserved_name("n17"));
    CHECK(!is_reserved_name("nx"));
    CHECK(!is_reserved_name("m0"));
}

TEST_CASE("e-system validation") {
    ESys ok = e_par(e_agent(ag("A"), p_nil()), e_agent(ag("B"), p_nil()));
    CHECK(validate_esystem(ok).empty());

    ESys dup = e_par(e_agent(ag("A"), p_nil()), e_agent(ag("A"), p_nil()));
    auto viol = validate_esystem(dup);
    REQUIRE(viol.size() == 1);
    CHECK(viol[0].find("A") != std::string::npos);

    ESys res_ok = e_res(nm("z"), e_agent(ag("A"), p_act(Prefix::out_name(nm("a"), nm("z")), p_nil())));
    CHECK(validate_esystem(res_ok).empty());

    // unguarded sum operand
    Proc bad = p_sum(p_par(p_nil(), p_nil()), p_nil());
    ESys sys_bad = e_agent(ag("A"), bad);
    CHECK(!validate_esystem(sys_bad).empty());
}

TEST_CASE("printer emits parseable-looking source") {
    Proc p = p_res(nm("z"), p_res(nm("w"),
        p_sum(p_act(Prefix::tau(), p_nil()),
              p_act(Prefix::in_name(nm("a"), nm("x")),
                    p_par(p_act(Prefix::out_fact(nm("z"), at("q")), p_nil()), p_nil())))));
    CHECK(to_source(p) == "new z,w (tau.0 + a?(x).(z!q.0 | 0))");

    ESys h = e_res(nm("b"),
                   e_par(e_agent(ag("A"), p_act(Prefix::out_name(nm("b"), nm("c")), p_nil())),
                         e_agent(ag("B"), p_nil())));
    CHECK(to_source(h) == "new b ([b!c.0]@A || [0]@B)");

    // right-nested operators keep their shape
    Proc rn = p_sum(p_nil(), p_sum(p_nil(), p_nil()));
    CHECK(to_source(rn) == "0 + (0 + 0)");
    Proc ln = p_sum(p_sum(p_nil(), p_nil()), p_nil());
    CHECK(to_source(ln) == "0 + 0 + 0");
}

TEST_CASE("nil pruning erases spent structure") {
    Proc spent = p_par(p_nil(), p_par(p_act(Prefix::tau(), p_nil()), p_nil()));
    CHECK(to_source(prune_nil(spent)) == "tau.0");
    CHECK(to_source(prune_nil(p_repl(p_nil()))) == "0");
    CHECK(to_source(prune_nil(p_res(nm("z"), p_par(p_nil(), p_nil())))) == "0");
    CHECK(to_source(prune_nil(p_sum(p_nil(), p_act(Prefix::tau(), p_nil())))) == "tau.0");
    // under a prefix too
    Proc under = p_act(Prefix::tau(), p_par(p_nil(), p_act(Prefix::tau(), p_nil())));
    CHECK(to_source(prune_nil(under)) == "tau.tau.0");

    // an already-clean term comes back as the same node
    Proc clean = p_act(Prefix::out_name(nm("a"), nm("b")), p_nil());
    CHECK(prune_nil(clean) == clean);

    ESys h = e_res(nm("b"), e_par(e_agent(ag("A"), p_par(p_nil(), p_nil())),
                                  e_agent(ag("B"), p_act(Prefix::tau(), p_nil()))));
    CHECK(to_source(prune_nil(h)) == "new b ([0]@A || [tau.0]@B)");
    CHECK(prune_nil(h)->a->a->proc->kind == Process::Kind::Nil);
}
