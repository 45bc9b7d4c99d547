#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "ecalc/sos_process.hpp"
#include "support/gen.hpp"
#include "support/pi_oracle.hpp"

using namespace ecalc;

namespace {

oracle::OTrans conv(const ProcTrans& t) {
    oracle::OLabel l;
    switch (t.act.kind) {
    case ProcAction::Kind::Tau: l = {"tau", "", ""}; break;
    case ProcAction::Kind::OutName: l = {"out", t.act.ch.v, t.act.n.v}; break;
    case ProcAction::Kind::InName: l = {"in", t.act.ch.v, t.act.n.v}; break;
    case ProcAction::Kind::BoundOut: l = {"bout", t.act.ch.v, t.act.n.v}; break;
    case ProcAction::Kind::OutFact: l = {"outf", t.act.ch.v, t.act.fct.v}; break;
    case ProcAction::Kind::InFact: l = {"inf", t.act.ch.v, t.act.fct.v}; break;
    }
    return {l, t.succ};
}

// The fresh input witness stands for "any name not mentioned anywhere", so
// transitions instantiated with it are compared under a placeholder.
std::vector<oracle::OTrans> mask_witness(std::vector<oracle::OTrans> ts, const Name& w) {
    for (auto& [l, s] : ts)
        if (l.kind == "in" && l.arg == w.v) {
            s = subst_name(s, Name{"#f"}, w);
            l.arg = "#f";
        }
    return ts;
}

std::set<std::pair<std::string, std::string>> impl_normal(const Proc& p, const Universe& u) {
    std::vector<oracle::OTrans> conved;
    for (const auto& t : proc_transitions(p, u)) conved.push_back(conv(t));
    return oracle::normal_set(mask_witness(std::move(conved), input_witness(p, u)));
}

std::set<std::pair<std::string, std::string>> oracle_normal(const Proc& p, const Universe& u) {
    const Name fresh = input_witness(p, u);
    auto pool = u.names;
    pool.insert(fresh);
    auto ts = oracle::otrans(alpha_canonical(p), pool, fresh, u.atoms);
    return oracle::normal_set(mask_witness(std::move(ts), fresh));
}

Universe base_universe() {
    Universe u;
    for (const char* n : {"a", "b", "c", "z", "w"}) u.names.insert(Name{n});
    for (const char* q : {"p", "q", "chi"}) u.atoms.insert(AtomId{q});
    return u;
}

const Name a{"a"}, b{"b"}, c{"c"}, z{"z"}, w{"w"}, x{"x"};
const AtomId fp{"p"}, fq{"q"};

} // namespace

TEST_CASE("prefix transitions fire once") {
    Universe u = base_universe();
    auto ts = proc_transitions(p_act(Prefix::tau(), p_nil()), u);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].act == ProcAction::tau());
    CHECK(*ts[0].succ == *p_nil());

    ts = proc_transitions(p_act(Prefix::out_name(a, c), p_nil()), u);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].act.str() == "a!c");

    ts = proc_transitions(p_act(Prefix::out_fact(a, fq), p_nil()), u);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].act.str() == "a!q");
}

TEST_CASE("early input ranges over the declared names plus one fresh witness") {
    Universe u;
    u.names = {a, b};
    // a?(x).x!b.0
    Proc p = p_act(Prefix::in_name(a, x), p_act(Prefix::out_name(x, b), p_nil()));
    auto ts = proc_transitions(p, u);
    std::set<std::string> labels, succs;
    for (const auto& t : ts) {
        labels.insert(t.act.str());
        succs.insert(to_source(t.succ));
    }
    CHECK(labels == std::set<std::string>{"a?a", "a?b", "a?n0"});
    CHECK(succs == std::set<std::string>{"a!b.0", "b!b.0", "n0!b.0"});
}

TEST_CASE("fact input ranges over the declared atoms, and facts never sync inside a process") {
    Universe u = base_universe();
    // a!q.0 | a?(chi).0
    Proc p = p_par(p_act(Prefix::out_fact(a, fq), p_nil()),
                   p_act(Prefix::in_fact(a, AtomId{"chi"}), p_nil()));
    auto ts = proc_transitions(p, u);
    std::multiset<std::string> labels;
    for (const auto& t : ts) labels.insert(t.act.str());
    CHECK(labels == std::multiset<std::string>{"a!q", "a?chi", "a?p", "a?q"});
}

TEST_CASE("name communication produces tau with the instantiated continuation") {
    Universe u = base_universe();
    // a!c.0 | a?(x).x!b.0
    Proc p = p_par(p_act(Prefix::out_name(a, c), p_nil()),
                   p_act(Prefix::in_name(a, x), p_act(Prefix::out_name(x, b), p_nil())));
    auto ts = proc_transitions(p, u);
    bool found = false;
    for (const auto& t : ts)
        if (t.act.kind == ProcAction::Kind::Tau && to_source(t.succ) == "0 | c!b.0") found = true;
    CHECK(found);
}

TEST_CASE("restriction opens on output and blocks other occurrences") {
    Universe u = base_universe();
    // new n (a!n.0) up to alpha: use binder z
    auto ts = proc_transitions(p_res(z, p_act(Prefix::out_name(a, z), p_nil())), u);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].act.kind == ProcAction::Kind::BoundOut);
    CHECK(ts[0].act.ch == a);
    CHECK(*ts[0].succ == *p_nil());

    // restricted channel cannot act: new z (z!a.0) has no transitions
    CHECK(proc_transitions(p_res(z, p_act(Prefix::out_name(z, a), p_nil())), u).empty());
}

TEST_CASE("scope extrusion and close rebuild the restriction around both parties") {
    Universe u = base_universe();
    // (new z (a!z.z!b.0)) | a?(x).x?(y).0
    Proc left = p_res(z, p_act(Prefix::out_name(a, z), p_act(Prefix::out_name(z, b), p_nil())));
    Proc right = p_act(Prefix::in_name(a, x), p_act(Prefix::in_name(x, Name{"y"}), p_nil()));
    Proc p = p_par(left, right);
    auto ts = proc_transitions(p, u);
    Proc closed;
    for (const auto& t : ts)
        if (t.act.kind == ProcAction::Kind::Tau) {
            REQUIRE_FALSE(closed); // exactly one way to close
            closed = t.succ;
        }
    REQUIRE(closed);
    CHECK(to_source(alpha_canonical(closed)) == "new v0 (v0!b.0 | v0?(v1).0)");

    // the private channel now carries an internal communication
    auto ts2 = proc_transitions(closed, u);
    bool inner = false;
    for (const auto& t : ts2)
        if (t.act.kind == ProcAction::Kind::Tau && to_source(alpha_canonical(t.succ)) == "new v0 (0 | 0)")
            inner = true;
    CHECK(inner);
}

TEST_CASE("parallel extrusion renames the bound name away from the other side") {
    Universe u = base_universe();
    // (new z (a!z.0)) | z!b.0  : the extruded name must avoid the free z
    Proc p = p_par(p_res(z, p_act(Prefix::out_name(a, z), p_nil())),
                   p_act(Prefix::out_name(z, b), p_nil()));
    auto ts = proc_transitions(p, u);
    bool found = false;
    for (const auto& t : ts)
        if (t.act.kind == ProcAction::Kind::BoundOut) {
            CHECK(t.act.n != z);
            CHECK(to_source(t.succ) == "0 | z!b.0");
            found = true;
        }
    CHECK(found);
}

TEST_CASE("shadowed binders extrude under a fresh name") {
    Universe u = base_universe();
    // new z (new z (b!z.0)): the inner z is extruded, the outer one is vacuous
    Proc p = p_res(z, p_res(z, p_act(Prefix::out_name(b, z), p_nil())));
    auto ts = proc_transitions(p, u);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].act.kind == ProcAction::Kind::BoundOut);
    CHECK(ts[0].act.ch == b);
    CHECK(ts[0].act.n != z);
    CHECK(to_source(alpha_canonical(ts[0].succ)) == "new v0 (0)");
}

TEST_CASE("replication unfolds, communicates, and closes") {
    Universe u = base_universe();
    // !(a!b.0 + a?(x).x!c.0)
    Proc body = p_sum(p_act(Prefix::out_name(a, b), p_nil()),
                      p_act(Prefix::in_name(a, x), p_act(Prefix::out_name(x, c), p_nil())));
    Proc p = p_repl(body);
    auto ts = proc_transitions(p, u);
    std::set<std::string> taus;
    for (const auto& t : ts)
        if (t.act.kind == ProcAction::Kind::Tau) taus.insert(to_source(alpha_canonical(t.succ)));
    CHECK(taus.count("0 | b!c.0 | !(a!b.0 + a?(v0).v0!c.0)") == 1);

    // close across two copies: !(new z (a!z.0) + a?(x).0)
    Proc body2 = p_sum(p_res(z, p_act(Prefix::out_name(a, z), p_nil())),
                       p_act(Prefix::in_name(a, x), p_nil()));
    auto ts2 = proc_transitions(p_repl(body2), u);
    bool closed = false;
    for (const auto& t : ts2)
        if (t.act.kind == ProcAction::Kind::Tau &&
            to_source(alpha_canonical(t.succ)) == "new v0 (0 | 0) | !(new v1 (a!v1.0) + a?(v2).0)")
            closed = true;
    CHECK(closed);
}

TEST_CASE("transition lists are deduplicated and deterministic") {
    Universe u = base_universe();
    Proc p = p_sum(p_act(Prefix::tau(), p_nil()), p_act(Prefix::tau(), p_nil()));
    CHECK(proc_transitions(p, u).size() == 1);

    gen::Rng rng{123};
    Proc q = gen::random_process(rng, 4, true); // arbitrary fixed term
    auto t1 = proc_transitions(q, u);
    auto t2 = proc_transitions(q, u);
    REQUIRE(t1.size() == t2.size());
    for (size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].act == t2[i].act);
        CHECK(*t1[i].succ == *t2[i].succ);
    }
}

TEST_CASE("undeclared names and facts are rejected") {
    Universe u;
    u.names = {a};
    CHECK_THROWS_AS(proc_transitions(p_act(Prefix::out_name(a, b), p_nil()), u), InputError);
    CHECK_THROWS_AS(proc_transitions(p_act(Prefix::out_fact(a, fq), p_nil()), u), InputError);
}

TEST_CASE("the engine matches the rule-by-rule oracle on a random corpus") {
    Universe u = base_universe();
    gen::Rng rng{2024};
    for (int i = 0; i < 300; ++i) {
        Proc p = gen::random_process(rng, 4, true);
        INFO("term " << i << ": " << to_source(p));
        CHECK(impl_normal(p, u) == oracle_normal(p, u));
    }
}

TEST_CASE("transitions are stable under alpha conversion of the source") {
    Universe u = base_universe();
    gen::Rng rng{77};
    for (int i = 0; i < 200; ++i) {
        Proc p = gen::random_process(rng, 4, true);
        Proc v = gen::random_alpha_variant(rng, p);
        INFO("term " << i << ": " << to_source(p) << "  variant: " << to_source(v));
        CHECK(impl_normal(p, u) == impl_normal(v, u));
    }
}
