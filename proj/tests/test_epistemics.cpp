#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "ecalc/epistemics.hpp"
#include "ecalc/random_gen.hpp"
#include "support/epistemic_oracle.hpp"

using namespace ecalc;

namespace {

PointedModel mk(const std::vector<std::string>& states, const std::vector<std::string>& agents,
                const std::vector<std::string>& atoms,
                const std::map<std::string, std::vector<std::pair<int, int>>>& rel,
                const std::map<std::string, std::vector<int>>& val, int point) {
    KripkeModel m;
    for (const auto& s : states) m.states.push_back(base_state(s));
    for (const auto& a : agents) m.agents.push_back(AgentId{a});
    for (const auto& r : atoms) m.atoms.push_back(AtomId{r});
    for (const auto& [a, edges] : rel) {
        auto& rows = m.rel[AgentId{a}];
        rows.resize(states.size());
        for (auto [s, t] : edges) rows[s].insert(t);
    }
    for (const auto& [r, ss] : val) {
        auto& entry = m.val[AtomId{r}];
        entry.insert(ss.begin(), ss.end());
    }
    return PointedModel{finish_model(std::move(m)), point};
}

std::set<AgentId> agent_set(std::initializer_list<std::string> names) {
    std::set<AgentId> out;
    for (const auto& n : names) out.insert(AgentId{n});
    return out;
}

const AtomId q{"q"};
const AtomId p{"p"};
const AgentId A{"A"};
const AgentId B{"B"};
const AgentId C{"C"};

} // namespace

TEST_CASE("receive update on the two-state total model") {
    // states s,t; only s satisfies q; R_B links every pair
    auto pm = mk({"s", "t"}, {"A", "B"}, {"q"}, {{"B", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}}},
                 {{"q", {0}}}, 0);
    auto recv = receive_model(q, B, agent_set({"A", "B"}));
    REQUIRE(executable(pm, recv));

    auto out = product_update(pm, recv);
    std::set<std::string> got;
    for (const auto& s : out.model->states) got.insert(s.str());
    std::set<std::string> want = {"(s,s)", "(t,s)", "(s,s_q)", "(s,s_true)", "(t,s_true)"};
    CHECK(got == want);
    CHECK(out.point_id().str() == "(s,s)");

    // B's only arrow from the point goes to the q-witness pair
    auto flat = oracle::flatten(out);
    std::set<std::pair<std::string, std::string>> from_point;
    for (const auto& e : flat.edges.at("B"))
        if (e.first == "(s,s)") from_point.insert(e);
    CHECK(from_point == std::set<std::pair<std::string, std::string>>{{"(s,s)", "(s,s_q)"}});

    CHECK_FALSE(eval(pm, f_box(B, f_atom(q))));
    CHECK(eval(out, f_box(B, f_atom(q))));
    // the fact itself is unchanged by receiving
    CHECK(eval(out, f_atom(q)) == eval(pm, f_atom(q)));

    CHECK(oracle::flat_equal(flat, oracle::product_naive(pm, recv)));
}

TEST_CASE("product update agrees with the enumeration oracle") {
    auto agents = agent_set({"A", "B", "C"});
    std::set<AtomId> atoms = {p, q};
    for (uint64_t seed = 0; seed < 60; ++seed) {
        auto pm = random_model(4, agents, atoms, seed);
        PointedActionModel act = (seed % 2 == 0) ? receive_model(q, B, agents)
                                                 : interact_model(q, A, B, agents);
        INFO("seed " << seed << "\n" << dump(pm));
        auto got = product_update(pm, act);
        CHECK(oracle::flat_equal(oracle::flatten(got), oracle::product_naive(pm, act)));
    }
}

TEST_CASE("evaluation agrees with the naive recursion") {
    auto agents = agent_set({"A", "B"});
    std::set<AtomId> atoms = {p, q};
    std::mt19937_64 eng(7);
    for (uint64_t seed = 100; seed < 140; ++seed) {
        auto pm = random_model(5, agents, atoms, seed);
        auto flat = oracle::flatten(pm);
        for (int k = 0; k < 10; ++k) {
            Form f = random_formula(eng, 3, agents, atoms, /*with_action_boxes=*/true);
            INFO("seed " << seed << " formula " << to_source(f));
            for (int s = 0; s < (int)pm.model->states.size(); ++s)
                CHECK(eval_at(pm.model, s, f) ==
                      oracle::eval_naive(flat, pm.model->states[s].str(), f));
        }
    }
}

TEST_CASE("receive is executable everywhere, interact needs the sender to know") {
    auto agents = agent_set({"A", "B"});
    std::set<AtomId> atoms = {q};
    for (uint64_t seed = 0; seed < 30; ++seed) {
        auto pm = random_model(3, agents, atoms, seed);
        CHECK(executable(pm, receive_model(q, B, agents)));
        CHECK(executable(pm, interact_model(q, A, B, agents)) ==
              eval(pm, f_box(A, f_atom(q))));
    }
}

TEST_CASE("non-executable updates leave the configuration untouched") {
    // A considers the refuting state t possible, so Box_A q fails
    auto pm = mk({"s", "t"}, {"A", "B"}, {"q"}, {{"A", {{0, 1}}}}, {{"q", {0}}}, 0);
    auto pass = interact_model(q, A, B, agent_set({"A", "B"}));
    REQUIRE_FALSE(executable(pm, pass));
    auto out = product_update(pm, pass);
    CHECK(out.model == pm.model);
    CHECK(out.point == pm.point);
}

TEST_CASE("a pass makes the fact common ground between the parties") {
    auto agents = agent_set({"A", "B", "C"});
    std::set<AtomId> atoms = {q};
    int hits = 0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
        auto pm = random_model(4, agents, atoms, seed);
        if (!eval(pm, f_box(A, f_atom(q)))) continue;
        ++hits;
        auto out = product_update(pm, interact_model(q, A, B, agents));
        INFO("seed " << seed << "\n" << dump(out));
        CHECK(eval(out, f_box(B, f_atom(q))));
        CHECK(eval(out, f_box(B, f_box(A, f_atom(q)))));
        CHECK(eval(out, f_box(A, f_box(B, f_atom(q)))));
    }
    REQUIRE(hits > 5);
}

TEST_CASE("state identifiers keep update provenance") {
    StateId s = base_state("w0");
    StateId once = pair_state(s, "s_q");
    StateId twice = pair_state(once, "s_true");
    CHECK(once.str() == "(w0,s_q)");
    CHECK(twice.str() == "((w0,s_q),s_true)");
    CHECK(twice.depth() == 2);
    CHECK(once == pair_state(base_state("w0"), "s_q"));
    CHECK_FALSE(once == pair_state(base_state("w1"), "s_q"));
}

TEST_CASE("formula printing and structural equality") {
    Form f = f_box(A, f_and(f_atom(p), f_not(f_atom(q))));
    CHECK(to_source(f) == "K[A] (p & ~q)");
    CHECK(to_source(f_not(f_and(f_atom(p), f_atom(q)))) == "~(p & q)");
    CHECK(to_source(f_and(f_atom(p), f_and(f_atom(q), f_atom(p)))) == "p & (q & p)");

    auto recv = receive_model(q, B, agent_set({"A", "B"}));
    CHECK(to_source(f_action_box(recv, f_box(B, f_atom(q)))) == "[recv q B] K[B] q");
    auto pass = interact_model(q, A, B, agent_set({"A", "B"}));
    CHECK(to_source(f_action_box(pass, f_atom(q))) == "[pass q A B] q");

    CHECK(*f_iff(f_atom(p), f_atom(q)) == *f_iff(f_atom(p), f_atom(q)));
    CHECK_FALSE(*f_atom(p) == *f_atom(q));
    // sugar desugars, so or/implies are not extra node kinds
    CHECK(*f_or(f_atom(p), f_atom(q)) ==
          *f_not(f_and(f_not(f_atom(p)), f_not(f_atom(q)))));
}

TEST_CASE("universe mismatches are input errors") {
    auto pm = mk({"s"}, {"A"}, {"q"}, {}, {{"q", {0}}}, 0);
    CHECK_THROWS_AS(eval(pm, f_atom(p)), InputError);
    CHECK_THROWS_AS(eval(pm, f_box(B, f_true())), InputError);
    CHECK_THROWS_AS(interact_model(q, A, A, agent_set({"A", "B"})), InputError);
    CHECK_THROWS_AS(receive_model(q, C, agent_set({"A", "B"})), InputError);
    // product with a larger action universe
    auto recv = receive_model(q, B, agent_set({"A", "B"}));
    CHECK_THROWS_AS(product_update(pm, recv), InputError);
}

TEST_CASE("model construction validates shapes") {
    KripkeModel m;
    m.states.push_back(base_state("s"));
    m.agents.push_back(A);
    auto& rows = m.rel[A];
    rows.resize(1);
    rows[0].insert(3);
    CHECK_THROWS_AS(finish_model(std::move(m)), InputError);

    KripkeModel empty;
    empty.agents.push_back(A);
    CHECK_THROWS_AS(finish_model(std::move(empty)), InputError);
}

TEST_CASE("random models are reproducible") {
    auto agents = agent_set({"A", "B"});
    std::set<AtomId> atoms = {p, q};
    auto m1 = random_model(4, agents, atoms, 12345);
    auto m2 = random_model(4, agents, atoms, 12345);
    CHECK(dump(m1) == dump(m2));
    auto m3 = random_model(4, agents, atoms, 54321);
    CHECK(dump(m1) != dump(m3));
}
