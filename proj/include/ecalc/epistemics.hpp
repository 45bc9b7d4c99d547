#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ecalc/errors.hpp"
#include "ecalc/ids.hpp"

namespace ecalc {

// ---------------------------------------------------------------------------
// States.  Product updates pair a state with the action point that produced
// it, so update provenance stays readable: ((w0,s),s_q) and so on.

struct StateId {
    std::shared_ptr<const StateId> left; // null for base states
    std::string label;                   // base id, or the action point id of a pair

    bool is_pair() const { return left != nullptr; }
    int depth() const { return left ? left->depth() + 1 : 0; }
    std::string str() const { return left ? "(" + left->str() + "," + label + ")" : label; }

    bool operator==(const StateId& o) const {
        if (label != o.label || is_pair() != o.is_pair()) return false;
        return !left || *left == *o.left;
    }
    bool operator<(const StateId& o) const { return str() < o.str(); }
};

inline StateId base_state(std::string id) { return StateId{nullptr, std::move(id)}; }
inline StateId pair_state(const StateId& l, std::string apoint) {
    return StateId{std::make_shared<StateId>(l), std::move(apoint)};
}

// ---------------------------------------------------------------------------
// Kripke models.  Adjacency is index-based; StateIds are carried alongside so
// serialization and desk checks can use the readable identifiers.

struct KripkeModel {
    std::vector<AgentId> agents; // sorted, the declared agent universe
    std::vector<AtomId> atoms;   // sorted, the declared atom universe
    std::vector<StateId> states;
    std::map<AgentId, std::vector<std::set<int>>> rel; // rel[a][s] = successors of s
    std::map<AtomId, std::set<int>> val;               // val[r] = states where r holds

    int index_of(const StateId& s) const {
        for (size_t i = 0; i < states.size(); ++i)
            if (states[i] == s) return (int)i;
        return -1;
    }
    bool has_agent(const AgentId& a) const {
        return std::find(agents.begin(), agents.end(), a) != agents.end();
    }
    bool has_atom(const AtomId& r) const {
        return std::find(atoms.begin(), atoms.end(), r) != atoms.end();
    }
};

using Model = std::shared_ptr<const KripkeModel>;

struct PointedModel {
    Model model;
    int point = 0;
    const StateId& point_id() const { return model->states[point]; }
};

// Fills empty relation/valuation rows for all declared agents/atoms and
// checks the containment invariants.
inline Model finish_model(KripkeModel m) {
    if (m.states.empty()) throw InputError("model has no states");
    std::sort(m.agents.begin(), m.agents.end());
    m.agents.erase(std::unique(m.agents.begin(), m.agents.end()), m.agents.end());
    std::sort(m.atoms.begin(), m.atoms.end());
    m.atoms.erase(std::unique(m.atoms.begin(), m.atoms.end()), m.atoms.end());
    for (const AgentId& a : m.agents) {
        auto& rows = m.rel[a];
        rows.resize(m.states.size());
        for (auto& row : rows)
            for (int t : row)
                if (t < 0 || t >= (int)m.states.size())
                    throw InputError("relation target out of range for agent " + a.v);
    }
    for (auto& [a, rows] : m.rel)
        if (std::find(m.agents.begin(), m.agents.end(), a) == m.agents.end())
            throw InputError("relation over undeclared agent " + a.v);
    for (const AtomId& r : m.atoms) m.val[r]; // ensure entry
    for (auto& [r, ss] : m.val) {
        if (std::find(m.atoms.begin(), m.atoms.end(), r) == m.atoms.end())
            throw InputError("valuation over undeclared atom " + r.v);
        for (int s : ss)
            if (s < 0 || s >= (int)m.states.size()) throw InputError("valuation state out of range");
    }
    return std::make_shared<const KripkeModel>(std::move(m));
}

// ---------------------------------------------------------------------------
// Action models and formulas (mutually recursive via preconditions).

struct ActionModel;

struct PointedActionModel {
    std::shared_ptr<const ActionModel> model;
    int point = 0;
    const std::string& point_id() const;
    bool operator==(const PointedActionModel& o) const;
};

struct FormulaNode;
using Form = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
    enum class Kind { True, Atom, Not, And, Box, ActionBox };
    Kind kind = Kind::True;
    AtomId atom;            // Atom
    AgentId agent;          // Box
    Form a, b;              // Not/Box/ActionBox: a; And: a,b
    PointedActionModel am;  // ActionBox

    bool operator==(const FormulaNode& o) const;
};

struct ActionModel {
    std::vector<AgentId> agents; // sorted universe, mirrors the Kripke side
    std::vector<std::string> points;
    std::map<AgentId, std::vector<std::set<int>>> rel;
    std::vector<Form> pre; // parallel to points
    // Constructor provenance for printing: {"recv", q, B} / {"pass", q, A, B},
    // or {"am", source-path} for models loaded from files. Not part of equality.
    std::vector<std::string> tag;

    int index_of_point(const std::string& p) const {
        for (size_t i = 0; i < points.size(); ++i)
            if (points[i] == p) return (int)i;
        return -1;
    }
    bool operator==(const ActionModel& o) const;
};

inline const std::string& PointedActionModel::point_id() const { return model->points[point]; }

inline bool PointedActionModel::operator==(const PointedActionModel& o) const {
    return point == o.point && (model == o.model || *model == *o.model);
}

inline bool FormulaNode::operator==(const FormulaNode& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::True: return true;
    case Kind::Atom: return atom == o.atom;
    case Kind::Not: return *a == *o.a;
    case Kind::And: return *a == *o.a && *b == *o.b;
    case Kind::Box: return agent == o.agent && *a == *o.a;
    case Kind::ActionBox: return am == o.am && *a == *o.a;
    }
    return false;
}

inline bool ActionModel::operator==(const ActionModel& o) const {
    if (agents != o.agents || points != o.points) return false;
    if (rel.size() != o.rel.size()) return false;
    for (const auto& [a, rows] : rel) {
        auto it = o.rel.find(a);
        if (it == o.rel.end() || it->second != rows) return false;
    }
    if (pre.size() != o.pre.size()) return false;
    for (size_t i = 0; i < pre.size(); ++i)
        if (!(*pre[i] == *o.pre[i])) return false;
    return true;
}

// Core constructors.
inline Form f_true() {
    static const Form t = std::make_shared<FormulaNode>();
    return t;
}
inline Form f_atom(AtomId r) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormulaNode::Kind::Atom;
    n->atom = std::move(r);
    return n;
}
inline Form f_not(Form f) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormulaNode::Kind::Not;
    n->a = std::move(f);
    return n;
}
inline Form f_and(Form l, Form r) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormulaNode::Kind::And;
    n->a = std::move(l);
    n->b = std::move(r);
    return n;
}
inline Form f_box(AgentId a, Form f) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormulaNode::Kind::Box;
    n->agent = std::move(a);
    n->a = std::move(f);
    return n;
}
inline Form f_action_box(PointedActionModel am, Form f) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FormulaNode::Kind::ActionBox;
    n->am = std::move(am);
    n->a = std::move(f);
    return n;
}

// Derived sugar (desugars to the core on construction).
inline Form f_false() { return f_not(f_true()); }
inline Form f_or(Form l, Form r) { return f_not(f_and(f_not(std::move(l)), f_not(std::move(r)))); }
inline Form f_implies(Form l, Form r) { return f_or(f_not(std::move(l)), std::move(r)); }
inline Form f_iff(Form l, Form r) { return f_and(f_implies(l, r), f_implies(r, l)); }
inline Form f_diamond(AgentId a, Form f) { return f_not(f_box(std::move(a), f_not(std::move(f)))); }
inline Form f_action_diamond(PointedActionModel am, Form f) {
    return f_not(f_action_box(std::move(am), f_not(std::move(f))));
}

// ---------------------------------------------------------------------------
// Formula printing (concrete syntax also accepted by the parser)

namespace detail {

// levels: 1 and-chain, 2 unary
inline void print_formula(const Form& f, std::string& out) {
    switch (f->kind) {
    case FormulaNode::Kind::True: out += "true"; return;
    case FormulaNode::Kind::Atom: out += f->atom.v; return;
    case FormulaNode::Kind::Not:
        out += "~";
        if (f->a->kind == FormulaNode::Kind::And) {
            out += "(";
            print_formula(f->a, out);
            out += ")";
        } else {
            print_formula(f->a, out);
        }
        return;
    case FormulaNode::Kind::And: {
        auto operand = [&](const Form& g, bool right) {
            bool parens = g->kind == FormulaNode::Kind::And && right;
            if (parens) out += "(";
            print_formula(g, out);
            if (parens) out += ")";
        };
        operand(f->a, false);
        out += " & ";
        operand(f->b, true);
        return;
    }
    case FormulaNode::Kind::Box:
        out += "K[" + f->agent.v + "] ";
        if (f->a->kind == FormulaNode::Kind::And) {
            out += "(";
            print_formula(f->a, out);
            out += ")";
        } else {
            print_formula(f->a, out);
        }
        return;
    case FormulaNode::Kind::ActionBox: {
        const auto& tag = f->am.model->tag;
        if (tag.size() == 3 && tag[0] == "recv") {
            out += "[recv " + tag[1] + " " + tag[2] + "] ";
        } else if (tag.size() == 4 && tag[0] == "pass") {
            out += "[pass " + tag[1] + " " + tag[2] + " " + tag[3] + "] ";
        } else if (tag.size() == 2 && tag[0] == "am") {
            out += "[am \"" + tag[1] + "\" " + f->am.point_id() + "] ";
        } else {
            out += "[am \"<inline>\" " + f->am.point_id() + "] ";
        }
        if (f->a->kind == FormulaNode::Kind::And) {
            out += "(";
            print_formula(f->a, out);
            out += ")";
        } else {
            print_formula(f->a, out);
        }
        return;
    }
    }
}

} // namespace detail

inline std::string to_source(const Form& f) {
    std::string out;
    detail::print_formula(f, out);
    return out;
}

// Atoms mentioned anywhere in the formula, including preconditions of
// embedded action models.
inline void collect_formula_atoms(const Form& f, std::set<AtomId>& out) {
    switch (f->kind) {
    case FormulaNode::Kind::True: return;
    case FormulaNode::Kind::Atom: out.insert(f->atom); return;
    case FormulaNode::Kind::Not:
    case FormulaNode::Kind::Box: collect_formula_atoms(f->a, out); return;
    case FormulaNode::Kind::And:
        collect_formula_atoms(f->a, out);
        collect_formula_atoms(f->b, out);
        return;
    case FormulaNode::Kind::ActionBox:
        for (const Form& pre : f->am.model->pre) collect_formula_atoms(pre, out);
        collect_formula_atoms(f->a, out);
        return;
    }
}

inline std::set<AtomId> formula_atoms(const Form& f) {
    std::set<AtomId> out;
    collect_formula_atoms(f, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation and product update

inline bool eval_at(const Model& m, int s, const Form& f);

inline bool executable(const PointedModel& pm, const PointedActionModel& pam) {
    return eval_at(pm.model, pm.point, pam.model->pre[pam.point]);
}

// (M,s) ⊗ (𝙼,v).  Not executable: the configuration is returned unchanged.
// Executable: the product keeps exactly the precondition-satisfying pairs,
// relations go componentwise, atoms are inherited from the state component.
inline PointedModel product_update(const PointedModel& pm, const PointedActionModel& pam) {
    const KripkeModel& m = *pm.model;
    const ActionModel& am = *pam.model;
    if (m.agents != am.agents)
        throw InputError("product update: agent universes differ");
    if (!executable(pm, pam)) return pm;

    const int nm = (int)m.states.size();
    const int na = (int)am.points.size();
    std::vector<int> pair_index((size_t)nm * na, -1);
    KripkeModel out;
    out.agents = m.agents;
    out.atoms = m.atoms;
    for (int u = 0; u < nm; ++u)
        for (int v = 0; v < na; ++v)
            if (eval_at(pm.model, u, am.pre[v])) {
                pair_index[(size_t)u * na + v] = (int)out.states.size();
                out.states.push_back(pair_state(m.states[u], am.points[v]));
            }
    for (const AgentId& ag : out.agents) {
        const auto& mrel = m.rel.at(ag);
        const auto& arel = am.rel.at(ag);
        auto& rows = out.rel[ag];
        rows.resize(out.states.size());
        for (int u = 0; u < nm; ++u)
            for (int v = 0; v < na; ++v) {
                int src = pair_index[(size_t)u * na + v];
                if (src < 0) continue;
                for (int u2 : mrel[u])
                    for (int v2 : arel[v]) {
                        int dst = pair_index[(size_t)u2 * na + v2];
                        if (dst >= 0) rows[src].insert(dst);
                    }
            }
    }
    for (const AtomId& r : out.atoms) {
        auto& ss = out.val[r];
        const auto& base = m.val.at(r);
        for (int u : base)
            for (int v = 0; v < na; ++v) {
                int idx = pair_index[(size_t)u * na + v];
                if (idx >= 0) ss.insert(idx);
            }
    }
    int pt = pair_index[(size_t)pm.point * na + pam.point];
    // executability put the actual pair in W
    return PointedModel{std::make_shared<const KripkeModel>(std::move(out)), pt};
}

inline bool eval_at(const Model& m, int s, const Form& f) {
    if (s < 0 || s >= (int)m->states.size()) throw InputError("state index out of range");
    switch (f->kind) {
    case FormulaNode::Kind::True: return true;
    case FormulaNode::Kind::Atom: {
        auto it = m->val.find(f->atom);
        if (it == m->val.end()) throw InputError("unknown atom " + f->atom.v);
        return it->second.count(s) != 0;
    }
    case FormulaNode::Kind::Not: return !eval_at(m, s, f->a);
    case FormulaNode::Kind::And: return eval_at(m, s, f->a) && eval_at(m, s, f->b);
    case FormulaNode::Kind::Box: {
        auto it = m->rel.find(f->agent);
        if (it == m->rel.end()) throw InputError("unknown agent " + f->agent.v);
        for (int t : it->second[s])
            if (!eval_at(m, t, f->a)) return false;
        return true;
    }
    case FormulaNode::Kind::ActionBox: {
        if (!eval_at(m, s, f->am.model->pre[f->am.point])) return true;
        PointedModel next = product_update(PointedModel{m, s}, f->am);
        return eval_at(next.model, next.point, f->a);
    }
    }
    return false;
}

inline bool eval(const PointedModel& pm, const Form& f) { return eval_at(pm.model, pm.point, f); }

// ---------------------------------------------------------------------------
// The two canned action models

namespace detail {

inline std::vector<AgentId> sorted_agents(const std::set<AgentId>& agents) {
    return std::vector<AgentId>(agents.begin(), agents.end());
}

} // namespace detail

// Three points: announce (actual), fact, and noise.  After the update the
// receiver B considers only fact-satisfying states possible one step deep;
// everyone else sees only the noise point.
inline PointedActionModel receive_model(const AtomId& q, const AgentId& b,
                                        const std::set<AgentId>& agents) {
    if (!agents.count(b)) throw InputError("receive model: agent " + b.v + " not declared");
    ActionModel am;
    am.agents = detail::sorted_agents(agents);
    am.points = {"s", "s_" + q.v, "s_true"};
    am.pre = {f_true(), f_atom(q), f_true()};
    for (const AgentId& c : am.agents) {
        auto& rows = am.rel[c];
        rows.resize(3);
        if (c == b) {
            rows[0] = {1};
            rows[1] = {2};
            rows[2] = {2};
        } else {
            rows[0] = {2};
            rows[1] = {2};
            rows[2] = {2};
        }
    }
    am.tag = {"recv", q.v, b.v};
    return PointedActionModel{std::make_shared<const ActionModel>(std::move(am)), 0};
}

// A passes q to B: precondition Box_A q at the actual point; both parties
// land in the fact-looping point, everyone else in the noise point.
inline PointedActionModel interact_model(const AtomId& q, const AgentId& a, const AgentId& b,
                                         const std::set<AgentId>& agents) {
    if (a == b) throw InputError("interact model: sender and receiver must differ");
    if (!agents.count(a) || !agents.count(b)) throw InputError("interact model: undeclared agent");
    ActionModel am;
    am.agents = detail::sorted_agents(agents);
    am.points = {"s", "s_" + q.v, "s_true"};
    am.pre = {f_box(a, f_atom(q)), f_atom(q), f_true()};
    for (const AgentId& c : am.agents) {
        auto& rows = am.rel[c];
        rows.resize(3);
        if (c == a || c == b) {
            rows[0] = {1};
            rows[1] = {1};
            rows[2] = {2};
        } else {
            rows[0] = {2};
            rows[1] = {2};
            rows[2] = {2};
        }
    }
    am.tag = {"pass", q.v, a.v, b.v};
    return PointedActionModel{std::make_shared<const ActionModel>(std::move(am)), 0};
}

// Compact human-readable dump used in failure reports.
inline std::string dump(const KripkeModel& m) {
    std::string out = "states:";
    for (const StateId& s : m.states) out += " " + s.str();
    for (const AgentId& a : m.agents) {
        out += "\nrel " + a.v + ":";
        const auto& rows = m.rel.at(a);
        for (size_t s = 0; s < rows.size(); ++s)
            for (int t : rows[s])
                out += " " + m.states[s].str() + "->" + m.states[t].str();
    }
    for (const AtomId& r : m.atoms) {
        out += "\nval " + r.v + ":";
        for (int s : m.val.at(r)) out += " " + m.states[s].str();
    }
    return out;
}

inline std::string dump(const PointedModel& pm) {
    return dump(*pm.model) + "\npoint: " + pm.point_id().str();
}

} // namespace ecalc
