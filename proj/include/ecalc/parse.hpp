#pragma once

#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ecalc/epistemics.hpp"
#include "ecalc/errors.hpp"
#include "ecalc/terms.hpp"

namespace ecalc {

// Half-open location range in parsed source; columns are 1-based.
struct SourceSpan {
    int line = 1;
    int col = 1;
    int end_line = 1;
    int end_col = 1;
};

// Optional side table mapping AST nodes (by address) to their spans.
struct SpanTable {
    std::map<const void*, SourceSpan> spans;
};

// Supplies the pointed action model behind a `[am "file" point]` formula box.
using ActionModelResolver =
    std::function<PointedActionModel(const std::string& path, const std::string& point)>;

// Keywords can never be declared identifiers; reserved families n0,n1,... and
// u0,u1,... belong to the fresh-name machinery.
inline bool is_keyword(const std::string& s) {
    return s == "new" || s == "tau" || s == "true" || s == "false" || s == "recv" ||
           s == "pass" || s == "am";
}

inline bool is_reserved_fact_var(const std::string& s) {
    if (s.size() < 2 || s[0] != 'u') return false;
    for (size_t i = 1; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

inline bool well_formed_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha((unsigned char)s[0]) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum((unsigned char)c) && c != '_' && c != '\'') return false;
    return true;
}

// Problems that make a universe unusable for parsing: malformed or reserved
// identifiers, keyword clashes, overlap between the three namespaces.
inline std::vector<std::string> universe_problems(const Universe& u) {
    std::vector<std::string> out;
    auto check = [&](const std::string& s, const char* kind) {
        if (!well_formed_identifier(s))
            out.push_back(std::string(kind) + " '" + s + "' is not a valid identifier");
        else if (is_keyword(s))
            out.push_back(std::string(kind) + " '" + s + "' is a keyword");
        else if (is_reserved_name(s) || is_reserved_fact_var(s))
            out.push_back(std::string(kind) + " '" + s + "' is reserved");
    };
    for (const Name& n : u.names) check(n.v, "name");
    for (const AtomId& a : u.atoms) check(a.v, "atom");
    for (const AgentId& g : u.agents) check(g.v, "agent");
    for (const Name& n : u.names) {
        if (u.atoms.count(AtomId{n.v}))
            out.push_back("'" + n.v + "' declared as both name and atom");
        if (u.agents.count(AgentId{n.v}))
            out.push_back("'" + n.v + "' declared as both name and agent");
    }
    for (const AtomId& a : u.atoms)
        if (u.agents.count(AgentId{a.v}))
            out.push_back("'" + a.v + "' declared as both atom and agent");
    return out;
}

namespace detail {

struct Token {
    enum class T {
        Ident, Str, Zero, LPar, RPar, LBrk, RBrk, At, Bang, Query, Dot, Plus,
        Pipe, DPipe, Comma, Tilde, Amp, Arrow, Iff, End
    };
    T t;
    std::string text;
    int line = 1;
    int col = 1;
    int len = 0;
};

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto push = [&](Token::T t, std::string text, int len) {
        out.push_back({t, std::move(text), line, col, len});
        col += len;
        i += len;
    };
    auto fail = [&](const std::string& msg) { throw ParseError(msg, line, col); };
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++col;
            ++i;
            continue;
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            size_t j = i + 1;
            while (j < src.size() && (std::isalnum((unsigned char)src[j]) ||
                                      src[j] == '_' || src[j] == '\''))
                ++j;
            push(Token::T::Ident, src.substr(i, j - i), (int)(j - i));
            continue;
        }
        if (std::isdigit((unsigned char)c)) {
            if (c == '0' && (i + 1 >= src.size() ||
                             (!std::isalnum((unsigned char)src[i + 1]) && src[i + 1] != '_')))
                push(Token::T::Zero, "0", 1);
            else
                fail("identifiers must start with a letter");
            continue;
        }
        switch (c) {
        case '(': push(Token::T::LPar, "(", 1); break;
        case ')': push(Token::T::RPar, ")", 1); break;
        case '[': push(Token::T::LBrk, "[", 1); break;
        case ']': push(Token::T::RBrk, "]", 1); break;
        case '@': push(Token::T::At, "@", 1); break;
        case '!': push(Token::T::Bang, "!", 1); break;
        case '?': push(Token::T::Query, "?", 1); break;
        case '.': push(Token::T::Dot, ".", 1); break;
        case '+': push(Token::T::Plus, "+", 1); break;
        case ',': push(Token::T::Comma, ",", 1); break;
        case '~': push(Token::T::Tilde, "~", 1); break;
        case '&': push(Token::T::Amp, "&", 1); break;
        case '|':
            if (i + 1 < src.size() && src[i + 1] == '|')
                push(Token::T::DPipe, "||", 2);
            else
                push(Token::T::Pipe, "|", 1);
            break;
        case '-':
            if (i + 1 < src.size() && src[i + 1] == '>')
                push(Token::T::Arrow, "->", 2);
            else
                fail("stray '-'");
            break;
        case '<':
            if (i + 2 < src.size() && src[i + 1] == '-' && src[i + 2] == '>')
                push(Token::T::Iff, "<->", 3);
            else
                fail("stray '<'");
            break;
        case '"': {
            size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
            if (j >= src.size() || src[j] != '"') fail("unterminated string");
            push(Token::T::Str, src.substr(i + 1, j - i - 1), (int)(j - i + 1));
            break;
        }
        default: fail(std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Token::T::End, "", line, col, 0});
    return out;
}

class Parser {
public:
    Parser(std::string_view src, const Universe& u, SpanTable* spans,
           const ActionModelResolver* resolver)
        : toks_(lex(std::string(src))), u_(u), spans_(spans), resolver_(resolver) {}

    Proc process() {
        Proc p = sum();
        end();
        return p;
    }

    ESys esystem() {
        ESys h = epar();
        end();
        return h;
    }

    Form formula() {
        Form f = iff();
        end();
        return f;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    const Universe& u_;
    SpanTable* spans_;
    const ActionModelResolver* resolver_;
    std::set<AgentId> seen_agents_;

    const Token& peek(size_t k = 0) const {
        size_t i = pos_ + k;
        return toks_[i < toks_.size() ? i : toks_.size() - 1];
    }
    const Token& take() {
        const Token& t = toks_[pos_];
        if (t.t != Token::T::End) ++pos_;
        return t;
    }
    [[noreturn]] void fail(const std::string& msg, const Token& t) const {
        throw ParseError(msg, t.line, t.col, t.line, t.col + (t.len > 0 ? t.len : 1));
    }
    const Token& expect(Token::T t, const char* what) {
        if (peek().t != t) fail(std::string("expected ") + what, peek());
        return take();
    }
    void end() {
        if (peek().t != Token::T::End) fail("unexpected trailing input", peek());
    }

    SourceSpan span_from(const Token& start) const {
        const Token& last = toks_[pos_ > 0 ? pos_ - 1 : 0];
        return {start.line, start.col, last.line, last.col + last.len};
    }
    template <typename NodePtr>
    NodePtr note(NodePtr p, const Token& start) {
        if (spans_) spans_->spans[(const void*)p.get()] = span_from(start);
        return p;
    }

    const Token& ident(const char* what) {
        if (peek().t != Token::T::Ident) fail(std::string("expected ") + what, peek());
        return take();
    }
    Name name_of(const Token& t, const char* role) const {
        Name n{t.text};
        if (u_.names.count(n)) return n;
        if (u_.atoms.count(AtomId{t.text}) || u_.agents.count(AgentId{t.text}))
            fail("'" + t.text + "' is not a name (" + role + " must be a declared name)", t);
        fail("undeclared identifier '" + t.text + "'", t);
    }
    AgentId agent_of(const Token& t) const {
        AgentId g{t.text};
        if (u_.agents.count(g)) return g;
        fail("undeclared agent '" + t.text + "'", t);
    }
    AtomId atom_of(const Token& t) const {
        AtomId a{t.text};
        if (u_.atoms.count(a)) return a;
        fail("undeclared atom '" + t.text + "'", t);
    }

    // ---- processes: sum > par > repl > basic, '.' binds continuations ----

    Proc sum() {
        const Token& start = peek();
        Proc l = par();
        while (peek().t == Token::T::Plus) {
            const Token& plus = peek();
            if (!sum_guarded(l)) fail("unguarded operand of +", plus);
            take();
            Proc r = par();
            if (!sum_guarded(r)) fail("unguarded operand of +", plus);
            l = note(p_sum(std::move(l), std::move(r)), start);
        }
        return l;
    }
    Proc par() {
        const Token& start = peek();
        Proc l = repl();
        while (peek().t == Token::T::Pipe) {
            take();
            Proc r = repl();
            l = note(p_par(std::move(l), std::move(r)), start);
        }
        return l;
    }
    Proc repl() {
        if (peek().t == Token::T::Bang) {
            const Token& start = take();
            return note(p_repl(repl()), start);
        }
        return basic();
    }
    Proc basic() {
        const Token& t = peek();
        switch (t.t) {
        case Token::T::Zero: take(); return note(p_nil(), t);
        case Token::T::LPar: {
            take();
            Proc p = sum();
            expect(Token::T::RPar, "')'");
            return p;
        }
        case Token::T::Ident:
            if (t.text == "new") return res_proc();
            return act();
        default: fail("expected a process", t);
        }
    }
    Proc res_proc() {
        const Token& start = take(); // 'new'
        std::vector<Name> binders{name_of(ident("restriction binder"), "binder")};
        while (peek().t == Token::T::Comma) {
            take();
            binders.push_back(name_of(ident("restriction binder"), "binder"));
        }
        expect(Token::T::LPar, "'('");
        Proc body = sum();
        expect(Token::T::RPar, "')'");
        for (auto it = binders.rbegin(); it != binders.rend(); ++it)
            body = note(p_res(*it, std::move(body)), start);
        return body;
    }
    Proc act() {
        const Token& start = take();
        Prefix pre = Prefix::tau();
        if (start.text == "tau") {
            // no payload
        } else if (peek().t == Token::T::Bang) {
            Name ch = name_of(start, "channel");
            take();
            const Token& payload = ident("output payload");
            if (u_.names.count(Name{payload.text}))
                pre = Prefix::out_name(ch, Name{payload.text});
            else if (u_.atoms.count(AtomId{payload.text}))
                pre = Prefix::out_fact(ch, AtomId{payload.text});
            else
                fail("undeclared identifier '" + payload.text + "'", payload);
        } else if (peek().t == Token::T::Query) {
            Name ch = name_of(start, "channel");
            take();
            expect(Token::T::LPar, "'('");
            const Token& binder = ident("input binder");
            if (u_.names.count(Name{binder.text}))
                pre = Prefix::in_name(ch, Name{binder.text});
            else if (u_.atoms.count(AtomId{binder.text}))
                pre = Prefix::in_fact(ch, AtomId{binder.text});
            else
                fail("undeclared identifier '" + binder.text + "'", binder);
            expect(Token::T::RPar, "')'");
        } else {
            fail("expected '!' or '?' after channel", peek());
        }
        expect(Token::T::Dot, "'.' after prefix");
        Proc cont = repl();
        return note(p_act(std::move(pre), std::move(cont)), start);
    }

    // ---- e-systems ----

    ESys epar() {
        const Token& start = peek();
        ESys l = eterm();
        while (peek().t == Token::T::DPipe) {
            take();
            ESys r = eterm();
            l = note(e_par(std::move(l), std::move(r)), start);
        }
        return l;
    }
    ESys eterm() {
        const Token& t = peek();
        switch (t.t) {
        case Token::T::LBrk: {
            take();
            Proc p = sum();
            expect(Token::T::RBrk, "']'");
            expect(Token::T::At, "'@'");
            const Token& gt = ident("agent");
            AgentId g = agent_of(gt);
            if (!seen_agents_.insert(g).second) fail("duplicated agent '" + g.v + "'", gt);
            return note(e_agent(g, std::move(p)), t);
        }
        case Token::T::LPar: {
            take();
            ESys h = epar();
            expect(Token::T::RPar, "')'");
            return h;
        }
        case Token::T::Ident:
            if (t.text == "new") {
                const Token& start = take();
                std::vector<Name> binders{name_of(ident("restriction binder"), "binder")};
                while (peek().t == Token::T::Comma) {
                    take();
                    binders.push_back(name_of(ident("restriction binder"), "binder"));
                }
                expect(Token::T::LPar, "'('");
                ESys body = epar();
                expect(Token::T::RPar, "')'");
                for (auto it = binders.rbegin(); it != binders.rend(); ++it)
                    body = note(e_res(*it, std::move(body)), start);
                return body;
            }
            [[fallthrough]];
        default: fail("expected an e-system", t);
        }
    }

    // ---- formulas: <-> < -> < | < & < unary ----

    Form iff() {
        Form l = impl();
        while (peek().t == Token::T::Iff) {
            take();
            l = f_iff(std::move(l), impl());
        }
        return l;
    }
    Form impl() {
        Form l = f_or_lvl();
        if (peek().t == Token::T::Arrow) {
            take();
            return f_implies(std::move(l), impl());
        }
        return l;
    }
    Form f_or_lvl() {
        Form l = f_and_lvl();
        while (peek().t == Token::T::Pipe) {
            take();
            l = f_or(std::move(l), f_and_lvl());
        }
        return l;
    }
    Form f_and_lvl() {
        const Token& start = peek();
        Form l = unary();
        while (peek().t == Token::T::Amp) {
            take();
            l = note(f_and(std::move(l), unary()), start);
        }
        return l;
    }
    Form unary() {
        const Token& t = peek();
        switch (t.t) {
        case Token::T::Tilde: {
            take();
            return note(f_not(unary()), t);
        }
        case Token::T::LBrk: return action_box();
        case Token::T::LPar: {
            take();
            Form f = iff();
            expect(Token::T::RPar, "')'");
            return f;
        }
        case Token::T::Ident:
            if (t.text == "K" && peek(1).t == Token::T::LBrk) {
                take();
                take();
                AgentId g = agent_of(ident("agent"));
                expect(Token::T::RBrk, "']'");
                return note(f_box(std::move(g), unary()), t);
            }
            if (t.text == "true") {
                take();
                return f_true();
            }
            if (t.text == "false") {
                take();
                return note(f_false(), t);
            }
            take();
            if (u_.names.count(Name{t.text}))
                fail("'" + t.text + "' is a name; formulas talk about atoms", t);
            return note(f_atom(atom_of(t)), t);
        default: fail("expected a formula", t);
        }
    }
    Form action_box() {
        const Token& start = take(); // '['
        const Token& kw = ident("'recv', 'pass' or 'am'");
        PointedActionModel am;
        if (kw.text == "recv") {
            AtomId q = atom_of(ident("atom"));
            AgentId b = agent_of(ident("agent"));
            am = receive_model(q, b, u_.agents);
        } else if (kw.text == "pass") {
            AtomId q = atom_of(ident("atom"));
            const Token& at = ident("agent");
            const Token& bt = ident("agent");
            AgentId a = agent_of(at), b = agent_of(bt);
            if (a == b) fail("sender and receiver must differ", bt);
            am = interact_model(q, a, b, u_.agents);
        } else if (kw.text == "am") {
            const Token& file = peek();
            if (file.t != Token::T::Str) fail("expected a file string", file);
            take();
            const Token& pt = ident("action point");
            if (!resolver_) fail("no action-model files available in this context", kw);
            try {
                am = (*resolver_)(file.text, pt.text);
            } catch (const InputError& e) {
                fail(e.what(), file);
            }
        } else {
            fail("expected 'recv', 'pass' or 'am'", kw);
        }
        expect(Token::T::RBrk, "']'");
        return note(f_action_box(std::move(am), unary()), start);
    }
};

} // namespace detail

// All parse entry points demand a clean universe and classify identifiers by
// their declarations: atom payloads make fact prefixes, name payloads make
// name prefixes. Throws ParseError with a source span on any problem.
inline Proc parse_process(std::string_view text, const Universe& u,
                          SpanTable* spans = nullptr) {
    auto probs = universe_problems(u);
    if (!probs.empty()) throw InputError("bad universe: " + probs.front());
    return detail::Parser(text, u, spans, nullptr).process();
}

inline ESys parse_esystem(std::string_view text, const Universe& u,
                          SpanTable* spans = nullptr) {
    auto probs = universe_problems(u);
    if (!probs.empty()) throw InputError("bad universe: " + probs.front());
    return detail::Parser(text, u, spans, nullptr).esystem();
}

inline Form parse_formula(std::string_view text, const Universe& u,
                          const ActionModelResolver& resolver = {},
                          SpanTable* spans = nullptr) {
    auto probs = universe_problems(u);
    if (!probs.empty()) throw InputError("bad universe: " + probs.front());
    return detail::Parser(text, u, spans, resolver ? &resolver : nullptr).formula();
}

} // namespace ecalc
