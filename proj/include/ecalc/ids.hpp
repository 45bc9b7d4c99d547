#pragma once

#include <compare>
#include <set>
#include <string>

namespace ecalc {

// Channel / payload identifiers. Countably infinite in the theory; here plain
// strings with a reserved family n0, n1, ... that user input may not declare,
// so fresh_name can always mint a name distinct from everything user-visible.
struct Name {
    std::string v;
    Name() = default;
    explicit Name(std::string s) : v(std::move(s)) {}
    auto operator<=>(const Name&) const = default;
};

// Basic facts (atomic propositions). Fact binders in input prefixes share this
// lexical class; which identifiers denote binders is a per-term matter.
struct AtomId {
    std::string v;
    AtomId() = default;
    explicit AtomId(std::string s) : v(std::move(s)) {}
    auto operator<=>(const AtomId&) const = default;
};

struct AgentId {
    std::string v;
    AgentId() = default;
    explicit AgentId(std::string s) : v(std::move(s)) {}
    auto operator<=>(const AgentId&) const = default;
};

// Finite pools the semantics quantifies over: early input instantiation draws
// names from `names`, fact input instantiation draws from `atoms`.
// Invariant: names ⊇ free names of any term this universe is used with.
struct Universe {
    std::set<Name> names;
    std::set<AtomId> atoms;
    std::set<AgentId> agents;
};

inline bool is_reserved_name(const std::string& s) {
    if (s.size() < 2 || s[0] != 'n') return false;
    for (size_t i = 1; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

// Smallest nK not in `avoid`. Deterministic.
inline Name fresh_name(const std::set<Name>& avoid) {
    for (int k = 0;; ++k) {
        Name cand("n" + std::to_string(k));
        if (!avoid.count(cand)) return cand;
    }
}

inline AtomId fresh_fact_var(const std::set<AtomId>& avoid) {
    for (int k = 0;; ++k) {
        AtomId cand("u" + std::to_string(k));
        if (!avoid.count(cand)) return cand;
    }
}

} // namespace ecalc
