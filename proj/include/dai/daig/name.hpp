#pragma once

// Structural names for DAIG reference cells.
//
// Names are immutable trees with a cached hash. Iteration names carry one
// counter per enclosing loop head.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dai/lang/cfg.hpp"
#include "dai/support/digest.hpp"
#include "dai/support/error.hpp"

namespace dai {

enum class FnSymbol : std::uint8_t { Transfer, Join, Widen, Fix };

inline const char* to_string(FnSymbol f) {
    switch (f) {
    case FnSymbol::Transfer: return "T";
    case FnSymbol::Join: return "join";
    case FnSymbol::Widen: return "widen";
    case FnSymbol::Fix: return "fix";
    }
    return "?";
}

enum class NameKind : std::uint8_t { Loc, Fn, Idx, Val, Prod, Iter };

// (loop head id, iteration count), sorted by head id
using Counts = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

class Name;

namespace detail {
struct NameNode;
}

class Name {
public:
    Name() = default;

    static Name loc(Loc l);
    static Name fn(FnSymbol f);
    static Name idx(std::uint32_t i);
    static Name val(Digest d);
    static Name prod(const Name& a, const Name& b);
    static Name iter(const Name& base, Counts counts);

    bool valid() const { return m_node != nullptr; }
    NameKind kind() const;
    std::size_t hash() const;

    // Loc / Fn / Idx / Val payload
    std::uint64_t payload() const;
    // Prod components; Iter base is lhs()
    const Name& lhs() const;
    const Name& rhs() const;
    const Counts& counts() const;

    Loc as_loc() const { return Loc{static_cast<std::uint32_t>(payload())}; }

    std::optional<std::uint32_t> count_of(Loc head) const {
        for (const auto& [h, c] : counts())
            if (h == head.id) return c;
        return std::nullopt;
    }

    friend bool operator==(const Name& a, const Name& b);
    friend bool operator!=(const Name& a, const Name& b) { return !(a == b); }

private:
    explicit Name(std::shared_ptr<const detail::NameNode> n) : m_node(std::move(n)) {}
    std::shared_ptr<const detail::NameNode> m_node;
};

namespace detail {
struct NameNode {
    NameKind kind;
    std::uint64_t payload = 0;
    Name a;
    Name b;
    Counts counts;
    std::size_t hash = 0;
};
} // namespace detail

inline NameKind Name::kind() const { return m_node->kind; }
inline std::size_t Name::hash() const { return m_node->hash; }
inline std::uint64_t Name::payload() const { return m_node->payload; }
inline const Name& Name::lhs() const { return m_node->a; }
inline const Name& Name::rhs() const { return m_node->b; }
inline const Counts& Name::counts() const {
    static const Counts empty;
    return m_node->kind == NameKind::Iter ? m_node->counts : empty;
}

inline Name Name::loc(Loc l) {
    auto n = std::make_shared<detail::NameNode>();
    n->kind = NameKind::Loc;
    n->payload = l.id;
    n->hash = mix_digest(1, l.id);
    return Name(std::move(n));
}
inline Name Name::fn(FnSymbol f) {
    auto n = std::make_shared<detail::NameNode>();
    n->kind = NameKind::Fn;
    n->payload = static_cast<std::uint64_t>(f);
    n->hash = mix_digest(2, n->payload);
    return Name(std::move(n));
}
inline Name Name::idx(std::uint32_t i) {
    auto n = std::make_shared<detail::NameNode>();
    n->kind = NameKind::Idx;
    n->payload = i;
    n->hash = mix_digest(3, i);
    return Name(std::move(n));
}
inline Name Name::val(Digest d) {
    auto n = std::make_shared<detail::NameNode>();
    n->kind = NameKind::Val;
    n->payload = d;
    n->hash = mix_digest(4, d);
    return Name(std::move(n));
}
inline Name Name::prod(const Name& a, const Name& b) {
    if (!a.valid() || !b.valid()) throw ContractViolation("product of invalid names");
    // keep products right-nested
    if (a.kind() == NameKind::Prod) return prod(a.lhs(), prod(a.rhs(), b));
    auto n = std::make_shared<detail::NameNode>();
    n->kind = NameKind::Prod;
    n->a = a;
    n->b = b;
    n->hash = mix_digest(mix_digest(5, a.hash()), b.hash());
    return Name(std::move(n));
}
inline Name Name::iter(const Name& base, Counts counts) {
    if (counts.empty()) throw ContractViolation("iteration name without counters");
    std::sort(counts.begin(), counts.end());
    auto n = std::make_shared<detail::NameNode>();
    n->kind = NameKind::Iter;
    n->a = base;
    Digest h = mix_digest(6, base.hash());
    for (const auto& [head, c] : counts) h = mix_digest(mix_digest(h, head), c);
    n->counts = std::move(counts);
    n->hash = h;
    return Name(std::move(n));
}

inline bool operator==(const Name& x, const Name& y) {
    if (x.m_node == y.m_node) return true;
    if (!x.m_node || !y.m_node) return false;
    if (x.m_node->hash != y.m_node->hash || x.m_node->kind != y.m_node->kind) return false;
    switch (x.m_node->kind) {
    case NameKind::Loc:
    case NameKind::Fn:
    case NameKind::Idx:
    case NameKind::Val: return x.m_node->payload == y.m_node->payload;
    case NameKind::Prod: return x.m_node->a == y.m_node->a && x.m_node->b == y.m_node->b;
    case NameKind::Iter: return x.m_node->a == y.m_node->a && x.m_node->counts == y.m_node->counts;
    }
    return false;
}

inline std::string to_string(const Name& n) {
    if (!n.valid()) return "<invalid>";
    switch (n.kind()) {
    case NameKind::Loc: return "l" + std::to_string(n.payload());
    case NameKind::Fn: return to_string(static_cast<FnSymbol>(n.payload()));
    case NameKind::Idx: return std::to_string(n.payload());
    case NameKind::Val: {
        char buf[20];
        std::snprintf(buf, sizeof buf, "#%016llx", static_cast<unsigned long long>(n.payload()));
        return buf;
    }
    case NameKind::Prod: return to_string(n.lhs()) + "·" + to_string(n.rhs());
    case NameKind::Iter: {
        std::string s = to_string(n.lhs()) + "^(";
        const auto& cs = n.counts();
        if (cs.size() == 1) {
            s += std::to_string(cs[0].second);
        } else {
            for (std::size_t i = 0; i < cs.size(); ++i)
                s += (i ? "," : "") + std::string("l") + std::to_string(cs[i].first) + ":" +
                     std::to_string(cs[i].second);
        }
        return s + ")";
    }
    }
    return "?";
}

// Applies `f` to every Iter node; `f` returns the replacement counts.
template <class F>
Name map_counts(const Name& n, F&& f) {
    switch (n.kind()) {
    case NameKind::Iter: {
        Counts c = n.counts();
        if (!f(c)) return n;
        return Name::iter(n.lhs(), std::move(c));
    }
    case NameKind::Prod: {
        Name a = map_counts(n.lhs(), f);
        Name b = map_counts(n.rhs(), f);
        if (a == n.lhs() && b == n.rhs()) return n;
        return Name::prod(a, b);
    }
    default: return n;
    }
}

// Increments the counter of `head` wherever it occurs.
inline Name incr(const Name& n, Loc head, std::uint32_t by = 1) {
    return map_counts(n, [&](Counts& c) {
        for (auto& [h, k] : c)
            if (h == head.id) {
                k += by;
                return true;
            }
        return false;
    });
}

// Sets the counter of `head` wherever it occurs.
inline Name with_count(const Name& n, Loc head, std::uint32_t value) {
    return map_counts(n, [&](Counts& c) {
        for (auto& [h, k] : c)
            if (h == head.id) {
                if (k == value) return false;
                k = value;
                return true;
            }
        return false;
    });
}

struct NameHash {
    std::size_t operator()(const Name& n) const noexcept { return n.hash(); }
};

} // namespace dai

template <> struct std::hash<dai::Name> {
    std::size_t operator()(const dai::Name& n) const noexcept { return n.hash(); }
};
