#pragma once

// Cell naming scheme derived from a CFG and its loop structure.

#include <map>
#include <span>

#include "dai/daig/name.hpp"
#include "dai/lang/loops.hpp"

namespace dai {

// head id -> iteration count, for some set of enclosing heads
using IterVec = std::map<std::uint32_t, std::uint32_t>;

class Naming {
public:
    explicit Naming(const LoopInfo& li) : m_li(&li) {}

    const LoopInfo& loops() const { return *m_li; }

    // n_l at the given counts (missing heads default to 0)
    Name state(Loc l, const IterVec& at = {}) const { return build(Name::loc(l), m_li->enclosing_heads(l), at); }

    Name iterate(Loc head, const IterVec& outer, std::uint32_t i) const {
        IterVec at = outer;
        at[head.id] = i;
        return state(head, at);
    }

    // fixed-point cell of `head`: the head's name with its own counter dropped
    Name fix(Loc head, const IterVec& outer = {}) const {
        auto enc = m_li->enclosing_heads(head);
        return build(Name::loc(head), enc.first(enc.size() - 1), outer);
    }

    Name prewiden(Loc head, const IterVec& outer, std::uint32_t i) const {
        return Name::prod(iterate(head, outer, i), iterate(head, outer, i + 1));
    }

    static Name prejoin(std::size_t index, const Name& state) {
        return Name::prod(Name::idx(static_cast<std::uint32_t>(index)), state);
    }

    // statement cell of edge src->dst
    Name stmt(Loc src, Loc dst) const {
        Name base = Name::prod(Name::loc(src), Name::loc(dst));
        if (!m_li->is_back_edge(src, dst) && m_li->is_join(dst))
            return Name::prod(Name::idx(static_cast<std::uint32_t>(m_li->join_index(src, dst))), base);
        return base;
    }

    // Pre-state cell read by the transfer along src->dst.
    Name source(Loc src, Loc dst, const IterVec& at = {}) const {
        if (m_li->is_head(src) && !m_li->in_loop(src, dst)) return fix(src, at);
        return state(src, at);
    }

    // cell receiving the transfer along a forward edge src->dst
    Name transfer_dest(Loc src, Loc dst, const IterVec& at = {}) const {
        if (m_li->is_back_edge(src, dst)) return prewiden(dst, at, at.count(dst.id) ? at.at(dst.id) : 0);
        Name s = state(dst, at);
        if (m_li->is_join(dst)) return prejoin(m_li->join_index(src, dst), s);
        return s;
    }

private:
    static Name build(const Name& base, std::span<const Loc> heads, const IterVec& at) {
        if (heads.empty()) return base;
        Counts c;
        c.reserve(heads.size());
        for (Loc h : heads) {
            auto it = at.find(h.id);
            c.emplace_back(h.id, it == at.end() ? 0 : it->second);
        }
        return Name::iter(base, std::move(c));
    }

    const LoopInfo* m_li;
};

} // namespace dai
