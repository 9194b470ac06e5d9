#pragma once

// Dominators, back edges, natural loops and join points of a CFG.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "dai/lang/cfg.hpp"

namespace dai {

class LoopInfo {
public:
    LoopInfo() = default;

    explicit LoopInfo(const Cfg& cfg) { build(cfg); }

    bool is_head(Loc l) const { return idx(l) < m_is_head.size() && m_is_head[idx(l)]; }
    bool is_join(Loc l) const { return fwd_indegree(l) >= 2; }
    std::size_t fwd_indegree(Loc l) const { return m_fwd_in.size(l); }

    bool is_back_edge(Loc src, Loc dst) const {
        return is_head(dst) && m_back_src[idx(dst)] == src;
    }

    // Source of the unique back edge into `head`.
    Loc back_edge_src(Loc head) const { return m_back_src[idx(head)]; }

    const std::vector<Loc>& heads() const { return m_heads; }

    // Loop heads whose natural loop contains `l` (including `l` itself when it is
    // a head), outermost first.
    std::span<const Loc> enclosing_heads(Loc l) const { return m_enclosing.of(l); }

    std::size_t depth(Loc l) const { return m_enclosing.size(l); }

    // Natural loop body of `head`, without the head itself.
    const std::vector<Loc>& loop_body(Loc head) const { return m_body[idx(head)]; }

    // `l` is the head or a body location of the loop headed by `head`.
    bool in_loop(Loc head, Loc l) const {
        return std::find(m_enclosing.begin(l), m_enclosing.end(l), head) != m_enclosing.end(l);
    }

    // 1-based position of the forward edge src->dst among the forward in-edges of dst.
    std::size_t join_index(Loc src, Loc dst) const {
        auto ins = m_fwd_in.of(dst);
        for (std::size_t i = 0; i < ins.size(); ++i)
            if (ins[i] == src) return i + 1;
        throw ContractViolation("no forward edge " + to_string(src) + " -> " + to_string(dst));
    }

    // Forward predecessors of `l` in join order.
    std::span<const Loc> fwd_preds(Loc l) const { return m_fwd_in.of(l); }

    Loc idom(Loc l) const { return m_idom[idx(l)]; }

    bool dominates(Loc a, Loc b) const {
        // walk the dominator tree upwards from b
        Loc cur = b;
        for (;;) {
            if (cur == a) return true;
            Loc up = m_idom[idx(cur)];
            if (up == cur) return false;
            cur = up;
        }
    }

    // Full dominator set of `l`.
    std::set<Loc> dominators(Loc l) const {
        std::set<Loc> r;
        Loc cur = l;
        for (;;) {
            r.insert(cur);
            Loc up = m_idom[idx(cur)];
            if (up == cur) return r;
            cur = up;
        }
    }

    // Topological order of the forward-edge DAG.
    const std::vector<Loc>& topo_order() const { return m_topo; }

private:
    static std::size_t idx(Loc l) { return l.id; }

    // Compressed adjacency: the neighbours of l are at[off[l] .. off[l+1]).
    struct Adjacency {
        std::vector<std::uint32_t> off;
        std::vector<Loc> at;
        std::size_t size(Loc l) const { return off[l.id + 1] - off[l.id]; }
        const Loc* begin(Loc l) const { return at.data() + off[l.id]; }
        const Loc* end(Loc l) const { return at.data() + off[l.id + 1]; }
        std::span<const Loc> of(Loc l) const { return {begin(l), end(l)}; }
    };

    template <class It, class Key, class Val>
    static Adjacency adjacency(std::size_t n, It first, It last, Key key, Val val) {
        Adjacency a;
        a.off.assign(n + 1, 0);
        for (It it = first; it != last; ++it) ++a.off[key(*it) + 1];
        for (std::size_t i = 0; i < n; ++i) a.off[i + 1] += a.off[i];
        a.at.resize(a.off[n]);
        std::vector<std::uint32_t> pos(a.off.begin(), a.off.end() - 1);
        for (It it = first; it != last; ++it) a.at[pos[key(*it)]++] = val(*it);
        return a;
    }

    void build(const Cfg& cfg) {
        const std::size_t n = cfg.next_id();
        const auto& edges = cfg.edges();
        Adjacency succ = adjacency(n, edges.begin(), edges.end(), [](const Edge& e) { return e.src.id; },
                                   [](const Edge& e) { return e.dst; });
        Adjacency pred = adjacency(n, edges.begin(), edges.end(), [](const Edge& e) { return e.dst.id; },
                                   [](const Edge& e) { return e.src; });

        // reverse postorder from the entry
        std::vector<int> rpo_num(n, -1);
        std::vector<Loc> post;
        post.reserve(cfg.num_locs());
        {
            std::vector<char> seen(n, 0);
            std::vector<std::pair<Loc, std::size_t>> stack{{cfg.entry(), 0}};
            seen[cfg.entry().id] = 1;
            while (!stack.empty()) {
                auto& [l, i] = stack.back();
                if (i < succ.size(l)) {
                    Loc s = succ.begin(l)[i++];
                    if (!seen[s.id]) {
                        seen[s.id] = 1;
                        stack.push_back({s, 0});
                    }
                } else {
                    post.push_back(l);
                    stack.pop_back();
                }
            }
        }
        if (post.size() != cfg.num_locs())
            throw ValidationError("CFG has locations unreachable from the entry");
        std::vector<Loc> rpo(post.rbegin(), post.rend());
        for (std::size_t i = 0; i < rpo.size(); ++i) rpo_num[rpo[i].id] = static_cast<int>(i);

        // Cooper, Harvey & Kennedy iterative dominators
        m_idom.assign(n, Loc{0});
        std::vector<char> has_idom(n, 0);
        m_idom[cfg.entry().id] = cfg.entry();
        has_idom[cfg.entry().id] = 1;
        auto intersect = [&](Loc a, Loc b) {
            while (a != b) {
                while (rpo_num[a.id] > rpo_num[b.id]) a = m_idom[a.id];
                while (rpo_num[b.id] > rpo_num[a.id]) b = m_idom[b.id];
            }
            return a;
        };
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = 1; i < rpo.size(); ++i) {
                Loc b = rpo[i];
                std::optional<Loc> nd;
                for (const Loc* p = pred.begin(b); p != pred.end(b); ++p) {
                    if (!has_idom[p->id]) continue;
                    nd = nd ? intersect(*p, *nd) : *p;
                }
                if (nd && (!has_idom[b.id] || m_idom[b.id] != *nd)) {
                    m_idom[b.id] = *nd;
                    has_idom[b.id] = 1;
                    changed = true;
                }
            }
        }

        // retreating edges (by rpo numbering) must be back edges
        m_is_head.assign(n, 0);
        m_back_src.assign(n, Loc{0});
        std::vector<const Edge*> fwd;
        fwd.reserve(cfg.edges().size());
        for (const auto& e : cfg.edges()) {
            bool retreating = rpo_num[e.dst.id] <= rpo_num[e.src.id];
            if (retreating) {
                if (!dominates(e.dst, e.src))
                    throw ValidationError("irreducible control flow at edge " + to_string(e.src) + " -> " +
                                          to_string(e.dst));
                if (m_is_head[e.dst.id])
                    throw ValidationError("loop head " + to_string(e.dst) + " has more than one back edge");
                m_is_head[e.dst.id] = 1;
                m_back_src[e.dst.id] = e.src;
                m_heads.push_back(e.dst);
            } else {
                fwd.push_back(&e);
            }
        }
        std::sort(m_heads.begin(), m_heads.end());

        // join order: by order key, then source; sources are distinct per target.
        // Buckets first hold indices into `fwd`, then are overwritten in place.
        {
            std::vector<std::uint32_t> slot(fwd.size());
            std::iota(slot.begin(), slot.end(), 0u);
            m_fwd_in = adjacency(n, slot.begin(), slot.end(), [&](std::uint32_t i) { return fwd[i]->dst.id; },
                                 [&](std::uint32_t i) { return Loc{i}; });
            std::vector<const Edge*> bucket;
            for (Loc l : cfg.locs()) {
                Loc* first = m_fwd_in.at.data() + m_fwd_in.off[l.id];
                Loc* last = m_fwd_in.at.data() + m_fwd_in.off[l.id + 1];
                bucket.clear();
                for (Loc* p = first; p != last; ++p) bucket.push_back(fwd[p->id]);
                std::sort(bucket.begin(), bucket.end(), [](const Edge* a, const Edge* b) {
                    if (a->order_key != b->order_key) return a->order_key < b->order_key;
                    return a->src < b->src;
                });
                for (const Edge* e : bucket) *first++ = e->src;
            }
        }

        // Kahn topological sort of the forward graph, smallest id first for determinism
        {
            std::vector<std::size_t> indeg(n, 0);
            for (const Edge* e : fwd) ++indeg[e->dst.id];
            Adjacency fsucc = adjacency(n, fwd.begin(), fwd.end(), [](const Edge* e) { return e->src.id; },
                                        [](const Edge* e) { return e->dst; });
            std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
            for (Loc l : cfg.locs())
                if (indeg[l.id] == 0) ready.push(l.id);
            m_topo.reserve(cfg.num_locs());
            while (!ready.empty()) {
                Loc l{ready.top()};
                ready.pop();
                m_topo.push_back(l);
                for (const Loc* s = fsucc.begin(l); s != fsucc.end(l); ++s)
                    if (--indeg[s->id] == 0) ready.push(s->id);
            }
            if (m_topo.size() != cfg.num_locs()) throw ValidationError("forward edges contain a cycle");
        }

        // natural loops
        m_body.assign(n, {});
        // in[l] == stamp marks l as visited for the current head
        std::vector<std::uint32_t> in(n, 0);
        std::uint32_t stamp = 0;
        std::vector<Loc> work;
        for (Loc h : m_heads) {
            ++stamp;
            in[h.id] = stamp;
            work.assign(1, m_back_src[h.id]);
            std::vector<Loc> body;
            while (!work.empty()) {
                Loc l = work.back();
                work.pop_back();
                if (in[l.id] == stamp) continue;
                in[l.id] = stamp;
                body.push_back(l);
                work.insert(work.end(), pred.begin(l), pred.end(l));
            }
            std::sort(body.begin(), body.end());
            m_body[h.id] = std::move(body);
        }
        // membership pairs (l, h), visited outermost head first so each
        // location's heads come out in nesting order
        std::vector<std::uint32_t> depth(n, 0);
        for (Loc h : m_heads) {
            ++depth[h.id];
            for (Loc l : m_body[h.id]) ++depth[l.id];
        }
        std::vector<Loc> by_depth = m_heads;
        std::stable_sort(by_depth.begin(), by_depth.end(), [&](Loc a, Loc b) { return depth[a.id] < depth[b.id]; });
        std::vector<std::pair<Loc, Loc>> member;
        for (Loc h : by_depth) {
            member.emplace_back(h, h);
            for (Loc l : m_body[h.id]) member.emplace_back(l, h);
        }
        m_enclosing = adjacency(n, member.begin(), member.end(), [](const auto& m) { return m.first.id; },
                                [](const auto& m) { return m.second; });
        // nested loops must be properly nested and exits must leave from heads
        for (const auto& e : cfg.edges()) {
            if (is_back_edge(e.src, e.dst)) continue;
            for (Loc h : enclosing_heads(e.src)) {
                if (!in_loop(h, e.dst) && e.src != h)
                    throw ValidationError("loop " + to_string(h) + " is left from non-head " + to_string(e.src));
            }
        }
    }

    std::vector<Loc> m_idom;
    std::vector<char> m_is_head;
    std::vector<Loc> m_back_src;
    std::vector<Loc> m_heads;
    Adjacency m_fwd_in;
    std::vector<std::vector<Loc>> m_body;
    Adjacency m_enclosing;
    std::vector<Loc> m_topo;
};

} // namespace dai
