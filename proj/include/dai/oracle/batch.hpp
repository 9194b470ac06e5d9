#pragma once

// Whole-procedure abstract interpretation by recursive loop iteration with
// widening at loop heads. Inner loops are iterated to a fixed point from
// scratch on every pass of their enclosing loop; join operands are combined
// in join-index order.

#include <map>
#include <unordered_map>

#include "dai/daig/naming.hpp"
#include "dai/domain/domain.hpp"
#include "dai/lang/loops.hpp"

namespace dai {

struct BatchStats {
    std::uint64_t transfer_evals = 0;
    std::uint64_t join_evals = 0;
    std::uint64_t widen_evals = 0;
    // widening applications until convergence, per loop head and outer-pass counters
    std::map<std::pair<std::uint32_t, IterVec>, std::uint32_t> iterations;
};

template <AbstractDomain D>
struct BatchResult {
    std::map<Loc, typename D::State> invariants;
    BatchStats stats;
};

template <AbstractDomain D>
class BatchAnalyzer {
public:
    using State = typename D::State;

    BatchAnalyzer(const Cfg& cfg, const LoopInfo& li, const D& dom, Convergence conv)
        : m_cfg(cfg), m_li(li), m_dom(dom), m_conv(conv) {
        for (const auto& e : cfg.edges()) m_edge.emplace(key(e.src, e.dst), &e.stmt);
        for (Loc l : li.topo_order()) {
            auto enc = li.enclosing_heads(l);
            std::size_t n = enc.size() - (li.is_head(l) ? 1 : 0);
            std::optional<Loc> parent;
            if (n > 0) parent = enc[n - 1];
            m_levels[parent ? parent->id : kTop].push_back(l);
        }
    }

    BatchResult<D> run(const State& entry) {
        m_cur.clear();
        m_fix.clear();
        m_out = {};
        m_cur.emplace(m_cfg.entry(), entry);
        IterVec outer;
        process_level(kTop, outer);
        for (Loc l : m_cfg.locs()) {
            if (m_li.is_head(l)) m_out.invariants.emplace(l, m_fix.at(l));
            else m_out.invariants.emplace(l, m_cur.at(l));
        }
        return std::move(m_out);
    }

private:
    static constexpr std::uint32_t kTop = UINT32_MAX;

    static std::uint64_t key(Loc a, Loc b) { return (std::uint64_t{a.id} << 32) | b.id; }

    State transfer(const Stmt& s, const State& pre) {
        ++m_out.stats.transfer_evals;
        return m_dom.transfer(s, pre);
    }

    const State& source(Loc src, Loc dst) const {
        if (m_li.is_head(src) && !m_li.in_loop(src, dst)) return m_fix.at(src);
        return m_cur.at(src);
    }

    // value flowing into `l` along its forward in-edges
    State incoming(Loc l) {
        auto preds = m_li.fwd_preds(l);
        std::optional<State> acc;
        for (Loc p : preds) {
            State v = transfer(*m_edge.at(key(p, l)), source(p, l));
            if (!acc) {
                acc = std::move(v);
            } else {
                acc = m_dom.join(*acc, v);
            }
        }
        if (preds.size() >= 2) ++m_out.stats.join_evals;
        return std::move(*acc);
    }

    void process_level(std::uint32_t level, IterVec& outer) {
        auto it = m_levels.find(level);
        if (it == m_levels.end()) return;
        for (Loc l : it->second) {
            if (l == m_cfg.entry()) continue;
            if (m_li.is_head(l)) run_loop(l, outer);
            else m_cur[l] = incoming(l);
        }
    }

    void run_loop(Loc h, IterVec& outer) {
        State w = incoming(h);
        Loc back = m_li.back_edge_src(h);
        const Stmt& back_stmt = *m_edge.at(key(back, h));
        std::uint32_t k = 0;
        while (true) {
            m_cur[h] = w;
            outer[h.id] = k;
            process_level(h.id, outer);
            outer.erase(h.id);
            State pre = transfer(back_stmt, m_cur.at(back));
            State next = m_dom.widen(w, pre);
            ++m_out.stats.widen_evals;
            ++k;
            bool done = m_conv == Convergence::Equal ? m_dom.equal(w, next) : m_dom.leq(next, w);
            if (done) {
                m_fix[h] = m_conv == Convergence::Equal ? next : w;
                break;
            }
            w = std::move(next);
        }
        m_out.stats.iterations[{h.id, outer}] = k;
    }

    const Cfg& m_cfg;
    const LoopInfo& m_li;
    const D& m_dom;
    Convergence m_conv;
    std::unordered_map<std::uint64_t, const Stmt*> m_edge;
    std::map<std::uint32_t, std::vector<Loc>> m_levels;
    std::map<Loc, State> m_cur;
    std::map<Loc, State> m_fix;
    BatchResult<D> m_out;
};

template <AbstractDomain D>
BatchResult<D> batch_analyze(const Cfg& cfg, const D& dom = D{}, Convergence conv = Convergence::Equal,
                             std::optional<typename D::State> entry = std::nullopt) {
    LoopInfo li(cfg);
    BatchAnalyzer<D> a(cfg, li, dom, conv);
    return a.run(entry ? *entry : dom.init());
}

} // namespace dai
