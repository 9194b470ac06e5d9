#pragma once

// Checkers relating a DAIG to the CFG it encodes and to the abstract
// semantics of its computations. Names are rebuilt here from the loop
// structure directly rather than through the template builder.

#include <functional>
#include <span>

#include "dai/daig/daig.hpp"

namespace dai {

namespace consistency_detail {

inline Name at_heads(Loc l, std::span<const Loc> heads, const IterVec& at) {
    if (heads.empty()) return Name::loc(l);
    Counts c;
    for (Loc h : heads) {
        auto it = at.find(h.id);
        c.emplace_back(h.id, it == at.end() ? 0 : it->second);
    }
    return Name::iter(Name::loc(l), std::move(c));
}

inline Name state_at(const LoopInfo& li, Loc l, const IterVec& at) { return at_heads(l, li.enclosing_heads(l), at); }

inline Name fix_at(const LoopInfo& li, Loc h, const IterVec& at) {
    auto heads = li.enclosing_heads(h);
    heads = heads.first(heads.size() - 1);
    return at_heads(h, heads, at);
}

} // namespace consistency_detail

// Checks that every edge of `cfg` is encoded at every unrolled iteration the
// DAIG currently holds: forward non-join edges, join edges with their pre-join
// cells, and back edges with pre-widen cells, widening and the Fix edge.
template <AbstractDomain D>
std::vector<std::string> check_cfg_consistency(const Daig<D>& d, const Cfg& cfg, const LoopInfo& li) {
    using namespace consistency_detail;
    std::vector<std::string> errs;

    auto depth_of = [&](Loc h, const IterVec& at) -> std::optional<std::uint32_t> {
        Name fx = fix_at(li, h, at);
        const Computation* c = d.comp_for(fx);
        if (!c || c->fn != FnSymbol::Fix || c->srcs.size() != 2) {
            errs.push_back("missing fix computation for " + to_string(fx));
            return std::nullopt;
        }
        auto k = c->srcs[1].kind() == NameKind::Iter ? c->srcs[1].count_of(h) : std::nullopt;
        if (!k || *k == 0) {
            errs.push_back("malformed fix computation " + to_string(*c));
            return std::nullopt;
        }
        return k;
    };
    // every counter vector for `heads` (outermost first) below the current depths
    std::function<void(std::span<const Loc>, std::size_t, IterVec&, const std::function<void(const IterVec&)>&)>
        each = [&](std::span<const Loc> heads, std::size_t j, IterVec& at,
                   const std::function<void(const IterVec&)>& f) {
            if (j == heads.size()) {
                f(at);
                return;
            }
            auto k = depth_of(heads[j], at);
            if (!k) return;
            for (std::uint32_t i = 0; i < *k; ++i) {
                at[heads[j].id] = i;
                each(heads, j + 1, at, f);
            }
            at.erase(heads[j].id);
        };
    auto expect = [&](const Name& dest, FnSymbol fn, const std::vector<Name>& srcs) {
        const Computation* c = d.comp_for(dest);
        Computation want{dest, fn, srcs, {}, {}};
        if (!c) {
            errs.push_back("missing computation " + to_string(want));
            return;
        }
        if (c->fn != fn || c->srcs != srcs) errs.push_back("expected " + to_string(want) + ", found " + to_string(*c));
        for (const auto& s : srcs)
            if (!d.has_cell(s)) errs.push_back("missing cell " + to_string(s));
    };
    auto stmt_cell = [&](const Name& n, const Stmt& s) {
        if (!d.has_cell(n)) {
            errs.push_back("missing statement cell " + to_string(n));
            return;
        }
        const auto& c = d.cell(n);
        if (c.type != CellType::Stmt || !c.stmt || *c.stmt != s)
            errs.push_back("statement cell " + to_string(n) + " does not hold " + to_string(s));
    };

    if (!d.has_cell(state_at(li, cfg.entry(), {})) || d.entry() != state_at(li, cfg.entry(), {}))
        errs.push_back("entry cell mismatch");

    for (const auto& e : cfg.edges()) {
        Name sn = Name::prod(Name::loc(e.src), Name::loc(e.dst));
        if (li.is_back_edge(e.src, e.dst)) {
            Loc h = e.dst;
            stmt_cell(sn, e.stmt);
            auto heads = li.enclosing_heads(e.src);
            IterVec at;
            each(heads, 0, at, [&](const IterVec& v) {
                std::uint32_t i = v.at(h.id);
                IterVec next = v;
                next[h.id] = i + 1;
                Name cur = state_at(li, h, v);
                Name nxt = state_at(li, h, next);
                Name pw = Name::prod(cur, nxt);
                expect(pw, FnSymbol::Transfer, {sn, state_at(li, e.src, v)});
                expect(nxt, FnSymbol::Widen, {cur, pw});
            });
            continue;
        }
        bool join = li.is_join(e.dst);
        if (join) sn = Name::prod(Name::idx(static_cast<std::uint32_t>(li.join_index(e.src, e.dst))), sn);
        stmt_cell(sn, e.stmt);
        // counters range over the heads strictly enclosing the destination's
        // loop entry point; a head destination is entered at iteration 0
        auto heads = li.enclosing_heads(e.dst);
        if (li.is_head(e.dst)) heads = heads.first(heads.size() - 1);
        IterVec at;
        each(heads, 0, at, [&](const IterVec& v) {
            Name src = li.is_head(e.src) && !li.in_loop(e.src, e.dst) ? fix_at(li, e.src, v) : state_at(li, e.src, v);
            Name dst = state_at(li, e.dst, v);
            Name dest = join ? Name::prod(Name::idx(static_cast<std::uint32_t>(li.join_index(e.src, e.dst))), dst) : dst;
            expect(dest, FnSymbol::Transfer, {sn, src});
        });
    }
    for (Loc l : cfg.locs()) {
        // heads strictly enclosing l
        auto heads = li.enclosing_heads(l);
        if (li.is_head(l)) heads = heads.first(heads.size() - 1);
        if (li.is_head(l)) {
            IterVec at;
            each(heads, 0, at, [&](const IterVec& v) {
                auto k = depth_of(l, v);
                if (!k) return;
                IterVec a = v, b = v;
                a[l.id] = *k - 1;
                b[l.id] = *k;
                expect(fix_at(li, l, v), FnSymbol::Fix, {state_at(li, l, a), state_at(li, l, b)});
            });
        }
        if (!li.is_join(l)) continue;
        IterVec at;
        each(heads, 0, at, [&](const IterVec& v) {
            Name s = state_at(li, l, v);
            std::vector<Name> ins;
            for (std::size_t i = 1; i <= li.fwd_indegree(l); ++i)
                ins.push_back(Name::prod(Name::idx(static_cast<std::uint32_t>(i)), s));
            expect(s, FnSymbol::Join, ins);
        });
    }
    return errs;
}

// Checks that every filled cell holds exactly what its computation yields
// from its sources, and that the entry cell holds the entry state. Call
// transfers are only required to have filled sources.
template <AbstractDomain D>
std::vector<std::string> check_ai_consistency(const Daig<D>& d, const D& dom, Convergence conv,
                                              const typename D::State& entry_state) {
    std::vector<std::string> errs;
    const auto& ec = d.cell(d.entry());
    if (!ec.state || !dom.equal(*ec.state, entry_state)) errs.push_back("entry cell does not hold the entry state");
    for (const auto& [dest, c] : d.comps()) {
        const auto& dc = d.cell(dest);
        if (!dc.filled()) continue;
        bool srcs_filled = true;
        for (const auto& s : c.srcs)
            if (!d.has_cell(s) || !d.cell(s).filled()) srcs_filled = false;
        if (!srcs_filled) {
            errs.push_back("filled cell " + to_string(dest) + " has an empty source");
            continue;
        }
        auto st = [&](std::size_t i) -> const typename D::State& { return *d.cell(c.srcs[i]).state; };
        const auto& v = *dc.state;
        bool ok = true;
        switch (c.fn) {
        case FnSymbol::Transfer: {
            const Stmt& s = *d.cell(c.srcs[0]).stmt;
            if (s.is<Call>()) break;
            ok = dom.equal(dom.transfer(s, st(1)), v);
            break;
        }
        case FnSymbol::Join: {
            auto acc = st(0);
            for (std::size_t i = 1; i < c.srcs.size(); ++i) acc = dom.join(acc, st(i));
            ok = dom.equal(acc, v);
            break;
        }
        case FnSymbol::Widen: ok = dom.equal(dom.widen(st(0), st(1)), v); break;
        case FnSymbol::Fix:
            if (conv == Convergence::Equal) ok = dom.equal(st(0), st(1)) && dom.equal(st(1), v);
            else ok = dom.leq(st(1), st(0)) && dom.equal(st(0), v);
            break;
        }
        if (!ok) errs.push_back("cell " + to_string(dest) + " disagrees with " + to_string(c));
    }
    return errs;
}

} // namespace dai
