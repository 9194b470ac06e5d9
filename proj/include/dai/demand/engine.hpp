#pragma once

// Demand-driven, incremental evaluation of one procedure's DAIG.

#include <chrono>
#include <functional>
#include <memory>
#include <unordered_set>

#include "dai/daig/consistency.hpp"
#include "dai/daig/daig.hpp"
#include "dai/demand/memo.hpp"
#include "dai/lang/edit.hpp"

namespace dai {

struct Metrics {
    std::uint64_t transfer_evals = 0;
    std::uint64_t join_evals = 0;
    std::uint64_t widen_evals = 0;
    std::uint64_t call_evals = 0;
    std::uint64_t memo_hits = 0;
    std::uint64_t memo_misses = 0;
    std::uint64_t unrollings = 0;
    std::uint64_t cells_dirtied = 0;
    std::uint64_t queries = 0;
    std::uint64_t edits = 0;
    std::vector<std::int64_t> query_ns;

    Metrics& operator+=(const Metrics& o) {
        transfer_evals += o.transfer_evals;
        join_evals += o.join_evals;
        widen_evals += o.widen_evals;
        call_evals += o.call_evals;
        memo_hits += o.memo_hits;
        memo_misses += o.memo_misses;
        unrollings += o.unrollings;
        cells_dirtied += o.cells_dirtied;
        queries += o.queries;
        edits += o.edits;
        return *this;
    }
};

inline std::string to_string(const Metrics& m) {
    return "transfer_evals=" + std::to_string(m.transfer_evals) + " join_evals=" + std::to_string(m.join_evals) +
           " widen_evals=" + std::to_string(m.widen_evals) + " call_evals=" + std::to_string(m.call_evals) +
           " memo_hits=" + std::to_string(m.memo_hits) + " memo_misses=" + std::to_string(m.memo_misses) +
           " unrollings=" + std::to_string(m.unrollings) + " cells_dirtied=" + std::to_string(m.cells_dirtied);
}

struct EngineOptions {
    Convergence convergence = Convergence::Equal;
    bool memoize = true;
    // run all checkers after every public operation, throwing InvariantViolation
    bool debug_checks = false;
};

template <AbstractDomain D>
class Engine {
public:
    using State = typename D::State;
    using Value = std::variant<Stmt, State>;
    // evaluates `lhs = callee(actual)` on a pre-state; `site` is the call edge
    // source and `ret_cell` the cell receiving the result
    using CallHandler = std::function<State(const Call&, const State& pre, Loc site, const Name& ret_cell)>;

    explicit Engine(Cfg cfg, D dom = D{}, EngineOptions opt = {}, std::shared_ptr<MemoTable<D>> memo = nullptr,
                    std::optional<State> entry = std::nullopt)
        : m_cfg(std::move(cfg)), m_loops(m_cfg), m_dom(std::move(dom)), m_opt(opt),
          m_memo(memo ? std::move(memo) : std::make_shared<MemoTable<D>>()),
          m_entry_state(entry ? *entry : m_dom.init()) {
        m_daig = init_daig<D>(m_cfg, m_loops, m_entry_state);
        debug_check("construction");
    }

    const Cfg& cfg() const { return m_cfg; }
    const LoopInfo& loops() const { return m_loops; }
    const Daig<D>& daig() const { return m_daig; }
    const D& domain() const { return m_dom; }
    const EngineOptions& options() const { return m_opt; }
    const Metrics& metrics() const { return m_metrics; }
    Metrics& metrics() { return m_metrics; }
    const std::shared_ptr<MemoTable<D>>& memo() const { return m_memo; }
    const State& entry_state() const { return m_entry_state; }

    void set_call_handler(CallHandler h) { m_call = std::move(h); }
    void set_debug_checks(bool on) { m_opt.debug_checks = on; }

    // Replaces the memo table; used to discard all reuse.
    void set_memo(std::shared_ptr<MemoTable<D>> memo) { m_memo = std::move(memo); }

    Value query(const Name& n) {
        ++m_metrics.queries;
        demand(n);
        const auto& c = m_daig.cell(n);
        debug_check("query");
        if (c.type == CellType::Stmt) return *c.stmt;
        return *c.state;
    }

    const State& query_state(const Name& n) {
        demand(n);
        const auto& c = m_daig.cell(n);
        if (c.type != CellType::State) throw ContractViolation(to_string(n) + " is a statement cell");
        return *c.state;
    }

    // Name of the cell holding the analysis result at `l`, forcing enclosing
    // loops to converge first (outermost first).
    Name resolve_loc(Loc l) {
        if (!m_cfg.has_loc(l)) throw ValidationError("no location " + to_string(l));
        Naming nm(m_loops);
        IterVec at;
        for (Loc h : m_loops.enclosing_heads(l)) {
            Name fx = nm.fix(h, at);
            demand(fx);
            if (h == l) return fx;
            at[h.id] = fix_depth(fx) - 1;
        }
        return nm.state(l, at);
    }

    State query_loc(Loc l) {
        auto t0 = std::chrono::steady_clock::now();
        ++m_metrics.queries;
        Name n = resolve_loc(l);
        demand(n);
        State r = *m_daig.cell(n).state;
        m_metrics.query_ns.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                         std::chrono::steady_clock::now() - t0)
                                         .count());
        debug_check("query_loc");
        return r;
    }

    // k for a Fix computation over iterates (k-1, k)
    std::uint32_t fix_depth(const Name& fix_cell) const {
        const Computation* c = m_daig.comp_for(fix_cell);
        if (!c || c->fn != FnSymbol::Fix) throw ContractViolation(to_string(fix_cell) + " is not a fix cell");
        return *c->srcs[1].count_of(c->srcs[1].lhs().as_loc());
    }

    // E-Commit / E-Propagate / E-Loop: dirties everything downstream of `n`, then
    // stores `v` (or empties `n`).
    void write_cell(const Name& n, std::optional<Value> v) {
        auto& c = m_daig.cell(n);
        if (!v) {
            if (!m_daig.comp_for(n)) throw ContractViolation("cannot empty source cell " + to_string(n));
            dirty({n}, {});
        } else {
            bool is_stmt = std::holds_alternative<Stmt>(*v);
            if (is_stmt != (c.type == CellType::Stmt))
                throw ContractViolation("type mismatch writing " + to_string(n));
            dirty({}, {n});
            c.clear();
            if (is_stmt) c.stmt = std::get<Stmt>(*v);
            else c.state = std::get<State>(*v);
        }
        debug_check("write_cell");
    }

    // Overwrites the entry state; a no-op when unchanged.
    void set_entry_state(const State& s) {
        if (m_dom.equal(s, m_entry_state)) return;
        m_entry_state = s;
        write_cell(m_daig.entry(), Value{s});
    }

    EditDelta apply_program_edit(const ProgramEdit& edit) {
        ++m_metrics.edits;
        EditResult r = apply_edit(m_cfg, m_loops, edit);
        update_to(std::move(r.cfg), std::move(r.loops), r.delta);
        debug_check("apply_program_edit");
        return r.delta;
    }

    // Replaces the CFG by an arbitrary successor version (same locations or
    // more), reusing every cell whose computation is unchanged.
    void rebuild_for(Cfg next) {
        LoopInfo li(next);
        EditDelta d = detail::diff_cfgs(m_cfg, next);
        update_to(std::move(next), std::move(li), d);
        debug_check("rebuild_for");
    }

    // Empties every abstract-state cell except the entry and resets all loops.
    void dirty_all() {
        std::vector<Name> roots;
        for (const auto& [dest, c] : m_daig.comps()) roots.push_back(dest);
        dirty(roots, {});
    }

    std::vector<std::string> check_all() const {
        auto errs = check_wf(m_daig);
        for (auto& e : check_cfg_consistency(m_daig, m_cfg, m_loops)) errs.push_back(std::move(e));
        for (auto& e : check_ai_consistency(m_daig, m_dom, m_opt.convergence, m_entry_state)) errs.push_back(std::move(e));
        return errs;
    }

private:
    using CellT = Cell<D>;

    Digest cell_digest(const CellT& c) const {
        if (!c.digest) c.digest = c.type == CellType::Stmt ? digest(*c.stmt) : m_dom.digest(*c.state);
        return *c.digest;
    }

    static Loc call_site(const Name& stmt_cell) {
        Name n = stmt_cell;
        if (n.lhs().kind() == NameKind::Idx) n = n.rhs();
        return n.lhs().as_loc();
    }

    // Q-Reuse / Q-Match / Q-Miss and the loop rules, with an explicit stack.
    void demand(const Name& target) {
        if (m_daig.cell(target).filled()) return;
        std::vector<Name> stack{target};
        while (!stack.empty()) {
            const Name d = stack.back();
            CellT& cell = m_daig.cell(d);
            if (cell.filled()) {
                stack.pop_back();
                continue;
            }
            const Computation* c = m_daig.comp_for(d);
            if (!c) throw ContractViolation("empty cell without computation: " + to_string(d));
            bool pending = false;
            for (const auto& s : c->srcs) {
                if (!m_daig.cell(s).filled()) {
                    stack.push_back(s);
                    pending = true;
                    break;
                }
            }
            if (pending) continue;
            if (c->fn == FnSymbol::Fix) {
                const State& prev = *m_daig.cell(c->srcs[0]).state;
                const State& cur = *m_daig.cell(c->srcs[1]).state;
                bool converged = m_opt.convergence == Convergence::Equal ? m_dom.equal(prev, cur) : m_dom.leq(cur, prev);
                if (converged) {
                    cell.state = m_opt.convergence == Convergence::Equal ? cur : prev;
                    stack.pop_back();
                } else {
                    unroll(*c);
                }
                continue;
            }
            cell.state = evaluate(*c);
            stack.pop_back();
        }
    }

    State evaluate(const Computation& c) {
        using ArgRef = typename MemoTable<D>::ArgRef;
        if (c.fn == FnSymbol::Transfer) {
            const CellT& sc = m_daig.cell(c.srcs[0]);
            const CellT& pre = m_daig.cell(c.srcs[1]);
            if (sc.stmt->template is<Call>()) {
                if (!m_call) throw ContractViolation("call statement without an interprocedural context");
                ++m_metrics.call_evals;
                return m_call(sc.stmt->template as<Call>(), *pre.state, call_site(c.srcs[0]), c.dest);
            }
        }
        std::vector<ArgRef> args;
        MemoKey key{c.fn, {}};
        args.reserve(c.srcs.size());
        key.args.reserve(c.srcs.size());
        for (const auto& s : c.srcs) {
            const CellT& sc = m_daig.cell(s);
            if (sc.type == CellType::Stmt) args.emplace_back(&*sc.stmt);
            else args.emplace_back(&*sc.state);
            if (m_opt.memoize) key.args.push_back(cell_digest(sc));
        }
        if (m_opt.memoize) {
            if (const State* hit = m_memo->lookup(m_dom, key, args)) {
                ++m_metrics.memo_hits;
                return *hit;
            }
        }
        ++m_metrics.memo_misses;
        State r = compute(c);
        if (m_opt.memoize) m_memo->store(std::move(key), args, r);
        return r;
    }

    State compute(const Computation& c) {
        auto st = [&](std::size_t i) -> const State& { return *m_daig.cell(c.srcs[i]).state; };
        switch (c.fn) {
        case FnSymbol::Transfer:
            ++m_metrics.transfer_evals;
            return m_dom.transfer(*m_daig.cell(c.srcs[0]).stmt, st(1));
        case FnSymbol::Join: {
            ++m_metrics.join_evals;
            State acc = st(0);
            for (std::size_t i = 1; i < c.srcs.size(); ++i) acc = m_dom.join(acc, st(i));
            return acc;
        }
        case FnSymbol::Widen: ++m_metrics.widen_evals; return m_dom.widen(st(0), st(1));
        case FnSymbol::Fix: break;
        }
        throw ContractViolation("fix computations are not evaluated directly");
    }

    // Copies the region between iterates k-1 (exclusive) and k (inclusive) one
    // iteration further and moves the Fix computation to (k, k+1).
    void unroll(const Computation& fix) {
        const Name fx = fix.dest;
        const Name a = fix.srcs[0];
        const Name b = fix.srcs[1];
        const Loc head = a.lhs().as_loc();

        std::unordered_set<Name> fwd;
        std::vector<Name> work{a};
        while (!work.empty()) {
            Name n = work.back();
            work.pop_back();
            for (const auto& u : m_daig.users(n)) {
                if (u == fx) continue;
                if (fwd.insert(u).second && u != b) work.push_back(u);
            }
        }
        std::vector<Name> region{b};
        std::unordered_set<Name> in_region{b};
        work = {b};
        while (!work.empty()) {
            Name n = work.back();
            work.pop_back();
            const Computation* c = m_daig.comp_for(n);
            if (!c) continue;
            for (const auto& s : c->srcs)
                if (fwd.count(s) && in_region.insert(s).second) {
                    work.push_back(s);
                    region.push_back(s);
                }
        }

        auto outer = m_loops.enclosing_heads(head);
        auto is_outer = [&](std::uint32_t h) {
            return std::any_of(outer.begin(), outer.end(), [&](Loc o) { return o.id == h; });
        };
        std::vector<std::pair<Computation, Name>> copies;
        for (const auto& n : region) {
            const Computation& c = *m_daig.comp_for(n);
            // inner loops restart from their first two iterates
            bool inner_zero = std::all_of(c.inst.begin(), c.inst.end(), [&](const auto& hk) {
                return hk.second == 0 || is_outer(hk.first);
            });
            if (!inner_zero) continue;
            Computation cp = c;
            cp.dest = incr(c.dest, head);
            for (auto& s : cp.srcs) s = incr(s, head);
            cp.inst[head.id] += 1;
            if (cp.fn == FnSymbol::Fix) {
                Loc inner = cp.srcs[0].lhs().as_loc();
                cp.srcs = {with_count(cp.srcs[0], inner, 0), with_count(cp.srcs[1], inner, 1)};
            }
            copies.emplace_back(std::move(cp), m_daig.cell(n).templ);
        }
        for (auto& [cp, templ] : copies) {
            m_daig.ensure_cell(cp.dest, CellType::State, templ);
            if (const Computation* existing = m_daig.comp_for(cp.dest)) {
                // reuse retained cells; only a deep Fix with an empty final iterate is reset
                if (existing->fn != FnSymbol::Fix) continue;
                const Name& last = existing->srcs[1];
                bool deep = *last.count_of(last.lhs().as_loc()) >= 2;
                if (!deep || m_daig.cell(last).filled()) continue;
            }
            m_daig.set_comp(std::move(cp));
        }
        m_daig.set_srcs(fx, {b, incr(b, head)});
        ++m_metrics.unrollings;
    }

    // Fix computations with `n` as their final iterate.
    std::vector<Name> fixes_ending_at(const Name& n) const {
        std::vector<Name> r;
        // only iterate cells feed a Fix
        if (n.kind() != NameKind::Iter) return r;
        for (const auto& u : m_daig.users(n)) {
            const Computation* c = m_daig.comp_for(u);
            if (c && c->fn == FnSymbol::Fix && c->srcs[1] == n) r.push_back(u);
        }
        return r;
    }

    // Empties `empty_roots` and everything downstream of them and of
    // `value_roots`. A Fix whose final iterate k >= 2 is reached is reset to
    // iterates (0, 1) and dirtying continues from iterate 1.
    void dirty(const std::vector<Name>& empty_roots, const std::vector<Name>& value_roots) {
        const std::uint64_t pass = ++m_dirty_pass;
        std::vector<Name> stack(empty_roots.rbegin(), empty_roots.rend());
        std::unordered_set<Name> roots(empty_roots.begin(), empty_roots.end());
        for (const auto& r : value_roots) {
            roots.insert(r);
            reset_loops_at(r, stack);
            for (const auto& u : m_daig.users(r)) stack.push_back(u);
        }
        while (!stack.empty()) {
            Name m = std::move(stack.back());
            stack.pop_back();
            CellT& c = m_daig.cell(m);
            if (c.visit == pass) continue;
            c.visit = pass;
            bool was_filled = c.filled();
            if (was_filled) {
                c.clear();
                ++m_metrics.cells_dirtied;
            }
            reset_loops_at(m, stack);
            // an empty cell has only empty dependents
            if (!was_filled && !roots.count(m)) continue;
            for (const auto& u : m_daig.users(m)) stack.push_back(u);
        }
    }

    void reset_loops_at(const Name& m, std::vector<Name>& stack) {
        for (const auto& fxn : fixes_ending_at(m)) {
            const Computation& fc = *m_daig.comp_for(fxn);
            Loc h = fc.srcs[0].lhs().as_loc();
            if (*fc.srcs[1].count_of(h) < 2) continue;
            Name it0 = with_count(fc.srcs[0], h, 0);
            Name it1 = with_count(fc.srcs[1], h, 1);
            m_daig.set_srcs(fxn, {it0, it1});
            stack.push_back(fxn);
            stack.push_back(it1);
        }
    }

    // Live instance counters for a new template computation: iteration 0 plus
    // every iteration whose successor iterate already exists.
    std::vector<IterVec> live_instances(const Computation& tc) const {
        std::vector<Loc> heads = replication_heads(tc, m_loops);
        Naming nm(m_loops);
        std::vector<IterVec> out;
        std::function<void(std::size_t, IterVec&)> rec = [&](std::size_t j, IterVec& at) {
            if (j == heads.size()) {
                out.push_back(at);
                return;
            }
            Loc h = heads[j];
            for (std::uint32_t i = 0;; ++i) {
                if (i > 0 && !m_daig.has_cell(nm.iterate(h, at, i + 1))) break;
                at[h.id] = i;
                rec(j + 1, at);
            }
            at.erase(h.id);
        };
        IterVec at;
        rec(0, at);
        return out;
    }

    // Locations whose template entries may differ between the current and
    // the next CFG version.
    std::vector<char> affected_locs(const Cfg& next, const LoopInfo& nl, const EditDelta& d) const {
        std::vector<char> a(std::max(next.next_id(), m_cfg.next_id()), 0);
        for (Loc l : d.added_locs) a[l.id] = 1;
        for (const auto& e : d.added_edges) a[e.src.id] = a[e.dst.id] = 1;
        for (const auto& e : d.removed_edges) a[e.src.id] = a[e.dst.id] = 1;
        for (const auto& r : d.relabelled) a[r.src.id] = a[r.dst.id] = 1;
        for (Loc l : m_cfg.locs()) {
            if (a[l.id]) continue;
            const LoopInfo& ol = m_loops;
            bool same = ol.is_head(l) == nl.is_head(l) && std::ranges::equal(ol.enclosing_heads(l), nl.enclosing_heads(l)) &&
                        std::ranges::equal(ol.fwd_preds(l), nl.fwd_preds(l)) &&
                        (!ol.is_head(l) || ol.back_edge_src(l) == nl.back_edge_src(l));
            if (!same) a[l.id] = 1;
        }
        return a;
    }

    void update_to(Cfg next, LoopInfo nl, const EditDelta& d) {
        std::vector<char> a = affected_locs(next, nl, d);
        DaigTemplate before = build_template(m_cfg, m_loops, &a);
        DaigTemplate after = build_template(next, nl, &a);
        m_cfg = std::move(next);
        m_loops = std::move(nl);
        surgery(before, after);
    }

    // Rewrites the DAIG from template entries `before` to `after` (both
    // restricted to the same affected region), then dirties what changed.
    void surgery(const DaigTemplate& before, const DaigTemplate& after) {
        std::unordered_map<Name, const Computation*> ocomps, ncomps;
        std::unordered_map<Name, const DaigTemplate::CellSpec*> ocells, ncells;
        for (const auto& c : before.comps) ocomps.emplace(c.dest, &c);
        for (const auto& c : after.comps) ncomps.emplace(c.dest, &c);
        for (const auto& c : before.cells) ocells.emplace(c.name, &c);
        for (const auto& c : after.cells) ncells.emplace(c.name, &c);

        std::vector<Name> empty_roots, value_roots, doomed;

        // computations that vanished: drop every instance, and their cells
        // when the cell vanished too
        for (const auto& [t, oc] : ocomps) {
            if (ncomps.count(t)) continue;
            std::vector<Name> inst = m_daig.instances(t);
            for (const auto& dn : inst) {
                m_daig.remove_comp(dn);
                if (!ncells.count(t)) doomed.push_back(dn);
                else empty_roots.push_back(dn);
            }
        }
        // statement cells
        for (const auto& [t, oc] : ocells)
            if (oc->type == CellType::Stmt && !ncells.count(t)) m_daig.remove_cell(t);
        for (const auto& [t, nc] : ncells) {
            if (nc->type != CellType::Stmt) continue;
            if (!m_daig.has_cell(t)) m_daig.ensure_cell(t, CellType::Stmt, t).stmt = nc->stmt;
            else if (*m_daig.cell(t).stmt != *nc->stmt) value_roots.push_back(t);
        }
        // changed computations: re-instantiate in place
        for (const auto& [t, nc] : ncomps) {
            auto it = ocomps.find(t);
            if (it == ocomps.end() || it->second->same_shape(*nc)) continue;
            std::vector<Name> inst = m_daig.instances(t);
            for (const auto& dn : inst) {
                IterVec v = m_daig.comp_for(dn)->inst;
                Computation c = instantiate(*nc, v);
                for (std::size_t i = 0; i < c.srcs.size(); ++i)
                    if (!m_daig.has_cell(c.srcs[i])) m_daig.ensure_cell(c.srcs[i], CellType::State, nc->srcs[i]);
                m_daig.set_comp(std::move(c));
                empty_roots.push_back(dn);
            }
        }
        // new computations over all live instances
        for (const auto& [t, nc] : ncomps) {
            if (ocomps.count(t)) continue;
            for (const auto& v : live_instances(*nc)) {
                Computation c = instantiate(*nc, v);
                for (std::size_t i = 0; i < c.srcs.size(); ++i)
                    if (!m_daig.has_cell(c.srcs[i])) m_daig.ensure_cell(c.srcs[i], CellType::State, nc->srcs[i]);
                m_daig.ensure_cell(c.dest, CellType::State, t);
                if (m_daig.cell(c.dest).filled()) empty_roots.push_back(c.dest);
                m_daig.set_comp(std::move(c));
            }
        }

        // dirty downstream of doomed cells before they disappear
        dirty(doomed, {});
        for (const auto& n : doomed) m_daig.remove_cell(n);
        dirty(empty_roots, value_roots);
        for (const auto& t : value_roots) {
            auto& cell = m_daig.cell(t);
            cell.clear();
            cell.stmt = ncells.at(t)->stmt;
        }
    }

    void debug_check(const char* what) const {
        if (!m_opt.debug_checks) return;
        auto errs = check_all();
        if (errs.empty()) return;
        std::string msg = std::string("invariant violation after ") + what + ":";
        for (std::size_t i = 0; i < errs.size() && i < 8; ++i) msg += "\n  " + errs[i];
        throw InvariantViolation(msg);
    }

    Cfg m_cfg;
    LoopInfo m_loops;
    D m_dom;
    EngineOptions m_opt;
    std::shared_ptr<MemoTable<D>> m_memo;
    State m_entry_state;
    Daig<D> m_daig;
    Metrics m_metrics;
    std::uint64_t m_dirty_pass = 0;
    CallHandler m_call;
};

} // namespace dai
