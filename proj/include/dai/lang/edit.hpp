#pragma once

// Structural program edits and the edge-level delta they induce.

#include <algorithm>
#include <iterator>
#include <variant>
#include <vector>

#include "dai/lang/loops.hpp"
#include "dai/lang/parser.hpp"

namespace dai {

struct InsertStmtAfter {
    Loc at;
    Stmt stmt;
};
struct InsertIf {
    Loc at;
    ExprPtr cond;
    std::vector<Stmt> then_stmts;
    std::vector<Stmt> else_stmts;
};
struct InsertWhile {
    Loc at;
    ExprPtr cond;
    std::vector<Stmt> body;
};
// Replaces the statement on an existing edge. Relabelling to `skip` deletes it.
struct RelabelEdge {
    Loc src;
    Loc dst;
    Stmt stmt;
};

using ProgramEdit = std::variant<InsertStmtAfter, InsertIf, InsertWhile, RelabelEdge>;

inline std::string to_string(const ProgramEdit& e) {
    auto block = [](const std::vector<Stmt>& ss) {
        std::string r = "{";
        for (const auto& s : ss) r += " " + to_string(s) + ";";
        return r + " }";
    };
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, InsertStmtAfter>)
                return "insert-after " + to_string(x.at) + " :: " + to_string(x.stmt);
            else if constexpr (std::is_same_v<T, InsertIf>)
                return "insert-if " + to_string(x.at) + " :: " + to_string(x.cond) + " " + block(x.then_stmts) +
                       " else " + block(x.else_stmts);
            else if constexpr (std::is_same_v<T, InsertWhile>)
                return "insert-while " + to_string(x.at) + " :: " + to_string(x.cond) + " " + block(x.body);
            else
                return "relabel " + to_string(x.src) + " -> " + to_string(x.dst) + " :: " + to_string(x.stmt);
        },
        e);
}

struct Relabelled {
    Loc src;
    Loc dst;
    Stmt before;
    Stmt after;
};

struct EditDelta {
    std::vector<Loc> added_locs;
    std::vector<Edge> added_edges;
    std::vector<Edge> removed_edges;
    std::vector<Relabelled> relabelled;
    bool exit_changed = false;
};

// Reproduces the post-edit CFG from the pre-edit CFG and the delta.
inline Cfg apply_delta(const Cfg& before, const EditDelta& d, Loc new_exit) {
    Cfg out = before;
    for (Loc l : d.added_locs) out.add_loc(l);
    for (const auto& e : d.removed_edges) out.remove_edge(e.src, e.dst);
    for (const auto& e : d.added_edges) out.add_edge(e.src, e.dst, e.stmt, e.order_key);
    for (const auto& r : d.relabelled) out.relabel_edge(r.src, r.dst, r.after);
    out.set_exit(new_exit);
    return out;
}

namespace detail {

inline SBlock simple_block(const std::vector<Stmt>& ss) {
    SBlock b;
    for (const auto& s : ss) b.push_back(s_simple(s));
    return b;
}

// Out-edges of `l` that move to the insertion point: all of them, except that a
// loop head keeps its exit edges.
inline std::vector<Edge> movable_out_edges(const Cfg& cfg, const LoopInfo& li, Loc l) {
    std::vector<Edge> r;
    for (const Edge* e : cfg.out_edges(l)) {
        if (li.is_head(l) && !li.in_loop(l, e->dst)) continue;
        r.push_back(*e);
    }
    return r;
}

// Edge-level difference between two versions of a CFG. When `sources` is
// given, only out-edges of those locations and of new locations are compared;
// the caller guarantees no other edge changed.
inline EditDelta diff_cfgs(const Cfg& before, const Cfg& after, const std::vector<Loc>* sources = nullptr) {
    EditDelta d;
    std::set_difference(after.locs().begin(), after.locs().end(), before.locs().begin(), before.locs().end(),
                        std::back_inserter(d.added_locs));
    std::vector<Loc> scope;
    if (sources) {
        scope = *sources;
        scope.insert(scope.end(), d.added_locs.begin(), d.added_locs.end());
        std::sort(scope.begin(), scope.end());
    }
    auto key = [](const Edge* e) { return (std::uint64_t{e->src.id} << 32) | e->dst.id; };
    auto sorted = [&](const Cfg& c) {
        std::vector<const Edge*> r;
        for (const auto& e : c.edges())
            if (!sources || std::binary_search(scope.begin(), scope.end(), e.src)) r.push_back(&e);
        std::sort(r.begin(), r.end(), [&](const Edge* x, const Edge* y) { return key(x) < key(y); });
        return r;
    };
    std::vector<const Edge*> olds = sorted(before), news = sorted(after);
    // merge by (src, dst); a changed order key counts as removal plus addition
    std::size_t i = 0, j = 0;
    while (i < olds.size() || j < news.size()) {
        if (j == news.size() || (i < olds.size() && key(olds[i]) < key(news[j]))) {
            d.removed_edges.push_back(*olds[i++]);
        } else if (i == olds.size() || key(news[j]) < key(olds[i])) {
            d.added_edges.push_back(*news[j++]);
        } else {
            const Edge& o = *olds[i++];
            const Edge& n = *news[j++];
            if (o.order_key != n.order_key) {
                d.removed_edges.push_back(o);
                d.added_edges.push_back(n);
            } else if (o.stmt != n.stmt) {
                d.relabelled.push_back({o.src, o.dst, o.stmt, n.stmt});
            }
        }
    }
    d.exit_changed = before.exit() != after.exit();
    return d;
}

} // namespace detail

struct EditResult {
    Cfg cfg;
    EditDelta delta;
    // loop structure of the edited CFG
    LoopInfo loops;
};

// `li` must be the loop structure of `cfg`.
inline EditResult apply_edit(const Cfg& cfg, const LoopInfo& li, const ProgramEdit& edit) {
    Cfg out = cfg;

    auto check_loc = [&](Loc l) {
        if (!cfg.has_loc(l)) throw ValidationError("no location " + to_string(l));
    };
    // moves the movable out-edges of `at` to a fresh location and returns it
    auto split_after = [&](Loc at) {
        auto moved = detail::movable_out_edges(cfg, li, at);
        Loc n = out.fresh_loc();
        for (const auto& e : moved) {
            out.remove_edge(e.src, e.dst);
            out.add_edge(n, e.dst, e.stmt, e.order_key);
        }
        if (at == cfg.exit()) out.set_exit(n);
        return n;
    };

    // every changed edge leaves from here or from a new location
    std::vector<Loc> touched;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, RelabelEdge>) touched.push_back(x.src);
            else touched.push_back(x.at);
            if constexpr (std::is_same_v<T, InsertStmtAfter>) {
                check_loc(x.at);
                Loc n = split_after(x.at);
                out.add_edge(x.at, n, x.stmt);
            } else if constexpr (std::is_same_v<T, InsertIf>) {
                check_loc(x.at);
                Loc j = split_after(x.at);
                detail::lower_stmt(out, s_if(x.cond, detail::simple_block(x.then_stmts),
                                             detail::simple_block(x.else_stmts)),
                                   x.at, j);
            } else if constexpr (std::is_same_v<T, InsertWhile>) {
                check_loc(x.at);
                Loc n = split_after(x.at);
                Loc head = x.at;
                if (x.at == cfg.entry() || li.is_head(x.at)) {
                    head = out.fresh_loc();
                    out.add_edge(x.at, head, mk_skip());
                }
                detail::lower_stmt(out, s_while(x.cond, detail::simple_block(x.body)), head, n);
            } else {
                if (!cfg.find_edge(x.src, x.dst))
                    throw ValidationError("no edge " + to_string(x.src) + " -> " + to_string(x.dst));
                out.relabel_edge(x.src, x.dst, x.stmt);
            }
        },
        edit);

    LoopInfo check(out); // throws on malformed results
    EditDelta delta = detail::diff_cfgs(cfg, out, &touched);
    return {std::move(out), std::move(delta), std::move(check)};
}

inline EditResult apply_edit(const Cfg& cfg, const ProgramEdit& edit) { return apply_edit(cfg, LoopInfo(cfg), edit); }

} // namespace dai
