#pragma once

// Bottom-up inlining of non-recursive calls at the CFG level. Each call edge
// `s -> d : x = f(e)` is replaced by
//     s --p#n = e--> [copy of f with every variable renamed] --x = ret#n--> d
// where `#n` is a per-site suffix. Original locations keep their ids.

#include <functional>
#include <set>

#include "dai/domain/domain.hpp"
#include "dai/lang/cfg.hpp"

namespace dai {

namespace inline_detail {

inline ExprPtr rename(const ExprPtr& e, const std::string& sfx) {
    return std::visit(
        [&](const auto& x) -> ExprPtr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit>) return e;
            else if constexpr (std::is_same_v<T, Var>) return mk_var(x.name + sfx);
            else if constexpr (std::is_same_v<T, ArrayRead>) return mk_read(x.array + sfx, rename(x.index, sfx));
            else if constexpr (std::is_same_v<T, Binop>) return mk_bin(x.op, rename(x.lhs, sfx), rename(x.rhs, sfx));
            else return mk_not(rename(x.arg, sfx));
        },
        e->node);
}

inline Stmt rename(const Stmt& s, const std::string& sfx) {
    return std::visit(
        [&](const auto& x) -> Stmt {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Skip>) return s;
            else if constexpr (std::is_same_v<T, Assign>) return mk_assign(x.lhs + sfx, rename(x.rhs, sfx));
            else if constexpr (std::is_same_v<T, Assume>) return mk_assume(rename(x.cond, sfx));
            else if constexpr (std::is_same_v<T, Print>) return mk_print(rename(x.arg, sfx));
            else if constexpr (std::is_same_v<T, ArrayWrite>)
                return Stmt{ArrayWrite{x.array + sfx, rename(x.index, sfx), rename(x.rhs, sfx)}};
            else
                throw ContractViolation("renaming a call that should already be inlined");
        },
        s.node);
}

} // namespace inline_detail

// Marker separating an original variable name from its inlining suffix.
inline constexpr char kInlineMark = '#';

// `proc`'s CFG with all calls (transitively) inlined.
inline Cfg inline_calls(const Program& p, const std::string& proc) {
    std::map<std::string, Cfg> done;
    std::size_t counter = 0;
    std::function<const Cfg&(const std::string&)> get = [&](const std::string& name) -> const Cfg& {
        auto it = done.find(name);
        if (it != done.end()) return it->second;
        const Cfg& src = p.proc(name).cfg;
        Cfg out(src.entry(), src.exit());
        for (Loc l : src.locs()) out.add_loc(l);
        for (const auto& e : src.edges()) {
            if (!e.stmt.is<Call>()) {
                out.add_edge(e.src, e.dst, e.stmt, e.order_key);
                continue;
            }
            const Call& c = e.stmt.as<Call>();
            const Procedure& callee = p.proc(c.callee);
            const Cfg& body = get(c.callee);
            std::string sfx = std::string(1, kInlineMark) + std::to_string(counter++);
            std::map<std::uint32_t, Loc> remap;
            for (Loc l : body.locs()) remap[l.id] = out.fresh_loc();
            Loc in = remap.at(body.entry().id);
            Loc back = remap.at(body.exit().id);
            Stmt bind = callee.param && c.actual ? mk_assign(*callee.param + sfx, *c.actual) : mk_skip();
            out.add_edge(e.src, in, bind, e.order_key);
            for (const auto& be : body.edges())
                out.add_edge(remap.at(be.src.id), remap.at(be.dst.id), inline_detail::rename(be.stmt, sfx),
                             remap.at(be.src.id).id);
            out.add_edge(back, e.dst, mk_assign(c.lhs, mk_var("ret" + sfx)), e.order_key);
        }
        return done.emplace(name, std::move(out)).first->second;
    };
    return get(proc);
}

// Drops bindings of variables introduced by inlining.
template <class V>
EnvState<V> project_inlined(EnvState<V> s) {
    for (auto it = s.env.begin(); it != s.env.end();) {
        if (it->first.find(kInlineMark) != std::string::npos) it = s.env.erase(it);
        else ++it;
    }
    return s;
}

} // namespace dai
