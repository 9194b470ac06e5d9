#pragma once

// Concrete semantics: one-step execution and a bounded collecting semantics.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dai/lang/cfg.hpp"

namespace dai {

struct ConcreteState {
    std::map<std::string, std::int64_t> env;
    std::map<std::string, std::vector<std::int64_t>> arrays;

    friend bool operator==(const ConcreteState&, const ConcreteState&) = default;
    friend auto operator<=>(const ConcreteState&, const ConcreteState&) = default;
};

inline std::string to_string(const ConcreteState& s) {
    std::string r = "{";
    bool first = true;
    for (const auto& [k, v] : s.env) {
        r += (first ? "" : ", ") + k + ":" + std::to_string(v);
        first = false;
    }
    for (const auto& [k, a] : s.arrays) {
        r += (first ? "" : ", ") + k + ":[";
        for (std::size_t i = 0; i < a.size(); ++i) r += (i ? "," : "") + std::to_string(a[i]);
        r += "]";
        first = false;
    }
    return r + "}";
}

namespace detail {

// nullopt = execution gets stuck (unbound variable, division by zero, overflow, bad index)
inline std::optional<std::int64_t> concrete_eval(const Expr& e, const ConcreteState& s) {
    return std::visit(
        [&](const auto& x) -> std::optional<std::int64_t> {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit>) {
                return x.value;
            } else if constexpr (std::is_same_v<T, Var>) {
                auto it = s.env.find(x.name);
                if (it == s.env.end()) return std::nullopt;
                return it->second;
            } else if constexpr (std::is_same_v<T, ArrayRead>) {
                auto it = s.arrays.find(x.array);
                if (it == s.arrays.end()) return std::nullopt;
                auto i = concrete_eval(*x.index, s);
                if (!i || *i < 0 || static_cast<std::size_t>(*i) >= it->second.size()) return std::nullopt;
                return it->second[static_cast<std::size_t>(*i)];
            } else if constexpr (std::is_same_v<T, Not>) {
                auto v = concrete_eval(*x.arg, s);
                if (!v) return std::nullopt;
                return *v == 0 ? 1 : 0;
            } else {
                auto l = concrete_eval(*x.lhs, s);
                if (!l) return std::nullopt;
                // short-circuit logic
                if (x.op == BinOp::And && *l == 0) return 0;
                if (x.op == BinOp::Or && *l != 0) return 1;
                auto r = concrete_eval(*x.rhs, s);
                if (!r) return std::nullopt;
                std::int64_t a = *l, b = *r, out = 0;
                switch (x.op) {
                case BinOp::Add:
                    if (__builtin_add_overflow(a, b, &out)) return std::nullopt;
                    return out;
                case BinOp::Sub:
                    if (__builtin_sub_overflow(a, b, &out)) return std::nullopt;
                    return out;
                case BinOp::Mul:
                    if (__builtin_mul_overflow(a, b, &out)) return std::nullopt;
                    return out;
                case BinOp::Div:
                    if (b == 0 || (a == INT64_MIN && b == -1)) return std::nullopt;
                    return a / b;
                case BinOp::Lt: return a < b;
                case BinOp::Le: return a <= b;
                case BinOp::Gt: return a > b;
                case BinOp::Ge: return a >= b;
                case BinOp::Eq: return a == b;
                case BinOp::Ne: return a != b;
                case BinOp::And:
                case BinOp::Or: return b != 0 ? 1 : 0;
                }
                return std::nullopt;
            }
        },
        e.node);
}

} // namespace detail

// One step of a non-call statement; nullopt is Stuck.
inline std::optional<ConcreteState> concrete_step(const Stmt& s, const ConcreteState& sigma) {
    return std::visit(
        [&](const auto& x) -> std::optional<ConcreteState> {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Skip>) {
                return sigma;
            } else if constexpr (std::is_same_v<T, Assign>) {
                auto v = detail::concrete_eval(*x.rhs, sigma);
                if (!v) return std::nullopt;
                ConcreteState r = sigma;
                r.env[x.lhs] = *v;
                return r;
            } else if constexpr (std::is_same_v<T, Assume>) {
                auto v = detail::concrete_eval(*x.cond, sigma);
                if (!v || *v == 0) return std::nullopt;
                return sigma;
            } else if constexpr (std::is_same_v<T, Print>) {
                if (!detail::concrete_eval(*x.arg, sigma)) return std::nullopt;
                return sigma;
            } else if constexpr (std::is_same_v<T, ArrayWrite>) {
                auto it = sigma.arrays.find(x.array);
                if (it == sigma.arrays.end()) return std::nullopt;
                auto i = detail::concrete_eval(*x.index, sigma);
                auto v = detail::concrete_eval(*x.rhs, sigma);
                if (!i || !v || *i < 0 || static_cast<std::size_t>(*i) >= it->second.size()) return std::nullopt;
                ConcreteState r = sigma;
                r.arrays[x.array][static_cast<std::size_t>(*i)] = *v;
                return r;
            } else {
                throw ContractViolation("concrete_step does not execute calls; use collecting_bounded");
            }
        },
        s.node);
}

using Collecting = std::map<Loc, std::set<ConcreteState>>;

namespace detail {

inline std::vector<ConcreteState> run_proc(const Program& p, const std::string& name, const ConcreteState& init,
                                           std::size_t step_limit, Collecting* record);

// Successors of `sigma` along one edge, executing calls to completion.
inline std::vector<ConcreteState> edge_successors(const Program& p, const Stmt& s, const ConcreteState& sigma,
                                                  std::size_t step_limit) {
    if (!s.is<Call>()) {
        auto r = concrete_step(s, sigma);
        if (!r) return {};
        return {*r};
    }
    const Call& c = s.as<Call>();
    const Procedure& callee = p.proc(c.callee);
    ConcreteState entry;
    if (c.actual) {
        auto v = concrete_eval(**c.actual, sigma);
        if (!v) return {};
        if (callee.param) entry.env[*callee.param] = *v;
    }
    std::vector<ConcreteState> out;
    for (const auto& exit : run_proc(p, c.callee, entry, step_limit, nullptr)) {
        auto it = exit.env.find("ret");
        if (it == exit.env.end()) continue; // reading an unset return value is stuck
        ConcreteState r = sigma;
        r.env[c.lhs] = it->second;
        out.push_back(r);
    }
    return out;
}

// Breadth-first exploration of all executions of `name` from `init` up to
// `step_limit` edges; returns the states reaching the exit.
inline std::vector<ConcreteState> run_proc(const Program& p, const std::string& name, const ConcreteState& init,
                                           std::size_t step_limit, Collecting* record) {
    const Cfg& cfg = p.proc(name).cfg;
    std::set<std::pair<Loc, ConcreteState>> seen;
    std::deque<std::tuple<Loc, ConcreteState, std::size_t>> work;
    std::vector<ConcreteState> exits;
    work.emplace_back(cfg.entry(), init, 0);
    seen.insert({cfg.entry(), init});
    std::vector<std::vector<const Edge*>> out(cfg.next_id());
    for (const auto& e : cfg.edges()) out[e.src.id].push_back(&e);
    while (!work.empty()) {
        auto [l, sigma, steps] = work.front();
        work.pop_front();
        if (record) (*record)[l].insert(sigma);
        if (l == cfg.exit()) exits.push_back(sigma);
        if (steps >= step_limit) continue;
        for (const Edge* e : out[l.id]) {
            for (auto& nxt : edge_successors(p, e->stmt, sigma, step_limit)) {
                if (seen.insert({e->dst, nxt}).second) work.emplace_back(e->dst, std::move(nxt), steps + 1);
            }
        }
    }
    return exits;
}

} // namespace detail

// Concrete states witnessed at each location of `main`, over all runs starting
// from the given initial states and cut off after `step_limit` steps.
inline Collecting collecting_bounded(const Program& p, const std::vector<ConcreteState>& input_space,
                                     std::size_t step_limit) {
    if (step_limit == 0) throw ContractViolation("step_limit must be positive");
    Collecting out;
    for (const auto& init : input_space) detail::run_proc(p, "main", init, step_limit, &out);
    return out;
}

} // namespace dai
