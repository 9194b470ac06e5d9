#pragma once

// Constant propagation: each variable is a known integer or Top.

#include "dai/domain/domain.hpp"
#include "dai/support/error.hpp"

namespace dai {

class ConstDomain {
public:
    // absent variables are Top
    using State = EnvState<std::int64_t>;
    using Val = std::optional<std::int64_t>;
    static constexpr const char* name = "const";

    State init() const { return {}; }
    State bottom() const { return State{true, {}}; }
    bool is_bot(const State& s) const { return s.bot; }
    bool equal(const State& a, const State& b) const { return a == b; }

    bool leq(const State& a, const State& b) const {
        return env_leq(a, b, [](std::int64_t x, std::int64_t y) { return x == y; });
    }
    State join(const State& a, const State& b) const {
        return env_combine(a, b, [](std::int64_t x, std::int64_t y) -> Val {
            if (x == y) return x;
            return std::nullopt;
        });
    }
    State widen(const State& a, const State& b) const { return join(a, b); }

    std::string to_string(const State& s) const {
        return env_to_string(s, [](std::int64_t v) { return std::to_string(v); });
    }
    Digest digest(const State& s) const {
        return env_digest(s, [](const auto& v) { return std::array<std::int64_t, 1>{v}; });
    }

    Val eval(const Expr& e, const State& s) const {
        return std::visit(
            [&](const auto& x) -> Val {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, IntLit>) {
                    return x.value;
                } else if constexpr (std::is_same_v<T, Var>) {
                    auto it = s.env.find(x.name);
                    if (it == s.env.end()) return std::nullopt;
                    return it->second;
                } else if constexpr (std::is_same_v<T, ArrayRead>) {
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, Not>) {
                    Val v = eval(*x.arg, s);
                    if (!v) return std::nullopt;
                    return *v == 0 ? 1 : 0;
                } else {
                    Val a = eval(*x.lhs, s);
                    Val b = eval(*x.rhs, s);
                    if (x.op == BinOp::And) {
                        if ((a && *a == 0) || (b && *b == 0)) return 0;
                        if (a && b) return 1;
                        return std::nullopt;
                    }
                    if (x.op == BinOp::Or) {
                        if ((a && *a != 0) || (b && *b != 0)) return 1;
                        if (a && b) return 0;
                        return std::nullopt;
                    }
                    if (!a || !b) return std::nullopt;
                    std::int64_t l = *a, r = *b, out = 0;
                    switch (x.op) {
                    case BinOp::Add:
                        if (__builtin_add_overflow(l, r, &out)) return std::nullopt;
                        return out;
                    case BinOp::Sub:
                        if (__builtin_sub_overflow(l, r, &out)) return std::nullopt;
                        return out;
                    case BinOp::Mul:
                        if (__builtin_mul_overflow(l, r, &out)) return std::nullopt;
                        return out;
                    case BinOp::Div:
                        if (r == 0 || (l == INT64_MIN && r == -1)) return std::nullopt;
                        return l / r;
                    case BinOp::Lt: return l < r;
                    case BinOp::Le: return l <= r;
                    case BinOp::Gt: return l > r;
                    case BinOp::Ge: return l >= r;
                    case BinOp::Eq: return l == r;
                    case BinOp::Ne: return l != r;
                    default: return std::nullopt;
                    }
                }
            },
            e.node);
    }

    State transfer(const Stmt& stmt, const State& s) const {
        if (s.bot) return s;
        return std::visit(
            [&](const auto& x) -> State {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    State r = s;
                    bind(r, x.lhs, eval(*x.rhs, s));
                    return r;
                } else if constexpr (std::is_same_v<T, Assume>) {
                    return refine(*x.cond, s, true);
                } else if constexpr (std::is_same_v<T, Call>) {
                    throw ContractViolation("constant transfer received a call statement");
                } else {
                    return s;
                }
            },
            stmt.node);
    }

    State call_entry(const State& caller, const std::optional<std::string>& param,
                     const std::optional<ExprPtr>& actual) const {
        if (caller.bot) return caller;
        State r;
        if (param && actual) bind(r, *param, eval(**actual, caller));
        return r;
    }

    State call_return(const State& caller, const std::string& lhs, const State& callee_exit) const {
        if (caller.bot || callee_exit.bot) return bottom();
        State r = caller;
        auto it = callee_exit.env.find("ret");
        bind(r, lhs, it == callee_exit.env.end() ? Val{} : Val{it->second});
        return r;
    }

    bool models(const ConcreteState& sigma, const State& s) const {
        if (s.bot) return false;
        for (const auto& [x, v] : s.env) {
            auto it = sigma.env.find(x);
            if (it == sigma.env.end() || it->second != v) return false;
        }
        return true;
    }

    static void bind(State& s, const std::string& x, Val v) {
        if (v) s.env[x] = *v;
        else s.env.erase(x);
    }

private:
    State refine(const Expr& cond, const State& s, bool positive) const {
        if (s.bot) return s;
        if (auto* n = std::get_if<Not>(&cond.node)) return refine(*n->arg, s, !positive);
        Val v = eval(cond, s);
        if (v && ((*v != 0) != positive)) return bottom();
        if (auto* b = std::get_if<Binop>(&cond.node)) {
            if (b->op == BinOp::And && positive) return refine(*b->rhs, refine(*b->lhs, s, true), true);
            if (b->op == BinOp::Or && !positive) return refine(*b->rhs, refine(*b->lhs, s, false), false);
            BinOp op = positive ? b->op : negate_comparison(b->op);
            if (op == BinOp::Eq) {
                State out = s;
                Val l = eval(*b->lhs, s);
                Val r = eval(*b->rhs, s);
                if (auto* x = std::get_if<Var>(&b->lhs->node); x && r) bind(out, x->name, r);
                if (auto* y = std::get_if<Var>(&b->rhs->node); y && l) bind(out, y->name, l);
                return out;
            }
            return s;
        }
        if (auto* var = std::get_if<Var>(&cond.node); var && !positive) {
            State out = s;
            bind(out, var->name, 0);
            return out;
        }
        return s;
    }
};

static_assert(AbstractDomain<ConstDomain>);

} // namespace dai
