#pragma once

// Sign domain {Neg, Zero, Pos, Top}. Expressions are evaluated over sets of
// signs and abstracted back to the lattice when bound to a variable.

#include "dai/domain/domain.hpp"
#include "dai/support/error.hpp"

namespace dai {

enum class Sign : std::uint8_t { Neg = 1, Zero = 2, Pos = 4, Top = 7 };

inline const char* to_string(Sign s) {
    switch (s) {
    case Sign::Neg: return "Neg";
    case Sign::Zero: return "Zero";
    case Sign::Pos: return "Pos";
    case Sign::Top: return "Top";
    }
    return "?";
}

namespace sign_detail {

using Mask = std::uint8_t;
constexpr Mask NEG = 1, ZERO = 2, POS = 4, ALL = 7;

inline Mask of_value(std::int64_t v) { return v < 0 ? NEG : v == 0 ? ZERO : POS; }

template <class F>
Mask lift(Mask a, Mask b, F f) {
    Mask r = 0;
    for (Mask x = 1; x <= 4; x <<= 1)
        for (Mask y = 1; y <= 4; y <<= 1)
            if ((a & x) && (b & y)) r |= f(x, y);
    return r;
}

inline Mask add1(Mask x, Mask y) {
    if (x == ZERO) return y;
    if (y == ZERO) return x;
    return x == y ? x : ALL;
}
inline Mask neg1(Mask x) { return x == NEG ? POS : x == POS ? NEG : ZERO; }
inline Mask negate(Mask a) {
    Mask r = 0;
    for (Mask x = 1; x <= 4; x <<= 1)
        if (a & x) r |= neg1(x);
    return r;
}
inline Mask mul1(Mask x, Mask y) {
    if (x == ZERO || y == ZERO) return ZERO;
    return x == y ? POS : NEG;
}
inline Mask div1(Mask x, Mask y) {
    // y is never ZERO here; truncation may give zero
    if (x == ZERO) return ZERO;
    return static_cast<Mask>((x == y ? POS : NEG) | ZERO);
}

// Which of <, =, > can hold between a value of sign x and one of sign y.
inline Mask relations(Mask x, Mask y) {
    constexpr Mask LT = 1, EQ = 2, GT = 4;
    if (x == y) return x == ZERO ? EQ : static_cast<Mask>(LT | EQ | GT);
    // distinct signs are strictly ordered Neg < Zero < Pos
    return x < y ? LT : GT;
}

inline bool holds_for(BinOp op, Mask rel) {
    constexpr Mask LT = 1, EQ = 2, GT = 4;
    switch (op) {
    case BinOp::Lt: return rel & LT;
    case BinOp::Le: return rel & (LT | EQ);
    case BinOp::Gt: return rel & GT;
    case BinOp::Ge: return rel & (GT | EQ);
    case BinOp::Eq: return rel & EQ;
    case BinOp::Ne: return rel & (LT | GT);
    default: return true;
    }
}

// true/false possibility of `a op b` as a value mask over {0, 1}
inline Mask compare(BinOp op, Mask a, Mask b) {
    Mask r = 0;
    for (Mask x = 1; x <= 4; x <<= 1)
        for (Mask y = 1; y <= 4; y <<= 1) {
            if (!(a & x) || !(b & y)) continue;
            Mask rel = relations(x, y);
            if (holds_for(op, rel)) r |= POS;
            if (holds_for(negate_comparison(op), rel)) r |= ZERO;
        }
    return r;
}

inline bool may_true(Mask m) { return m & (NEG | POS); }
inline bool may_false(Mask m) { return m & ZERO; }
inline Mask truth(bool t, bool f) { return static_cast<Mask>((t ? POS : 0) | (f ? ZERO : 0)); }

} // namespace sign_detail

class SignDomain {
public:
    using State = EnvState<Sign>;
    using Mask = sign_detail::Mask;
    static constexpr const char* name = "sign";

    State init() const { return {}; }
    State bottom() const { return State{true, {}}; }
    bool is_bot(const State& s) const { return s.bot; }
    bool equal(const State& a, const State& b) const { return a == b; }

    bool leq(const State& a, const State& b) const {
        return env_leq(a, b, [](Sign x, Sign y) { return x == y || y == Sign::Top; });
    }
    State join(const State& a, const State& b) const {
        return env_combine(a, b, [](Sign x, Sign y) -> std::optional<Sign> {
            if (x == y) return x;
            return std::nullopt;
        });
    }
    State widen(const State& a, const State& b) const { return join(a, b); }

    std::string to_string(const State& s) const {
        return env_to_string(s, [](Sign v) { return std::string(dai::to_string(v)); });
    }
    Digest digest(const State& s) const {
        return env_digest(s, [](const auto& v) { return std::array<std::int64_t, 1>{static_cast<std::int64_t>(v)}; });
    }

    Mask eval(const Expr& e, const State& s) const {
        using namespace sign_detail;
        return std::visit(
            [&](const auto& x) -> Mask {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, IntLit>) {
                    return of_value(x.value);
                } else if constexpr (std::is_same_v<T, Var>) {
                    auto it = s.env.find(x.name);
                    return it == s.env.end() ? ALL : static_cast<Mask>(it->second);
                } else if constexpr (std::is_same_v<T, ArrayRead>) {
                    return ALL;
                } else if constexpr (std::is_same_v<T, Not>) {
                    Mask v = eval(*x.arg, s);
                    return truth(may_false(v), may_true(v));
                } else {
                    Mask a = eval(*x.lhs, s);
                    Mask b = eval(*x.rhs, s);
                    switch (x.op) {
                    case BinOp::Add: return lift(a, b, add1);
                    case BinOp::Sub: return lift(a, negate(b), add1);
                    case BinOp::Mul: return lift(a, b, mul1);
                    case BinOp::Div:
                        if (b & ZERO) return ALL;
                        return lift(a, b, div1);
                    case BinOp::And:
                        return truth(may_true(a) && may_true(b), may_false(a) || may_false(b));
                    case BinOp::Or:
                        return truth(may_true(a) || may_true(b), may_false(a) && may_false(b));
                    default: return compare(x.op, a, b);
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
                    throw ContractViolation("sign transfer received a call statement");
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
        bind(r, lhs, it == callee_exit.env.end() ? sign_detail::ALL : static_cast<Mask>(it->second));
        return r;
    }

    bool models(const ConcreteState& sigma, const State& s) const {
        if (s.bot) return false;
        for (const auto& [x, v] : s.env) {
            auto it = sigma.env.find(x);
            if (it == sigma.env.end() || !(static_cast<Mask>(v) & sign_detail::of_value(it->second))) return false;
        }
        return true;
    }

    // binds `x` to the abstraction of a nonempty mask
    static void bind(State& s, const std::string& x, Mask m) {
        if (m == sign_detail::NEG || m == sign_detail::ZERO || m == sign_detail::POS) s.env[x] = static_cast<Sign>(m);
        else s.env.erase(x);
    }

private:
    State constrain(const State& s, const std::string& x, BinOp op, Mask rhs) const {
        using namespace sign_detail;
        auto it = s.env.find(x);
        Mask cur = it == s.env.end() ? ALL : static_cast<Mask>(it->second);
        Mask keep = 0;
        for (Mask v = 1; v <= 4; v <<= 1) {
            if (!(cur & v)) continue;
            for (Mask y = 1; y <= 4; y <<= 1)
                if ((rhs & y) && holds_for(op, relations(v, y))) keep |= v;
        }
        if (!keep) return bottom();
        State r = s;
        bind(r, x, keep);
        return r;
    }

    State refine(const Expr& cond, const State& s, bool positive) const {
        using namespace sign_detail;
        if (s.bot) return s;
        if (auto* n = std::get_if<Not>(&cond.node)) return refine(*n->arg, s, !positive);
        if (auto* b = std::get_if<Binop>(&cond.node)) {
            if (b->op == BinOp::And || b->op == BinOp::Or) {
                bool conj = (b->op == BinOp::And) == positive;
                if (conj) return refine(*b->rhs, refine(*b->lhs, s, positive), positive);
                return join(refine(*b->lhs, s, positive), refine(*b->rhs, s, positive));
            }
            if (is_comparison(b->op)) {
                BinOp op = positive ? b->op : negate_comparison(b->op);
                Mask l = eval(*b->lhs, s);
                Mask r = eval(*b->rhs, s);
                if (!(compare(op, l, r) & POS)) return bottom();
                State out = s;
                if (auto* v = std::get_if<Var>(&b->lhs->node)) out = constrain(out, v->name, op, r);
                if (out.bot) return out;
                if (auto* v = std::get_if<Var>(&b->rhs->node)) out = constrain(out, v->name, flip_comparison(op), l);
                return out;
            }
        }
        Mask v = eval(cond, s);
        if (positive ? !may_true(v) : !may_false(v)) return bottom();
        if (auto* var = std::get_if<Var>(&cond.node))
            return constrain(s, var->name, positive ? BinOp::Ne : BinOp::Eq, ZERO);
        return s;
    }
};

static_assert(AbstractDomain<SignDomain>);

} // namespace dai
