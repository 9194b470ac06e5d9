#pragma once

// Interval domain over 64-bit integers extended with -inf/+inf.

#include <algorithm>
#include <climits>

#include "dai/domain/domain.hpp"
#include "dai/support/error.hpp"

namespace dai {

struct Itv {
    // INT64_MIN and INT64_MAX stand for -inf and +inf
    static constexpr std::int64_t NEG_INF = INT64_MIN;
    static constexpr std::int64_t POS_INF = INT64_MAX;

    std::int64_t lo = NEG_INF;
    std::int64_t hi = POS_INF;

    static Itv top() { return {}; }
    static Itv of(std::int64_t v) { return {v, v}; }
    bool is_top() const { return lo == NEG_INF && hi == POS_INF; }
    bool contains(std::int64_t v) const { return lo <= v && v <= hi; }
    bool is_const() const { return lo == hi; }
    bool subset_of(const Itv& o) const { return o.lo <= lo && hi <= o.hi; }

    friend bool operator==(const Itv&, const Itv&) = default;
};

inline std::string to_string(const Itv& i) {
    std::string lo = i.lo == Itv::NEG_INF ? "-inf" : std::to_string(i.lo);
    std::string hi = i.hi == Itv::POS_INF ? "+inf" : std::to_string(i.hi);
    return "[" + lo + "," + hi + "]";
}

namespace itv_detail {

using Wide = __int128;
constexpr Wide BIG = Wide{1} << 100;

inline Wide widen_bound(std::int64_t b) {
    if (b == Itv::NEG_INF) return -BIG;
    if (b == Itv::POS_INF) return BIG;
    return b;
}
inline bool infinite(Wide w) { return w >= BIG || w <= -BIG; }
inline int sign(Wide w) { return (w > 0) - (w < 0); }

// lower bounds round down, upper bounds round up
inline std::int64_t to_lo(Wide w) {
    if (w <= Wide{Itv::NEG_INF}) return Itv::NEG_INF;
    if (w >= Wide{Itv::POS_INF}) return Itv::POS_INF - 1;
    return static_cast<std::int64_t>(w);
}
inline std::int64_t to_hi(Wide w) {
    if (w >= Wide{Itv::POS_INF}) return Itv::POS_INF;
    if (w <= Wide{Itv::NEG_INF}) return Itv::NEG_INF + 1;
    return static_cast<std::int64_t>(w);
}

inline Wide mul(Wide a, Wide b) {
    if (a == 0 || b == 0) return 0;
    if (infinite(a) || infinite(b)) return sign(a) * sign(b) > 0 ? BIG : -BIG;
    return a * b;
}

// truncating division, nullopt when both operands are infinite
inline std::optional<Wide> div(Wide a, Wide b) {
    if (infinite(b)) {
        if (infinite(a)) return std::nullopt;
        return 0;
    }
    if (infinite(a)) return sign(a) * sign(b) > 0 ? BIG : -BIG;
    return a / b;
}

inline Itv hull_of(std::initializer_list<Wide> ws) {
    return {to_lo(std::min(ws)), to_hi(std::max(ws))};
}

inline Itv add(const Itv& a, const Itv& b) {
    return {to_lo(widen_bound(a.lo) + widen_bound(b.lo)), to_hi(widen_bound(a.hi) + widen_bound(b.hi))};
}
inline Itv sub(const Itv& a, const Itv& b) {
    return {to_lo(widen_bound(a.lo) - widen_bound(b.hi)), to_hi(widen_bound(a.hi) - widen_bound(b.lo))};
}
inline Itv mul(const Itv& a, const Itv& b) {
    Wide al = widen_bound(a.lo), ah = widen_bound(a.hi), bl = widen_bound(b.lo), bh = widen_bound(b.hi);
    return hull_of({mul(al, bl), mul(al, bh), mul(ah, bl), mul(ah, bh)});
}
inline Itv div(const Itv& a, const Itv& b) {
    if (b.contains(0)) return Itv::top();
    Wide al = widen_bound(a.lo), ah = widen_bound(a.hi), bl = widen_bound(b.lo), bh = widen_bound(b.hi);
    auto q1 = div(al, bl), q2 = div(al, bh), q3 = div(ah, bl), q4 = div(ah, bh);
    if (!q1 || !q2 || !q3 || !q4) return Itv::top();
    return hull_of({*q1, *q2, *q3, *q4});
}

inline const Itv kFalse = Itv::of(0);
inline const Itv kTrue = Itv::of(1);
inline const Itv kBool = {0, 1};

inline bool surely_true(const Itv& v) { return !v.contains(0); }
inline bool surely_false(const Itv& v) { return v == kFalse; }

inline Itv compare(BinOp op, const Itv& a, const Itv& b) {
    switch (op) {
    case BinOp::Lt:
        if (a.hi < b.lo) return kTrue;
        if (a.lo >= b.hi) return kFalse;
        return kBool;
    case BinOp::Le:
        if (a.hi <= b.lo) return kTrue;
        if (a.lo > b.hi) return kFalse;
        return kBool;
    case BinOp::Gt: return compare(BinOp::Lt, b, a);
    case BinOp::Ge: return compare(BinOp::Le, b, a);
    case BinOp::Eq:
        if (a.is_const() && b.is_const() && a.lo == b.lo) return kTrue;
        if (a.hi < b.lo || b.hi < a.lo) return kFalse;
        return kBool;
    case BinOp::Ne:
        if (a.is_const() && b.is_const() && a.lo == b.lo) return kFalse;
        if (a.hi < b.lo || b.hi < a.lo) return kTrue;
        return kBool;
    default: throw ContractViolation("not a comparison");
    }
}

} // namespace itv_detail

class IntervalDomain {
public:
    using State = EnvState<Itv>;
    static constexpr const char* name = "interval";

    State init() const { return {}; }
    State bottom() const { return State{true, {}}; }
    bool is_bot(const State& s) const { return s.bot; }
    bool equal(const State& a, const State& b) const { return a == b; }

    bool leq(const State& a, const State& b) const {
        return env_leq(a, b, [](const Itv& x, const Itv& y) { return x.subset_of(y); });
    }

    State join(const State& a, const State& b) const {
        return env_combine(a, b, [](const Itv& x, const Itv& y) -> std::optional<Itv> {
            Itv r{std::min(x.lo, y.lo), std::max(x.hi, y.hi)};
            if (r.is_top()) return std::nullopt;
            return r;
        });
    }

    State widen(const State& a, const State& b) const {
        return env_combine(a, b, [](const Itv& x, const Itv& y) -> std::optional<Itv> {
            Itv r{y.lo < x.lo ? Itv::NEG_INF : x.lo, y.hi > x.hi ? Itv::POS_INF : x.hi};
            if (r.is_top()) return std::nullopt;
            return r;
        });
    }

    std::string to_string(const State& s) const {
        return env_to_string(s, [](const Itv& i) { return dai::to_string(i); });
    }
    Digest digest(const State& s) const {
        return env_digest(s, [](const auto& v) { return std::array<std::int64_t, 2>{v.lo, v.hi}; });
    }

    Itv eval(const Expr& e, const State& s) const {
        using namespace itv_detail;
        return std::visit(
            [&](const auto& x) -> Itv {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, IntLit>) {
                    return Itv::of(x.value);
                } else if constexpr (std::is_same_v<T, Var>) {
                    return lookup(s, x.name);
                } else if constexpr (std::is_same_v<T, ArrayRead>) {
                    return Itv::top();
                } else if constexpr (std::is_same_v<T, Not>) {
                    Itv v = eval(*x.arg, s);
                    if (surely_false(v)) return kTrue;
                    if (surely_true(v)) return kFalse;
                    return kBool;
                } else {
                    Itv a = eval(*x.lhs, s);
                    Itv b = eval(*x.rhs, s);
                    switch (x.op) {
                    case BinOp::Add: return add(a, b);
                    case BinOp::Sub: return sub(a, b);
                    case BinOp::Mul: return mul(a, b);
                    case BinOp::Div: return div(a, b);
                    case BinOp::And:
                        if (surely_false(a) || surely_false(b)) return kFalse;
                        if (surely_true(a) && surely_true(b)) return kTrue;
                        return kBool;
                    case BinOp::Or:
                        if (surely_true(a) || surely_true(b)) return kTrue;
                        if (surely_false(a) && surely_false(b)) return kFalse;
                        return kBool;
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
                    throw ContractViolation("interval transfer received a call statement");
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
        bind(r, lhs, lookup(callee_exit, "ret"));
        return r;
    }

    bool models(const ConcreteState& sigma, const State& s) const {
        if (s.bot) return false;
        for (const auto& [x, i] : s.env) {
            auto it = sigma.env.find(x);
            if (it == sigma.env.end() || !i.contains(it->second)) return false;
        }
        return true;
    }

    static Itv lookup(const State& s, const std::string& x) {
        auto it = s.env.find(x);
        return it == s.env.end() ? Itv::top() : it->second;
    }

    static void bind(State& s, const std::string& x, const Itv& v) {
        if (v.is_top()) s.env.erase(x);
        else s.env[x] = v;
    }

private:
    // Narrows `x` so that `x op rhs` may hold; bottom when it cannot.
    State constrain(const State& s, const std::string& x, BinOp op, const Itv& rhs) const {
        Itv cur = lookup(s, x);
        switch (op) {
        case BinOp::Lt:
            if (rhs.hi != Itv::POS_INF) cur.hi = std::min(cur.hi, rhs.hi - 1);
            break;
        case BinOp::Le: cur.hi = std::min(cur.hi, rhs.hi); break;
        case BinOp::Gt:
            if (rhs.lo != Itv::NEG_INF) cur.lo = std::max(cur.lo, rhs.lo + 1);
            break;
        case BinOp::Ge: cur.lo = std::max(cur.lo, rhs.lo); break;
        case BinOp::Eq:
            cur.lo = std::max(cur.lo, rhs.lo);
            cur.hi = std::min(cur.hi, rhs.hi);
            break;
        case BinOp::Ne:
            if (rhs.is_const()) {
                if (cur.lo == rhs.lo) cur.lo = cur.lo + 1;
                if (cur.hi == rhs.lo) cur.hi = cur.hi - 1;
            }
            break;
        default: break;
        }
        if (cur.lo > cur.hi || cur.hi == Itv::NEG_INF || cur.lo == Itv::POS_INF) return bottom();
        State r = s;
        bind(r, x, cur);
        return r;
    }

    State refine(const Expr& cond, const State& s, bool positive) const {
        using namespace itv_detail;
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
                Itv l = eval(*b->lhs, s);
                Itv r = eval(*b->rhs, s);
                if (surely_false(compare(op, l, r))) return bottom();
                State out = s;
                if (auto* v = std::get_if<Var>(&b->lhs->node)) out = constrain(out, v->name, op, r);
                if (out.bot) return out;
                if (auto* v = std::get_if<Var>(&b->rhs->node)) out = constrain(out, v->name, flip_comparison(op), l);
                return out;
            }
        }
        Itv v = eval(cond, s);
        if (positive ? surely_false(v) : surely_true(v)) return bottom();
        if (auto* var = std::get_if<Var>(&cond.node))
            return constrain(s, var->name, positive ? BinOp::Ne : BinOp::Eq, kFalse);
        return s;
    }
};

static_assert(AbstractDomain<IntervalDomain>);

} // namespace dai
