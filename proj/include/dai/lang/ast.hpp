#pragma once

// Expressions and atomic statements of the analyzed language.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dai/support/digest.hpp"

namespace dai {

enum class BinOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

inline const char* binop_text(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    }
    return "?";
}

inline bool is_comparison(BinOp op) {
    return op == BinOp::Lt || op == BinOp::Le || op == BinOp::Gt || op == BinOp::Ge ||
           op == BinOp::Eq || op == BinOp::Ne;
}

// Binding strength, larger binds tighter.
inline int binop_prec(BinOp op) {
    switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 4;
    case BinOp::Add:
    case BinOp::Sub: return 5;
    case BinOp::Mul:
    case BinOp::Div: return 6;
    }
    return 0;
}

// Comparison that holds exactly when `op` fails.
inline BinOp negate_comparison(BinOp op) {
    switch (op) {
    case BinOp::Lt: return BinOp::Ge;
    case BinOp::Le: return BinOp::Gt;
    case BinOp::Gt: return BinOp::Le;
    case BinOp::Ge: return BinOp::Lt;
    case BinOp::Eq: return BinOp::Ne;
    case BinOp::Ne: return BinOp::Eq;
    default: return op;
    }
}

// a op b  <=>  b (flip op) a
inline BinOp flip_comparison(BinOp op) {
    switch (op) {
    case BinOp::Lt: return BinOp::Gt;
    case BinOp::Le: return BinOp::Ge;
    case BinOp::Gt: return BinOp::Lt;
    case BinOp::Ge: return BinOp::Le;
    default: return op;
    }
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLit {
    std::int64_t value;
};
struct Var {
    std::string name;
};
struct ArrayRead {
    std::string array;
    ExprPtr index;
};
struct Binop {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};
struct Not {
    ExprPtr arg;
};

struct Expr {
    std::variant<IntLit, Var, ArrayRead, Binop, Not> node;
};

inline ExprPtr mk_int(std::int64_t v) { return std::make_shared<const Expr>(Expr{IntLit{v}}); }
inline ExprPtr mk_var(std::string n) { return std::make_shared<const Expr>(Expr{Var{std::move(n)}}); }
inline ExprPtr mk_read(std::string a, ExprPtr i) {
    return std::make_shared<const Expr>(Expr{ArrayRead{std::move(a), std::move(i)}});
}
inline ExprPtr mk_bin(BinOp op, ExprPtr l, ExprPtr r) {
    return std::make_shared<const Expr>(Expr{Binop{op, std::move(l), std::move(r)}});
}
inline ExprPtr mk_not(ExprPtr e) { return std::make_shared<const Expr>(Expr{Not{std::move(e)}}); }

inline bool expr_equal(const Expr& a, const Expr& b);

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return expr_equal(*a, *b);
}

inline bool expr_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, IntLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, Var>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, ArrayRead>) return x.array == y.array && expr_equal(x.index, y.index);
            else if constexpr (std::is_same_v<T, Binop>)
                return x.op == y.op && expr_equal(x.lhs, y.lhs) && expr_equal(x.rhs, y.rhs);
            else return expr_equal(x.arg, y.arg);
        },
        a.node);
}

namespace detail {
inline void print_expr(std::string& out, const Expr& e, int ctx_prec) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit>) {
                out += std::to_string(x.value);
            } else if constexpr (std::is_same_v<T, Var>) {
                out += x.name;
            } else if constexpr (std::is_same_v<T, ArrayRead>) {
                out += x.array;
                out += '[';
                print_expr(out, *x.index, 0);
                out += ']';
            } else if constexpr (std::is_same_v<T, Binop>) {
                int p = binop_prec(x.op);
                bool paren = p < ctx_prec;
                if (paren) out += '(';
                print_expr(out, *x.lhs, p);
                out += ' ';
                out += binop_text(x.op);
                out += ' ';
                // operators are left associative, so a right operand of equal strength needs parens
                print_expr(out, *x.rhs, p + 1);
                if (paren) out += ')';
            } else {
                out += '!';
                print_expr(out, *x.arg, 100);
            }
        },
        e.node);
}
} // namespace detail

inline std::string to_string(const Expr& e) {
    std::string s;
    detail::print_expr(s, e, 0);
    return s;
}
inline std::string to_string(const ExprPtr& e) { return to_string(*e); }

inline void collect_vars(const Expr& e, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Var>) out.push_back(x.name);
            else if constexpr (std::is_same_v<T, ArrayRead>) collect_vars(*x.index, out);
            else if constexpr (std::is_same_v<T, Binop>) {
                collect_vars(*x.lhs, out);
                collect_vars(*x.rhs, out);
            } else if constexpr (std::is_same_v<T, Not>) collect_vars(*x.arg, out);
        },
        e.node);
}

// ---------------------------------------------------------------------------
// Atomic statements (CFG edge labels)

struct Skip {};
struct Assign {
    std::string lhs;
    ExprPtr rhs;
};
struct Assume {
    ExprPtr cond;
};
struct Print {
    ExprPtr arg;
};
struct ArrayWrite {
    std::string array;
    ExprPtr index;
    ExprPtr rhs;
};
struct Call {
    std::string lhs;
    std::string callee;
    std::optional<ExprPtr> actual;
};

struct Stmt {
    std::variant<Skip, Assign, Assume, Print, ArrayWrite, Call> node;

    template <class T> bool is() const { return std::holds_alternative<T>(node); }
    template <class T> const T& as() const { return std::get<T>(node); }
};

inline Stmt mk_skip() { return Stmt{Skip{}}; }
inline Stmt mk_assign(std::string x, ExprPtr e) { return Stmt{Assign{std::move(x), std::move(e)}}; }
inline Stmt mk_assume(ExprPtr c) { return Stmt{Assume{std::move(c)}}; }
inline Stmt mk_print(ExprPtr e) { return Stmt{Print{std::move(e)}}; }

inline bool operator==(const Stmt& a, const Stmt& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, Skip>) return true;
            else if constexpr (std::is_same_v<T, Assign>) return x.lhs == y.lhs && expr_equal(x.rhs, y.rhs);
            else if constexpr (std::is_same_v<T, Assume>) return expr_equal(x.cond, y.cond);
            else if constexpr (std::is_same_v<T, Print>) return expr_equal(x.arg, y.arg);
            else if constexpr (std::is_same_v<T, ArrayWrite>)
                return x.array == y.array && expr_equal(x.index, y.index) && expr_equal(x.rhs, y.rhs);
            else {
                if (x.lhs != y.lhs || x.callee != y.callee || x.actual.has_value() != y.actual.has_value())
                    return false;
                return !x.actual || expr_equal(*x.actual, *y.actual);
            }
        },
        a.node);
}
inline bool operator!=(const Stmt& a, const Stmt& b) { return !(a == b); }

inline std::string to_string(const Stmt& s) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Skip>) return "skip";
            else if constexpr (std::is_same_v<T, Assign>) return x.lhs + " = " + to_string(*x.rhs);
            else if constexpr (std::is_same_v<T, Assume>) return "assume(" + to_string(*x.cond) + ")";
            else if constexpr (std::is_same_v<T, Print>) return "print(" + to_string(*x.arg) + ")";
            else if constexpr (std::is_same_v<T, ArrayWrite>)
                return x.array + "[" + to_string(*x.index) + "] = " + to_string(*x.rhs);
            else return x.lhs + " = " + x.callee + "(" + (x.actual ? to_string(**x.actual) : std::string()) + ")";
        },
        s.node);
}

inline Digest digest(const Stmt& s) { return fnv1a(to_string(s)); }

} // namespace dai
