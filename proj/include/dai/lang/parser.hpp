#pragma once

// `.imp` parser and the lowering of structured procedures into CFGs.

#include <cctype>
#include <charconv>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dai/lang/cfg.hpp"
#include "dai/lang/surface.hpp"
#include "dai/support/error.hpp"

namespace dai {

namespace detail {

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind;
    std::string text;
    int line;
    int col;
};

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        int l = line, cl = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), l, cl});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Tok::Int, std::string(src.substr(i, j - i)), l, cl});
            advance(j - i);
            continue;
        }
        static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
        bool matched = false;
        for (const char* t : two) {
            if (src.substr(i, 2) == t) {
                out.push_back({Tok::Punct, t, l, cl});
                advance(2);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("+-*/<>=!(){}[];,").find(c) != std::string_view::npos) {
            out.push_back({Tok::Punct, std::string(1, c), l, cl});
            advance(1);
            continue;
        }
        throw ParseError(l, cl, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

inline bool is_keyword(const std::string& s) {
    static const std::set<std::string> kw = {"fn", "if", "else", "while", "skip", "assume", "print"};
    return kw.count(s) > 0;
}

class Parser {
public:
    explicit Parser(std::string_view src) : m_toks(lex(src)) {}

    SProgram program() {
        SProgram p;
        while (!at_end()) p.procs.push_back(proc());
        return p;
    }

    ExprPtr expr_only() {
        auto e = expr();
        expect_end();
        return e;
    }

    Stmt simple_stmt_only() {
        Stmt s = simple_stmt();
        if (is_punct(";")) next();
        expect_end();
        return s;
    }

    SBlock block_only() {
        SBlock b;
        while (!at_end()) b.push_back(stmt());
        return b;
    }

private:
    const Token& peek(std::size_t k = 0) const { return m_toks[std::min(m_pos + k, m_toks.size() - 1)]; }
    const Token& next() { return m_toks[m_pos < m_toks.size() - 1 ? m_pos++ : m_pos]; }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_punct(const char* p, std::size_t k = 0) const {
        return peek(k).kind == Tok::Punct && peek(k).text == p;
    }
    bool is_ident(const char* word) const { return peek().kind == Tok::Ident && peek().text == word; }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.line, t.col, msg + ", got " + got);
    }
    void expect(const char* p) {
        if (!is_punct(p)) fail(std::string("expected '") + p + "'");
        next();
    }
    void expect_keyword(const char* w) {
        if (!is_ident(w)) fail(std::string("expected '") + w + "'");
        next();
    }
    void expect_end() {
        if (!at_end()) fail("expected end of input");
    }
    std::string ident() {
        if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail("expected identifier");
        return next().text;
    }

    SProc proc() {
        expect_keyword("fn");
        SProc p;
        p.name = ident();
        expect("(");
        if (!is_punct(")")) p.param = ident();
        expect(")");
        p.body = block();
        return p;
    }

    SBlock block() {
        expect("{");
        SBlock b;
        while (!is_punct("}")) {
            if (at_end()) fail("expected '}'");
            b.push_back(stmt());
        }
        next();
        return b;
    }

    SStmt stmt() {
        if (is_ident("if")) {
            next();
            expect("(");
            auto c = expr();
            expect(")");
            auto t = block();
            SBlock e;
            if (is_ident("else")) {
                next();
                if (is_ident("if")) e.push_back(stmt());
                else e = block();
            }
            return s_if(c, std::move(t), std::move(e));
        }
        if (is_ident("while")) {
            next();
            expect("(");
            auto c = expr();
            expect(")");
            return s_while(c, block());
        }
        Stmt s = simple_stmt();
        expect(";");
        return s_simple(std::move(s));
    }

    Stmt simple_stmt() {
        if (is_ident("skip")) {
            next();
            return mk_skip();
        }
        if (is_ident("assume") || is_ident("print")) {
            bool assume = peek().text == "assume";
            next();
            expect("(");
            auto e = expr();
            expect(")");
            return assume ? mk_assume(e) : mk_print(e);
        }
        std::string x = ident();
        if (is_punct("[")) {
            next();
            auto idx = expr();
            expect("]");
            expect("=");
            auto rhs = expr();
            return Stmt{ArrayWrite{x, idx, rhs}};
        }
        expect("=");
        if (peek().kind == Tok::Ident && !is_keyword(peek().text) && is_punct("(", 1)) {
            std::string callee = next().text;
            next();
            Call c{x, callee, std::nullopt};
            if (!is_punct(")")) c.actual = expr();
            expect(")");
            return Stmt{c};
        }
        return mk_assign(x, expr());
    }

    ExprPtr expr() { return binary(1); }

    static bool binop_of(const Token& t, BinOp& op) {
        if (t.kind != Tok::Punct) return false;
        static const std::pair<const char*, BinOp> table[] = {
            {"+", BinOp::Add}, {"-", BinOp::Sub}, {"*", BinOp::Mul}, {"/", BinOp::Div},
            {"<", BinOp::Lt},  {"<=", BinOp::Le}, {">", BinOp::Gt},  {">=", BinOp::Ge},
            {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"&&", BinOp::And}, {"||", BinOp::Or}};
        for (auto& [s, o] : table)
            if (t.text == s) {
                op = o;
                return true;
            }
        return false;
    }

    // precedence climbing, all binary operators left associative
    ExprPtr binary(int min_prec) {
        auto lhs = unary();
        for (;;) {
            BinOp op;
            if (!binop_of(peek(), op) || binop_prec(op) < min_prec) return lhs;
            next();
            auto rhs = binary(binop_prec(op) + 1);
            lhs = mk_bin(op, lhs, rhs);
        }
    }

    ExprPtr unary() {
        if (is_punct("!")) {
            next();
            return mk_not(unary());
        }
        if (is_punct("-")) {
            next();
            if (peek().kind == Tok::Int) return mk_int(-int_literal());
            return mk_bin(BinOp::Sub, mk_int(0), unary());
        }
        return primary();
    }

    std::int64_t int_literal() {
        const Token& t = next();
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || v > (std::int64_t{1} << 62))
            throw ParseError(t.line, t.col, "integer literal out of range");
        return v;
    }

    ExprPtr primary() {
        if (peek().kind == Tok::Int) return mk_int(int_literal());
        if (is_punct("(")) {
            next();
            auto e = expr();
            expect(")");
            return e;
        }
        std::string x = ident();
        if (is_punct("[")) {
            next();
            auto i = expr();
            expect("]");
            return mk_read(x, i);
        }
        return mk_var(x);
    }

    std::vector<Token> m_toks;
    std::size_t m_pos = 0;
};

// --- lowering --------------------------------------------------------------

inline void lower_block(Cfg& cfg, const SBlock& b, Loc from, Loc to);

inline bool ends_with_if(const SBlock& b) {
    return !b.empty() && std::holds_alternative<std::shared_ptr<SIf>>(b.back().node);
}

inline void lower_stmt(Cfg& cfg, const SStmt& s, Loc from, Loc to) {
    if (auto* st = std::get_if<Stmt>(&s.node)) {
        cfg.add_edge(from, to, *st);
    } else if (auto* ip = std::get_if<std::shared_ptr<SIf>>(&s.node)) {
        const SIf& i = **ip;
        Loc t0 = cfg.fresh_loc();
        cfg.add_edge(from, t0, mk_assume(i.cond));
        lower_block(cfg, i.then_block, t0, to);
        if (i.else_block.empty()) {
            cfg.add_edge(from, to, mk_assume(mk_not(i.cond)));
        } else {
            Loc e0 = cfg.fresh_loc();
            cfg.add_edge(from, e0, mk_assume(mk_not(i.cond)));
            lower_block(cfg, i.else_block, e0, to);
        }
    } else {
        const SWhile& w = *std::get<std::shared_ptr<SWhile>>(s.node);
        Loc head = from;
        if (from == cfg.entry()) {
            head = cfg.fresh_loc();
            cfg.add_edge(from, head, mk_skip());
        }
        if (w.body.empty()) {
            cfg.add_edge(head, head, mk_assume(w.cond));
        } else {
            Loc b0 = cfg.fresh_loc();
            cfg.add_edge(head, b0, mk_assume(w.cond));
            if (ends_with_if(w.body)) {
                // keep a single back edge per head
                Loc j = cfg.fresh_loc();
                lower_block(cfg, w.body, b0, j);
                cfg.add_edge(j, head, mk_skip());
            } else {
                lower_block(cfg, w.body, b0, head);
            }
        }
        cfg.add_edge(head, to, mk_assume(mk_not(w.cond)));
    }
}

inline void lower_block(Cfg& cfg, const SBlock& b, Loc from, Loc to) {
    if (b.empty()) {
        if (from != to) cfg.add_edge(from, to, mk_skip());
        return;
    }
    Loc cur = from;
    for (std::size_t i = 0; i < b.size(); ++i) {
        Loc nxt = i + 1 == b.size() ? to : cfg.fresh_loc();
        lower_stmt(cfg, b[i], cur, nxt);
        cur = nxt;
    }
}

inline void collect_calls(const SBlock& b, std::vector<const Call*>& out) {
    for (const auto& s : b) {
        if (auto* st = std::get_if<Stmt>(&s.node)) {
            if (st->is<Call>()) out.push_back(&st->as<Call>());
        } else if (auto* ip = std::get_if<std::shared_ptr<SIf>>(&s.node)) {
            collect_calls((*ip)->then_block, out);
            collect_calls((*ip)->else_block, out);
        } else {
            collect_calls(std::get<std::shared_ptr<SWhile>>(s.node)->body, out);
        }
    }
}

} // namespace detail

// Lowers one structured procedure. Entry is l0, exit is l1.
inline Cfg lower_proc(const SProc& p) {
    Cfg cfg(Loc{0}, Loc{1});
    detail::lower_block(cfg, p.body, cfg.entry(), cfg.exit());
    return cfg;
}

// Checks procedure names, call targets, arity and absence of recursion.
inline void validate_program(const SProgram& sp) {
    std::map<std::string, const SProc*> byname;
    for (const auto& p : sp.procs) {
        if (!byname.emplace(p.name, &p).second) throw ValidationError("duplicate procedure '" + p.name + "'");
    }
    if (!byname.count("main")) throw ValidationError("missing procedure 'main'");
    std::map<std::string, std::set<std::string>> callees;
    for (const auto& p : sp.procs) {
        std::vector<const Call*> calls;
        detail::collect_calls(p.body, calls);
        for (const Call* c : calls) {
            auto it = byname.find(c->callee);
            if (it == byname.end()) throw ValidationError("call to unknown procedure '" + c->callee + "'");
            if (it->second->param.has_value() != c->actual.has_value())
                throw ValidationError("arity mismatch in call to '" + c->callee + "'");
            callees[p.name].insert(c->callee);
        }
    }
    // recursion check: DFS with colors
    std::map<std::string, int> color;
    std::function<void(const std::string&)> visit = [&](const std::string& f) {
        color[f] = 1;
        for (const auto& g : callees[f]) {
            if (color[g] == 1) throw ValidationError("recursive call involving '" + g + "'");
            if (color[g] == 0) visit(g);
        }
        color[f] = 2;
    };
    for (const auto& p : sp.procs)
        if (color[p.name] == 0) visit(p.name);
}

inline SProgram parse_surface(std::string_view src) { return detail::Parser(src).program(); }

inline Program lower_program(const SProgram& sp) {
    validate_program(sp);
    Program prog;
    for (const auto& p : sp.procs) prog.procs.emplace(p.name, Procedure{p.name, p.param, lower_proc(p)});
    return prog;
}

inline Program parse_program(std::string_view src) { return lower_program(parse_surface(src)); }

inline ExprPtr parse_expr(std::string_view src) { return detail::Parser(src).expr_only(); }

inline Stmt parse_stmt(std::string_view src) { return detail::Parser(src).simple_stmt_only(); }

// A sequence of statements without the enclosing procedure.
inline SBlock parse_block(std::string_view src) { return detail::Parser(src).block_only(); }

} // namespace dai
