#pragma once

// Structured (pre-CFG) program representation, as written in `.imp` files.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dai/lang/ast.hpp"

namespace dai {

struct SStmt;
using SBlock = std::vector<SStmt>;

struct SIf {
    ExprPtr cond;
    SBlock then_block;
    SBlock else_block;
};
struct SWhile {
    ExprPtr cond;
    SBlock body;
};

struct SStmt {
    std::variant<Stmt, std::shared_ptr<SIf>, std::shared_ptr<SWhile>> node;
};

inline SStmt s_simple(Stmt s) { return SStmt{std::move(s)}; }
inline SStmt s_if(ExprPtr c, SBlock t, SBlock e = {}) {
    return SStmt{std::make_shared<SIf>(SIf{std::move(c), std::move(t), std::move(e)})};
}
inline SStmt s_while(ExprPtr c, SBlock body) {
    return SStmt{std::make_shared<SWhile>(SWhile{std::move(c), std::move(body)})};
}

struct SProc {
    std::string name;
    std::optional<std::string> param;
    SBlock body;
};

struct SProgram {
    std::vector<SProc> procs;
};

namespace detail {
inline void print_block(std::string& out, const SBlock& b, int indent);

inline void print_sstmt(std::string& out, const SStmt& s, int indent) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (auto* st = std::get_if<Stmt>(&s.node)) {
        out += pad + to_string(*st) + ";\n";
    } else if (auto* i = std::get_if<std::shared_ptr<SIf>>(&s.node)) {
        out += pad + "if (" + to_string((*i)->cond) + ") {\n";
        print_block(out, (*i)->then_block, indent + 1);
        out += pad + "}";
        if (!(*i)->else_block.empty()) {
            out += " else {\n";
            print_block(out, (*i)->else_block, indent + 1);
            out += pad + "}";
        }
        out += "\n";
    } else {
        auto& w = std::get<std::shared_ptr<SWhile>>(s.node);
        out += pad + "while (" + to_string(w->cond) + ") {\n";
        print_block(out, w->body, indent + 1);
        out += pad + "}\n";
    }
}

inline void print_block(std::string& out, const SBlock& b, int indent) {
    for (const auto& s : b) print_sstmt(out, s, indent);
}
} // namespace detail

inline std::string to_source(const SProgram& p) {
    std::string out;
    for (const auto& proc : p.procs) {
        out += "fn " + proc.name + "(" + proc.param.value_or("") + ") {\n";
        detail::print_block(out, proc.body, 1);
        out += "}\n";
    }
    return out;
}

} // namespace dai
