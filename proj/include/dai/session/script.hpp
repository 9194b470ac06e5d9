#pragma once

// Line-oriented session scripts, shared by the REPL, tests and replays:
//   query <proc> <loc> [@[c1,c2]]
//   edit relabel <proc> <src> <dst> :: <stmt>
//   edit insert-after <proc> <loc> :: <stmt>
//   edit insert-if <proc> <loc> :: <cond> [{ stmts }] [else { stmts }]
//   edit insert-while <proc> <loc> :: <cond> [{ stmts }]
//   dump dot <path> [<proc> [@[c1,c2]]]
//   metrics
// Locations are written `3`, `l3`, `entry` or `exit`. `#` starts a comment.

#include <fstream>
#include <sstream>

#include "dai/interproc/forest.hpp"

namespace dai {

struct LocRef {
    // exactly one of these is meaningful
    std::optional<Loc> loc;
    bool entry = false;
    bool exit = false;
};

struct QueryCmd {
    std::string proc;
    LocRef at;
    std::optional<Context> ctx;
};
struct EditCmd {
    std::string proc;
    std::string kind; // relabel | insert-after | insert-if | insert-while
    LocRef at;
    LocRef dst; // relabel only
    std::string payload;
};
struct DumpCmd {
    std::string path;
    std::string proc = "main";
    Context ctx;
};
struct MetricsCmd {};

using Command = std::variant<QueryCmd, EditCmd, DumpCmd, MetricsCmd>;

namespace script_detail {

inline std::string trim(std::string_view s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> r;
    for (std::string w; is >> w;) r.push_back(w);
    return r;
}

[[noreturn]] inline void bad(int line, const std::string& msg) { throw ParseError(line, 1, msg); }

inline std::uint32_t parse_id(int line, std::string w) {
    if (!w.empty() && w[0] == 'l') w.erase(0, 1);
    if (w.empty() || w.size() > 9 || w.find_first_not_of("0123456789") != std::string::npos)
        bad(line, "expected a location, got '" + w + "'");
    return static_cast<std::uint32_t>(std::stoul(w));
}

inline LocRef parse_loc(int line, const std::string& w) {
    LocRef r;
    if (w == "entry") r.entry = true;
    else if (w == "exit") r.exit = true;
    else r.loc = Loc{parse_id(line, w)};
    return r;
}

// `@[3,7]` or `@[]`
inline Context parse_ctx(int line, const std::string& w) {
    if (w.size() < 3 || w.substr(0, 2) != "@[" || w.back() != ']') bad(line, "expected a context '@[..]'");
    Context c;
    std::string body = w.substr(2, w.size() - 3);
    std::istringstream is(body);
    for (std::string part; std::getline(is, part, ',');) c.push_back(Loc{parse_id(line, trim(part))});
    return c;
}

// Simple statements of a `{ ... }` block.
inline std::vector<Stmt> parse_simple_block(int line, const std::string& text) {
    std::vector<Stmt> out;
    SBlock b;
    try {
        b = parse_block(text);
    } catch (const ParseError& e) {
        bad(line, e.what());
    }
    for (const auto& s : b) {
        if (!std::holds_alternative<Stmt>(s.node)) bad(line, "edit blocks may contain simple statements only");
        out.push_back(std::get<Stmt>(s.node));
    }
    return out;
}

// Splits `cond { a } else { b }` into the condition and the brace contents.
inline std::vector<std::string> split_blocks(int line, const std::string& s, std::string& head) {
    std::size_t open = s.find('{');
    head = trim(s.substr(0, open));
    std::vector<std::string> blocks;
    std::size_t i = open;
    while (i != std::string::npos && i < s.size()) {
        std::size_t close = s.find('}', i);
        if (close == std::string::npos) bad(line, "unbalanced '{'");
        blocks.push_back(s.substr(i + 1, close - i - 1));
        std::string rest = trim(s.substr(close + 1));
        if (rest.empty()) break;
        if (rest.rfind("else", 0) != 0 || blocks.size() != 1) bad(line, "unexpected text after block");
        i = s.find('{', close);
        if (i == std::string::npos) bad(line, "expected '{' after else");
    }
    return blocks;
}

} // namespace script_detail

// Parses one script line; nullopt for blank lines and comments.
inline std::optional<Command> parse_command(std::string_view text, int line = 1) {
    using namespace script_detail;
    std::string s = trim(text);
    if (s.empty() || s[0] == '#') return std::nullopt;
    std::string payload;
    bool has_payload = false;
    if (std::size_t sep = s.find("::"); sep != std::string::npos) {
        payload = trim(s.substr(sep + 2));
        s = trim(s.substr(0, sep));
        has_payload = true;
    }
    auto w = words(s);
    const std::string& op = w[0];
    if (op == "metrics") {
        if (w.size() != 1 || has_payload) bad(line, "usage: metrics");
        return MetricsCmd{};
    }
    if (op == "query") {
        if ((w.size() != 3 && w.size() != 4) || has_payload) bad(line, "usage: query <proc> <loc> [@[c1,c2]]");
        QueryCmd q{w[1], parse_loc(line, w[2]), std::nullopt};
        if (w.size() == 4) q.ctx = parse_ctx(line, w[3]);
        return q;
    }
    if (op == "dump") {
        if (w.size() < 3 || w.size() > 5 || w[1] != "dot" || has_payload)
            bad(line, "usage: dump dot <path> [<proc> [@[c1,c2]]]");
        DumpCmd d;
        d.path = w[2];
        if (w.size() >= 4) d.proc = w[3];
        if (w.size() == 5) d.ctx = parse_ctx(line, w[4]);
        return d;
    }
    if (op == "edit") {
        if (w.size() < 2) bad(line, "usage: edit <kind> ...");
        if (!has_payload || payload.empty()) bad(line, "edit needs a ':: <payload>'");
        EditCmd e{"", w[1], {}, {}, payload};
        if (e.kind == "relabel") {
            if (w.size() != 5) bad(line, "usage: edit relabel <proc> <src> <dst> :: <stmt>");
            e.proc = w[2];
            e.at = parse_loc(line, w[3]);
            e.dst = parse_loc(line, w[4]);
        } else if (e.kind == "insert-after" || e.kind == "insert-if" || e.kind == "insert-while") {
            if (w.size() != 4) bad(line, "usage: edit " + e.kind + " <proc> <loc> :: ...");
            e.proc = w[2];
            e.at = parse_loc(line, w[3]);
        } else {
            bad(line, "unknown edit kind '" + e.kind + "'");
        }
        return e;
    }
    bad(line, "unknown command '" + op + "'");
}

inline Loc resolve(const LocRef& r, const Cfg& cfg) {
    if (r.entry) return cfg.entry();
    if (r.exit) return cfg.exit();
    if (!cfg.has_loc(*r.loc)) throw ValidationError("no location " + to_string(*r.loc));
    return *r.loc;
}

// Builds the program edit an edit command denotes against `cfg`.
inline ProgramEdit to_program_edit(const EditCmd& e, const Cfg& cfg, int line = 1) {
    using namespace script_detail;
    auto stmt = [&](const std::string& t) {
        try {
            return parse_stmt(t);
        } catch (const ParseError& err) {
            bad(line, err.what());
        }
    };
    auto cond = [&](const std::string& t) {
        try {
            return parse_expr(t);
        } catch (const ParseError& err) {
            bad(line, err.what());
        }
    };
    Loc at = resolve(e.at, cfg);
    if (e.kind == "relabel") return RelabelEdge{at, resolve(e.dst, cfg), stmt(e.payload)};
    if (e.kind == "insert-after") return InsertStmtAfter{at, stmt(e.payload)};
    std::string head;
    auto blocks = split_blocks(line, e.payload, head);
    ExprPtr c = cond(head);
    std::vector<std::vector<Stmt>> parsed;
    for (const auto& b : blocks) parsed.push_back(parse_simple_block(line, b));
    if (e.kind == "insert-if") {
        InsertIf r{at, c, {}, {}};
        if (parsed.size() > 0) r.then_stmts = parsed[0];
        if (parsed.size() > 1) r.else_stmts = parsed[1];
        return r;
    }
    if (parsed.size() > 1) bad(line, "insert-while takes a single body block");
    return InsertWhile{at, c, parsed.empty() ? std::vector<Stmt>{} : parsed[0]};
}

// Executes session scripts against a forest of engines. Responses contain no
// timings, so replaying a script reproduces them byte for byte.
template <AbstractDomain D>
class Session {
public:
    Session(Program p, int k, D dom = D{}, EngineOptions opt = {}) : m_forest(std::move(p), k, std::move(dom), opt) {}

    DaigForest<D>& forest() { return m_forest; }

    // Runs one line; the response (empty for blanks and comments).
    std::string run_line(std::string_view text, int line = 1) {
        auto cmd = parse_command(text, line);
        if (!cmd) return {};
        return execute(*cmd, line);
    }

    std::string execute(const Command& c, int line = 1) {
        return std::visit([&](const auto& x) { return run(x, line); }, c);
    }

private:
    std::string run(const QueryCmd& q, int) {
        Context ctx = q.ctx ? *q.ctx : Context{};
        if (m_forest.policy() == 0 && !ctx.empty())
            throw ValidationError("contexts are empty under the insensitive policy");
        Engine<D>& e = engine_for(q.proc, ctx);
        Loc l = resolve(q.at, e.cfg());
        std::uint64_t before = evals();
        auto v = m_forest.query(q.proc, ctx, l);
        return m_forest.domain().to_string(v) + " evals=" + std::to_string(evals() - before);
    }

    std::string run(const EditCmd& c, int line) {
        const Cfg& cfg = m_forest.program().proc(c.proc).cfg;
        ProgramEdit pe = to_program_edit(c, cfg, line);
        EditDelta d = m_forest.edit(c.proc, pe);
        std::string r = "ok " + to_string(pe);
        if (!d.added_locs.empty()) {
            r += " new";
            for (Loc l : d.added_locs) r += " " + to_string(l);
        }
        const Cfg& now = m_forest.program().proc(c.proc).cfg;
        if (d.exit_changed) r += " exit " + to_string(now.exit());
        return r;
    }

    std::string run(const DumpCmd& c, int) {
        Engine<D>& e = engine_for(c.proc, c.ctx);
        std::ofstream os(c.path, std::ios::binary);
        if (!os) throw ValidationError("cannot write " + c.path);
        os << to_dot(e.daig(), m_forest.domain());
        return "wrote " + c.path;
    }

    std::string run(const MetricsCmd&, int) {
        Metrics m = m_forest.total_metrics();
        return to_string(m) + " engines=" + std::to_string(m_forest.keys().size());
    }

    std::uint64_t evals() const {
        Metrics m = m_forest.total_metrics();
        return m.transfer_evals + m.join_evals + m.widen_evals + m.call_evals;
    }

    // Callee engines receive entry states only when a caller demands them, so
    // `main` is analyzed first. A procedure main never calls is analyzed from
    // the initial state in the empty context.
    Engine<D>& engine_for(const std::string& proc, const Context& ctx) {
        m_forest.program().proc(proc); // validates the name
        if (proc == "main" && !ctx.empty()) throw ValidationError("main is only analyzed in the empty context");
        if (proc != "main" && !m_forest.has_engine(proc, ctx)) {
            const Cfg& mc = m_forest.program().main();
            m_forest.query("main", {}, mc.exit());
            if (!ctx.empty() && !m_forest.has_engine(proc, ctx))
                throw ValidationError("context " + to_string(ctx) + " of " + proc + " is not reachable from main");
        }
        return m_forest.engine(proc, ctx);
    }

    DaigForest<D> m_forest;
};

} // namespace dai
