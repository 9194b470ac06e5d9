#pragma once

// Seeded random programs, statements and edits.

#include <random>

#include "dai/lang/edit.hpp"
#include "dai/lang/parser.hpp"

namespace dai {

using Rng = std::mt19937_64;

struct GenParams {
    int num_vars = 8;
    std::int64_t const_bound = 100;
    int expr_depth = 3;
    // edit-kind probabilities: statement, if, while
    double p_stmt = 0.85;
    double p_if = 0.10;
    double p_while = 0.05;
};

namespace gen_detail {

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

} // namespace gen_detail

class StmtGen {
public:
    explicit StmtGen(GenParams p = {}, std::vector<std::string> vars = {}) : m_p(p), m_vars(std::move(vars)) {
        if (m_vars.empty())
            for (int i = 0; i < m_p.num_vars; ++i) m_vars.push_back("x" + std::to_string(i));
    }

    const std::vector<std::string>& vars() const { return m_vars; }
    const GenParams& params() const { return m_p; }

    std::string var(Rng& rng) const {
        return m_vars[static_cast<std::size_t>(gen_detail::uniform(rng, 0, static_cast<int>(m_vars.size()) - 1))];
    }
    ExprPtr constant(Rng& rng) const {
        return mk_int(std::uniform_int_distribution<std::int64_t>(-m_p.const_bound, m_p.const_bound)(rng));
    }

    // arithmetic expression of depth at most `depth`
    ExprPtr arith(Rng& rng, int depth) const {
        using namespace gen_detail;
        if (depth <= 1 || coin(rng, 0.4)) {
            int r = uniform(rng, 0, 9);
            if (r < 5) return mk_var(var(rng));
            if (r < 9) return constant(rng);
            return mk_read("arr", mk_var(var(rng)));
        }
        static const BinOp ops[] = {BinOp::Add, BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div};
        BinOp op = ops[uniform(rng, 0, 4)];
        return mk_bin(op, arith(rng, depth - 1), arith(rng, depth - 1));
    }

    ExprPtr condition(Rng& rng, int depth) const {
        using namespace gen_detail;
        static const BinOp cmps[] = {BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne};
        if (depth >= 3 && coin(rng, 0.2)) {
            BinOp op = coin(rng, 0.5) ? BinOp::And : BinOp::Or;
            return mk_bin(op, condition(rng, depth - 1), condition(rng, depth - 1));
        }
        if (depth >= 2 && coin(rng, 0.1)) return mk_not(condition(rng, depth - 1));
        BinOp op = cmps[uniform(rng, 0, 5)];
        ExprPtr lhs = mk_var(var(rng));
        ExprPtr rhs = coin(rng, 0.7) ? constant(rng) : arith(rng, std::max(1, depth - 1));
        return mk_bin(op, lhs, rhs);
    }

    Stmt simple(Rng& rng) const {
        using namespace gen_detail;
        int r = uniform(rng, 0, 9);
        if (r < 8) return mk_assign(var(rng), arith(rng, m_p.expr_depth));
        if (r < 9) return mk_print(arith(rng, m_p.expr_depth));
        return Stmt{ArrayWrite{"arr", mk_var(var(rng)), arith(rng, m_p.expr_depth - 1)}};
    }

    std::vector<Stmt> simples(Rng& rng, int lo, int hi) const {
        std::vector<Stmt> r;
        int n = gen_detail::uniform(rng, lo, hi);
        for (int i = 0; i < n; ++i) r.push_back(simple(rng));
        return r;
    }

private:
    GenParams m_p;
    std::vector<std::string> m_vars;
};

// Samples an edit at a uniformly random location of `cfg`.
inline ProgramEdit gen_edit(Rng& rng, const Cfg& cfg, const StmtGen& g) {
    const auto& locs = cfg.locs();
    Loc at = locs[static_cast<std::size_t>(gen_detail::uniform(rng, 0, static_cast<int>(locs.size()) - 1))];
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const GenParams& p = g.params();
    if (u < p.p_stmt) return InsertStmtAfter{at, g.simple(rng)};
    if (u < p.p_stmt + p.p_if) {
        auto then_s = g.simples(rng, 1, 2);
        auto else_s = g.simples(rng, 0, 1);
        return InsertIf{at, g.condition(rng, p.expr_depth), then_s, else_s};
    }
    // loops that usually terminate: bound a counter and advance it in the body
    std::string v = g.var(rng);
    ExprPtr cond = gen_detail::coin(rng, 0.7) ? mk_bin(BinOp::Lt, mk_var(v), g.constant(rng)) : g.condition(rng, p.expr_depth);
    auto body = g.simples(rng, 0, 2);
    body.push_back(mk_assign(v, mk_bin(BinOp::Add, mk_var(v), mk_int(gen_detail::uniform(rng, 1, 3)))));
    return InsertWhile{at, cond, body};
}

// Shape limits for random structured programs.
struct ProgramShape {
    std::size_t max_locs = 40;
    int max_loops = 3;
    int max_nesting = 2;
    int max_stmts = 12;
    // variables assigned a constant before the body (others act as inputs)
    std::vector<std::string> initialized;
};

class ProgramGen {
public:
    ProgramGen(StmtGen g, ProgramShape s) : m_g(std::move(g)), m_s(std::move(s)) {}

    SBlock block(Rng& rng, int nesting, int& loops, int budget) const {
        using namespace gen_detail;
        SBlock b;
        int n = uniform(rng, 1, std::max(1, budget));
        for (int i = 0; i < n; ++i) {
            int r = uniform(rng, 0, 9);
            if (r < 2 && nesting < 3 && budget > 2) {
                SBlock t = block(rng, nesting + 1, loops, budget / 2);
                SBlock e = coin(rng, 0.5) ? block(rng, nesting + 1, loops, budget / 3) : SBlock{};
                b.push_back(s_if(m_g.condition(rng, 2), std::move(t), std::move(e)));
            } else if (r < 4 && loops < m_s.max_loops && nesting_loops(nesting) && budget > 2) {
                ++loops;
                std::string v = m_g.var(rng);
                ExprPtr cond = coin(rng, 0.75) ? mk_bin(coin(rng, 0.5) ? BinOp::Lt : BinOp::Le, mk_var(v),
                                                        mk_int(uniform(rng, -5, 20)))
                                               : m_g.condition(rng, 2);
                ++m_loop_depth;
                SBlock body = block(rng, nesting + 1, loops, budget / 2);
                --m_loop_depth;
                body.push_back(s_simple(mk_assign(v, mk_bin(BinOp::Add, mk_var(v), mk_int(uniform(rng, 1, 3))))));
                b.push_back(s_while(cond, std::move(body)));
            } else {
                b.push_back(s_simple(m_g.simple(rng)));
            }
        }
        return b;
    }

    SProc proc(Rng& rng, std::string name, std::optional<std::string> param) const {
        SProc p{std::move(name), std::move(param), {}};
        for (const auto& v : m_s.initialized) p.body.push_back(s_simple(mk_assign(v, mk_int(gen_detail::uniform(rng, -3, 3)))));
        int loops = 0;
        m_loop_depth = 0;
        SBlock b = block(rng, 0, loops, m_s.max_stmts);
        p.body.insert(p.body.end(), b.begin(), b.end());
        return p;
    }

    // A single-procedure program within the location bound.
    SProgram program(Rng& rng) const {
        while (true) {
            SProgram sp{{proc(rng, "main", std::nullopt)}};
            Program p = lower_program(sp);
            if (p.main().locs().size() <= m_s.max_locs) return sp;
        }
    }

    const StmtGen& stmts() const { return m_g; }

private:
    bool nesting_loops(int) const { return m_loop_depth < m_s.max_nesting; }

    StmtGen m_g;
    ProgramShape m_s;
    mutable int m_loop_depth = 0;
};

// Two to four procedures; procedure i only calls procedures j > i. Each
// callee takes a parameter `p` and leaves its result in `ret`.
inline SProgram random_call_program(Rng& rng, int nprocs) {
    using namespace gen_detail;
    std::vector<std::string> names{"main"};
    for (int i = 1; i < nprocs; ++i) names.push_back("f" + std::to_string(i));
    SProgram sp;
    for (int i = 0; i < nprocs; ++i) {
        std::vector<std::string> vars{"a", "b", "c"};
        if (i > 0) vars = {"p", "a", "b", "ret"};
        GenParams gp;
        gp.num_vars = static_cast<int>(vars.size());
        gp.const_bound = 10;
        gp.expr_depth = 2;
        StmtGen g(gp, vars);
        ProgramShape shape;
        shape.max_loops = 1;
        shape.max_nesting = 1;
        shape.max_stmts = 4;
        ProgramGen pg(g, shape);
        SProc p{names[static_cast<std::size_t>(i)], i > 0 ? std::optional<std::string>("p") : std::nullopt, {}};
        if (i > 0) p.body.push_back(s_simple(mk_assign("a", mk_var("p"))));
        else p.body.push_back(s_simple(mk_assign("a", mk_int(uniform(rng, -5, 5)))));
        int loops = 0;
        SBlock body = pg.block(rng, 0, loops, 4);
        // calls into later procedures, with distinct actuals to separate contexts
        int ncalls = i + 1 < nprocs ? uniform(rng, 1, 3) : 0;
        for (int c = 0; c < ncalls; ++c) {
            const std::string& callee = names[static_cast<std::size_t>(uniform(rng, i + 1, nprocs - 1))];
            ExprPtr actual = coin(rng, 0.5) ? mk_int(uniform(rng, -5, 5)) : mk_bin(BinOp::Add, mk_var("a"), mk_int(uniform(rng, 0, 3)));
            Stmt call{Call{vars[static_cast<std::size_t>(uniform(rng, 0, 1)) + (i > 0 ? 1 : 0)], callee, actual}};
            auto pos = body.begin() + uniform(rng, 0, static_cast<int>(body.size()));
            body.insert(pos, s_simple(call));
        }
        p.body.insert(p.body.end(), body.begin(), body.end());
        if (i > 0) p.body.push_back(s_simple(mk_assign("ret", pg.stmts().arith(rng, 2))));
        sp.procs.push_back(std::move(p));
    }
    return sp;
}

} // namespace dai
