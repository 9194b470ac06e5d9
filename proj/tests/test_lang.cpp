#include <gtest/gtest.h>

#include <set>

#include "dai/lang/edit.hpp"
#include "support.hpp"

using namespace dai;
using namespace dai::test;

namespace {

// Independent reference: set-based iterative dominators and natural loops by
// backward search from the back-edge source.
struct RefLoops {
    std::map<Loc, std::set<Loc>> dom;
    std::map<Loc, std::set<Loc>> body; // without the head
    std::set<std::pair<Loc, Loc>> back;

    explicit RefLoops(const Cfg& cfg) {
        std::set<Loc> all(cfg.locs().begin(), cfg.locs().end());
        for (Loc l : cfg.locs()) dom[l] = l == cfg.entry() ? std::set<Loc>{l} : all;
        for (bool changed = true; changed;) {
            changed = false;
            for (Loc l : cfg.locs()) {
                if (l == cfg.entry()) continue;
                std::set<Loc> nd = all;
                for (const Edge* e : cfg.in_edges(l)) {
                    std::set<Loc> x;
                    std::set_intersection(nd.begin(), nd.end(), dom[e->src].begin(), dom[e->src].end(),
                                          std::inserter(x, x.end()));
                    nd = x;
                }
                nd.insert(l);
                if (nd != dom[l]) {
                    dom[l] = nd;
                    changed = true;
                }
            }
        }
        for (const auto& e : cfg.edges()) {
            if (!dom[e.src].count(e.dst)) continue;
            back.insert({e.src, e.dst});
            std::set<Loc>& b = body[e.dst];
            std::vector<Loc> work{e.src};
            while (!work.empty()) {
                Loc l = work.back();
                work.pop_back();
                if (l == e.dst || !b.insert(l).second) continue;
                for (const Edge* p : cfg.in_edges(l)) work.push_back(p->src);
            }
        }
    }
};

std::set<std::tuple<std::uint32_t, std::uint32_t, std::string>> edge_set(const Cfg& c) {
    std::set<std::tuple<std::uint32_t, std::uint32_t, std::string>> s;
    for (const auto& e : c.edges()) s.insert({e.src.id, e.dst.id, to_string(e.stmt)});
    return s;
}

void expect_matches_reference(const Cfg& cfg) {
    LoopInfo li(cfg);
    RefLoops ref(cfg);
    for (Loc l : cfg.locs()) EXPECT_EQ(li.dominators(l), ref.dom[l]) << to_string(l) << "\n" << cfg.to_text();
    std::set<Loc> heads;
    for (const auto& [src, dst] : ref.back) {
        EXPECT_TRUE(li.is_back_edge(src, dst));
        heads.insert(dst);
    }
    EXPECT_EQ(std::set<Loc>(li.heads().begin(), li.heads().end()), heads);
    for (Loc h : heads) {
        const auto& b = li.loop_body(h);
        EXPECT_EQ(std::set<Loc>(b.begin(), b.end()), ref.body[h]) << to_string(h);
    }
    std::size_t fwd = 0;
    for (const auto& e : cfg.edges())
        if (!li.is_back_edge(e.src, e.dst)) ++fwd;
    EXPECT_EQ(fwd + ref.back.size(), cfg.edges().size());
}

} // namespace

TEST(Parser, MinimalProgram) {
    Program p = parse_program("fn main() { x = 1; }");
    const Cfg& c = p.main();
    EXPECT_EQ(c.num_locs(), 2u);
    ASSERT_EQ(c.edges().size(), 1u);
    EXPECT_TRUE(c.edges()[0].stmt.is<Assign>());
    EXPECT_EQ(c.edges()[0].src, c.entry());
    EXPECT_EQ(c.edges()[0].dst, c.exit());
}

TEST(Parser, IfElseBecomesPairedAssumes) {
    Cfg c = parse_program("fn main() { if (x < 3) { y = 1; } else { y = 2; } }").main();
    auto outs = c.out_edges(c.entry());
    ASSERT_EQ(outs.size(), 2u);
    std::set<std::string> labels{to_string(outs[0]->stmt), to_string(outs[1]->stmt)};
    EXPECT_EQ(labels, (std::set<std::string>{"assume(x < 3)", "assume(!(x < 3))"}));
}

TEST(Parser, AppendPortMatchesFigureShape) {
    Cfg c = parse_program(kAppend).main();
    LoopInfo li(c);
    EXPECT_EQ(c.num_locs(), 8u);
    ASSERT_EQ(li.heads().size(), 1u);
    Loc head = li.heads()[0];
    const Edge& back = edge_with(c, "r = r - 1");
    EXPECT_EQ(back.dst, head);
    EXPECT_TRUE(li.is_back_edge(back.src, back.dst));
    EXPECT_EQ(li.loop_body(head), std::vector<Loc>{back.src});
    // the two returns meet at the exit
    EXPECT_TRUE(li.is_join(c.exit()));
    EXPECT_EQ(li.fwd_indegree(c.exit()), 2u);
}

TEST(Parser, Errors) {
    EXPECT_THROW(parse_program("fn main() { x = ; }"), ParseError);
    EXPECT_THROW(parse_program("fn main() { x = 1 }"), ParseError);
    EXPECT_THROW(parse_program("fn main() {} fn main() {}"), ValidationError);
    EXPECT_THROW(parse_program("fn main() { x = g(1); }"), ValidationError);
    EXPECT_THROW(parse_program("fn main() { x = f(1); } fn f(p) { ret = g(p); } fn g(p) { ret = f(p); }"),
                 ValidationError);
    EXPECT_THROW(parse_program("fn f() {}"), ValidationError);
    try {
        parse_program("fn main() {\n  x = 1;\n  y = $;\n}");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(e.col(), 7);
    }
}

TEST(Parser, CommentsAndPrecedence) {
    Cfg c = parse_program("fn main() { // note\n x = 1 + 2 * 3; }").main();
    EXPECT_EQ(to_string(c.edges()[0].stmt), "x = 1 + 2 * 3");
    auto e = parse_expr("1 + 2 * 3 < 4 && !(y == 2) || z");
    EXPECT_EQ(to_string(e), "1 + 2 * 3 < 4 && !(y == 2) || z");
}

TEST(Loops, DiamondHasOneJoin) {
    Cfg c = parse_program("fn main() { if (x < 0) { y = 1; } else { y = 2; } z = y; }").main();
    LoopInfo li(c);
    EXPECT_TRUE(li.heads().empty());
    std::vector<Loc> joins;
    for (Loc l : c.locs())
        if (li.is_join(l)) joins.push_back(l);
    ASSERT_EQ(joins.size(), 1u);
    std::set<std::size_t> idx;
    for (Loc p : li.fwd_preds(joins[0])) idx.insert(li.join_index(p, joins[0]));
    EXPECT_EQ(idx, (std::set<std::size_t>{1, 2}));
    // indices follow ascending source id
    auto preds = li.fwd_preds(joins[0]);
    EXPECT_LT(preds[0].id, preds[1].id);
    EXPECT_EQ(li.join_index(preds[0], joins[0]), 1u);
}

TEST(Loops, SequentialLoopsAreDisjoint) {
    Cfg c = parse_program("fn main() { i = 0; while (i < 3) { i = i + 1; } j = 0; while (j < 3) { j = j + 1; } }")
                       .main();
    LoopInfo li(c);
    ASSERT_EQ(li.heads().size(), 2u);
    Loc a = li.heads()[0], b = li.heads()[1];
    for (Loc l : li.loop_body(a)) EXPECT_FALSE(li.in_loop(b, l));
    for (Loc l : li.loop_body(b)) EXPECT_FALSE(li.in_loop(a, l));
    expect_matches_reference(c);
}

TEST(Loops, RandomProgramsMatchReference) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Program p = random_program(seed);
        expect_matches_reference(p.main());
        // back edges target dominators; forward edges admit a topological order
        LoopInfo li(p.main());
        std::map<Loc, std::size_t> pos;
        for (std::size_t i = 0; i < li.topo_order().size(); ++i) pos[li.topo_order()[i]] = i;
        EXPECT_EQ(pos.size(), p.main().num_locs());
        for (const auto& e : p.main().edges()) {
            if (li.is_back_edge(e.src, e.dst)) {
                EXPECT_TRUE(li.dominates(e.dst, e.src));
            } else {
                EXPECT_LT(pos[e.src], pos[e.dst]);
            }
        }
    }
}

TEST(Loops, Deterministic) {
    Program p = random_program(11);
    LoopInfo a(p.main()), b(p.main());
    EXPECT_EQ(a.topo_order(), b.topo_order());
    EXPECT_EQ(a.heads(), b.heads());
    for (Loc l : p.main().locs()) {
        EXPECT_TRUE(std::ranges::equal(a.enclosing_heads(l), b.enclosing_heads(l)));
        EXPECT_TRUE(std::ranges::equal(a.fwd_preds(l), b.fwd_preds(l)));
    }
}

TEST(Loops, IrreducibleRejected) {
    Cfg c(Loc{0}, Loc{3});
    for (std::uint32_t i = 1; i <= 3; ++i) c.add_loc(Loc{i});
    c.add_edge(Loc{0}, Loc{1}, mk_assume(parse_expr("x < 0")));
    c.add_edge(Loc{0}, Loc{2}, mk_assume(parse_expr("!(x < 0)")));
    c.add_edge(Loc{1}, Loc{2}, mk_skip());
    c.add_edge(Loc{2}, Loc{1}, mk_skip());
    c.add_edge(Loc{2}, Loc{3}, mk_skip());
    EXPECT_THROW(LoopInfo{c}, ValidationError);
}

TEST(Edits, RelabelKeepsShape) {
    Cfg c = parse_program("fn main() { x = 1; y = x; }").main();
    const Edge& e = edge_with(c, "x = 1");
    EditResult r = apply_edit(c, RelabelEdge{e.src, e.dst, parse_stmt("x = 2")});
    EXPECT_EQ(r.cfg.num_locs(), c.num_locs());
    EXPECT_EQ(to_string(r.cfg.find_edge(e.src, e.dst)->stmt), "x = 2");
    ASSERT_EQ(r.delta.relabelled.size(), 1u);
    EXPECT_TRUE(r.delta.added_edges.empty());
    EXPECT_TRUE(r.delta.removed_edges.empty());
}

TEST(Edits, InsertPrintSplitsReturnEdge) {
    Cfg c = parse_program(kAppend).main();
    const Edge& early = edge_with(c, "ret = q");
    Loc l1 = early.src;
    EditResult r = apply_edit(c, InsertStmtAfter{l1, parse_stmt("print(p)")});
    ASSERT_EQ(r.delta.added_locs.size(), 1u);
    Loc l7 = r.delta.added_locs[0];
    EXPECT_EQ(r.cfg.num_locs(), 9u);
    ASSERT_NE(r.cfg.find_edge(l1, l7), nullptr);
    EXPECT_EQ(to_string(r.cfg.find_edge(l1, l7)->stmt), "print(p)");
    ASSERT_NE(r.cfg.find_edge(l7, c.exit()), nullptr);
    EXPECT_EQ(r.cfg.find_edge(l1, c.exit()), nullptr);
    // the moved edge keeps its join position
    LoopInfo before(c), after(r.cfg);
    EXPECT_EQ(after.join_index(l7, c.exit()), before.join_index(l1, c.exit()));
}

TEST(Edits, InsertWhileAddsOneLoop) {
    Cfg c = parse_program("fn main() { x = 1; y = 2; }").main();
    Loc mid = edge_with(c, "x = 1").dst;
    EditResult r = apply_edit(c, InsertWhile{mid, parse_expr("x < 5"), {parse_stmt("x = x + 1")}});
    LoopInfo li(r.cfg);
    EXPECT_EQ(li.heads().size(), 1u);
    std::size_t backs = 0;
    for (const auto& e : r.cfg.edges()) backs += li.is_back_edge(e.src, e.dst);
    EXPECT_EQ(backs, 1u);
    expect_matches_reference(r.cfg);
}

TEST(Edits, UnknownLocationRejected) {
    Cfg c = parse_program("fn main() { x = 1; }").main();
    EXPECT_THROW(apply_edit(c, InsertStmtAfter{Loc{42}, mk_skip()}), ValidationError);
    EXPECT_THROW(apply_edit(c, RelabelEdge{c.exit(), c.entry(), mk_skip()}), ValidationError);
}

TEST(Edits, DeltaReproducesResultAndPreservesInvariants) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Rng rng(seed);
        Cfg cfg = random_program(seed).main();
        StmtGen g;
        for (int i = 0; i < 25; ++i) {
            ProgramEdit e = gen_edit(rng, cfg, g);
            if (i % 5 == 4) {
                const Edge& x = cfg.edges()[rng() % cfg.edges().size()];
                e = RelabelEdge{x.src, x.dst, g.simple(rng)};
            }
            EditResult r = apply_edit(cfg, e);
            Cfg replay = apply_delta(cfg, r.delta, r.cfg.exit());
            EXPECT_EQ(edge_set(replay), edge_set(r.cfg)) << to_string(e);
            // the edit-scoped delta agrees with a diff over every edge
            EditDelta full = detail::diff_cfgs(cfg, r.cfg);
            EXPECT_EQ(edge_set(apply_delta(cfg, full, r.cfg.exit())), edge_set(r.cfg));
            EXPECT_EQ(full.added_edges.size(), r.delta.added_edges.size());
            EXPECT_EQ(full.removed_edges.size(), r.delta.removed_edges.size());
            EXPECT_EQ(full.relabelled.size(), r.delta.relabelled.size());
            EXPECT_EQ(replay.locs(), r.cfg.locs());
            expect_matches_reference(r.cfg);
            EXPECT_GE(r.cfg.num_locs(), cfg.num_locs());
            cfg = r.cfg;
        }
    }
}
