#include <gtest/gtest.h>

#include <regex>

#include "dai/daig/consistency.hpp"
#include "support.hpp"

using namespace dai;
using namespace dai::test;

namespace {

using Itvd = IntervalDomain;

struct Built {
    Cfg cfg;
    LoopInfo li;
    Daig<Itvd> d;
    explicit Built(Cfg c) : cfg(std::move(c)), li(cfg), d(init_daig<Itvd>(cfg, li, Itvd{}.init())) {}
};

std::size_t count_fn(const Daig<Itvd>& d, FnSymbol f) {
    std::size_t n = 0;
    for (const auto& [dest, c] : d.comps()) n += c.fn == f;
    return n;
}

} // namespace

TEST(Init, SingleEdge) {
    Built b(parse_program("fn main() { x = 1; }").main());
    EXPECT_EQ(b.d.cells().size(), 3u);
    ASSERT_EQ(b.d.comps().size(), 1u);
    const Computation& c = b.d.comps().begin()->second;
    EXPECT_EQ(c.fn, FnSymbol::Transfer);
    EXPECT_EQ(c.dest, Name::loc(b.cfg.exit()));
    ASSERT_EQ(c.srcs.size(), 2u);
    EXPECT_EQ(c.srcs[0], Name::prod(Name::loc(b.cfg.entry()), Name::loc(b.cfg.exit())));
    EXPECT_EQ(c.srcs[1], Name::loc(b.cfg.entry()));
    EXPECT_TRUE(b.d.cell(b.d.entry()).filled());
    EXPECT_TRUE(b.d.cell(c.srcs[0]).filled());
    EXPECT_FALSE(b.d.cell(c.dest).filled());
    EXPECT_TRUE(check_wf(b.d).empty());
}

TEST(Init, WhileLoopShape) {
    Built b(parse_program(kWhile).main());
    Loc h = edge_with(b.cfg, "assume(x < 10)").src;
    Loc body = edge_with(b.cfg, "x = x + 1").src;
    Name h0 = Name::iter(Name::loc(h), {{h.id, 0}});
    Name h1 = Name::iter(Name::loc(h), {{h.id, 1}});
    Name fix = Name::loc(h);

    const Computation* fc = b.d.comp_for(fix);
    ASSERT_NE(fc, nullptr);
    EXPECT_EQ(fc->fn, FnSymbol::Fix);
    EXPECT_EQ(fc->srcs, (std::vector<Name>{h0, h1}));

    const Computation* wc = b.d.comp_for(h1);
    ASSERT_NE(wc, nullptr);
    EXPECT_EQ(wc->fn, FnSymbol::Widen);
    EXPECT_EQ(wc->srcs, (std::vector<Name>{h0, Name::prod(h0, h1)}));

    // the back edge feeds the pre-widen cell from the body at iteration 0
    const Computation* bc = b.d.comp_for(Name::prod(h0, h1));
    ASSERT_NE(bc, nullptr);
    EXPECT_EQ(bc->fn, FnSymbol::Transfer);
    EXPECT_EQ(bc->srcs[1], Name::iter(Name::loc(body), {{h.id, 0}}));

    // the loop exit reads the fixed point, not an iterate
    const Computation* xc = b.d.comp_for(Name::loc(b.cfg.exit()));
    ASSERT_NE(xc, nullptr);
    EXPECT_EQ(xc->srcs[1], fix);

    // 4 statements, 4 locations, iterate 1, pre-widen and fix
    EXPECT_EQ(b.d.cells().size(), 11u);
    EXPECT_EQ(count_fn(b.d, FnSymbol::Transfer), 4u);
    EXPECT_EQ(count_fn(b.d, FnSymbol::Widen), 1u);
    EXPECT_EQ(count_fn(b.d, FnSymbol::Fix), 1u);
    EXPECT_EQ(count_fn(b.d, FnSymbol::Join), 0u);
}

TEST(Init, AppendShape) {
    Built b(parse_program(kAppend).main());
    // two branches meet at the exit, joined from pre-join cells 1 and 2
    Loc exit = b.cfg.exit();
    const Computation* jc = b.d.comp_for(Name::loc(exit));
    ASSERT_NE(jc, nullptr);
    EXPECT_EQ(jc->fn, FnSymbol::Join);
    ASSERT_EQ(jc->srcs.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(jc->srcs[i], Naming::prejoin(i + 1, Name::loc(exit)));
        const Computation* t = b.d.comp_for(jc->srcs[i]);
        ASSERT_NE(t, nullptr);
        EXPECT_EQ(t->fn, FnSymbol::Transfer);
        EXPECT_EQ(t->srcs[0].lhs(), Name::idx(static_cast<std::uint32_t>(i + 1)));
    }
    std::set<std::string> into_exit;
    for (const auto& s : jc->srcs) into_exit.insert(to_string(*b.d.cell(b.d.comp_for(s)->srcs[0]).stmt));
    EXPECT_EQ(into_exit, (std::set<std::string>{"ret = q", "ret = p"}));

    Loc h = edge_with(b.cfg, "assume(r > 0)").src;
    const Computation* fc = b.d.comp_for(Name::loc(h));
    ASSERT_NE(fc, nullptr);
    EXPECT_EQ(fc->fn, FnSymbol::Fix);
    // arr[r] = q reads the loop's fixed point
    const Edge& after = edge_with(b.cfg, "assume(!(r > 0))");
    EXPECT_EQ(b.d.comp_for(Name::loc(after.dst))->srcs[1], Name::loc(h));

    EXPECT_EQ(count_fn(b.d, FnSymbol::Join), 1u);
    EXPECT_EQ(count_fn(b.d, FnSymbol::Fix), 1u);
    EXPECT_EQ(count_fn(b.d, FnSymbol::Transfer), b.cfg.edges().size());
    EXPECT_TRUE(check_wf(b.d).empty());
    EXPECT_TRUE(check_cfg_consistency(b.d, b.cfg, b.li).empty());
}

// |cells| = |E| + |L| + Σ join in-degrees + 3 per loop, and
// |comps| = |E| + |joins| + 2 per loop, for the initial graph.
TEST(Init, CellCountFormula) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Built b(random_program(seed).main());
        std::size_t loops = 0, joins = 0, join_in = 0;
        for (Loc l : b.cfg.locs()) {
            std::size_t fwd = 0;
            for (const Edge* e : b.cfg.in_edges(l)) fwd += !b.li.dominates(l, e->src);
            loops += fwd != b.cfg.in_edges(l).size();
            if (fwd >= 2) {
                ++joins;
                join_in += fwd;
            }
        }
        std::size_t E = b.cfg.edges().size(), L = b.cfg.num_locs();
        EXPECT_EQ(b.d.cells().size(), E + L + join_in + 3 * loops) << seed;
        EXPECT_EQ(b.d.comps().size(), E + joins + 2 * loops) << seed;
        EXPECT_TRUE(check_wf(b.d).empty()) << seed;
        EXPECT_TRUE(check_cfg_consistency(b.d, b.cfg, b.li).empty()) << seed;
    }
}

TEST(Names, DeterministicAcrossBuilds) {
    auto names = [](const Daig<Itvd>& d) {
        std::set<std::string> s;
        for (const auto& [n, c] : d.cells()) s.insert(to_string(n));
        for (const auto& [n, c] : d.comps()) s.insert(to_string(c));
        return s;
    };
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Built a(random_program(seed).main());
        Built b(random_program(seed).main());
        EXPECT_EQ(names(a.d), names(b.d)) << seed;
    }
}

TEST(Names, Incr) {
    Loc h{3}, g{5};
    Name x = Name::iter(Name::loc(Loc{7}), {{h.id, 0}, {g.id, 2}});
    EXPECT_EQ(incr(x, h), Name::iter(Name::loc(Loc{7}), {{h.id, 1}, {g.id, 2}}));
    EXPECT_EQ(incr(x, g, 3), Name::iter(Name::loc(Loc{7}), {{h.id, 0}, {g.id, 5}}));
    // unrelated heads and counter-free names are untouched
    EXPECT_EQ(incr(x, Loc{9}), x);
    EXPECT_EQ(incr(Name::loc(h), h), Name::loc(h));
    // products are incremented on both sides
    Name h0 = Name::iter(Name::loc(h), {{h.id, 0}});
    Name h1 = Name::iter(Name::loc(h), {{h.id, 1}});
    Name h2 = Name::iter(Name::loc(h), {{h.id, 2}});
    EXPECT_EQ(incr(Name::prod(h0, h1), h), Name::prod(h1, h2));
    EXPECT_EQ(to_string(Name::prod(h0, h1)), "l3^(0)·l3^(1)");
    EXPECT_EQ(to_string(x), "l7^(l3:0,l5:2)");
}

TEST(WellFormed, DetectsCycle) {
    Built b(parse_program("fn main() { x = 1; y = 2; }").main());
    Name mid = Name::loc(edge_with(b.cfg, "y = 2").src);
    ASSERT_TRUE(check_wf(b.d).empty());
    // make the middle state depend on itself
    b.d.set_comp({mid, FnSymbol::Join, {mid, Name::loc(b.cfg.exit())}, mid, {}});
    auto errs = check_wf(b.d);
    ASSERT_FALSE(errs.empty());
    bool cycle = false;
    for (const auto& e : errs) cycle = cycle || e.find("cycle") != std::string::npos;
    EXPECT_TRUE(cycle);
}

TEST(WellFormed, EmptyCellNeedsComputation) {
    Built b(parse_program("fn main() { x = 1; }").main());
    b.d.remove_comp(Name::loc(b.cfg.exit()));
    auto errs = check_wf(b.d);
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_NE(errs[0].find("empty cell without computation"), std::string::npos);
}

TEST(WellFormed, IllTypedAndDangling) {
    Built b(parse_program("fn main() { x = 1; }").main());
    Name exit = Name::loc(b.cfg.exit());
    Name stmt = b.d.comp_for(exit)->srcs[0];
    // transfer with its operands swapped
    b.d.set_comp({exit, FnSymbol::Transfer, {Name::loc(b.cfg.entry()), stmt}, exit, {}});
    auto errs = check_wf(b.d);
    ASSERT_FALSE(errs.empty());
    EXPECT_NE(errs[0].find("ill-typed"), std::string::npos);
    b.d.set_comp({exit, FnSymbol::Transfer, {stmt, Name::loc(Loc{99})}, exit, {}});
    errs = check_wf(b.d);
    ASSERT_FALSE(errs.empty());
    EXPECT_NE(errs[0].find("missing cell"), std::string::npos);
}

TEST(Consistency, FilledEngineGraphPasses) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Engine<Itvd> e(random_program(seed).main());
        for (Loc l : e.cfg().locs()) e.query_loc(l);
        auto errs = e.check_all();
        EXPECT_TRUE(errs.empty()) << seed << ": " << errs.front();
    }
}

TEST(Consistency, CorruptedCellDetected) {
    Engine<Itvd> e(parse_program(kWhile).main());
    e.query_loc(e.cfg().exit());
    Daig<Itvd> d = e.daig();
    Name exit = Name::loc(e.cfg().exit());
    ASSERT_TRUE(check_ai_consistency(d, e.domain(), Convergence::Equal, e.entry_state()).empty());
    d.cell(exit).state = itv({{"x", 0, 0}});
    auto errs = check_ai_consistency(d, e.domain(), Convergence::Equal, e.entry_state());
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_NE(errs[0].find(to_string(exit)), std::string::npos);
    // a wrong entry state is reported as such
    EXPECT_FALSE(check_ai_consistency(e.daig(), e.domain(), Convergence::Equal, itv({{"x", 1, 1}})).empty());
}

TEST(Consistency, MissingEdgeDetected) {
    Built b(parse_program(kAppend).main());
    const Edge& e = edge_with(b.cfg, "arr[r] = q");
    b.d.remove_comp(Naming(b.li).transfer_dest(e.src, e.dst));
    EXPECT_FALSE(check_cfg_consistency(b.d, b.cfg, b.li).empty());
}

TEST(Consistency, PreEditGraphDoesNotMatchEditedCfg) {
    Built b(parse_program(kAppend).main());
    EditResult r = apply_edit(b.cfg, InsertStmtAfter{edge_with(b.cfg, "ret = q").src, parse_stmt("print(p)")});
    EXPECT_FALSE(check_cfg_consistency(b.d, r.cfg, r.loops).empty());
    Daig<Itvd> fresh = init_daig<Itvd>(r.cfg, r.loops, Itvd{}.init());
    EXPECT_TRUE(check_cfg_consistency(fresh, r.cfg, r.loops).empty());
}

TEST(Reaches, FollowsDependencies) {
    Built b(parse_program(kAppend).main());
    Name entry = Name::loc(b.cfg.entry());
    Name exit = Name::loc(b.cfg.exit());
    Loc h = edge_with(b.cfg, "assume(r > 0)").src;
    EXPECT_TRUE(reaches(b.d, entry, exit));
    EXPECT_FALSE(reaches(b.d, exit, entry));
    EXPECT_TRUE(reaches(b.d, Name::loc(h), exit));
    // the then-branch does not flow through the loop
    Name then_stmt = b.d.comp_for(Naming(b.li).transfer_dest(edge_with(b.cfg, "ret = q").src, b.cfg.exit()))->srcs[0];
    EXPECT_FALSE(reaches(b.d, then_stmt, Name::loc(h)));
    EXPECT_TRUE(reaches(b.d, exit, exit));
}

TEST(Dot, OneNodePerCellAndComputation) {
    Engine<Itvd> e(parse_program(kWhile).main());
    e.query_loc(e.cfg().exit());
    std::string dot = to_dot(e.daig(), e.domain());
    EXPECT_EQ(dot.rfind("digraph daig {", 0), 0u);
    auto count = [&](const std::string& re) {
        std::regex r(re);
        return static_cast<std::size_t>(std::distance(std::sregex_iterator(dot.begin(), dot.end(), r), std::sregex_iterator()));
    };
    EXPECT_EQ(count(R"(\n  c\d+ \[label=)"), e.daig().cells().size());
    EXPECT_EQ(count(R"(shape=point)"), e.daig().comps().size());
    EXPECT_NE(dot.find("{x:[10,+inf]}"), std::string::npos);
    EXPECT_EQ(dot, to_dot(e.daig(), e.domain()));
}
