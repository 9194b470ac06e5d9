#include <gtest/gtest.h>

#include "support.hpp"

using namespace dai;
using namespace dai::test;

namespace {

using Itvd = IntervalDomain;

template <class D>
std::string at(const BatchResult<D>& r, const D& dom, Loc l) {
    return dom.to_string(r.invariants.at(l));
}

} // namespace

TEST(Batch, WhileExample) {
    Cfg cfg = parse_program(kWhile).main();
    Itvd dom;
    auto r = batch_analyze(cfg, dom);
    Loc h = edge_with(cfg, "assume(x < 10)").src;
    EXPECT_EQ(at(r, dom, cfg.exit()), "{x:[10,+inf]}");
    EXPECT_EQ(at(r, dom, h), "{x:[0,+inf]}");
    EXPECT_EQ(at(r, dom, edge_with(cfg, "x = x + 1").src), "{x:[0,9]}");
    ASSERT_EQ(r.stats.iterations.size(), 1u);
    EXPECT_EQ(r.stats.iterations.begin()->second, 2u);
    EXPECT_EQ(r.stats.widen_evals, 2u);
}

TEST(Batch, AppendExample) {
    Cfg cfg = parse_program(kAppend).main();
    Itvd dom;
    auto r = batch_analyze(cfg, dom);
    Loc h = edge_with(cfg, "assume(r > 0)").src;
    EXPECT_EQ(at(r, dom, edge_with(cfg, "ret = q").src), "{p:[0,0]}");
    EXPECT_EQ(at(r, dom, h), "{}");
    EXPECT_EQ(at(r, dom, edge_with(cfg, "arr[r] = q").src), "{r:[-inf,0]}");
    EXPECT_EQ(at(r, dom, cfg.exit()), "{}");
    SignDomain sd;
    auto s = batch_analyze(cfg, sd);
    EXPECT_EQ(at(s, sd, edge_with(cfg, "ret = q").src), "{p:Zero}");
}

TEST(Batch, EntryStateAndBottom) {
    Cfg cfg = parse_program("fn main() { y = x; assume(x > 5); }").main();
    Itvd dom;
    auto r = batch_analyze(cfg, dom, Convergence::Equal, itv({{"x", 0, 3}}));
    EXPECT_EQ(at(r, dom, cfg.entry()), "{x:[0,3]}");
    EXPECT_EQ(at(r, dom, cfg.exit()), "⊥");
}

// The result is a post-fixed point: the entry state is included at the entry
// and every edge maps the invariant at its source into that at its target.
template <class D>
void expect_post_fixpoint(const Cfg& cfg, const D& dom, Convergence conv, std::uint64_t seed) {
    auto r = batch_analyze(cfg, dom, conv);
    EXPECT_TRUE(dom.leq(dom.init(), r.invariants.at(cfg.entry())));
    for (const auto& e : cfg.edges()) {
        auto post = dom.transfer(e.stmt, r.invariants.at(e.src));
        EXPECT_TRUE(dom.leq(post, r.invariants.at(e.dst)))
            << "seed " << seed << " edge " << to_string(e.src) << "->" << to_string(e.dst) << " " << to_string(e.stmt);
    }
}

TEST(Batch, PostFixpoint) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Cfg cfg = random_program(seed).main();
        for (Convergence conv : {Convergence::Equal, Convergence::Leq}) {
            expect_post_fixpoint(cfg, Itvd{}, conv, seed);
            expect_post_fixpoint(cfg, SignDomain{}, conv, seed);
            expect_post_fixpoint(cfg, ConstDomain{}, conv, seed);
        }
    }
}

TEST(Batch, SoundForBoundedRuns) {
    Itvd dom;
    auto inputs = input_space(2, -2, 2);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Program p = random_program(seed, input_shape(2));
        auto r = batch_analyze(p.main(), dom);
        Collecting seen = collecting_bounded(p, inputs, 2000);
        ASSERT_TRUE(seen.count(p.main().entry()));
        for (const auto& [l, states] : seen)
            for (const auto& sigma : states)
                ASSERT_TRUE(dom.models(sigma, r.invariants.at(l)))
                    << "seed " << seed << " " << to_string(l) << " " << to_string(sigma) << " not in "
                    << dom.to_string(r.invariants.at(l));
    }
}

TEST(Batch, Deterministic) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Cfg cfg = random_program(seed).main();
        auto a = batch_analyze(cfg, Itvd{});
        auto b = batch_analyze(cfg, Itvd{});
        for (Loc l : cfg.locs()) EXPECT_EQ(at(a, Itvd{}, l), at(b, Itvd{}, l));
        EXPECT_EQ(a.stats.transfer_evals, b.stats.transfer_evals);
        EXPECT_EQ(a.stats.iterations, b.stats.iterations);
    }
}

// Every reachable location is reported, and the leq test never needs more
// widenings than the equality test.
TEST(Batch, LeqConvergesNoLater) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Cfg cfg = random_program(seed).main();
        auto eq = batch_analyze(cfg, Itvd{}, Convergence::Equal);
        auto le = batch_analyze(cfg, Itvd{}, Convergence::Leq);
        EXPECT_EQ(eq.invariants.size(), cfg.num_locs());
        EXPECT_LE(le.stats.widen_evals, eq.stats.widen_evals) << seed;
    }
}
