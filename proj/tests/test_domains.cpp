#include <gtest/gtest.h>

#include "support.hpp"

using namespace dai;
using namespace dai::test;

namespace {

const std::vector<std::string> kVars{"a", "b", "c"};

std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

// Random abstract states, one generator per domain.
IntervalDomain::State random_state(Rng& rng, const IntervalDomain&) {
    IntervalDomain::State s;
    if (pick(rng, 0, 9) == 0) return IntervalDomain{}.bottom();
    for (const auto& x : kVars) {
        if (pick(rng, 0, 3) == 0) continue;
        std::int64_t lo = pick(rng, 0, 4) == 0 ? NINF : pick(rng, -20, 20);
        std::int64_t hi = pick(rng, 0, 4) == 0 ? PINF : std::max(lo, std::int64_t{-20}) + pick(rng, 0, 15);
        if (lo == NINF && hi == PINF) continue;
        s.env[x] = Itv{lo, hi};
    }
    return s;
}
SignDomain::State random_state(Rng& rng, const SignDomain&) {
    SignDomain::State s;
    if (pick(rng, 0, 9) == 0) return SignDomain{}.bottom();
    static const Sign vals[] = {Sign::Neg, Sign::Zero, Sign::Pos};
    for (const auto& x : kVars)
        if (pick(rng, 0, 3) != 0) s.env[x] = vals[pick(rng, 0, 2)];
    return s;
}
ConstDomain::State random_state(Rng& rng, const ConstDomain&) {
    ConstDomain::State s;
    if (pick(rng, 0, 9) == 0) return ConstDomain{}.bottom();
    for (const auto& x : kVars)
        if (pick(rng, 0, 3) != 0) s.env[x] = pick(rng, -3, 3);
    return s;
}

// A state below `s`: tightened or newly bound variables, or bottom.
IntervalDomain::State random_below(Rng& rng, const IntervalDomain::State& s, const IntervalDomain& d) {
    if (s.bot || pick(rng, 0, 9) == 0) return d.bottom();
    IntervalDomain::State r = s;
    for (const auto& x : kVars) {
        Itv i = s.env.count(x) ? s.env.at(x) : Itv::top();
        if (i.lo == NINF) i.lo = i.hi == PINF ? pick(rng, -30, 0) : i.hi - pick(rng, 0, 5);
        else i.lo = std::min(i.lo + pick(rng, 0, 2), i.hi);
        if (i.hi == PINF) i.hi = std::max(i.lo, pick(rng, 0, 30));
        else i.hi = std::max(i.lo, i.hi - pick(rng, 0, 2));
        if (pick(rng, 0, 2) == 0) continue;
        r.env[x] = i;
    }
    return r;
}
template <class D>
typename D::State random_below(Rng& rng, const typename D::State& s, const D& d) {
    if (s.bot || pick(rng, 0, 5) == 0) return d.bottom();
    typename D::State r = s;
    // bind a variable that was top
    typename D::State extra = random_state(rng, d);
    for (const auto& [x, v] : extra.env) r.env.emplace(x, v);
    return r;
}

ConcreteState random_concrete(Rng& rng) {
    ConcreteState s;
    for (const auto& x : kVars) s.env[x] = pick(rng, -6, 6);
    s.arrays["arr"] = {pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, -3, 3)};
    return s;
}

// An abstract state containing `sigma`.
IntervalDomain::State cover(Rng& rng, const ConcreteState& sigma, const IntervalDomain&) {
    IntervalDomain::State s;
    for (const auto& [x, v] : sigma.env) {
        if (pick(rng, 0, 3) == 0) continue;
        s.env[x] = Itv{pick(rng, 0, 3) == 0 ? NINF : v - pick(rng, 0, 3), pick(rng, 0, 3) == 0 ? PINF : v + pick(rng, 0, 3)};
    }
    return s;
}
SignDomain::State cover(Rng& rng, const ConcreteState& sigma, const SignDomain&) {
    SignDomain::State s;
    for (const auto& [x, v] : sigma.env)
        if (pick(rng, 0, 2) != 0) s.env[x] = v < 0 ? Sign::Neg : v == 0 ? Sign::Zero : Sign::Pos;
    return s;
}
ConstDomain::State cover(Rng& rng, const ConcreteState& sigma, const ConstDomain&) {
    ConstDomain::State s;
    for (const auto& [x, v] : sigma.env)
        if (pick(rng, 0, 2) != 0) s.env[x] = v;
    return s;
}

Stmt random_stmt(Rng& rng) {
    GenParams gp;
    gp.const_bound = 8;
    StmtGen g(gp, kVars);
    if (pick(rng, 0, 2) == 0) return mk_assume(g.condition(rng, 3));
    return g.simple(rng);
}

template <class D>
class DomainLaws : public ::testing::Test {};
using Domains = ::testing::Types<IntervalDomain, SignDomain, ConstDomain>;
TYPED_TEST_SUITE(DomainLaws, Domains);

} // namespace

TYPED_TEST(DomainLaws, LatticeLaws) {
    TypeParam d;
    Rng rng(1);
    for (int i = 0; i < 3000; ++i) {
        auto a = random_state(rng, d), b = random_state(rng, d);
        auto j = d.join(a, b);
        auto w = d.widen(a, b);
        EXPECT_TRUE(d.leq(a, a));
        EXPECT_TRUE(d.leq(d.bottom(), a));
        EXPECT_TRUE(d.leq(a, d.init()));
        EXPECT_TRUE(d.leq(a, j));
        EXPECT_TRUE(d.leq(b, j));
        EXPECT_TRUE(d.leq(j, w)) << d.to_string(a) << " " << d.to_string(b);
        EXPECT_TRUE(d.equal(d.widen(a, a), a));
        EXPECT_TRUE(d.equal(d.join(a, d.bottom()), a));
        EXPECT_TRUE(d.equal(d.widen(d.bottom(), a), a));
        if (d.leq(a, b) && d.leq(b, a)) {
            EXPECT_TRUE(d.equal(a, b));
        }
        if (d.equal(a, b)) {
            EXPECT_EQ(d.digest(a), d.digest(b));
        }
        auto c = random_state(rng, d);
        if (d.leq(a, b) && d.leq(b, c)) {
            EXPECT_TRUE(d.leq(a, c));
        }
    }
}

// Memo keys rely on digests telling distinct states apart.
TYPED_TEST(DomainLaws, DigestSeparatesStates) {
    TypeParam d;
    Rng rng(3);
    std::map<Digest, std::string> seen;
    for (int i = 0; i < 5000; ++i) {
        auto a = random_state(rng, d);
        auto [it, fresh] = seen.emplace(d.digest(a), d.to_string(a));
        if (!fresh) {
            EXPECT_EQ(it->second, d.to_string(a));
        }
    }
    EXPECT_NE(d.digest(d.bottom()), d.digest(d.init()));
}

TYPED_TEST(DomainLaws, WideningStabilizes) {
    TypeParam d;
    Rng rng(2);
    const std::size_t bound = 2 * kVars.size() + 2;
    for (int t = 0; t < 500; ++t) {
        auto a = random_state(rng, d);
        auto w = a;
        // distinct values along the widened chain
        std::size_t values = 1;
        for (std::size_t i = 1; i < 40; ++i) {
            a = d.join(a, random_state(rng, d));
            auto next = d.widen(w, a);
            ASSERT_TRUE(d.leq(w, next));
            if (!d.equal(next, w)) ++values;
            w = next;
        }
        EXPECT_LE(values, bound);
    }
}

TYPED_TEST(DomainLaws, TransferIsMonotone) {
    TypeParam d;
    Rng rng(3);
    for (int i = 0; i < 4000; ++i) {
        auto hi = random_state(rng, d);
        auto lo = random_below(rng, hi, d);
        ASSERT_TRUE(d.leq(lo, hi));
        Stmt s = random_stmt(rng);
        EXPECT_TRUE(d.leq(d.transfer(s, lo), d.transfer(s, hi)))
            << to_string(s) << " on " << d.to_string(lo) << " vs " << d.to_string(hi);
    }
}

TYPED_TEST(DomainLaws, LocallySound) {
    TypeParam d;
    Rng rng(4);
    int stepped = 0;
    for (int i = 0; i < 6000; ++i) {
        ConcreteState sigma = random_concrete(rng);
        auto phi = cover(rng, sigma, d);
        ASSERT_TRUE(d.models(sigma, phi));
        Stmt s = random_stmt(rng);
        auto next = concrete_step(s, sigma);
        if (!next) continue;
        ++stepped;
        EXPECT_TRUE(d.models(*next, d.transfer(s, phi)))
            << to_string(s) << " from " << to_string(sigma) << " in " << d.to_string(phi);
    }
    EXPECT_GT(stepped, 2000);
}

TYPED_TEST(DomainLaws, BottomAbsorbsAndModelsNothing) {
    TypeParam d;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Stmt s = random_stmt(rng);
        EXPECT_TRUE(d.is_bot(d.transfer(s, d.bottom())));
        EXPECT_FALSE(d.models(random_concrete(rng), d.bottom()));
    }
    Stmt call{Call{"x", "f", std::nullopt}};
    EXPECT_THROW(d.transfer(call, d.init()), ContractViolation);
}

TEST(Interval, TransferExamples) {
    IntervalDomain d;
    EXPECT_EQ(d.to_string(d.transfer(parse_stmt("x = x + 1"), itv({{"x", 0, 0}}))), "{x:[1,1]}");
    EXPECT_EQ(d.to_string(d.transfer(parse_stmt("assume(x < 10)"), itv({{"x", 0, PINF}}))), "{x:[0,9]}");
    EXPECT_TRUE(d.is_bot(d.transfer(parse_stmt("assume(x < 0)"), itv({{"x", 0, 5}}))));
    EXPECT_EQ(d.to_string(d.transfer(parse_stmt("y = 7 / x"), itv({{"x", -1, 1}}))), "{x:[-1,1]}");
    EXPECT_EQ(d.to_string(d.transfer(parse_stmt("y = arr[0]"), itv({{"y", 1, 1}}))), "{}");
    EXPECT_EQ(d.to_string(d.transfer(parse_stmt("arr[x] = 3"), itv({{"x", 1, 1}}))), "{x:[1,1]}");
    EXPECT_EQ(d.to_string(d.transfer(parse_stmt("print(x)"), itv({{"x", 1, 2}}))), "{x:[1,2]}");
}

TEST(Interval, JoinWidenExamples) {
    IntervalDomain d;
    EXPECT_EQ(d.to_string(d.join(itv({{"x", 0, 1}}), itv({{"x", 3, 5}}))), "{x:[0,5]}");
    EXPECT_EQ(d.to_string(d.widen(itv({{"x", 0, 0}}), itv({{"x", 1, 1}}))), "{x:[0,+inf]}");
    EXPECT_EQ(d.to_string(d.widen(itv({{"x", 0, 0}}), itv({{"x", -1, 0}}))), "{x:[-inf,0]}");
    // top bindings are dropped from the canonical form
    EXPECT_EQ(d.to_string(d.widen(itv({{"x", 0, 0}}), itv({{"x", -1, 1}}))), "{}");
    EXPECT_EQ(d.to_string(itv({{"x", 0, 9}, {"y", NINF, 3}})), "{x:[0,9], y:[-inf,3]}");
    EXPECT_EQ(d.to_string(d.bottom()), "⊥");
}

TEST(Interval, Models) {
    IntervalDomain d;
    ConcreteState s;
    s.env["x"] = 3;
    EXPECT_TRUE(d.models(s, itv({{"x", 0, 5}})));
    s.env["x"] = 7;
    EXPECT_FALSE(d.models(s, itv({{"x", 0, 5}})));
    EXPECT_FALSE(d.models(s, d.bottom()));
}

TEST(Concrete, StepExamples) {
    ConcreteState empty;
    auto r = concrete_step(parse_stmt("x = 2 * 3"), empty);
    ASSERT_TRUE(r);
    EXPECT_EQ(to_string(*r), "{x:6}");
    ConcreteState z;
    z.env["x"] = 0;
    EXPECT_FALSE(concrete_step(parse_stmt("assume(x > 0)"), z));
    EXPECT_FALSE(concrete_step(parse_stmt("y = 1 / x"), z));
    ConcreteState a;
    a.arrays["a"] = {0, 0, 0};
    r = concrete_step(parse_stmt("a[1] = 5"), a);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->arrays.at("a"), (std::vector<std::int64_t>{0, 5, 0}));
    EXPECT_FALSE(concrete_step(parse_stmt("a[3] = 5"), a));
}

TEST(Concrete, CollectingExamples) {
    Program line = parse_program("fn main() { x = 1; y = x + 1; }");
    auto c = collecting_bounded(line, {ConcreteState{}}, 100);
    ASSERT_EQ(c[line.main().exit()].size(), 1u);
    EXPECT_EQ(to_string(*c[line.main().exit()].begin()), "{x:1, y:2}");

    Program loop = parse_program("fn main() { x = 0; while (x < 3) { x = x + 1; } }");
    LoopInfo li(loop.main());
    auto cl = collecting_bounded(loop, {ConcreteState{}}, 100);
    std::set<std::int64_t> xs;
    for (const auto& s : cl[li.heads()[0]]) xs.insert(s.env.at("x"));
    EXPECT_EQ(xs, (std::set<std::int64_t>{0, 1, 2, 3}));

    Program branchy = parse_program("fn main() { if (x < 0) { y = 1; } else { y = 2; } }");
    std::vector<ConcreteState> inputs;
    for (int v = -1; v <= 1; ++v) {
        ConcreteState s;
        s.env["x"] = v;
        inputs.push_back(s);
    }
    auto cb = collecting_bounded(branchy, inputs, 100);
    std::set<std::int64_t> ys;
    for (const auto& s : cb[branchy.main().exit()]) ys.insert(s.env.at("y"));
    EXPECT_EQ(ys, (std::set<std::int64_t>{1, 2}));
    EXPECT_EQ(cb[branchy.main().exit()].size(), 3u);
}

TEST(Sign, Examples) {
    SignDomain d;
    auto s = d.transfer(parse_stmt("x = 0 - 3"), d.init());
    EXPECT_EQ(d.to_string(s), "{x:Neg}");
    s = d.transfer(parse_stmt("y = x * x"), s);
    EXPECT_EQ(d.to_string(s), "{x:Neg, y:Pos}");
    EXPECT_TRUE(d.is_bot(d.transfer(parse_stmt("assume(x > 0)"), s)));
}

TEST(Const, Examples) {
    ConstDomain d;
    auto s = d.transfer(parse_stmt("x = 4"), d.init());
    s = d.transfer(parse_stmt("y = x * 2 + 1"), s);
    EXPECT_EQ(d.to_string(s), "{x:4, y:9}");
    EXPECT_TRUE(d.is_bot(d.transfer(parse_stmt("assume(x == 3)"), s)));
    auto o = d.transfer(parse_stmt("x = 5"), d.init());
    EXPECT_EQ(d.to_string(d.join(s, o)), "{}");
}
