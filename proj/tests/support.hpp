#pragma once

// Shared fixtures for the test binaries.

#include "dai/demand/engine.hpp"
#include "dai/domain/concrete.hpp"
#include "dai/domain/constant.hpp"
#include "dai/domain/interval.hpp"
#include "dai/domain/sign.hpp"
#include "dai/oracle/batch.hpp"
#include "dai/workload/generator.hpp"

namespace dai::test {

inline constexpr const char* kWhile = "fn main() { x = 0; while (x < 10) { x = x + 1; } }";

// The list-append procedure ported to integers: `r > 0` stands for
// `r.next != null` and `r = r - 1` for `r = r.next`.
inline constexpr const char* kAppend = R"(
fn main() {
  if (p == 0) {
    ret = q;
  } else {
    r = p;
    while (r > 0) {
      r = r - 1;
    }
    arr[r] = q;
    ret = p;
  }
})";

inline ProgramShape default_shape() {
    ProgramShape sh;
    for (int i = 0; i < 6; ++i) sh.initialized.push_back("x" + std::to_string(i));
    return sh;
}

inline Program random_program(std::uint64_t seed, ProgramShape sh = default_shape()) {
    Rng rng(seed);
    ProgramGen pg(StmtGen(), std::move(sh));
    return lower_program(pg.program(rng));
}

// Shape whose first `inputs` variables are left unassigned and act as inputs.
inline ProgramShape input_shape(int inputs, int vars = 8) {
    ProgramShape sh;
    for (int i = inputs; i < vars; ++i) sh.initialized.push_back("x" + std::to_string(i));
    return sh;
}

// Every assignment of values in [lo, hi] to x0..x{inputs-1}, with a
// zero-filled array `arr` of length 4.
inline std::vector<ConcreteState> input_space(int inputs, std::int64_t lo, std::int64_t hi) {
    std::vector<ConcreteState> out(1);
    out[0].arrays["arr"] = std::vector<std::int64_t>(4, 0);
    for (int i = 0; i < inputs; ++i) {
        std::vector<ConcreteState> next;
        for (const auto& s : out)
            for (std::int64_t v = lo; v <= hi; ++v) {
                ConcreteState t = s;
                t.env["x" + std::to_string(i)] = v;
                next.push_back(std::move(t));
            }
        out = std::move(next);
    }
    return out;
}

inline const Edge& edge_with(const Cfg& cfg, const std::string& stmt_text) {
    for (const auto& e : cfg.edges())
        if (to_string(e.stmt) == stmt_text) return e;
    throw std::runtime_error("no edge labelled " + stmt_text);
}

inline IntervalDomain::State itv(std::initializer_list<std::tuple<const char*, std::int64_t, std::int64_t>> bs) {
    IntervalDomain::State s;
    for (auto [x, lo, hi] : bs)
        if (!Itv{lo, hi}.is_top()) s.env[x] = Itv{lo, hi};
    return s;
}

inline constexpr std::int64_t NINF = Itv::NEG_INF;
inline constexpr std::int64_t PINF = Itv::POS_INF;

} // namespace dai::test
