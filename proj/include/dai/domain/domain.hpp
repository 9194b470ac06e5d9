#pragma once

#include <array>
#include <concepts>
#include <cstring>
#include <optional>
#include <string>

#include "dai/domain/concrete.hpp"
#include "dai/lang/ast.hpp"
#include "dai/support/digest.hpp"

namespace dai {

enum class Convergence { Equal, Leq };

// Operations an abstract domain supplies to the engine and the oracles.
//
// call_entry builds a callee's entry state from the caller's pre-state (only the
// formal parameter is bound); call_return writes the callee's `ret` into the
// caller's target variable.
template <class D>
concept AbstractDomain = requires(const D& d, const typename D::State& a, const Stmt& s,
                                  const std::optional<std::string>& param,
                                  const std::optional<ExprPtr>& actual, const std::string& var,
                                  const ConcreteState& sigma) {
    typename D::State;
    { d.init() } -> std::same_as<typename D::State>;
    { d.bottom() } -> std::same_as<typename D::State>;
    { d.transfer(s, a) } -> std::same_as<typename D::State>;
    { d.leq(a, a) } -> std::same_as<bool>;
    { d.join(a, a) } -> std::same_as<typename D::State>;
    { d.widen(a, a) } -> std::same_as<typename D::State>;
    { d.equal(a, a) } -> std::same_as<bool>;
    { d.is_bot(a) } -> std::same_as<bool>;
    { d.digest(a) } -> std::same_as<Digest>;
    { d.to_string(a) } -> std::same_as<std::string>;
    { d.call_entry(a, param, actual) } -> std::same_as<typename D::State>;
    { d.call_return(a, var, a) } -> std::same_as<typename D::State>;
    { d.models(sigma, a) } -> std::same_as<bool>;
};

// Shared implementation of the environment-style domains: a bottom flag plus a
// sorted map from variable to a non-top value.
template <class Value>
struct EnvState {
    bool bot = false;
    std::map<std::string, Value> env;

    friend bool operator==(const EnvState&, const EnvState&) = default;
};

// Pointwise combination for join/widen. Variables absent on either side are top,
// and so is any value `f` maps to nullopt. Bottom is the identity.
template <class V, class F>
EnvState<V> env_combine(const EnvState<V>& a, const EnvState<V>& b, F f) {
    if (a.bot) return b;
    if (b.bot) return a;
    EnvState<V> r;
    auto ia = a.env.begin();
    auto ib = b.env.begin();
    while (ia != a.env.end() && ib != b.env.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else {
            if (auto v = f(ia->second, ib->second)) r.env.emplace_hint(r.env.end(), ia->first, *v);
            ++ia;
            ++ib;
        }
    }
    return r;
}

template <class V, class F>
bool env_leq(const EnvState<V>& a, const EnvState<V>& b, F leq_value) {
    if (a.bot) return true;
    if (b.bot) return false;
    for (const auto& [x, vb] : b.env) {
        auto it = a.env.find(x);
        if (it == a.env.end() || !leq_value(it->second, vb)) return false;
    }
    return true;
}

template <class V, class F>
std::string env_to_string(const EnvState<V>& s, F show) {
    if (s.bot) return "\u22a5";
    std::string r = "{";
    bool first = true;
    for (const auto& [x, v] : s.env) {
        if (!first) r += ", ";
        r += x + ":" + show(v);
        first = false;
    }
    return r + "}";
}

// Structural digest: names are hashed with a terminator so that adjacent
// bindings cannot run together, and each value contributes its raw words.
template <class V, class F>
Digest env_digest(const EnvState<V>& s, F words) {
    Digest h = fnv1a(s.bot ? "B" : "E");
    for (const auto& [x, v] : s.env) {
        h = fnv1a(x, h);
        h = fnv1a(std::string_view("\0", 1), h);
        for (std::int64_t w : words(v)) {
            char b[sizeof w];
            std::memcpy(b, &w, sizeof w);
            h = fnv1a(std::string_view(b, sizeof b), h);
        }
    }
    return h;
}

} // namespace dai
