#pragma once

// Memo table for DAIG computations, keyed by function symbol and argument
// digests. Full arguments are stored so digest collisions are detected.

#include <unordered_map>
#include <variant>
#include <vector>

#include "dai/daig/name.hpp"
#include "dai/domain/domain.hpp"

namespace dai {

struct MemoKey {
    FnSymbol fn;
    std::vector<Digest> args;

    friend bool operator==(const MemoKey&, const MemoKey&) = default;
};

struct MemoKeyHash {
    std::size_t operator()(const MemoKey& k) const noexcept {
        Digest h = static_cast<Digest>(k.fn) + 1;
        for (Digest d : k.args) h = mix_digest(h, d);
        return static_cast<std::size_t>(h);
    }
};

template <AbstractDomain D>
class MemoTable {
public:
    using State = typename D::State;
    using Arg = std::variant<Stmt, State>;
    using ArgRef = std::variant<const Stmt*, const State*>;

    struct Entry {
        std::vector<Arg> args;
        State result;
    };

    const State* lookup(const D& dom, const MemoKey& key, const std::vector<ArgRef>& args) {
        auto it = m_table.find(key);
        if (it == m_table.end()) return nullptr;
        for (const auto& e : it->second) {
            if (same_args(dom, e.args, args)) return &e.result;
        }
        ++m_collisions;
        return nullptr;
    }

    void store(MemoKey key, const std::vector<ArgRef>& args, State result) {
        Entry e;
        e.args.reserve(args.size());
        for (const ArgRef& a : args) {
            if (a.index() == 0) e.args.emplace_back(*std::get<0>(a));
            else e.args.emplace_back(*std::get<1>(a));
        }
        e.result = std::move(result);
        m_table[std::move(key)].push_back(std::move(e));
        ++m_size;
    }

    std::size_t size() const { return m_size; }
    // lookups whose digests matched a stored key but whose arguments differed
    std::size_t collisions() const { return m_collisions; }
    void clear() {
        m_table.clear();
        m_size = 0;
    }

private:
    static bool same_args(const D& dom, const std::vector<Arg>& stored, const std::vector<ArgRef>& args) {
        if (stored.size() != args.size()) return false;
        for (std::size_t i = 0; i < args.size(); ++i) {
            const Arg& a = stored[i];
            const ArgRef& b = args[i];
            if (a.index() != b.index()) return false;
            if (a.index() == 0) {
                if (std::get<0>(a) != *std::get<0>(b)) return false;
            } else if (!dom.equal(std::get<1>(a), *std::get<1>(b))) {
                return false;
            }
        }
        return true;
    }

    std::unordered_map<MemoKey, std::vector<Entry>, MemoKeyHash> m_table;
    std::size_t m_size = 0;
    std::size_t m_collisions = 0;
};

} // namespace dai
