#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dai/lang/ast.hpp"
#include "dai/support/error.hpp"

namespace dai {

struct Loc {
    std::uint32_t id = 0;
    friend bool operator==(Loc a, Loc b) { return a.id == b.id; }
    friend bool operator!=(Loc a, Loc b) { return a.id != b.id; }
    friend bool operator<(Loc a, Loc b) { return a.id < b.id; }
};

inline std::string to_string(Loc l) { return "l" + std::to_string(l.id); }

struct Edge {
    Loc src;
    Loc dst;
    Stmt stmt;
    // Position among the in-edges of a join. Set to the source id when the edge
    // is created and kept when an edit moves the edge to a new source.
    std::uint32_t order_key = 0;
};

// Control-flow graph of one procedure: locations, labelled edges, entry, exit.
// At most one edge per (src, dst) pair.
class Cfg {
public:
    Cfg() = default;
    Cfg(Loc entry, Loc exit) : m_entry(entry), m_exit(exit) {
        add_loc(entry);
        add_loc(exit);
    }

    Loc entry() const { return m_entry; }
    Loc exit() const { return m_exit; }
    void set_exit(Loc l) { m_exit = l; }

    const std::vector<Loc>& locs() const { return m_locs; }
    const std::vector<Edge>& edges() const { return m_edges; }
    std::size_t num_locs() const { return m_locs.size(); }

    bool has_loc(Loc l) const { return std::binary_search(m_locs.begin(), m_locs.end(), l); }

    Loc fresh_loc() {
        Loc l{m_next_id};
        add_loc(l);
        return l;
    }

    void add_loc(Loc l) {
        auto it = std::lower_bound(m_locs.begin(), m_locs.end(), l);
        if (it == m_locs.end() || *it != l) m_locs.insert(it, l);
        m_next_id = std::max(m_next_id, l.id + 1);
    }

    const Edge* find_edge(Loc src, Loc dst) const {
        for (const auto& e : m_edges)
            if (e.src == src && e.dst == dst) return &e;
        return nullptr;
    }

    void add_edge(Loc src, Loc dst, Stmt s, std::optional<std::uint32_t> order_key = std::nullopt) {
        if (!has_loc(src) || !has_loc(dst)) throw ValidationError("edge endpoint is not a location");
        if (find_edge(src, dst))
            throw ValidationError("duplicate edge " + to_string(src) + " -> " + to_string(dst));
        m_edges.push_back(Edge{src, dst, std::move(s), order_key.value_or(src.id)});
    }

    void remove_edge(Loc src, Loc dst) {
        auto it = std::find_if(m_edges.begin(), m_edges.end(),
                               [&](const Edge& e) { return e.src == src && e.dst == dst; });
        if (it == m_edges.end()) throw ValidationError("no edge " + to_string(src) + " -> " + to_string(dst));
        m_edges.erase(it);
    }

    void relabel_edge(Loc src, Loc dst, Stmt s) {
        for (auto& e : m_edges)
            if (e.src == src && e.dst == dst) {
                e.stmt = std::move(s);
                return;
            }
        throw ValidationError("no edge " + to_string(src) + " -> " + to_string(dst));
    }

    std::vector<const Edge*> out_edges(Loc l) const {
        std::vector<const Edge*> r;
        for (const auto& e : m_edges)
            if (e.src == l) r.push_back(&e);
        return r;
    }
    std::vector<const Edge*> in_edges(Loc l) const {
        std::vector<const Edge*> r;
        for (const auto& e : m_edges)
            if (e.dst == l) r.push_back(&e);
        return r;
    }

    std::string to_text() const {
        std::string s = "entry " + to_string(m_entry) + ", exit " + to_string(m_exit) + "\n";
        for (const auto& e : m_edges)
            s += "  " + to_string(e.src) + " -> " + to_string(e.dst) + " : " + to_string(e.stmt) + "\n";
        return s;
    }

    std::uint32_t next_id() const { return m_next_id; }

private:
    Loc m_entry{};
    Loc m_exit{};
    std::vector<Loc> m_locs; // sorted
    std::vector<Edge> m_edges;
    std::uint32_t m_next_id = 0;
};

struct Procedure {
    std::string name;
    std::optional<std::string> param;
    Cfg cfg;
};

struct Program {
    std::map<std::string, Procedure> procs;

    const Procedure& proc(const std::string& name) const {
        auto it = procs.find(name);
        if (it == procs.end()) throw ValidationError("unknown procedure '" + name + "'");
        return it->second;
    }
    Procedure& proc(const std::string& name) {
        auto it = procs.find(name);
        if (it == procs.end()) throw ValidationError("unknown procedure '" + name + "'");
        return it->second;
    }
    const Cfg& main() const { return proc("main").cfg; }
};

} // namespace dai

template <> struct std::hash<dai::Loc> {
    std::size_t operator()(dai::Loc l) const noexcept { return std::hash<std::uint32_t>{}(l.id); }
};
