#pragma once

// Demanded abstract interpretation graph: reference cells connected by
// computations, plus its construction from a CFG and the structural checks.

#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dai/daig/naming.hpp"
#include "dai/domain/domain.hpp"

namespace dai {

enum class CellType : std::uint8_t { Stmt, State };

template <class D>
struct Cell {
    using State = typename D::State;

    CellType type = CellType::State;
    std::optional<Stmt> stmt;
    std::optional<State> state;
    // template cell this one was instantiated from
    Name templ;
    mutable std::optional<Digest> digest;
    // last dirtying pass that reached this cell
    std::uint64_t visit = 0;

    bool filled() const { return type == CellType::Stmt ? stmt.has_value() : state.has_value(); }
    void clear() {
        stmt.reset();
        state.reset();
        digest.reset();
    }
};

struct Computation {
    Name dest;
    FnSymbol fn = FnSymbol::Transfer;
    std::vector<Name> srcs;
    // template computation (its destination name) and the instance counters
    Name templ;
    IterVec inst;

    bool same_shape(const Computation& o) const { return fn == o.fn && srcs == o.srcs; }
};

inline std::string to_string(const Computation& c) {
    std::string s = to_string(c.dest) + " <- " + to_string(c.fn) + "(";
    for (std::size_t i = 0; i < c.srcs.size(); ++i) s += (i ? ", " : "") + to_string(c.srcs[i]);
    return s + ")";
}

// Cells and computations of one CFG's template DAIG (every loop at iterations
// 0 and 1), before any value other than statements is written.
struct DaigTemplate {
    struct CellSpec {
        Name name;
        CellType type;
        std::optional<Stmt> stmt;
    };
    std::vector<CellSpec> cells;
    std::vector<Computation> comps;
    Name entry;
};

// With `only`, restricted to the entries owned by the marked locations: their
// state, iterate and fix cells with the computations writing them, and every
// edge incident to a marked location.
inline DaigTemplate build_template(const Cfg& cfg, const LoopInfo& li, const std::vector<char>* only = nullptr) {
    auto marked = [&](Loc l) { return !only || (l.id < only->size() && (*only)[l.id]); };
    Naming nm(li);
    DaigTemplate t;
    t.entry = nm.state(cfg.entry());
    for (const auto& e : cfg.edges()) {
        if (!marked(e.src) && !marked(e.dst)) continue;
        Name sc = nm.stmt(e.src, e.dst);
        t.cells.push_back({sc, CellType::Stmt, e.stmt});
        Name dest = nm.transfer_dest(e.src, e.dst);
        t.comps.push_back({dest, FnSymbol::Transfer, {sc, nm.source(e.src, e.dst)}, dest, {}});
        if (dest != nm.state(e.dst)) t.cells.push_back({dest, CellType::State, std::nullopt});
    }
    for (Loc l : cfg.locs()) {
        if (!marked(l)) continue;
        Name s = nm.state(l);
        t.cells.push_back({s, CellType::State, std::nullopt});
        if (li.is_join(l)) {
            std::vector<Name> ins;
            for (std::size_t i = 1; i <= li.fwd_indegree(l); ++i) ins.push_back(Naming::prejoin(i, s));
            t.comps.push_back({s, FnSymbol::Join, ins, s, {}});
        }
        if (li.is_head(l)) {
            Name it1 = nm.iterate(l, {}, 1);
            t.cells.push_back({it1, CellType::State, std::nullopt});
            t.comps.push_back({it1, FnSymbol::Widen, {nm.iterate(l, {}, 0), nm.prewiden(l, {}, 0)}, it1, {}});
            Name fx = nm.fix(l);
            t.cells.push_back({fx, CellType::State, std::nullopt});
            t.comps.push_back({fx, FnSymbol::Fix, {nm.iterate(l, {}, 0), it1}, fx, {}});
        }
    }
    return t;
}

// Heads whose counters vary across instances of a template computation,
// outermost first.
inline std::vector<Loc> replication_heads(const Computation& c, const LoopInfo& li) {
    std::vector<Loc> heads;
    const Name& d = c.dest;
    // the state name the computation writes (a pre-join cell wraps one)
    Name s = d;
    if (d.kind() == NameKind::Prod) {
        if (d.lhs().kind() == NameKind::Idx) s = d.rhs();
        else s = d.lhs(); // pre-widen: the iterate it feeds from
    }
    if (s.kind() != NameKind::Iter) return heads;
    Loc base = s.lhs().as_loc();
    for (const auto& [h, k] : s.counts()) heads.push_back(Loc{h});
    bool drop_own = (c.fn == FnSymbol::Transfer || c.fn == FnSymbol::Join) && d.kind() != NameKind::Prod;
    drop_own = drop_own || (d.kind() == NameKind::Prod && d.lhs().kind() == NameKind::Idx);
    if (drop_own && li.is_head(base)) {
        // entry into iterate 0 of `base` is not replicated over `base` itself
        heads.erase(std::remove(heads.begin(), heads.end(), base), heads.end());
    }
    std::sort(heads.begin(), heads.end(), [&](Loc a, Loc b) { return li.depth(a) < li.depth(b); });
    return heads;
}

// Template computation instantiated at the given counters.
inline Computation instantiate(const Computation& tc, const IterVec& inst) {
    Computation c = tc;
    c.inst = inst;
    for (const auto& [h, k] : inst) {
        if (k == 0) continue;
        c.dest = incr(c.dest, Loc{h}, k);
        for (auto& s : c.srcs) s = incr(s, Loc{h}, k);
    }
    return c;
}

template <AbstractDomain D>
class Daig {
public:
    using State = typename D::State;
    using CellT = Cell<D>;

    const std::unordered_map<Name, CellT>& cells() const { return m_cells; }
    const std::unordered_map<Name, Computation>& comps() const { return m_comps; }
    const Name& entry() const { return m_entry; }
    void set_entry(Name n) { m_entry = std::move(n); }

    bool has_cell(const Name& n) const { return m_cells.count(n) > 0; }
    const CellT& cell(const Name& n) const {
        auto it = m_cells.find(n);
        if (it == m_cells.end()) throw ContractViolation("no cell named " + to_string(n));
        return it->second;
    }
    CellT& cell(const Name& n) {
        auto it = m_cells.find(n);
        if (it == m_cells.end()) throw ContractViolation("no cell named " + to_string(n));
        return it->second;
    }
    const Computation* comp_for(const Name& dest) const {
        auto it = m_comps.find(dest);
        return it == m_comps.end() ? nullptr : &it->second;
    }
    const std::vector<Name>& users(const Name& n) const {
        static const std::vector<Name> none;
        auto it = m_users.find(n);
        return it == m_users.end() ? none : it->second;
    }
    const std::vector<Name>& instances(const Name& templ) const {
        static const std::vector<Name> none;
        auto it = m_instances.find(templ);
        return it == m_instances.end() ? none : it->second;
    }

    // adds an empty cell unless one with that name exists
    CellT& ensure_cell(const Name& n, CellType t, const Name& templ) {
        auto [it, fresh] = m_cells.try_emplace(n);
        if (fresh) {
            it->second.type = t;
            it->second.templ = templ;
        }
        return it->second;
    }

    void remove_cell(const Name& n) { m_cells.erase(n); }

    // adds or replaces the computation writing c.dest
    void set_comp(Computation c) {
        auto it = m_comps.find(c.dest);
        if (it != m_comps.end()) {
            unlink(it->second);
            it->second = std::move(c);
            link(it->second);
        } else {
            auto [ins, ok] = m_comps.emplace(c.dest, std::move(c));
            link(ins->second);
            m_instances[ins->second.templ].push_back(ins->first);
        }
    }

    void remove_comp(const Name& dest) {
        auto it = m_comps.find(dest);
        if (it == m_comps.end()) return;
        unlink(it->second);
        auto& inst = m_instances[it->second.templ];
        inst.erase(std::remove(inst.begin(), inst.end(), dest), inst.end());
        if (inst.empty()) m_instances.erase(it->second.templ);
        m_comps.erase(it);
    }

    // retargets the sources of an existing computation
    void set_srcs(const Name& dest, std::vector<Name> srcs) {
        auto& c = m_comps.at(dest);
        unlink(c);
        c.srcs = std::move(srcs);
        link(c);
    }

private:
    void link(const Computation& c) {
        for (const auto& s : c.srcs) m_users[s].push_back(c.dest);
    }
    void unlink(const Computation& c) {
        for (const auto& s : c.srcs) {
            auto it = m_users.find(s);
            if (it == m_users.end()) continue;
            auto& v = it->second;
            auto pos = std::find(v.begin(), v.end(), c.dest);
            if (pos != v.end()) v.erase(pos);
            if (v.empty()) m_users.erase(it);
        }
    }

    std::unordered_map<Name, CellT> m_cells;
    std::unordered_map<Name, Computation> m_comps;
    std::unordered_map<Name, std::vector<Name>> m_users;
    std::unordered_map<Name, std::vector<Name>> m_instances;
    Name m_entry;
};

// Template DAIG of `cfg` with the entry cell holding `entry_state`.
template <AbstractDomain D>
Daig<D> init_daig(const Cfg& cfg, const LoopInfo& li, const typename D::State& entry_state) {
    DaigTemplate t = build_template(cfg, li);
    Daig<D> d;
    for (const auto& c : t.cells) {
        auto& cell = d.ensure_cell(c.name, c.type, c.name);
        if (c.stmt) cell.stmt = c.stmt;
    }
    for (const auto& c : t.comps) d.set_comp(c);
    d.set_entry(t.entry);
    d.cell(t.entry).state = entry_state;
    return d;
}

// Forward reachability along computations.
template <AbstractDomain D>
bool reaches(const Daig<D>& d, const Name& from, const Name& to) {
    std::unordered_set<Name> seen{from};
    std::vector<Name> work{from};
    while (!work.empty()) {
        Name n = work.back();
        work.pop_back();
        if (n == to) return true;
        for (const auto& u : d.users(n))
            if (seen.insert(u).second) work.push_back(u);
    }
    return false;
}

// Well-formedness: unique names and destinations (by construction of the maps),
// dangling references, acyclicity, typing, and no empty cell without a computation.
template <AbstractDomain D>
std::vector<std::string> check_wf(const Daig<D>& d) {
    std::vector<std::string> errs;
    for (const auto& [dest, c] : d.comps()) {
        if (!d.has_cell(dest)) {
            errs.push_back("computation writes missing cell " + to_string(dest));
            continue;
        }
        bool srcs_ok = true;
        for (const auto& s : c.srcs)
            if (!d.has_cell(s)) {
                errs.push_back("computation " + to_string(c) + " reads missing cell " + to_string(s));
                srcs_ok = false;
            }
        if (!srcs_ok) continue;
        auto ty = [&](const Name& n) { return d.cell(n).type; };
        bool typed = ty(dest) == CellType::State;
        switch (c.fn) {
        case FnSymbol::Transfer:
            typed = typed && c.srcs.size() == 2 && ty(c.srcs[0]) == CellType::Stmt && ty(c.srcs[1]) == CellType::State;
            break;
        case FnSymbol::Join:
            typed = typed && c.srcs.size() >= 2;
            for (const auto& s : c.srcs) typed = typed && ty(s) == CellType::State;
            break;
        case FnSymbol::Widen:
        case FnSymbol::Fix:
            typed = typed && c.srcs.size() == 2 && ty(c.srcs[0]) == CellType::State && ty(c.srcs[1]) == CellType::State;
            break;
        }
        if (!typed) errs.push_back("ill-typed computation " + to_string(c));
    }
    for (const auto& [n, cell] : d.cells()) {
        if (!cell.filled() && !d.comp_for(n)) errs.push_back("empty cell without computation: " + to_string(n));
    }
    // cycle detection, iterative three-color DFS over users
    std::unordered_map<Name, int> color;
    for (const auto& [root, cell] : d.cells()) {
        if (color[root] != 0) continue;
        std::vector<std::pair<Name, std::size_t>> stack{{root, 0}};
        color[root] = 1;
        while (!stack.empty()) {
            auto& [n, i] = stack.back();
            const auto& us = d.users(n);
            if (i < us.size()) {
                Name u = us[i++];
                int& cu = color[u];
                if (cu == 1) {
                    errs.push_back("cycle through " + to_string(u));
                    return errs;
                }
                if (cu == 0) {
                    cu = 1;
                    stack.push_back({u, 0});
                }
            } else {
                color[n] = 2;
                stack.pop_back();
            }
        }
    }
    return errs;
}

// Graphviz rendering: cells are boxes, each computation is a point node
// labelled with its function symbol.
template <AbstractDomain D>
std::string to_dot(const Daig<D>& d, const D& dom) {
    auto esc = [](std::string s) {
        std::string r;
        for (char c : s) {
            if (c == '"' || c == '\\') r += '\\';
            r += c;
        }
        return r;
    };
    std::vector<Name> names;
    for (const auto& [n, c] : d.cells()) names.push_back(n);
    std::sort(names.begin(), names.end(), [](const Name& a, const Name& b) { return to_string(a) < to_string(b); });
    std::unordered_map<Name, std::size_t> id;
    std::ostringstream os;
    os << "digraph daig {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        id[names[i]] = i;
        const auto& c = d.cell(names[i]);
        std::string val = "ε";
        if (c.stmt) val = to_string(*c.stmt);
        else if (c.state) val = dom.to_string(*c.state);
        os << "  c" << i << " [label=\"" << esc(to_string(names[i])) << "\\n" << esc(val) << "\"];\n";
    }
    std::size_t k = 0;
    std::vector<const Computation*> comps;
    for (const auto& [n, c] : d.comps()) comps.push_back(&c);
    std::sort(comps.begin(), comps.end(), [&](auto* a, auto* b) { return id[a->dest] < id[b->dest]; });
    for (const Computation* c : comps) {
        os << "  f" << k << " [shape=point, xlabel=\"" << to_string(c->fn) << "\"];\n";
        for (std::size_t i = 0; i < c->srcs.size(); ++i)
            os << "  c" << id[c->srcs[i]] << " -> f" << k << " [arrowhead=none, taillabel=\"" << i << "\"];\n";
        os << "  f" << k << " -> c" << id[c->dest] << ";\n";
        ++k;
    }
    os << "}\n";
    return os.str();
}

} // namespace dai
