#include "kdetl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "kdetl/error.hpp"

namespace kdetl {

NodeSet::NodeSet(std::vector<std::string> names) : names_(std::move(names)) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) throw Error("duplicate-name", "duplicate node name '" + n + "'");
    }
    std::vector<int> order(names_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return names_[a] < names_[b]; });
    rank_.assign(names_.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) rank_[order[r]] = static_cast<int>(r);
}

std::optional<int> NodeSet::find(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<int>(it - names_.begin());
}

int NodeSet::index_of(std::string_view name) const {
    if (auto v = find(name)) return *v;
    throw Error("unknown-node", "unknown node '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- Dag

Dag::Dag(std::vector<std::string> names) : Dag(NodeSet(std::move(names))) {}

Dag::Dag(NodeSet nodes)
    : nodes_(std::move(nodes)), adj_(nodes_.size() * nodes_.size(), 0), parents_(nodes_.size()) {}

std::vector<int> Dag::children(int v) const {
    std::vector<int> out;
    for (int c = 0; c < static_cast<int>(size()); ++c) {
        if (has_arc(v, c)) out.push_back(c);
    }
    return out;
}

std::size_t Dag::max_indegree() const {
    std::size_t m = 0;
    for (const auto& p : parents_) m = std::max(m, p.size());
    return m;
}

std::vector<Arc> Dag::arcs() const {
    std::vector<Arc> out;
    out.reserve(num_arcs_);
    for (int p = 0; p < static_cast<int>(size()); ++p) {
        for (int c = 0; c < static_cast<int>(size()); ++c) {
            if (has_arc(p, c)) out.push_back({p, c});
        }
    }
    return out;
}

bool Dag::has_path(int from, int to) const {
    if (from == to) return true;
    // Walk backwards from `to` through parent lists.
    std::vector<char> seen(size(), 0);
    std::vector<int> stack{to};
    seen[static_cast<std::size_t>(to)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int p : parents(v)) {
            if (p == from) return true;
            if (!seen[static_cast<std::size_t>(p)]) {
                seen[static_cast<std::size_t>(p)] = 1;
                stack.push_back(p);
            }
        }
    }
    return false;
}

bool Dag::can_add_arc(int parent, int child) const {
    return parent != child && !adjacent(parent, child) && !has_path(child, parent);
}

void Dag::add_arc(int parent, int child) {
    if (parent == child) throw Error("self-loop", "self-loop on '" + nodes_.name(parent) + "'");
    if (has_arc(parent, child)) throw Error("duplicate-arc", "arc already present");
    if (has_path(child, parent)) throw Error("cycle", "arc would create a cycle");
    adj_[idx(parent, child)] = 1;
    auto& ps = parents_[static_cast<std::size_t>(child)];
    ps.insert(std::upper_bound(ps.begin(), ps.end(), parent), parent);
    ++num_arcs_;
}

void Dag::add_arc(std::string_view parent, std::string_view child) {
    add_arc(nodes_.index_of(parent), nodes_.index_of(child));
}

void Dag::remove_arc(int parent, int child) {
    if (!has_arc(parent, child)) throw Error("missing-arc", "arc not present");
    adj_[idx(parent, child)] = 0;
    auto& ps = parents_[static_cast<std::size_t>(child)];
    ps.erase(std::find(ps.begin(), ps.end(), parent));
    --num_arcs_;
}

std::vector<int> Dag::topological_order() const {
    const int n = static_cast<int>(size());
    std::vector<std::size_t> indeg(size());
    for (int v = 0; v < n; ++v) indeg[static_cast<std::size_t>(v)] = parents(v).size();
    std::vector<int> order;
    order.reserve(size());
    std::vector<int> ready;
    for (int v = 0; v < n; ++v) {
        if (indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
        // Lowest index first keeps the order stable.
        const auto it = std::min_element(ready.begin(), ready.end());
        const int v = *it;
        ready.erase(it);
        order.push_back(v);
        for (int c = 0; c < n; ++c) {
            if (has_arc(v, c) && --indeg[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
        }
    }
    return order;
}

Move inverse(const Move& m) {
    switch (m.kind) {
        case MoveKind::add: return {MoveKind::remove, m.from, m.to};
        case MoveKind::remove: return {MoveKind::add, m.from, m.to};
        case MoveKind::flip: return {MoveKind::flip, m.to, m.from};
    }
    return m;
}

std::string to_string(const Move& m, const NodeSet& nodes) {
    const char* kind = m.kind == MoveKind::add ? "add" : m.kind == MoveKind::remove ? "remove" : "flip";
    return std::string(kind) + " " + nodes.name(m.from) + "->" + nodes.name(m.to);
}

std::optional<Dag> mutate(const Dag& g, const Move& move) {
    Dag out = g;
    switch (move.kind) {
        case MoveKind::add:
            if (move.from == move.to) throw Error("self-loop", "cannot add a self-loop");
            if (g.has_arc(move.from, move.to)) throw Error("duplicate-arc", "add: arc already present");
            if (g.has_arc(move.to, move.from) || g.has_path(move.to, move.from)) return std::nullopt;
            out.add_arc(move.from, move.to);
            return out;
        case MoveKind::remove:
            if (!g.has_arc(move.from, move.to)) throw Error("missing-arc", "remove: arc not present");
            out.remove_arc(move.from, move.to);
            return out;
        case MoveKind::flip:
            if (!g.has_arc(move.from, move.to)) throw Error("missing-arc", "flip: arc not present");
            out.remove_arc(move.from, move.to);
            if (out.has_path(move.from, move.to)) return std::nullopt;
            out.add_arc(move.to, move.from);
            return out;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- Pdag

Pdag::Pdag(std::vector<std::string> names) : Pdag(NodeSet(std::move(names))) {}

Pdag::Pdag(NodeSet nodes) : nodes_(std::move(nodes)), links_(nodes_.size() * nodes_.size(), Link::none) {}

Pdag Pdag::complete(std::vector<std::string> names) {
    Pdag g(std::move(names));
    for (int a = 0; a < static_cast<int>(g.size()); ++a) {
        for (int b = a + 1; b < static_cast<int>(g.size()); ++b) g.add_edge(a, b);
    }
    return g;
}

Pdag Pdag::from_dag(const Dag& d) {
    Pdag g(d.nodes());
    for (const auto& a : d.arcs()) g.add_arc(a.parent, a.child);
    return g;
}

void Pdag::set(int a, int b, Link ab) {
    if (a == b) throw Error("self-loop", "self-loop on '" + nodes_.name(a) + "'");
    Link ba = Link::none;
    if (ab == Link::out) ba = Link::in;
    if (ab == Link::in) ba = Link::out;
    if (ab == Link::undirected) ba = Link::undirected;
    links_[idx(a, b)] = ab;
    links_[idx(b, a)] = ba;
}

void Pdag::add_arc(int parent, int child) { set(parent, child, Link::out); }
void Pdag::add_edge(int a, int b) { set(a, b, Link::undirected); }
void Pdag::remove(int a, int b) { set(a, b, Link::none); }

namespace {
template <typename Pred>
std::vector<int> collect(std::size_t n, Pred pred) {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(n); ++v) {
        if (pred(v)) out.push_back(v);
    }
    return out;
}
}  // namespace

std::vector<int> Pdag::adjacents(int v) const {
    return collect(size(), [&](int u) { return u != v && adjacent(v, u); });
}
std::vector<int> Pdag::neighbors(int v) const {
    return collect(size(), [&](int u) { return u != v && has_edge(v, u); });
}
std::vector<int> Pdag::parents(int v) const {
    return collect(size(), [&](int u) { return u != v && has_arc(u, v); });
}
std::vector<int> Pdag::children(int v) const {
    return collect(size(), [&](int u) { return u != v && has_arc(v, u); });
}

std::vector<Arc> Pdag::arcs() const {
    std::vector<Arc> out;
    for (int a = 0; a < static_cast<int>(size()); ++a) {
        for (int b = 0; b < static_cast<int>(size()); ++b) {
            if (a != b && has_arc(a, b)) out.push_back({a, b});
        }
    }
    return out;
}

std::vector<Edge> Pdag::edges() const {
    std::vector<Edge> out;
    for (int a = 0; a < static_cast<int>(size()); ++a) {
        for (int b = a + 1; b < static_cast<int>(size()); ++b) {
            if (has_edge(a, b)) out.push_back({a, b});
        }
    }
    return out;
}

// ---------------------------------------------------------------- SepsetTable

void SepsetTable::add(int a, int b, std::vector<int> sepset) {
    std::sort(sepset.begin(), sepset.end());
    auto& sets = table_[key(a, b)];
    if (std::find(sets.begin(), sets.end(), sepset) == sets.end()) sets.push_back(std::move(sepset));
}

const std::vector<std::vector<int>>& SepsetTable::get(int a, int b) const {
    static const std::vector<std::vector<int>> empty;
    const auto it = table_.find(key(a, b));
    return it == table_.end() ? empty : it->second;
}

bool SepsetTable::contains(int a, int b) const { return table_.count(key(a, b)) != 0; }

// ---------------------------------------------------------------- Meek rules

namespace {

std::vector<int> by_name(const NodeSet& nodes) {
    std::vector<int> order(nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return nodes.name_less(a, b); });
    return order;
}

// Each rule orients a - b as a -> b.
bool meek_r1(const Pdag& g, int a, int b) {
    for (int c : g.parents(a)) {
        if (c != b && !g.adjacent(c, b)) return true;
    }
    return false;
}

bool meek_r2(const Pdag& g, int a, int b) {
    for (int c : g.children(a)) {
        if (g.has_arc(c, b)) return true;
    }
    return false;
}

bool meek_r3(const Pdag& g, int a, int b) {
    const auto nb = g.neighbors(a);
    for (std::size_t i = 0; i < nb.size(); ++i) {
        const int c = nb[i];
        if (c == b || !g.has_arc(c, b)) continue;
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
            const int d = nb[j];
            if (d == b || !g.has_arc(d, b)) continue;
            if (!g.adjacent(c, d)) return true;
        }
    }
    return false;
}

bool meek_r4(const Pdag& g, int a, int b) {
    for (int k : g.neighbors(a)) {
        if (k == b || g.adjacent(k, b)) continue;
        for (int l : g.children(k)) {
            if (l != a && g.has_arc(l, b) && g.adjacent(a, l)) return true;
        }
    }
    return false;
}

}  // namespace

void apply_meek_rules(Pdag& g) {
    const auto order = by_name(g.nodes());
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a : order) {
            for (int b : order) {
                if (a == b || !g.has_edge(a, b)) continue;
                if (meek_r1(g, a, b) || meek_r2(g, a, b) || meek_r3(g, a, b) || meek_r4(g, a, b)) {
                    g.orient(a, b);
                    changed = true;
                }
            }
        }
    }
}

// ---------------------------------------------------------------- extension

namespace {

// Inserts parent->child; if that closes a cycle tries the reverse, else drops.
void insert_or_reverse(Dag& d, int parent, int child) {
    if (d.adjacent(parent, child)) return;
    if (d.can_add_arc(parent, child)) {
        d.add_arc(parent, child);
    } else if (d.can_add_arc(child, parent)) {
        d.add_arc(child, parent);
    }
}

}  // namespace

Dag extend_to_dag(const Pdag& g) {
    const int n = static_cast<int>(g.size());
    Pdag work = g;
    std::vector<char> alive(g.size(), 1);
    std::vector<Arc> oriented;

    auto is_sink_candidate = [&](int x) {
        for (int y = 0; y < n; ++y) {
            if (alive[static_cast<std::size_t>(y)] && y != x && work.has_arc(x, y)) return false;
        }
        std::vector<int> adj;
        for (int y = 0; y < n; ++y) {
            if (alive[static_cast<std::size_t>(y)] && y != x && work.adjacent(x, y)) adj.push_back(y);
        }
        for (int y : adj) {
            if (!work.has_edge(x, y)) continue;
            for (int z : adj) {
                if (z != y && !work.adjacent(y, z)) return false;
            }
        }
        return true;
    };

    for (int remaining = n; remaining > 0; --remaining) {
        // Among candidates take the greatest name, so a lone edge a - b becomes a -> b.
        int pick = -1;
        for (int x = 0; x < n; ++x) {
            if (!alive[static_cast<std::size_t>(x)] || !is_sink_candidate(x)) continue;
            if (pick < 0 || g.nodes().name_less(pick, x)) pick = x;
        }
        if (pick < 0) break;
        for (int y = 0; y < n; ++y) {
            if (alive[static_cast<std::size_t>(y)] && y != pick && work.has_edge(pick, y)) {
                oriented.push_back({y, pick});
            }
        }
        alive[static_cast<std::size_t>(pick)] = 0;
    }

    const auto& names = g.nodes();
    auto name_order = [&](const Arc& l, const Arc& r) {
        if (l.parent != r.parent) return names.name_less(l.parent, r.parent);
        return names.name_less(l.child, r.child);
    };

    Dag out(g.nodes());
    auto directed = g.arcs();
    std::sort(directed.begin(), directed.end(), name_order);
    for (const auto& a : directed) insert_or_reverse(out, a.parent, a.child);
    for (const auto& a : oriented) insert_or_reverse(out, a.parent, a.child);

    // Fallback for whatever the sink elimination could not orient.
    std::vector<Arc> leftover;
    for (const auto& e : g.edges()) {
        if (out.adjacent(e.a, e.b)) continue;
        Arc a = names.name_less(e.a, e.b) ? Arc{e.a, e.b} : Arc{e.b, e.a};
        leftover.push_back(a);
    }
    std::sort(leftover.begin(), leftover.end(), name_order);
    for (const auto& a : leftover) insert_or_reverse(out, a.parent, a.child);
    return out;
}

std::vector<std::pair<Edge, int>> v_structures(const Pdag& g) {
    std::vector<std::pair<Edge, int>> out;
    const int n = static_cast<int>(g.size());
    for (int c = 0; c < n; ++c) {
        const auto ps = g.parents(c);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            for (std::size_t j = i + 1; j < ps.size(); ++j) {
                if (!g.adjacent(ps[i], ps[j])) out.push_back({Edge{ps[i], ps[j]}, c});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<Edge, int>> v_structures(const Dag& g) { return v_structures(Pdag::from_dag(g)); }

// ---------------------------------------------------------------- metrics

namespace {
void require_same_nodes(const Dag& a, const Dag& b) {
    if (!(a.nodes() == b.nodes())) throw Error("node-mismatch", "graphs are over different node sets");
}
}  // namespace

std::size_t shd(const Dag& truth, const Dag& estimate) {
    require_same_nodes(truth, estimate);
    std::size_t d = 0;
    const int n = static_cast<int>(truth.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (truth.has_arc(a, b) != estimate.has_arc(a, b) || truth.has_arc(b, a) != estimate.has_arc(b, a)) {
                ++d;
            }
        }
    }
    return d;
}

double dhd(const Dag& truth, const Dag& estimate) {
    const auto s = static_cast<double>(shd(truth, estimate));
    const double density_gap =
        std::abs(static_cast<double>(truth.num_arcs()) - static_cast<double>(estimate.num_arcs()));
    return s * (1.0 + density_gap);
}

bool d_separated(const Dag& g, int x, int y, std::span<const int> z) {
    const auto n = g.size();
    std::vector<char> in_z(n, 0);
    for (int v : z) in_z[static_cast<std::size_t>(v)] = 1;
    if (in_z[static_cast<std::size_t>(x)] || in_z[static_cast<std::size_t>(y)]) return true;

    // Moralized ancestral graph of {x, y} u Z, with Z removed.
    std::vector<char> anc(n, 0);
    std::vector<int> stack{x, y};
    stack.insert(stack.end(), z.begin(), z.end());
    for (int v : stack) anc[static_cast<std::size_t>(v)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int p : g.parents(v)) {
            if (!anc[static_cast<std::size_t>(p)]) {
                anc[static_cast<std::size_t>(p)] = 1;
                stack.push_back(p);
            }
        }
    }
    std::vector<std::vector<int>> und(n);
    auto link = [&](int a, int b) {
        und[static_cast<std::size_t>(a)].push_back(b);
        und[static_cast<std::size_t>(b)].push_back(a);
    };
    for (int v = 0; v < static_cast<int>(n); ++v) {
        if (!anc[static_cast<std::size_t>(v)]) continue;
        const auto& ps = g.parents(v);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            link(ps[i], v);
            for (std::size_t j = i + 1; j < ps.size(); ++j) link(ps[i], ps[j]);
        }
    }
    std::vector<char> seen(n, 0);
    stack = {x};
    seen[static_cast<std::size_t>(x)] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (v == y) return false;
        for (int u : und[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(u)] && !in_z[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = 1;
                stack.push_back(u);
            }
        }
    }
    return true;
}

}  // namespace kdetl
