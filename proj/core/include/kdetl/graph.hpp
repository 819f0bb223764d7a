#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kdetl {

struct Arc {
    int parent = 0;
    int child = 0;
    friend auto operator<=>(const Arc&, const Arc&) = default;
};

struct Edge {
    int a = 0;  // a < b
    int b = 0;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Node set shared by Dag and Pdag: names plus name-order ranks used for every
// deterministic tie-break, so results do not depend on column order.
class NodeSet {
  public:
    NodeSet() = default;
    explicit NodeSet(std::vector<std::string> names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(int v) const { return names_[static_cast<std::size_t>(v)]; }
    std::optional<int> find(std::string_view name) const;
    int index_of(std::string_view name) const;
    // Position of v when nodes are sorted by name.
    int rank(int v) const { return rank_[static_cast<std::size_t>(v)]; }
    bool name_less(int a, int b) const { return rank(a) < rank(b); }

    friend bool operator==(const NodeSet& a, const NodeSet& b) { return a.names_ == b.names_; }

  private:
    std::vector<std::string> names_;
    std::vector<int> rank_;
};

/// Directed acyclic graph over named nodes. All mutators keep it acyclic.
class Dag {
  public:
    Dag() = default;
    explicit Dag(std::vector<std::string> names);
    explicit Dag(NodeSet nodes);

    std::size_t size() const noexcept { return nodes_.size(); }
    const NodeSet& nodes() const noexcept { return nodes_; }
    const std::vector<std::string>& names() const noexcept { return nodes_.names(); }

    bool has_arc(int parent, int child) const { return adj_[idx(parent, child)] != 0; }
    bool adjacent(int a, int b) const { return has_arc(a, b) || has_arc(b, a); }
    const std::vector<int>& parents(int v) const { return parents_[static_cast<std::size_t>(v)]; }
    std::vector<int> children(int v) const;
    std::size_t num_arcs() const noexcept { return num_arcs_; }
    std::size_t max_indegree() const;
    std::vector<Arc> arcs() const;

    // True if a directed path from -> ... -> to exists (from == to counts).
    bool has_path(int from, int to) const;
    bool can_add_arc(int parent, int child) const;

    // Throws kdetl::Error on self-loops, duplicates or cycles.
    void add_arc(int parent, int child);
    void add_arc(std::string_view parent, std::string_view child);
    void remove_arc(int parent, int child);

    std::vector<int> topological_order() const;

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.nodes_ == b.nodes_ && a.adj_ == b.adj_;
    }

  private:
    std::size_t idx(int a, int b) const {
        return static_cast<std::size_t>(a) * nodes_.size() + static_cast<std::size_t>(b);
    }

    NodeSet nodes_;
    std::vector<std::uint8_t> adj_;
    std::vector<std::vector<int>> parents_;
    std::size_t num_arcs_ = 0;
};

enum class MoveKind { add, remove, flip };

// flip(from, to) reverses the existing arc from->to.
struct Move {
    MoveKind kind = MoveKind::add;
    int from = 0;
    int to = 0;
    friend auto operator<=>(const Move&, const Move&) = default;
};

Move inverse(const Move& m);
std::string to_string(const Move& m, const NodeSet& nodes);

/// Applies a single-arc move. Returns nullopt when the move would create a
/// cycle; throws when the arc required by the move is missing (or, for add,
/// already present).
std::optional<Dag> mutate(const Dag& g, const Move& move);

/// Partially directed graph: each adjacent pair is either an arc or an
/// undirected edge.
class Pdag {
  public:
    enum class Link : std::uint8_t { none = 0, out, in, undirected };

    Pdag() = default;
    explicit Pdag(std::vector<std::string> names);
    explicit Pdag(NodeSet nodes);
    static Pdag complete(std::vector<std::string> names);
    static Pdag from_dag(const Dag& g);

    std::size_t size() const noexcept { return nodes_.size(); }
    const NodeSet& nodes() const noexcept { return nodes_; }

    Link link(int a, int b) const { return links_[idx(a, b)]; }
    bool has_arc(int a, int b) const { return link(a, b) == Link::out; }
    bool has_edge(int a, int b) const { return link(a, b) == Link::undirected; }
    bool adjacent(int a, int b) const { return link(a, b) != Link::none; }

    void add_arc(int parent, int child);
    void add_edge(int a, int b);
    void remove(int a, int b);
    // Turns an undirected edge a-b into a->b.
    void orient(int a, int b) { add_arc(a, b); }

    std::vector<int> adjacents(int v) const;
    std::vector<int> neighbors(int v) const;  // undirected
    std::vector<int> parents(int v) const;
    std::vector<int> children(int v) const;
    std::vector<Arc> arcs() const;
    std::vector<Edge> edges() const;

    friend bool operator==(const Pdag& a, const Pdag& b) {
        return a.nodes_ == b.nodes_ && a.links_ == b.links_;
    }

  private:
    std::size_t idx(int a, int b) const {
        return static_cast<std::size_t>(a) * nodes_.size() + static_cast<std::size_t>(b);
    }
    void set(int a, int b, Link ab);

    NodeSet nodes_;
    std::vector<Link> links_;
};

/// Separating sets found during the adjacency search, keyed by unordered pair.
class SepsetTable {
  public:
    void add(int a, int b, std::vector<int> sepset);
    const std::vector<std::vector<int>>& get(int a, int b) const;
    bool contains(int a, int b) const;
    std::size_t size() const noexcept { return table_.size(); }

  private:
    static std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }
    std::map<std::pair<int, int>, std::vector<std::vector<int>>> table_;
};

// Meek rules R1-R4 applied to a fixpoint.
void apply_meek_rules(Pdag& g);

/// Dor-Tarsi extension of a PDAG to a DAG with the same skeleton and no new
/// v-structures. When no consistent extension exists, the remaining
/// undirected edges are oriented in ascending name order, skipping
/// orientations that close a cycle and dropping an edge if both do.
Dag extend_to_dag(const Pdag& g);

// Unshielded colliders a->c<-b (a < b), from directed arcs only.
std::vector<std::pair<Edge, int>> v_structures(const Pdag& g);
std::vector<std::pair<Edge, int>> v_structures(const Dag& g);

/// Structural Hamming distance between DAGs over the same nodes: each missing
/// edge, extra edge or reversed arc costs one.
std::size_t shd(const Dag& truth, const Dag& estimate);

/// SHD scaled by one plus the absolute difference in arc counts.
double dhd(const Dag& truth, const Dag& estimate);

bool d_separated(const Dag& g, int x, int y, std::span<const int> z);

}  // namespace kdetl
