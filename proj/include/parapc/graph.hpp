#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace parapc {

using Node = int;

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unordered node pair stored with x < y.
struct NodePair {
    Node x = 0;
    Node y = 0;

    NodePair() = default;
    NodePair(Node a, Node b) : x(a < b ? a : b), y(a < b ? b : a) {}

    auto operator<=>(const NodePair&) const = default;
};

/// Undirected simple graph over nodes 0..p-1. Keeps a boolean adjacency
/// matrix and sorted per-node neighbour lists in sync.
class Graph {
public:
    Graph() = default;
    explicit Graph(int p);

    int p() const noexcept { return p_; }
    bool adjacent(Node x, Node y) const { return adj_[index(x, y)] != 0; }
    std::span<const Node> neighbors(Node x) const { return nbrs_.at(x); }
    int degree(Node x) const { return static_cast<int>(nbrs_.at(x).size()); }
    std::size_t edge_count() const noexcept { return edges_; }

    void add_edge(Node x, Node y);
    /// Returns false when the edge was not present.
    bool remove_edge(Node x, Node y);

    bool operator==(const Graph& other) const { return p_ == other.p_ && adj_ == other.adj_; }

private:
    std::size_t index(Node x, Node y) const;

    int p_ = 0;
    std::vector<std::uint8_t> adj_;
    std::vector<std::vector<Node>> nbrs_;
    std::size_t edges_ = 0;
};

Graph complete_graph(int p);

/// Frozen copy of every node's neighbour list, taken at the start of a level.
class AdjacencySnapshot {
public:
    AdjacencySnapshot() = default;
    explicit AdjacencySnapshot(std::vector<std::vector<Node>> adj) : adj_(std::move(adj)) {}

    int p() const noexcept { return static_cast<int>(adj_.size()); }
    std::span<const Node> adj(Node x) const { return adj_.at(x); }

private:
    std::vector<std::vector<Node>> adj_;
};

AdjacencySnapshot snapshot(const Graph& g);

/// Adjacent pairs (x < y) in lexicographic order.
std::vector<NodePair> adjacent_pairs(const Graph& g);

/// Separating sets for removed edges, keyed by unordered pair. Sets are kept
/// sorted by node index.
class SepsetStore {
public:
    void set(NodePair pair, std::vector<Node> z);
    const std::vector<Node>* find(NodePair pair) const;
    bool contains(NodePair pair) const { return map_.count(pair) != 0; }
    std::size_t size() const noexcept { return map_.size(); }
    const std::map<NodePair, std::vector<Node>>& entries() const noexcept { return map_; }

    bool operator==(const SepsetStore&) const = default;

private:
    std::map<NodePair, std::vector<Node>> map_;
};

/// Directed graph over nodes 0..p-1. Acyclicity is not enforced on
/// insertion; callers that require a DAG check is_acyclic().
class Digraph {
public:
    Digraph() = default;
    explicit Digraph(int p);
    static Digraph from_edges(int p, std::span<const std::pair<Node, Node>> edges);

    int p() const noexcept { return p_; }
    bool has_edge(Node from, Node to) const { return arc_[index(from, to)] != 0; }
    bool adjacent(Node a, Node b) const { return has_edge(a, b) || has_edge(b, a); }
    std::span<const Node> parents(Node x) const { return parents_.at(x); }
    std::span<const Node> children(Node x) const { return children_.at(x); }
    std::size_t edge_count() const noexcept { return edges_; }

    void add_edge(Node from, Node to);
    /// Edges (from, to) ordered by from, then to.
    std::vector<std::pair<Node, Node>> edges() const;

    bool is_acyclic() const;
    /// Throws GraphError on a cycle.
    std::vector<Node> topological_order() const;
    /// Undirected skeleton.
    Graph skeleton() const;

    bool operator==(const Digraph& other) const { return p_ == other.p_ && arc_ == other.arc_; }

private:
    std::size_t index(Node a, Node b) const;

    int p_ = 0;
    std::vector<std::uint8_t> arc_;
    std::vector<std::vector<Node>> parents_;
    std::vector<std::vector<Node>> children_;
    std::size_t edges_ = 0;
};

/// Mixed graph of directed and undirected edges. Internally a mark matrix:
/// mark(a, b) set means "a has a tail-end edge towards b"; both marks set is
/// an undirected edge a - b, exactly one is a directed edge.
class CpdagGraph {
public:
    CpdagGraph() = default;
    explicit CpdagGraph(int p);
    static CpdagGraph from_skeleton(const Graph& g);
    static CpdagGraph from_dag(const Digraph& dag);

    int p() const noexcept { return p_; }
    bool adjacent(Node a, Node b) const { return mark(a, b) || mark(b, a); }
    bool has_directed(Node from, Node to) const { return mark(from, to) && !mark(to, from); }
    bool has_undirected(Node a, Node b) const { return mark(a, b) && mark(b, a); }

    void add_undirected(Node a, Node b);
    /// Turns an existing undirected edge a - b into a -> b.
    void orient(Node from, Node to);

    std::vector<Node> parents(Node x) const;
    std::vector<Node> undirected_neighbors(Node x) const;
    std::vector<std::pair<Node, Node>> directed_edges() const;
    std::vector<NodePair> undirected_edges() const;
    Graph skeleton() const;
    /// True when the directed part contains no cycle.
    bool directed_part_acyclic() const;

    bool operator==(const CpdagGraph& other) const { return p_ == other.p_ && mark_ == other.mark_; }

private:
    bool mark(Node a, Node b) const { return mark_[index(a, b)] != 0; }
    std::size_t index(Node a, Node b) const;

    int p_ = 0;
    std::vector<std::uint8_t> mark_;
};

/// Edge list, one "nameX<TAB>nameY" line per edge with nameX < nameY,
/// lines sorted.
void write_skeleton_tsv(std::ostream& out, const Graph& g, std::span<const std::string> names);

/// "nameX<TAB>nameY<TAB>Z1,Z2,..." per removed edge, lines sorted.
void write_sepsets_tsv(std::ostream& out, const SepsetStore& seps, std::span<const std::string> names);

void write_cpdag_dot(std::ostream& out, const CpdagGraph& g, std::span<const std::string> names);

} // namespace parapc
