#include "parapc/graph.hpp"

#include <algorithm>
#include <cctype>

namespace parapc {

namespace {

void check_node(Node x, int p) {
    if (x < 0 || x >= p) throw GraphError("node " + std::to_string(x) + " out of range [0, " + std::to_string(p) + ")");
}

std::size_t square_index(Node a, Node b, int p) {
    check_node(a, p);
    check_node(b, p);
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(p) + static_cast<std::size_t>(b);
}

void insert_sorted(std::vector<Node>& v, Node x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); }

void erase_sorted(std::vector<Node>& v, Node x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
}

} // namespace

// Graph

Graph::Graph(int p) : p_(p), adj_(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0), nbrs_(p) {
    if (p < 0) throw GraphError("negative node count");
}

std::size_t Graph::index(Node x, Node y) const { return square_index(x, y, p_); }

void Graph::add_edge(Node x, Node y) {
    if (x == y) throw GraphError("self-loop on node " + std::to_string(x));
    if (adjacent(x, y)) return;
    adj_[index(x, y)] = adj_[index(y, x)] = 1;
    insert_sorted(nbrs_[x], y);
    insert_sorted(nbrs_[y], x);
    ++edges_;
}

bool Graph::remove_edge(Node x, Node y) {
    if (x == y || !adjacent(x, y)) return false;
    adj_[index(x, y)] = adj_[index(y, x)] = 0;
    erase_sorted(nbrs_[x], y);
    erase_sorted(nbrs_[y], x);
    --edges_;
    return true;
}

Graph complete_graph(int p) {
    if (p < 1) throw GraphError("complete_graph needs p >= 1");
    Graph g(p);
    for (Node x = 0; x < p; ++x)
        for (Node y = x + 1; y < p; ++y) g.add_edge(x, y);
    return g;
}

AdjacencySnapshot snapshot(const Graph& g) {
    std::vector<std::vector<Node>> adj(g.p());
    for (Node x = 0; x < g.p(); ++x) {
        auto n = g.neighbors(x);
        adj[x].assign(n.begin(), n.end());
    }
    return AdjacencySnapshot(std::move(adj));
}

std::vector<NodePair> adjacent_pairs(const Graph& g) {
    std::vector<NodePair> out;
    out.reserve(g.edge_count());
    for (Node x = 0; x < g.p(); ++x)
        for (Node y : g.neighbors(x))
            if (y > x) out.emplace_back(x, y);
    return out;
}

// SepsetStore

void SepsetStore::set(NodePair pair, std::vector<Node> z) {
    std::sort(z.begin(), z.end());
    if (std::binary_search(z.begin(), z.end(), pair.x) || std::binary_search(z.begin(), z.end(), pair.y))
        throw GraphError("separating set contains an endpoint of its own pair");
    map_[pair] = std::move(z);
}

const std::vector<Node>* SepsetStore::find(NodePair pair) const {
    auto it = map_.find(pair);
    return it == map_.end() ? nullptr : &it->second;
}

// Digraph

Digraph::Digraph(int p)
    : p_(p), arc_(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0), parents_(p), children_(p) {
    if (p < 0) throw GraphError("negative node count");
}

Digraph Digraph::from_edges(int p, std::span<const std::pair<Node, Node>> edges) {
    Digraph d(p);
    for (auto [a, b] : edges) d.add_edge(a, b);
    return d;
}

std::size_t Digraph::index(Node a, Node b) const { return square_index(a, b, p_); }

void Digraph::add_edge(Node from, Node to) {
    if (from == to) throw GraphError("self-loop on node " + std::to_string(from));
    if (has_edge(from, to)) return;
    arc_[index(from, to)] = 1;
    insert_sorted(children_[from], to);
    insert_sorted(parents_[to], from);
    ++edges_;
}

std::vector<std::pair<Node, Node>> Digraph::edges() const {
    std::vector<std::pair<Node, Node>> out;
    out.reserve(edges_);
    for (Node a = 0; a < p_; ++a)
        for (Node b : children_[a]) out.emplace_back(a, b);
    return out;
}

std::vector<Node> Digraph::topological_order() const {
    std::vector<int> indeg(p_);
    for (Node x = 0; x < p_; ++x) indeg[x] = static_cast<int>(parents_[x].size());
    std::vector<Node> ready, order;
    for (Node x = p_ - 1; x >= 0; --x)
        if (indeg[x] == 0) ready.push_back(x);
    while (!ready.empty()) {
        Node x = ready.back();
        ready.pop_back();
        order.push_back(x);
        for (auto it = children_[x].rbegin(); it != children_[x].rend(); ++it)
            if (--indeg[*it] == 0) ready.push_back(*it);
    }
    if (static_cast<int>(order.size()) != p_) throw GraphError("directed graph contains a cycle");
    return order;
}

bool Digraph::is_acyclic() const {
    try {
        topological_order();
        return true;
    } catch (const GraphError&) {
        return false;
    }
}

Graph Digraph::skeleton() const {
    Graph g(p_);
    for (auto [a, b] : edges()) g.add_edge(a, b);
    return g;
}

// CpdagGraph

CpdagGraph::CpdagGraph(int p) : p_(p), mark_(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0) {
    if (p < 0) throw GraphError("negative node count");
}

CpdagGraph CpdagGraph::from_skeleton(const Graph& g) {
    CpdagGraph c(g.p());
    for (auto e : adjacent_pairs(g)) c.add_undirected(e.x, e.y);
    return c;
}

CpdagGraph CpdagGraph::from_dag(const Digraph& dag) {
    CpdagGraph c(dag.p());
    for (auto [a, b] : dag.edges()) {
        if (dag.has_edge(b, a)) throw GraphError("2-cycle in directed graph");
        c.mark_[c.index(a, b)] = 1;
    }
    return c;
}

std::size_t CpdagGraph::index(Node a, Node b) const { return square_index(a, b, p_); }

void CpdagGraph::add_undirected(Node a, Node b) {
    if (a == b) throw GraphError("self-loop on node " + std::to_string(a));
    mark_[index(a, b)] = mark_[index(b, a)] = 1;
}

void CpdagGraph::orient(Node from, Node to) {
    if (!has_undirected(from, to))
        throw GraphError("cannot orient " + std::to_string(from) + " -> " + std::to_string(to) +
                         ": not an undirected edge");
    mark_[index(to, from)] = 0;
}

std::vector<Node> CpdagGraph::parents(Node x) const {
    std::vector<Node> out;
    for (Node a = 0; a < p_; ++a)
        if (a != x && has_directed(a, x)) out.push_back(a);
    return out;
}

std::vector<Node> CpdagGraph::undirected_neighbors(Node x) const {
    std::vector<Node> out;
    for (Node a = 0; a < p_; ++a)
        if (a != x && has_undirected(a, x)) out.push_back(a);
    return out;
}

std::vector<std::pair<Node, Node>> CpdagGraph::directed_edges() const {
    std::vector<std::pair<Node, Node>> out;
    for (Node a = 0; a < p_; ++a)
        for (Node b = 0; b < p_; ++b)
            if (a != b && has_directed(a, b)) out.emplace_back(a, b);
    return out;
}

std::vector<NodePair> CpdagGraph::undirected_edges() const {
    std::vector<NodePair> out;
    for (Node a = 0; a < p_; ++a)
        for (Node b = a + 1; b < p_; ++b)
            if (has_undirected(a, b)) out.emplace_back(a, b);
    return out;
}

Graph CpdagGraph::skeleton() const {
    Graph g(p_);
    for (Node a = 0; a < p_; ++a)
        for (Node b = a + 1; b < p_; ++b)
            if (adjacent(a, b)) g.add_edge(a, b);
    return g;
}

bool CpdagGraph::directed_part_acyclic() const {
    Digraph d(p_);
    for (auto [a, b] : directed_edges()) d.add_edge(a, b);
    return d.is_acyclic();
}

// Export

namespace {

std::pair<std::string, std::string> ordered_names(NodePair e, std::span<const std::string> names) {
    const auto& a = names[e.x];
    const auto& b = names[e.y];
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

bool plain_dot_id(const std::string& s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string dot_id(const std::string& s) {
    if (plain_dot_id(s)) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') q += '\\';
        q += c;
    }
    return q + '"';
}

void check_names(int p, std::span<const std::string> names) {
    if (static_cast<int>(names.size()) != p) throw GraphError("name count does not match node count");
}

} // namespace

void write_skeleton_tsv(std::ostream& out, const Graph& g, std::span<const std::string> names) {
    check_names(g.p(), names);
    std::vector<std::pair<std::string, std::string>> lines;
    for (auto e : adjacent_pairs(g)) lines.push_back(ordered_names(e, names));
    std::sort(lines.begin(), lines.end());
    for (const auto& [a, b] : lines) out << a << '\t' << b << '\n';
}

void write_sepsets_tsv(std::ostream& out, const SepsetStore& seps, std::span<const std::string> names) {
    std::vector<std::string> lines;
    for (const auto& [pair, z] : seps.entries()) {
        if (pair.y >= static_cast<Node>(names.size())) throw GraphError("sepset node without a name");
        auto [a, b] = ordered_names(pair, names);
        std::string line = a + '\t' + b + '\t';
        for (std::size_t i = 0; i < z.size(); ++i) line += (i ? "," : "") + names[z[i]];
        lines.push_back(std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) out << l << '\n';
}

void write_cpdag_dot(std::ostream& out, const CpdagGraph& g, std::span<const std::string> names) {
    check_names(g.p(), names);
    out << "digraph cpdag {\n";
    for (Node x = 0; x < g.p(); ++x) out << "  " << dot_id(names[x]) << ";\n";
    for (auto [a, b] : g.directed_edges()) out << "  " << dot_id(names[a]) << " -> " << dot_id(names[b]) << ";\n";
    for (auto e : g.undirected_edges())
        out << "  " << dot_id(names[e.x]) << " -> " << dot_id(names[e.y]) << " [dir=none];\n";
    out << "}\n";
}

} // namespace parapc
