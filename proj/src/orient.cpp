#include "parapc/orient.hpp"

#include <algorithm>
#include <set>

namespace parapc {

CpdagGraph orient_colliders(const Graph& skeleton, const SepsetStore& seps, std::vector<std::string>* conflicts) {
    const int p = skeleton.p();
    for (const auto& [pair, z] : seps.entries()) {
        if (pair.y >= p) throw GraphError("separating set refers to a node outside the skeleton");
        if (skeleton.adjacent(pair.x, pair.y))
            throw GraphError("separating set recorded for adjacent pair (" + std::to_string(pair.x) + ", " +
                             std::to_string(pair.y) + ")");
    }

    // collect every arrowhead claim first so the result does not depend on
    // the order triples are visited
    std::set<std::pair<Node, Node>> claims;
    for (Node z = 0; z < p; ++z) {
        auto nb = skeleton.neighbors(z);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                Node x = nb[i], y = nb[j];
                if (skeleton.adjacent(x, y)) continue;
                const auto* sep = seps.find(NodePair(x, y));
                if (!sep)
                    throw GraphError("no separating set for non-adjacent pair (" + std::to_string(x) + ", " +
                                     std::to_string(y) + ")");
                if (std::binary_search(sep->begin(), sep->end(), z)) continue;
                claims.emplace(x, z);
                claims.emplace(y, z);
            }
    }

    CpdagGraph g = CpdagGraph::from_skeleton(skeleton);
    for (auto [from, to] : claims) {
        if (claims.count({to, from})) {
            if (conflicts && from < to)
                conflicts->push_back("conflicting collider orientations on edge " + std::to_string(from) + " - " +
                                     std::to_string(to) + "; left undirected");
            continue;
        }
        g.orient(from, to);
    }
    return g;
}

namespace {

// R1: a -> b - c, a and c non-adjacent  =>  b -> c
bool rule1(CpdagGraph& g) {
    bool changed = false;
    const int p = g.p();
    for (Node b = 0; b < p; ++b)
        for (Node c = 0; c < p; ++c) {
            if (b == c || !g.has_undirected(b, c)) continue;
            for (Node a = 0; a < p; ++a) {
                if (a == b || a == c) continue;
                if (g.has_directed(a, b) && !g.adjacent(a, c)) {
                    g.orient(b, c);
                    changed = true;
                    break;
                }
            }
        }
    return changed;
}

// R2: a -> b -> c and a - c  =>  a -> c
bool rule2(CpdagGraph& g) {
    bool changed = false;
    const int p = g.p();
    for (Node a = 0; a < p; ++a)
        for (Node c = 0; c < p; ++c) {
            if (a == c || !g.has_undirected(a, c)) continue;
            for (Node b = 0; b < p; ++b) {
                if (b == a || b == c) continue;
                if (g.has_directed(a, b) && g.has_directed(b, c)) {
                    g.orient(a, c);
                    changed = true;
                    break;
                }
            }
        }
    return changed;
}

// R3: a - b, a - c1 -> b, a - c2 -> b, c1 and c2 non-adjacent  =>  a -> b
bool rule3(CpdagGraph& g) {
    bool changed = false;
    const int p = g.p();
    for (Node a = 0; a < p; ++a)
        for (Node b = 0; b < p; ++b) {
            if (a == b || !g.has_undirected(a, b)) continue;
            std::vector<Node> mids;
            for (Node c = 0; c < p; ++c)
                if (c != a && c != b && g.has_undirected(a, c) && g.has_directed(c, b)) mids.push_back(c);
            bool fire = false;
            for (std::size_t i = 0; i < mids.size() && !fire; ++i)
                for (std::size_t j = i + 1; j < mids.size() && !fire; ++j)
                    if (!g.adjacent(mids[i], mids[j])) fire = true;
            if (fire) {
                g.orient(a, b);
                changed = true;
            }
        }
    return changed;
}

// R4: a - b, a - c -> d -> b, a adjacent to d, c and b non-adjacent  =>  a -> b
bool rule4(CpdagGraph& g) {
    bool changed = false;
    const int p = g.p();
    for (Node a = 0; a < p; ++a)
        for (Node b = 0; b < p; ++b) {
            if (a == b || !g.has_undirected(a, b)) continue;
            bool fire = false;
            for (Node d = 0; d < p && !fire; ++d) {
                if (d == a || d == b || !g.has_directed(d, b) || !g.adjacent(a, d)) continue;
                for (Node c = 0; c < p && !fire; ++c) {
                    if (c == a || c == b || c == d) continue;
                    if (g.has_undirected(a, c) && g.has_directed(c, d) && !g.adjacent(c, b)) fire = true;
                }
            }
            if (fire) {
                g.orient(a, b);
                changed = true;
            }
        }
    return changed;
}

} // namespace

CpdagGraph meek_closure(CpdagGraph g) {
    while (true) {
        bool changed = rule1(g);
        changed |= rule2(g);
        changed |= rule3(g);
        changed |= rule4(g);
        if (!changed) return g;
    }
}

CpdagGraph orient(const Graph& skeleton, const SepsetStore& seps, std::vector<std::string>* conflicts) {
    return meek_closure(orient_colliders(skeleton, seps, conflicts));
}

} // namespace parapc
