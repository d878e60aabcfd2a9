#pragma once

#include <span>
#include <vector>

#include "parapc/graph.hpp"

namespace parapc {

/// Visits every size-k subset of `pool` in lexicographic combination order
/// (positions 0..k-1 first, last position advancing fastest). `visit`
/// receives the subset as a span and returns true to stop early.
/// Returns true if a visit stopped the scan.
template <class Visit>
bool for_each_combination(std::span<const Node> pool, int k, Visit&& visit) {
    const int m = static_cast<int>(pool.size());
    if (k < 0 || k > m) return false;
    std::vector<int> pos(k);
    std::vector<Node> subset(k);
    for (int i = 0; i < k; ++i) pos[i] = i;
    while (true) {
        for (int i = 0; i < k; ++i) subset[i] = pool[pos[i]];
        if (visit(std::span<const Node>(subset))) return true;
        int i = k - 1;
        while (i >= 0 && pos[i] == m - k + i) --i;
        if (i < 0) return false;
        ++pos[i];
        for (int j = i + 1; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
}

} // namespace parapc
