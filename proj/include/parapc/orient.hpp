#pragma once

#include <string>
#include <vector>

#include "parapc/graph.hpp"

namespace parapc {

/// Orients every unshielded triple x - z - y (x, y non-adjacent) as the
/// collider x -> z <- y when z is not in sepset(x, y). An edge claimed in
/// both directions by different colliders stays undirected; a message for
/// each such edge is appended to `conflicts` when given.
CpdagGraph orient_colliders(const Graph& skeleton, const SepsetStore& seps,
                            std::vector<std::string>* conflicts = nullptr);

/// Applies Meek's rules R1-R4, in that order, sweeping to a fixpoint.
CpdagGraph meek_closure(CpdagGraph g);

/// orient_colliders followed by meek_closure.
CpdagGraph orient(const Graph& skeleton, const SepsetStore& seps, std::vector<std::string>* conflicts = nullptr);

} // namespace parapc
