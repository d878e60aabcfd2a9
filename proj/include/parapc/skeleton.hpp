#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "parapc/citest.hpp"
#include "parapc/graph.hpp"

namespace parapc {

enum class Mode { original, stable, parallel };

std::string to_string(Mode m);
/// Parses "original", "stable" or "parallel".
Mode parse_mode(const std::string& s);

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{512} << 20;

struct LearnerConfig {
    Mode mode = Mode::parallel;
    double alpha = 0.05;
    int workers = 1;
    /// Split each level into batches of batch_size edges.
    bool mem_efficient = false;
    /// Edges per batch; empty means derive it from memory_budget.
    std::optional<std::size_t> batch_size;
    std::size_t memory_budget = kDefaultMemoryBudget;
    std::optional<int> max_depth;
    /// Keep every parallel-mode EdgeVerdict in the result (diagnostics).
    bool record_verdicts = false;

    /// Throws std::invalid_argument describing the first bad field.
    void validate() const;
};

/// Outcome of the grouped scan of one edge at one level.
struct EdgeVerdict {
    NodePair pair;
    int level = 0;
    bool keep = true;
    std::vector<Node> sepset;  ///< meaningful only when keep is false
    std::size_t x_side_tests = 0;
    std::size_t y_side_tests = 0;
    bool removed_on_x_side = false;
};

struct LevelStats {
    int level = 0;
    std::size_t edges_at_start = 0;
    std::size_t edges_tested = 0;
    std::size_t ci_tests = 0;
    std::size_t edges_removed = 0;
    std::size_t batches = 0;
    std::size_t batch_size = 0;
    double millis = 0;
};

struct SkeletonResult {
    Graph graph;
    SepsetStore sepsets;
    std::vector<LevelStats> levels;
    /// max_depth stopped the search while tests remained.
    bool depth_truncated = false;
    /// High-water mark of verdicts held by the coordinator between a batch's
    /// dispatch and its synchronisation.
    std::size_t max_inflight_verdicts = 0;
    std::vector<EdgeVerdict> verdicts;

    std::size_t total_ci_tests() const;
    std::size_t total_removed() const;
};

class SkeletonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Learns the undirected skeleton starting from the complete graph over p
/// nodes, level by level, in the configured mode.
SkeletonResult learn_skeleton(const IndependenceTest& test, int p, const LearnerConfig& cfg);

/// Consecutive slices of `pairs` of length batch_size (the last may be
/// shorter).
std::vector<std::span<const NodePair>> split_batches(std::span<const NodePair> pairs, std::size_t batch_size);

/// Contiguous split into `workers` parts whose sizes differ by at most one;
/// earlier parts take the remainder.
std::vector<std::span<const NodePair>> partition_edges(std::span<const NodePair> batch, int workers);

/// Bytes held per edge verdict at conditioning-set size `level`.
std::size_t verdict_footprint(int level);

/// floor(budget / per_edge), at least 1.
std::size_t auto_batch_size(std::size_t budget_bytes, std::size_t per_edge_bytes);

/// "level<TAB>edges_at_start<TAB>ci_tests<TAB>edges_removed<TAB>millis"
/// with a header row.
void write_stats_tsv(std::ostream& out, const SkeletonResult& r);

} // namespace parapc
