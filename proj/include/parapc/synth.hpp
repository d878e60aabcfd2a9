#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "parapc/data.hpp"
#include "parapc/graph.hpp"

namespace parapc {

/// Linear-Gaussian structural equation model over a DAG.
struct SemModel {
    Digraph dag;
    std::vector<double> weights;   ///< p x p row-major, weights[from * p + to]
    std::vector<double> noise_sd;  ///< per node, > 0
    std::vector<std::string> names;

    int p() const noexcept { return dag.p(); }
    double weight(Node from, Node to) const { return weights[static_cast<std::size_t>(from) * p() + to]; }

    /// Checks weights sit exactly on the DAG's edges and noise is positive.
    void validate() const;
};

/// Random DAG respecting the order 0..p-1: each forward edge i -> j is kept
/// independently with probability expected_degree / (p - 1).
Digraph random_dag(int p, double expected_degree, std::uint64_t seed);

/// Attaches coefficients with magnitude uniform in [min_weight, max_weight]
/// and random sign, and equal noise standard deviations.
SemModel random_sem(const Digraph& dag, std::uint64_t seed, double min_weight = 0.5, double max_weight = 2.0,
                    double noise_sd = 1.0);

/// Draws n samples: each node, in topological order, is the weighted sum of
/// its parents plus N(0, noise_sd^2). Columns are named after the model.
Dataset sample_sem(const SemModel& m, std::size_t n, std::uint64_t seed);

/// Default variable names V1..Vp.
std::vector<std::string> default_names(int p);

/// One "name<TAB>noise_sd" line per node, then "src<TAB>dst<TAB>weight"
/// per edge.
void write_sem_tsv(const std::filesystem::path& path, const SemModel& m);
SemModel read_sem_tsv(const std::filesystem::path& path);

} // namespace parapc
