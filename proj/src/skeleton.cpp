#include "parapc/skeleton.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <memory>
#include <sstream>

#include "parapc/combinations.hpp"
#include "parapc/worker_pool.hpp"

namespace parapc {

std::string to_string(Mode m) {
    switch (m) {
    case Mode::original: return "original";
    case Mode::stable: return "stable";
    case Mode::parallel: return "parallel";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    if (s == "original") return Mode::original;
    if (s == "stable") return Mode::stable;
    if (s == "parallel") return Mode::parallel;
    throw std::invalid_argument("unknown mode \"" + s + "\" (expected original, stable or parallel)");
}

void LearnerConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (batch_size && *batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (memory_budget < 1) throw std::invalid_argument("memory budget must be positive");
    if (max_depth && *max_depth < 0) throw std::invalid_argument("max depth must be >= 0");
}

std::size_t SkeletonResult::total_ci_tests() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.ci_tests;
    return n;
}

std::size_t SkeletonResult::total_removed() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.edges_removed;
    return n;
}

std::vector<std::span<const NodePair>> split_batches(std::span<const NodePair> pairs, std::size_t batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    std::vector<std::span<const NodePair>> out;
    for (std::size_t i = 0; i < pairs.size(); i += batch_size)
        out.push_back(pairs.subspan(i, std::min(batch_size, pairs.size() - i)));
    return out;
}

std::vector<std::span<const NodePair>> partition_edges(std::span<const NodePair> batch, int workers) {
    std::vector<std::span<const NodePair>> out;
    for (auto [begin, end] : even_ranges(batch.size(), workers)) out.push_back(batch.subspan(begin, end - begin));
    return out;
}

std::size_t verdict_footprint(int level) {
    return sizeof(EdgeVerdict) + static_cast<std::size_t>(std::max(level, 0)) * sizeof(Node);
}

std::size_t auto_batch_size(std::size_t budget_bytes, std::size_t per_edge_bytes) {
    if (per_edge_bytes == 0) throw std::invalid_argument("per-edge footprint must be positive");
    return std::max<std::size_t>(1, budget_bytes / per_edge_bytes);
}

namespace {

using Clock = std::chrono::steady_clock;

std::string describe(NodePair e, int level, std::span<const Node> z) {
    std::ostringstream s;
    s << "level " << level << ", edge (" << e.x << ", " << e.y << "), Z = {";
    for (std::size_t i = 0; i < z.size(); ++i) s << (i ? "," : "") << z[i];
    s << "}";
    return s.str();
}

/// Scans subsets of nbrs \ {other} of size d, testing I(edge | Z) until the
/// first independence. Returns the separating set when one is found.
std::optional<std::vector<Node>> scan_side(const IndependenceTest& test, NodePair edge, Node other,
                                           std::span<const Node> nbrs, int d, double alpha,
                                           std::size_t& tests) {
    std::vector<Node> pool;
    pool.reserve(nbrs.size());
    for (Node v : nbrs)
        if (v != other) pool.push_back(v);
    if (static_cast<int>(pool.size()) < d) return std::nullopt;

    std::optional<std::vector<Node>> found;
    for_each_combination(pool, d, [&](std::span<const Node> z) {
        ++tests;
        TestResult r;
        try {
            r = test.test(edge.x, edge.y, z, alpha);
        } catch (const std::exception& e) {
            throw SkeletonError("CI test failed at " + describe(edge, d, z) + ": " + e.what());
        }
        if (r.independent) {
            found.emplace(z.begin(), z.end());
            return true;
        }
        return false;
    });
    return found;
}

EdgeVerdict evaluate_edge(const IndependenceTest& test, const AdjacencySnapshot& snap, NodePair edge, int d,
                          double alpha) {
    EdgeVerdict v;
    v.pair = edge;
    v.level = d;
    if (auto z = scan_side(test, edge, edge.y, snap.adj(edge.x), d, alpha, v.x_side_tests)) {
        v.keep = false;
        v.removed_on_x_side = true;
        v.sepset = std::move(*z);
        return v;
    }
    if (auto z = scan_side(test, edge, edge.x, snap.adj(edge.y), d, alpha, v.y_side_tests)) {
        v.keep = false;
        v.sepset = std::move(*z);
    }
    return v;
}

bool has_work(const Graph& g, int d) {
    for (Node x = 0; x < g.p(); ++x)
        if (g.degree(x) >= d + 1) return true;
    return false;
}

class Learner {
public:
    Learner(const IndependenceTest& test, int p, const LearnerConfig& cfg)
        : test_(test), cfg_(cfg), g_(complete_graph(p)), tested_(cfg.mode == Mode::parallel ? 0 : static_cast<std::size_t>(p) * p) {
        if (cfg_.mode == Mode::parallel && cfg_.workers > 1) pool_ = std::make_unique<WorkerPool>(cfg_.workers);
    }

    SkeletonResult run() {
        SkeletonResult res;
        for (int d = 0;; ++d) {
            if (!has_work(g_, d)) break;
            if (cfg_.max_depth && d > *cfg_.max_depth) {
                res.depth_truncated = true;
                break;
            }
            LevelStats st;
            st.level = d;
            st.edges_at_start = g_.edge_count();
            auto t0 = Clock::now();
            switch (cfg_.mode) {
            case Mode::original: sequential_level(d, false, st); break;
            case Mode::stable: sequential_level(d, true, st); break;
            case Mode::parallel: parallel_level(d, st, res); break;
            }
            st.millis = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            st.edges_removed = st.edges_at_start - g_.edge_count();
            res.levels.push_back(st);
        }
        res.graph = std::move(g_);
        res.sepsets = std::move(seps_);
        res.max_inflight_verdicts = high_water_;
        return res;
    }

private:
    // original (live adjacency) and stable (frozen adjacency) share the
    // ordered-pair sweep of the sequential algorithm
    void sequential_level(int d, bool frozen, LevelStats& st) {
        const int p = g_.p();
        AdjacencySnapshot snap;
        if (frozen) snap = snapshot(g_);
        std::fill(tested_.begin(), tested_.end(), 0);
        st.batches = 1;
        st.batch_size = g_.edge_count();

        for (Node x = 0; x < p; ++x) {
            auto live = g_.neighbors(x);
            std::vector<Node> candidates = frozen ? std::vector<Node>(snap.adj(x).begin(), snap.adj(x).end())
                                                  : std::vector<Node>(live.begin(), live.end());
            for (Node y : candidates) {
                if (!g_.adjacent(x, y)) continue;
                NodePair edge(x, y);
                auto nbrs = frozen ? snap.adj(x) : g_.neighbors(x);
                std::size_t tests = 0;
                auto z = scan_side(test_, edge, y, nbrs, d, cfg_.alpha, tests);
                st.ci_tests += tests;
                if (tests > 0) {
                    auto& flag = tested_[static_cast<std::size_t>(edge.x) * p + edge.y];
                    if (!flag) ++st.edges_tested;
                    flag = 1;
                }
                if (z) {
                    g_.remove_edge(x, y);
                    seps_.set(edge, std::move(*z));
                }
            }
        }
    }

    void parallel_level(int d, LevelStats& st, SkeletonResult& res) {
        const AdjacencySnapshot snap = snapshot(g_);
        const std::vector<NodePair> pairs = adjacent_pairs(g_);

        std::size_t tb = pairs.size();
        if (cfg_.mem_efficient)
            tb = cfg_.batch_size ? *cfg_.batch_size : auto_batch_size(cfg_.memory_budget, verdict_footprint(d));
        tb = std::max<std::size_t>(tb, 1);
        st.batch_size = tb;

        for (auto batch : split_batches(pairs, tb)) {
            ++st.batches;
            auto parts = partition_edges(batch, cfg_.workers);
            std::vector<std::size_t> offsets(parts.size());
            for (std::size_t w = 1; w < parts.size(); ++w) offsets[w] = offsets[w - 1] + parts[w - 1].size();

            std::vector<EdgeVerdict> verdicts(batch.size());
            auto work = [&](int w) {
                auto part = parts[static_cast<std::size_t>(w)];
                for (std::size_t i = 0; i < part.size(); ++i) {
                    verdicts[offsets[w] + i] = evaluate_edge(test_, snap, part[i], d, cfg_.alpha);
                    note_inflight(inflight_.fetch_add(1, std::memory_order_relaxed) + 1);
                }
            };
            try {
                if (pool_)
                    pool_->run(work);
                else
                    work(0);
            } catch (const SkeletonError&) {
                throw;
            } catch (const std::exception& e) {
                throw SkeletonError("worker failed at level " + std::to_string(d) + ": " + e.what());
            }

            // synchronisation: apply verdicts in canonical edge order
            for (auto& v : verdicts) {
                const auto tests = v.x_side_tests + v.y_side_tests;
                st.ci_tests += tests;
                if (tests > 0) ++st.edges_tested;
                if (!v.keep) {
                    g_.remove_edge(v.pair.x, v.pair.y);
                    seps_.set(v.pair, v.sepset);
                }
                if (cfg_.record_verdicts) res.verdicts.push_back(std::move(v));
            }
            inflight_.fetch_sub(verdicts.size(), std::memory_order_relaxed);
        }
    }

    void note_inflight(std::size_t now) {
        std::size_t prev = high_water_.load(std::memory_order_relaxed);
        while (now > prev && !high_water_.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
        }
    }

    const IndependenceTest& test_;
    const LearnerConfig& cfg_;
    Graph g_;
    SepsetStore seps_;
    std::vector<char> tested_;
    std::unique_ptr<WorkerPool> pool_;
    std::atomic<std::size_t> inflight_{0};
    std::atomic<std::size_t> high_water_{0};
};

} // namespace

SkeletonResult learn_skeleton(const IndependenceTest& test, int p, const LearnerConfig& cfg) {
    cfg.validate();
    if (p < 2) throw std::invalid_argument("learn_skeleton needs p >= 2");
    if (test.num_nodes() != p)
        throw std::invalid_argument("test covers " + std::to_string(test.num_nodes()) + " nodes, expected " +
                                    std::to_string(p));
    return Learner(test, p, cfg).run();
}

void write_stats_tsv(std::ostream& out, const SkeletonResult& r) {
    out << "level\tedges_at_start\tci_tests\tedges_removed\tmillis\n";
    for (const auto& l : r.levels)
        out << l.level << '\t' << l.edges_at_start << '\t' << l.ci_tests << '\t' << l.edges_removed << '\t'
            << std::fixed << std::setprecision(3) << l.millis << std::defaultfloat << '\n';
}

} // namespace parapc
