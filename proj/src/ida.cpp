#include "parapc/ida.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

#include <Eigen/Dense>

#include "parapc/combinations.hpp"
#include "parapc/worker_pool.hpp"

namespace parapc {

std::vector<std::vector<Node>> local_parent_sets(const CpdagGraph& g, Node x) {
    if (x < 0 || x >= g.p()) throw std::out_of_range("node " + std::to_string(x) + " out of range");
    const auto parents = g.parents(x);
    const auto undirected = g.undirected_neighbors(x);

    std::vector<std::vector<Node>> out;
    for (int k = 0; k <= static_cast<int>(undirected.size()); ++k) {
        for_each_combination(undirected, k, [&](std::span<const Node> s) {
            // a new collider at x arises from a non-adjacent pair with at
            // least one newly oriented member
            for (std::size_t i = 0; i < s.size(); ++i) {
                for (std::size_t j = i + 1; j < s.size(); ++j)
                    if (!g.adjacent(s[i], s[j])) return false;
                for (Node pa : parents)
                    if (!g.adjacent(s[i], pa)) return false;
            }
            std::vector<Node> set(parents.begin(), parents.end());
            set.insert(set.end(), s.begin(), s.end());
            std::sort(set.begin(), set.end());
            out.push_back(std::move(set));
            return false;
        });
    }
    return out;
}

double adjusted_effect_from_covariance(std::span<const double> cov, int p, Node x, Node y, std::span<const Node> pa,
                                       bool* singular) {
    if (static_cast<int>(cov.size()) != p * p) throw std::invalid_argument("covariance size does not match p");
    auto in_range = [p](Node v) { return v >= 0 && v < p; };
    if (!in_range(x) || !in_range(y)) throw std::out_of_range("node out of range");
    if (x == y) throw std::invalid_argument("adjusted_effect requires x != y");
    for (Node v : pa) {
        if (!in_range(v)) throw std::out_of_range("adjustment node out of range");
        if (v == x || v == y) throw std::invalid_argument("adjustment set contains x or y");
    }

    std::vector<Node> design{x};
    design.insert(design.end(), pa.begin(), pa.end());
    const auto k = static_cast<Eigen::Index>(design.size());
    Eigen::MatrixXd saa(k, k);
    Eigen::VectorXd say(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        say(i) = cov[static_cast<std::size_t>(design[i]) * p + y];
        for (Eigen::Index j = 0; j < k; ++j) saa(i, j) = cov[static_cast<std::size_t>(design[i]) * p + design[j]];
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(saa);
    cod.setThreshold(1e-10);
    if (singular) *singular = cod.rank() < k;
    Eigen::VectorXd beta = cod.solve(say);
    return beta(0);
}

double adjusted_effect(const Dataset& d, Node x, Node y, std::span<const Node> pa, bool* singular) {
    const int p = static_cast<int>(d.p());
    auto in_range = [p](Node v) { return v >= 0 && v < p; };
    if (!in_range(x) || !in_range(y)) throw std::out_of_range("node out of range");
    for (Node v : pa)
        if (!in_range(v)) throw std::out_of_range("adjustment node out of range");

    // covariance restricted to the columns involved, re-indexed 0..m-1
    std::vector<Node> cols{x, y};
    cols.insert(cols.end(), pa.begin(), pa.end());
    const int m = static_cast<int>(cols.size());
    const auto n = d.n();
    std::vector<std::vector<double>> centered(m);
    for (int i = 0; i < m; ++i) {
        auto col = d.column(static_cast<std::size_t>(cols[i]));
        double mean = 0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(n);
        centered[i].resize(n);
        for (std::size_t r = 0; r < n; ++r) centered[i][r] = col[r] - mean;
    }
    std::vector<double> cov(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            double s = 0;
            for (std::size_t r = 0; r < n; ++r) s += centered[i][r] * centered[j][r];
            s /= static_cast<double>(n - 1);
            cov[static_cast<std::size_t>(i) * m + j] = cov[static_cast<std::size_t>(j) * m + i] = s;
        }
    std::vector<Node> local_pa(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) local_pa[i] = static_cast<Node>(i + 2);
    return adjusted_effect_from_covariance(cov, m, 0, 1, local_pa, singular);
}

std::vector<EffectEstimate> ida_all_effects(const Dataset& d, const CpdagGraph& g, std::span<const Node> treatments,
                                            std::span<const Node> targets, int workers) {
    const int p = static_cast<int>(d.p());
    if (g.p() != p) throw std::invalid_argument("CPDAG and dataset disagree on variable count");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");

    const auto cov = covariances(d);
    std::vector<std::vector<std::vector<Node>>> parent_sets(p);
    std::vector<char> have(p, 0);
    std::vector<EffectEstimate> out;
    for (Node x : treatments) {
        if (x < 0 || x >= p) throw std::out_of_range("treatment out of range");
        if (!have[x]) {
            parent_sets[x] = local_parent_sets(g, x);
            have[x] = 1;
        }
        for (Node y : targets) {
            if (y < 0 || y >= p) throw std::out_of_range("target out of range");
            if (x == y) continue;
            EffectEstimate e;
            e.treatment = x;
            e.target = y;
            out.push_back(std::move(e));
        }
    }

    const auto ranges = even_ranges(out.size(), workers);
    auto work = [&](int w) {
        for (std::size_t i = ranges[w].first; i < ranges[w].second; ++i) {
            auto& e = out[i];
            for (const auto& pa : parent_sets[e.treatment]) {
                if (std::binary_search(pa.begin(), pa.end(), e.target)) {
                    e.effects.push_back(0.0);
                    continue;
                }
                bool sing = false;
                e.effects.push_back(adjusted_effect_from_covariance(cov, p, e.treatment, e.target, pa, &sing));
                e.singular |= sing;
            }
            e.summary = e.effects.front();
            for (double v : e.effects)
                if (std::abs(v) < std::abs(e.summary)) e.summary = v;
        }
    };
    if (workers > 1 && out.size() > 1) {
        WorkerPool pool(workers);
        pool.run(work);
    } else {
        for (int w = 0; w < workers; ++w) work(w);
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const EffectEstimate& a, const EffectEstimate& b) {
                         return std::abs(a.summary) > std::abs(b.summary);
                     });
    return out;
}

void write_effects_tsv(std::ostream& out, std::span<const EffectEstimate> effects,
                       std::span<const std::string> names) {
    out << "treatment\ttarget\tsummary_effect\tn_parent_sets\teffects\n";
    out << std::setprecision(10);
    for (const auto& e : effects) {
        out << names[e.treatment] << '\t' << names[e.target] << '\t' << e.summary << '\t' << e.effects.size()
            << '\t';
        for (std::size_t i = 0; i < e.effects.size(); ++i) out << (i ? "," : "") << e.effects[i];
        out << '\n';
    }
}

} // namespace parapc
