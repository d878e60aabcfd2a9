#include "parapc/synth.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace parapc {

void SemModel::validate() const {
    const auto pp = static_cast<std::size_t>(p());
    if (weights.size() != pp * pp) throw std::invalid_argument("weight matrix size does not match p");
    if (noise_sd.size() != pp) throw std::invalid_argument("noise vector size does not match p");
    if (names.size() != pp) throw std::invalid_argument("name count does not match p");
    for (Node a = 0; a < p(); ++a) {
        if (!(noise_sd[a] > 0) || !std::isfinite(noise_sd[a]))
            throw std::invalid_argument("noise sd of " + names[a] + " must be positive");
        for (Node b = 0; b < p(); ++b)
            if (!dag.has_edge(a, b) && weight(a, b) != 0.0)
                throw std::invalid_argument("weight on a pair that is not an edge");
    }
    if (!dag.is_acyclic()) throw std::invalid_argument("SEM graph is cyclic");
}

std::vector<std::string> default_names(int p) {
    std::vector<std::string> names;
    names.reserve(p);
    for (int i = 1; i <= p; ++i) names.push_back("V" + std::to_string(i));
    return names;
}

Digraph random_dag(int p, double expected_degree, std::uint64_t seed) {
    if (p < 2) throw std::invalid_argument("random_dag needs p >= 2");
    if (!(expected_degree >= 0.0 && expected_degree <= p - 1))
        throw std::invalid_argument("expected degree must be in [0, p - 1]");
    const double prob = expected_degree / (p - 1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Digraph dag(p);
    for (Node i = 0; i < p; ++i)
        for (Node j = i + 1; j < p; ++j)
            if (unif(rng) < prob) dag.add_edge(i, j);
    return dag;
}

SemModel random_sem(const Digraph& dag, std::uint64_t seed, double min_weight, double max_weight, double noise_sd) {
    if (!(min_weight >= 0 && max_weight >= min_weight)) throw std::invalid_argument("bad weight range");
    if (!(noise_sd > 0)) throw std::invalid_argument("noise sd must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(min_weight, max_weight);
    std::bernoulli_distribution negative(0.5);
    SemModel m;
    m.dag = dag;
    const auto p = static_cast<std::size_t>(dag.p());
    m.weights.assign(p * p, 0.0);
    for (auto [a, b] : dag.edges()) {
        double w = mag(rng);
        m.weights[static_cast<std::size_t>(a) * p + b] = negative(rng) ? -w : w;
    }
    m.noise_sd.assign(p, noise_sd);
    m.names = default_names(dag.p());
    return m;
}

Dataset sample_sem(const SemModel& m, std::size_t n, std::uint64_t seed) {
    m.validate();
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    const auto p = static_cast<std::size_t>(m.p());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(n * p, 0.0);
    for (Node v : m.dag.topological_order()) {
        double* col = values.data() + static_cast<std::size_t>(v) * n;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (Node pa : m.dag.parents(v)) s += m.weight(pa, v) * values[static_cast<std::size_t>(pa) * n + i];
            col[i] = s + m.noise_sd[v] * normal(rng);
        }
    }
    return Dataset(m.names, n, std::move(values));
}

void write_sem_tsv(const std::filesystem::path& path, const SemModel& m) {
    m.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17);
    for (Node v = 0; v < m.p(); ++v) out << m.names[v] << '\t' << m.noise_sd[v] << '\n';
    for (auto [a, b] : m.dag.edges()) out << m.names[a] << '\t' << m.names[b] << '\t' << m.weight(a, b) << '\n';
    if (!out) throw std::runtime_error("write failure on " + path.string());
}

SemModel read_sem_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::string> names;
    std::vector<double> noise;
    std::map<std::string, Node> index;
    std::vector<std::tuple<Node, Node, double>> edges;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("not a number: " + s);
        }
        if (used != s.size()) fail("not a number: " + s);
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, '\t')) f.push_back(item);
        if (f.size() == 2) {
            if (!edges.empty()) fail("noise lines must precede edge lines");
            if (index.count(f[0])) fail("duplicate node " + f[0]);
            index[f[0]] = static_cast<Node>(names.size());
            names.push_back(f[0]);
            noise.push_back(number(f[1]));
        } else if (f.size() == 3) {
            auto a = index.find(f[0]), b = index.find(f[1]);
            if (a == index.end() || b == index.end()) fail("edge refers to an undeclared node");
            edges.emplace_back(a->second, b->second, number(f[2]));
        } else {
            fail("expected 2 or 3 tab-separated fields");
        }
    }
    SemModel m;
    const int p = static_cast<int>(names.size());
    m.dag = Digraph(p);
    m.weights.assign(static_cast<std::size_t>(p) * p, 0.0);
    for (auto [a, b, w] : edges) {
        m.dag.add_edge(a, b);
        m.weights[static_cast<std::size_t>(a) * p + b] = w;
    }
    m.noise_sd = std::move(noise);
    m.names = std::move(names);
    m.validate();
    return m;
}

} // namespace parapc
