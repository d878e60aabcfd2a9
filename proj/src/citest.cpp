#include "parapc/citest.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

namespace parapc {

namespace {

void check_query(int p, Node x, Node y, std::span<const Node> z) {
    auto in_range = [p](Node v) { return v >= 0 && v < p; };
    if (!in_range(x) || !in_range(y)) throw CiTestError("test node out of range");
    if (x == y) throw CiTestError("test requires x != y");
    for (Node v : z) {
        if (!in_range(v)) throw CiTestError("conditioning node out of range");
        if (v == x || v == y) throw CiTestError("conditioning set contains a tested node");
    }
}

// Diagonal Cholesky pivots of a correlation submatrix are conditional
// variances; below this the submatrix is treated as singular.
constexpr double kMinConditionalVariance = 1e-12;

} // namespace

double partial_correlation(const CorrelationMatrix& c, Node x, Node y, std::span<const Node> z, bool* singular) {
    check_query(static_cast<int>(c.p()), x, y, z);
    if (singular) *singular = false;
    if (z.empty()) return c(x, y);

    // canonical row order makes the result bit-identical under swaps of x/y
    // and permutations of z
    std::vector<Node> idx;
    idx.reserve(z.size() + 2);
    idx.push_back(std::min(x, y));
    idx.push_back(std::max(x, y));
    std::vector<Node> zs(z.begin(), z.end());
    std::sort(zs.begin(), zs.end());
    idx.insert(idx.end(), zs.begin(), zs.end());

    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = c(idx[i], idx[j]);

    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    bool bad = llt.info() != Eigen::Success;
    double rho = kMaxAbsPartialCorrelation;
    if (!bad) {
        const Eigen::MatrixXd& l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < k; ++i)
            if (l(i, i) * l(i, i) < kMinConditionalVariance) bad = true;
    }
    if (!bad) {
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(k, 2);
        rhs(0, 0) = 1.0;
        rhs(1, 1) = 1.0;
        Eigen::MatrixXd inv = llt.solve(rhs);  // first two columns of the inverse
        rho = -inv(0, 1) / std::sqrt(inv(0, 0) * inv(1, 1));
        if (!std::isfinite(rho)) {
            bad = true;
            rho = kMaxAbsPartialCorrelation;
        }
    }
    if (bad && singular) *singular = true;
    return rho;
}

TestResult fisher_z_test(const CorrelationMatrix& c, Node x, Node y, std::span<const Node> z, double alpha) {
    const double df = static_cast<double>(c.n()) - static_cast<double>(z.size()) - 3.0;
    if (df < 1.0)
        throw CiTestError("too few samples for conditioning set of size " + std::to_string(z.size()) +
                          " (n = " + std::to_string(c.n()) + ")");
    bool singular = false;
    double rho = partial_correlation(c, x, y, z, &singular);
    double r = std::clamp(rho, -kMaxAbsPartialCorrelation, kMaxAbsPartialCorrelation);
    double stat = std::abs(std::sqrt(df) * 0.5 * std::log1p(2.0 * r / (1.0 - r)));
    double pvalue = std::erfc(stat / std::sqrt(2.0));

    TestResult res;
    res.statistic = stat;
    res.pvalue = pvalue;
    res.partial_correlation = rho;
    res.singular = singular;
    res.independent = !singular && pvalue > alpha;
    return res;
}

bool d_separated(const Digraph& dag, Node x, Node y, std::span<const Node> z) {
    check_query(dag.p(), x, y, z);
    if (!dag.is_acyclic()) throw GraphError("d-separation requires an acyclic graph");

    const int p = dag.p();
    std::vector<char> in_z(p, 0), anc_z(p, 0);
    std::vector<Node> stack;
    for (Node v : z) {
        in_z[v] = 1;
        if (!anc_z[v]) {
            anc_z[v] = 1;
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        Node v = stack.back();
        stack.pop_back();
        for (Node pa : dag.parents(v))
            if (!anc_z[pa]) {
                anc_z[pa] = 1;
                stack.push_back(pa);
            }
    }

    // state: node arrived at "up" (from a child) or "down" (from a parent)
    enum Dir : int { kUp = 0, kDown = 1 };
    std::vector<char> seen(2 * static_cast<std::size_t>(p), 0);
    std::deque<std::pair<Node, Dir>> queue{{x, kUp}};
    seen[2 * x + kUp] = 1;
    auto push = [&](Node v, Dir d) {
        if (!seen[2 * v + d]) {
            seen[2 * v + d] = 1;
            queue.emplace_back(v, d);
        }
    };
    while (!queue.empty()) {
        auto [v, d] = queue.front();
        queue.pop_front();
        if (v == y) return false;
        if (d == kUp) {
            if (in_z[v]) continue;
            for (Node pa : dag.parents(v)) push(pa, kUp);
            for (Node ch : dag.children(v)) push(ch, kDown);
        } else {
            if (!in_z[v])
                for (Node ch : dag.children(v)) push(ch, kDown);
            if (anc_z[v])
                for (Node pa : dag.parents(v)) push(pa, kUp);
        }
    }
    return true;
}

TestResult dsep_oracle(const Digraph& dag, Node x, Node y, std::span<const Node> z) {
    TestResult r;
    r.independent = d_separated(dag, x, y, z);
    return r;
}

DsepOracle::DsepOracle(Digraph dag) : dag_(std::move(dag)) {
    if (!dag_.is_acyclic()) throw GraphError("d-separation oracle requires an acyclic graph");
}

TestResult DsepOracle::test(Node x, Node y, std::span<const Node> z, double) const {
    // acyclicity was checked once at construction
    check_query(dag_.p(), x, y, z);
    return dsep_oracle(dag_, x, y, z);
}

ScriptedOracle::ScriptedOracle(int p, std::map<Key, bool> table) : p_(p) {
    for (auto& [k, v] : table) {
        const auto& [pair, z] = k;
        check_query(p_, pair.x, pair.y, z);
        table_[key(pair.x, pair.y, z)] = v;
    }
}

ScriptedOracle::Key ScriptedOracle::key(Node x, Node y, std::vector<Node> z) {
    std::sort(z.begin(), z.end());
    return {NodePair(x, y), std::move(z)};
}

TestResult ScriptedOracle::test(Node x, Node y, std::span<const Node> z, double) const {
    check_query(p_, x, y, z);
    TestResult r;
    auto it = table_.find(key(x, y, std::vector<Node>(z.begin(), z.end())));
    r.independent = it != table_.end() && it->second;
    return r;
}

ScriptedOracle parse_scripted_oracle(const std::string& text, std::span<const std::string> names) {
    auto lookup = [&](const std::string& name, std::size_t line) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            throw CiTestError("oracle table line " + std::to_string(line) + ": unknown variable \"" + name + "\"");
        return static_cast<Node>(it - names.begin());
    };
    std::map<ScriptedOracle::Key, bool> table;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            auto pos = line.find('\t', start);
            fields.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (fields.size() != 4)
            throw CiTestError("oracle table line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
        std::vector<Node> z;
        if (!fields[2].empty()) {
            std::stringstream zs(fields[2]);
            std::string item;
            while (std::getline(zs, item, ',')) z.push_back(lookup(item, lineno));
        }
        bool indep;
        if (fields[3] == "indep")
            indep = true;
        else if (fields[3] == "dep")
            indep = false;
        else
            throw CiTestError("oracle table line " + std::to_string(lineno) + ": verdict must be indep or dep");
        table[ScriptedOracle::key(lookup(fields[0], lineno), lookup(fields[1], lineno), std::move(z))] = indep;
    }
    return ScriptedOracle(static_cast<int>(names.size()), std::move(table));
}

ScriptedOracle load_scripted_oracle(const std::filesystem::path& path, std::span<const std::string> names) {
    std::ifstream in(path);
    if (!in) throw CiTestError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scripted_oracle(buf.str(), names);
}

} // namespace parapc
