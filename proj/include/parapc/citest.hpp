#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "parapc/data.hpp"
#include "parapc/graph.hpp"

namespace parapc {

class CiTestError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Outcome of one conditional independence query I(x, y | z).
struct TestResult {
    bool independent = false;
    std::optional<double> statistic;  ///< |z|; Fisher-z only
    std::optional<double> pvalue;     ///< Fisher-z only
    std::optional<double> partial_correlation;
    bool singular = false;  ///< correlation submatrix was numerically singular
};

/// Conditional independence decision procedure. Implementations must be
/// safe to call concurrently; `alpha` is ignored by exact oracles.
class IndependenceTest {
public:
    virtual ~IndependenceTest() = default;
    virtual int num_nodes() const = 0;
    virtual TestResult test(Node x, Node y, std::span<const Node> z, double alpha) const = 0;
};

/// |rho| is clamped to this bound before the Fisher transform.
inline constexpr double kMaxAbsPartialCorrelation = 1.0 - 1e-12;

/// Partial correlation of x and y given z, from the inverse of the
/// correlation submatrix over {x, y} u z. Sets *singular (when given) if the
/// submatrix is numerically singular, in which case the returned value is
/// the clamp bound.
double partial_correlation(const CorrelationMatrix& c, Node x, Node y, std::span<const Node> z,
                           bool* singular = nullptr);

/// Gaussian partial-correlation test with Fisher's z transform.
TestResult fisher_z_test(const CorrelationMatrix& c, Node x, Node y, std::span<const Node> z, double alpha);

class FisherZTest final : public IndependenceTest {
public:
    explicit FisherZTest(CorrelationMatrix c) : c_(std::move(c)) {}

    int num_nodes() const override { return static_cast<int>(c_.p()); }
    TestResult test(Node x, Node y, std::span<const Node> z, double alpha) const override {
        return fisher_z_test(c_, x, y, z, alpha);
    }
    const CorrelationMatrix& correlation() const noexcept { return c_; }

private:
    CorrelationMatrix c_;
};

/// True when z d-separates x and y in `dag` (reachability / Bayes-ball).
/// Throws GraphError for a cyclic graph and CiTestError for bad arguments.
bool d_separated(const Digraph& dag, Node x, Node y, std::span<const Node> z);

TestResult dsep_oracle(const Digraph& dag, Node x, Node y, std::span<const Node> z);

/// Exact oracle answering queries from a known DAG.
class DsepOracle final : public IndependenceTest {
public:
    explicit DsepOracle(Digraph dag);

    int num_nodes() const override { return dag_.p(); }
    TestResult test(Node x, Node y, std::span<const Node> z, double) const override;
    const Digraph& dag() const noexcept { return dag_; }

private:
    Digraph dag_;
};

/// Lookup-table oracle; queries absent from the table are dependent.
class ScriptedOracle final : public IndependenceTest {
public:
    using Key = std::pair<NodePair, std::vector<Node>>;

    ScriptedOracle(int p, std::map<Key, bool> table);

    static Key key(Node x, Node y, std::vector<Node> z);

    int num_nodes() const override { return p_; }
    TestResult test(Node x, Node y, std::span<const Node> z, double) const override;

private:
    int p_;
    std::map<Key, bool> table_;
};

/// Reads "X<TAB>Y<TAB>Z1,Z2<TAB>indep|dep" lines; names resolve against
/// `names`. Blank lines and lines starting with '#' are skipped.
ScriptedOracle load_scripted_oracle(const std::filesystem::path& path, std::span<const std::string> names);
ScriptedOracle parse_scripted_oracle(const std::string& text, std::span<const std::string> names);

} // namespace parapc
