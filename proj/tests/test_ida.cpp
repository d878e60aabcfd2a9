#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles/oracles.hpp"
#include "parapc/ida.hpp"
#include "parapc/orient.hpp"
#include "parapc/skeleton.hpp"
#include "parapc/synth.hpp"

using namespace parapc;

namespace {

CpdagGraph oracle_cpdag(const Digraph& dag) {
    DsepOracle o(dag);
    auto r = learn_skeleton(o, dag.p(), LearnerConfig{});
    return orient(r.graph, r.sepsets);
}

std::set<std::vector<Node>> realized_parent_sets(const CpdagGraph& c, Node x) {
    std::set<std::vector<Node>> out;
    for (const auto& g : oracle::dag_extensions(c)) {
        auto pa = g.parents(x);
        out.emplace(pa.begin(), pa.end());
    }
    return out;
}

} // namespace

TEST_CASE("local parent sets: directed parents only") {
    CpdagGraph c(3);
    c.add_undirected(0, 1);
    c.add_undirected(2, 1);
    c.orient(0, 1);
    c.orient(2, 1);
    auto sets = local_parent_sets(c, 1);
    CHECK(sets == std::vector<std::vector<Node>>{{0, 2}});

    CpdagGraph one(2);
    one.add_undirected(0, 1);
    one.orient(0, 1);
    CHECK(local_parent_sets(one, 1) == std::vector<std::vector<Node>>{{0}});
}

TEST_CASE("local parent sets: one undirected neighbour gives two options") {
    CpdagGraph c(2);
    c.add_undirected(0, 1);
    CHECK(local_parent_sets(c, 1) == std::vector<std::vector<Node>>{{}, {0}});
}

TEST_CASE("local parent sets: non-adjacent undirected neighbours cannot both be parents") {
    CpdagGraph c(3);  // u=0 - x=1 - v=2
    c.add_undirected(0, 1);
    c.add_undirected(1, 2);
    auto sets = local_parent_sets(c, 1);
    CHECK(sets == std::vector<std::vector<Node>>{{}, {0}, {2}});
    std::set<std::vector<Node>> got(sets.begin(), sets.end());
    CHECK(got == realized_parent_sets(c, 1));
    CHECK_THROWS(local_parent_sets(c, 3));
}

TEST_CASE("local parent sets equal the parent sets realized across the class (p <= 4)") {
    for (int p = 2; p <= 4; ++p)
        for (const auto& dag : oracle::all_dags(p)) {
            auto c = oracle_cpdag(dag);
            for (Node x = 0; x < p; ++x) {
                auto sets = local_parent_sets(c, x);
                std::set<std::vector<Node>> got(sets.begin(), sets.end());
                REQUIRE(got.size() == sets.size());
                REQUIRE(got == realized_parent_sets(c, x));
            }
        }
}

TEST_CASE("local parent sets on sampled 5-node classes") {
    auto dags = oracle::all_dags(5);
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::size_t> pick(0, dags.size() - 1);
    for (int i = 0; i < 300; ++i) {
        auto c = oracle_cpdag(dags[pick(rng)]);
        for (Node x = 0; x < 5; ++x) {
            auto sets = local_parent_sets(c, x);
            CHECK(std::set<std::vector<Node>>(sets.begin(), sets.end()) == realized_parent_sets(c, x));
        }
    }
}

TEST_CASE("adjusted effect recovers a single coefficient") {
    auto d = sample_sem(oracle::make_sem(2, {{0, 1, 2.0}}), 10000, 31);
    double b = adjusted_effect(d, 0, 1, {});
    CHECK(std::abs(b - 2.0) < 0.05);
    auto c = covariances(d);
    CHECK(b == doctest::Approx(c[1] / c[0]).epsilon(1e-10));
    CHECK(b == doctest::Approx(oracle::ols_coefficient(d, 0, 1, {})).epsilon(1e-9));
}

TEST_CASE("adjusted effect of independent columns is near zero") {
    auto d = sample_sem(oracle::make_sem(2, {}), 10000, 32);
    CHECK(std::abs(adjusted_effect(d, 0, 1, {})) < 0.05);
}

TEST_CASE("confounder: adjusting removes the spurious effect") {
    // z=0 -> x=1, z -> y=2, unit weights and noise
    auto d = sample_sem(oracle::make_sem(3, {{0, 1, 1.0}, {0, 2, 1.0}}), 10000, 33);
    std::vector<Node> z{0};
    double adj = adjusted_effect(d, 1, 2, z);
    double raw = adjusted_effect(d, 1, 2, {});
    // population values: cov(x,y)/var(x) = 1/2 unadjusted, 0 given z
    CHECK(std::abs(adj) < 0.05);
    CHECK(std::abs(raw - 0.5) < 0.05);
    CHECK(adj == doctest::Approx(oracle::ols_coefficient(d, 1, 2, z)).epsilon(1e-8));
    CHECK(raw == doctest::Approx(oracle::ols_coefficient(d, 1, 2, {})).epsilon(1e-8));
}

TEST_CASE("singular design falls back to minimum norm with a flag") {
    // column 2 is an exact copy of column 0
    std::vector<double> v;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    std::vector<double> a(200), b(200);
    for (auto& x : a) x = n(rng);
    for (std::size_t i = 0; i < 200; ++i) b[i] = 2 * a[i] + n(rng);
    v.insert(v.end(), a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    v.insert(v.end(), a.begin(), a.end());
    Dataset d({"a", "b", "a2"}, 200, v);
    bool singular = false;
    std::vector<Node> pa{2};
    double e = adjusted_effect(d, 0, 1, pa, &singular);
    CHECK(singular);
    CHECK(std::isfinite(e));
    CHECK(e == doctest::Approx(adjusted_effect(d, 0, 1, {}) / 2).epsilon(1e-6));  // split evenly
}

TEST_CASE("IDA on a single directed edge") {
    auto d = sample_sem(oracle::make_sem(2, {{0, 1, 3.0}}), 10000, 41);
    CpdagGraph c(2);
    c.add_undirected(0, 1);
    c.orient(0, 1);
    std::vector<Node> x{0}, y{1};
    auto e = ida_all_effects(d, c, x, y);
    REQUIRE(e.size() == 1);
    CHECK(e[0].effects.size() == 1);
    CHECK(std::abs(e[0].summary - 3.0) < 0.05);

    // target is a parent of the treatment
    auto back = ida_all_effects(d, c, y, x);
    REQUIRE(back.size() == 1);
    CHECK(back[0].summary == 0.0);
}

TEST_CASE("IDA through a chain gives the total effect") {
    // x=0 -> y=1 -> z=2, unit weights; CPDAG with x -> y fixed by a collider
    // partner w=3 -> y to make the chain directed
    auto sem = oracle::make_sem(4, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 1, 1.0}});
    auto d = sample_sem(sem, 10000, 43);
    auto c = oracle_cpdag(sem.dag);
    REQUIRE(c.undirected_edges().empty());
    std::vector<Node> x{0}, targets{1, 2};
    auto e = ida_all_effects(d, c, x, targets);
    REQUIRE(e.size() == 2);
    for (const auto& est : e) {
        CHECK(est.effects.size() == 1);
        CHECK(std::abs(est.summary - oracle::total_effect(sem, est.treatment, est.target)) < 0.05);
    }
}

TEST_CASE("IDA summary is the minimum absolute effect and rows are ranked") {
    auto sem = oracle::make_sem(3, {{0, 1, 1.5}, {1, 2, -0.8}});
    auto d = sample_sem(sem, 5000, 44);
    auto c = oracle_cpdag(sem.dag);  // fully undirected chain
    std::vector<Node> all{0, 1, 2};
    auto e = ida_all_effects(d, c, all, all, 3);
    CHECK(e.size() == 6);
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(e[i].effects.size() == local_parent_sets(c, e[i].treatment).size());
        double m = std::abs(e[i].effects[0]);
        for (double v : e[i].effects) m = std::min(m, std::abs(v));
        CHECK(std::abs(e[i].summary) == m);
        if (i) CHECK(std::abs(e[i - 1].summary) >= std::abs(e[i].summary));
    }
    auto serial = ida_all_effects(d, c, all, all, 1);
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(serial[i].treatment == e[i].treatment);
        CHECK(serial[i].effects == e[i].effects);
    }
}

TEST_CASE("IDA effects scale with the target column") {
    auto sem = oracle::make_sem(3, {{0, 2, 1.0}, {1, 2, 1.0}});
    auto d = sample_sem(sem, 3000, 45);
    std::vector<double> v;
    for (std::size_t j = 0; j < 3; ++j)
        for (double x : d.column(j)) v.push_back(j == 2 ? 4.0 * x : x);
    Dataset scaled(d.names(), d.n(), v);
    auto c = oracle_cpdag(sem.dag);
    std::vector<Node> tr{0, 1}, tg{2};
    auto a = ida_all_effects(d, c, tr, tg);
    auto b = ida_all_effects(scaled, c, tr, tg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].treatment == b[i].treatment);
        CHECK(b[i].summary == doctest::Approx(4.0 * a[i].summary).epsilon(1e-9));
    }
}

TEST_CASE("fully directed CPDAG yields singleton effect sets") {
    auto sem = oracle::make_sem(4, {{0, 2, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
    auto c = oracle_cpdag(sem.dag);
    REQUIRE(c.undirected_edges().empty());
    auto d = sample_sem(sem, 2000, 46);
    std::vector<Node> all{0, 1, 2, 3};
    for (const auto& e : ida_all_effects(d, c, all, all)) CHECK(e.effects.size() == 1);
}

TEST_CASE("effects TSV layout") {
    std::vector<EffectEstimate> e(1);
    e[0].treatment = 1;
    e[0].target = 0;
    e[0].effects = {0.5, -0.25};
    e[0].summary = -0.25;
    std::vector<std::string> names{"y", "x"};
    std::ostringstream out;
    write_effects_tsv(out, e, names);
    CHECK(out.str() == "treatment\ttarget\tsummary_effect\tn_parent_sets\teffects\nx\ty\t-0.25\t2\t0.5,-0.25\n");
}
