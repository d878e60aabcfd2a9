#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "oracles/oracles.hpp"
#include "parapc/synth.hpp"

using namespace parapc;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "parapc");
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "parapc_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path write_sem_data(const fs::path& dir, const SemModel& m, std::size_t n, std::uint64_t seed) {
    auto path = dir / "data.csv";
    write_dataset(path, sample_sem(m, n, seed));
    return path;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("stable and parallel CLI runs write byte-identical edge and sepset files") {
    auto dir = scratch("equiv");
    auto data = write_sem_data(dir, random_sem(random_dag(15, 2.0, 3), 3), 400, 3);
    auto a = run_cli({"skeleton", data.string(), "--mode", "stable", "--alpha", "0.01", "--out", (dir / "s").string()});
    auto b = run_cli({"skeleton", data.string(), "--mode", "parallel", "--workers", "4", "--alpha", "0.01", "--out",
                      (dir / "p").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(dir / "s" / "skeleton.tsv") == slurp(dir / "p" / "skeleton.tsv"));
    CHECK(slurp(dir / "s" / "sepsets.tsv") == slurp(dir / "p" / "sepsets.tsv"));
    CHECK(!slurp(dir / "s" / "sepsets.tsv").empty());

    auto manifest = nlohmann::json::parse(slurp(dir / "p" / "manifest.json"));
    CHECK(manifest["config"]["mode"] == "parallel");
    CHECK(manifest["config"]["workers"] == 4);
    CHECK(manifest["config"]["alpha"] == 0.01);
    CHECK(manifest["outputs"].size() == 3);
    CHECK(manifest.contains("started"));
    CHECK(manifest.contains("finished"));
    CHECK(manifest.contains("version"));

    auto stats = slurp(dir / "p" / "stats.tsv");
    CHECK(stats.rfind("level\tedges_at_start\tci_tests\tedges_removed\tmillis\n", 0) == 0);
}

TEST_CASE("workers must be at least one") {
    auto dir = scratch("workers");
    auto data = write_sem_data(dir, oracle::make_sem(3, {{0, 1, 1.0}}), 50, 1);
    auto r = run_cli({"skeleton", data.string(), "--workers", "0", "--out", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("workers must be ≥ 1") != std::string::npos);
}

TEST_CASE("usage and runtime errors map to exit codes") {
    auto dir = scratch("errors");
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"skeleton"}).code == 1);
    CHECK(run_cli({"skeleton", (dir / "missing.csv").string()}).code == 1);
    auto data = write_sem_data(dir, oracle::make_sem(3, {{0, 1, 1.0}}), 50, 1);
    CHECK(run_cli({"skeleton", data.string(), "--mode", "fast"}).code == 1);
    CHECK(run_cli({"skeleton", data.string(), "--batch-size", "0"}).code == 1);
    CHECK(run_cli({"skeleton", data.string(), "--alpha", "2"}).code == 1);
    // output directory path occupied by a regular file
    std::ofstream(dir / "blocker") << "x";
    CHECK(run_cli({"skeleton", data.string(), "--workers", "1", "--out", (dir / "blocker").string()}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("chain SEM skeleton is recovered from the CLI") {
    auto dir = scratch("chain");
    auto sem = oracle::make_sem(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
    auto data = write_sem_data(dir, sem, 5000, 7);
    auto r = run_cli({"skeleton", data.string(), "--alpha", "0.01", "--workers", "2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "skeleton.tsv") == "V1\tV2\nV2\tV3\nV3\tV4\n");
}

TEST_CASE("cpdag command writes colliders and undirected chains") {
    auto dir = scratch("cpdag");
    auto collider = oracle::make_sem(3, {{0, 2, 1.0}, {1, 2, 1.0}}, {"x", "y", "z"});
    auto data = write_sem_data(dir, collider, 5000, 11);
    REQUIRE(run_cli({"cpdag", data.string(), "--alpha", "0.01", "--out", (dir / "c").string()}).code == 0);
    auto dot = slurp(dir / "c" / "cpdag.dot");
    CHECK(dot.find("x -> z;") != std::string::npos);
    CHECK(dot.find("y -> z;") != std::string::npos);

    auto indep = oracle::make_sem(4, {});
    auto d2 = dir / "indep.csv";
    write_dataset(d2, sample_sem(indep, 5000, 12));
    REQUIRE(run_cli({"cpdag", d2.string(), "--alpha", "0.01", "--out", (dir / "i").string()}).code == 0);
    auto dot2 = slurp(dir / "i" / "cpdag.dot");
    CHECK(dot2 == "digraph cpdag {\n  V1;\n  V2;\n  V3;\n  V4;\n}\n");

    auto chain = oracle::make_sem(3, {{0, 1, 1.0}, {1, 2, 1.0}});
    auto d3 = dir / "chain.csv";
    write_dataset(d3, sample_sem(chain, 5000, 13));
    REQUIRE(run_cli({"cpdag", d3.string(), "--alpha", "0.01", "--out", (dir / "ch").string()}).code == 0);
    auto dot3 = slurp(dir / "ch" / "cpdag.dot");
    CHECK(dot3.find("V1 -> V2 [dir=none];") != std::string::npos);
    CHECK(dot3.find("V2 -> V3 [dir=none];") != std::string::npos);
    CHECK(dot3.find("V1 -> V3") == std::string::npos);
}

TEST_CASE("ida command ranks effects") {
    auto dir = scratch("ida");
    auto sem = oracle::make_sem(2, {{0, 1, 3.0}}, {"x", "y"});
    auto data = write_sem_data(dir, sem, 10000, 21);
    std::ofstream(dir / "tr.txt") << "x\n";
    std::ofstream(dir / "tg.txt") << "y\n";
    auto r = run_cli({"ida", data.string(), "--treatments", (dir / "tr.txt").string(), "--targets",
                      (dir / "tg.txt").string(), "--out", (dir / "o").string()});
    REQUIRE(r.code == 0);
    std::istringstream lines(slurp(dir / "o" / "effects.tsv"));
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "treatment\ttarget\tsummary_effect\tn_parent_sets\teffects");
    std::istringstream fields(row);
    std::string t, g, summary;
    std::getline(fields, t, '\t');
    std::getline(fields, g, '\t');
    std::getline(fields, summary, '\t');
    CHECK(t == "x");
    CHECK(g == "y");
    // x - y is undirected, so the parent sets are {} and {y}; the latter
    // contributes 0 and becomes the minimum
    CHECK(std::stod(summary) == 0.0);

    std::ofstream(dir / "self.txt") << "x\n";
    auto self = run_cli({"ida", data.string(), "--treatments", (dir / "self.txt").string(), "--targets",
                         (dir / "self.txt").string(), "--out", (dir / "self").string()});
    REQUIRE(self.code == 0);
    CHECK(count_lines(slurp(dir / "self" / "effects.tsv")) == 1);

    std::ofstream(dir / "bad.txt") << "nope\n";
    auto bad = run_cli({"ida", data.string(), "--treatments", (dir / "bad.txt").string(), "--out", dir.string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("nope") != std::string::npos);
}

TEST_CASE("ida on an identifiable effect returns it as the top row") {
    auto dir = scratch("ida_directed");
    // w -> y <- x makes x -> y identifiable
    auto sem = oracle::make_sem(3, {{0, 1, 3.0}, {2, 1, 1.0}}, {"x", "y", "w"});
    auto data = write_sem_data(dir, sem, 10000, 22);
    std::ofstream(dir / "tr.txt") << "x\n";
    std::ofstream(dir / "tg.txt") << "y\n";
    REQUIRE(run_cli({"ida", data.string(), "--alpha", "0.01", "--treatments", (dir / "tr.txt").string(), "--targets",
                     (dir / "tg.txt").string(), "--out", dir.string()})
                .code == 0);
    std::istringstream lines(slurp(dir / "effects.tsv"));
    std::string header, t, g, summary;
    std::getline(lines, header);
    std::getline(lines, t, '\t');
    std::getline(lines, g, '\t');
    std::getline(lines, summary, '\t');
    CHECK(std::abs(std::stod(summary) - 3.0) < 0.1);
}

TEST_CASE("ida default covers all ordered pairs once") {
    auto dir = scratch("ida_all");
    auto data = write_sem_data(dir, random_sem(random_dag(10, 2.0, 5), 5), 1000, 5);
    REQUIRE(run_cli({"ida", data.string(), "--out", dir.string(), "--zscore"}).code == 0);
    auto text = slurp(dir / "effects.tsv");
    CHECK(count_lines(text) == 1 + 90);
    std::set<std::pair<std::string, std::string>> seen;
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        std::istringstream f(line);
        std::string a, b;
        std::getline(f, a, '\t');
        std::getline(f, b, '\t');
        CHECK(a != b);
        CHECK(seen.emplace(a, b).second);
    }
}

TEST_CASE("simulate writes data and model") {
    auto dir = scratch("simulate");
    auto r = run_cli({"simulate", "--p", "6", "--n", "50", "--seed", "3", "--data", (dir / "d.csv").string(), "--model",
                      (dir / "m.tsv").string()});
    REQUIRE(r.code == 0);
    auto d = load_dataset(dir / "d.csv");
    CHECK(d.p() == 6);
    CHECK(d.n() == 50);
    CHECK(read_sem_tsv(dir / "m.tsv").p() == 6);
}

TEST_CASE("bench output shape and invariants") {
    auto r = run_cli({"bench", "--p", "100", "--degree", "2", "--n", "500", "--workers-list", "1,4", "--seeds", "3"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header.find("speedup") != std::string::npos);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(lines, line)) {
        std::vector<std::string> f;
        std::istringstream s(line);
        std::string item;
        while (std::getline(s, item, ',')) f.push_back(item);
        rows.push_back(f);
    }
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][5] == rows[1][5]);  // ci_tests
    CHECK(rows[0][6] == rows[1][6]);  // edges

    auto mem = run_cli({"bench", "--p", "100", "--degree", "2", "--n", "500", "--workers-list", "2", "--seeds", "2",
                        "--mem-efficient", "--batch-size", "64"});
    auto plain = run_cli({"bench", "--p", "100", "--degree", "2", "--n", "500", "--workers-list", "2", "--seeds", "2"});
    REQUIRE(mem.code == 0);
    REQUIRE(plain.code == 0);
    auto field = [](const std::string& out, int col) {
        std::istringstream l(out);
        std::string h, row, item;
        std::getline(l, h);
        std::getline(l, row);
        std::istringstream s(row);
        for (int i = 0; i <= col; ++i) std::getline(s, item, ',');
        return item;
    };
    CHECK(field(mem.out, 6) == field(plain.out, 6));
    CHECK(std::stoul(field(mem.out, 8)) <= 64);
    CHECK(run_cli({"bench", "--workers-list", "0"}).code == 1);
}
