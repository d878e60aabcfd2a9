#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <sys/resource.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "parapc/parapc.hpp"

#ifndef PARAPC_VERSION
#define PARAPC_VERSION "0.0.0"
#endif

namespace parapc::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Bad arguments or unusable input; maps to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

int default_workers() {
    if (const char* env = std::getenv("PARAPC_WORKERS")) {
        try {
            std::size_t used = 0;
            int w = std::stoi(env, &used);
            if (used == std::string(env).size()) return w;
        } catch (const std::exception&) {
        }
        throw UsageError("PARAPC_WORKERS must be an integer");
    }
    return hardware_workers();
}

struct InputArgs {
    std::string path;
    std::string delimiter = ",";
    bool no_header = false;
};

struct LearnArgs {
    double alpha = 0.05;
    std::string mode = "parallel";
    std::optional<int> workers;
    bool mem_efficient = false;
    std::string batch_size = "auto";
    std::size_t memory_budget_mib = kDefaultMemoryBudget >> 20;
    std::optional<int> max_depth;
    std::string out = ".";
};

void add_input_options(CLI::App* cmd, InputArgs& in) {
    cmd->add_option("input", in.path, "Delimited data file, rows = samples, columns = variables")->required();
    cmd->add_option("--delimiter", in.delimiter, "Field delimiter (a single character; \\t for tab)");
    cmd->add_flag("--no-header", in.no_header, "The first row holds data, not variable names");
}

void add_learn_options(CLI::App* cmd, LearnArgs& a) {
    cmd->add_option("--alpha", a.alpha, "Significance level of the CI test");
    cmd->add_option("--mode", a.mode, "original | stable | parallel");
    cmd->add_option("--workers", a.workers, "Worker threads (default: PARAPC_WORKERS or logical cores)");
    cmd->add_flag("--mem-efficient", a.mem_efficient, "Evaluate each level in batches of edges");
    cmd->add_option("--batch-size", a.batch_size, "Edges per batch, or auto");
    cmd->add_option("--memory-budget", a.memory_budget_mib, "Budget in MiB used by --batch-size auto");
    cmd->add_option("--max-depth", a.max_depth, "Largest conditioning-set size to try");
    cmd->add_option("--out", a.out, "Output directory");
}

char parse_delimiter(const std::string& d) {
    if (d == "\\t" || d == "tab") return '\t';
    if (d == "space") return ' ';
    if (d.size() != 1) throw UsageError("delimiter must be a single character");
    return d[0];
}

LearnerConfig make_config(const LearnArgs& a) {
    LearnerConfig cfg;
    try {
        cfg.mode = parse_mode(a.mode);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!(a.alpha > 0 && a.alpha < 1)) throw UsageError("alpha must be in (0, 1)");
    cfg.alpha = a.alpha;
    cfg.workers = a.workers ? *a.workers : default_workers();
    if (cfg.workers < 1) throw UsageError("workers must be ≥ 1");
    cfg.mem_efficient = a.mem_efficient;
    if (a.batch_size != "auto") {
        long long v = 0;
        try {
            std::size_t used = 0;
            v = std::stoll(a.batch_size, &used);
            if (used != a.batch_size.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw UsageError("batch size must be a positive integer or auto");
        }
        if (v < 1) throw UsageError("batch size must be ≥ 1");
        cfg.batch_size = static_cast<std::size_t>(v);
    }
    if (a.memory_budget_mib < 1) throw UsageError("memory budget must be ≥ 1 MiB");
    cfg.memory_budget = a.memory_budget_mib << 20;
    if (a.max_depth && *a.max_depth < 0) throw UsageError("max depth must be ≥ 0");
    cfg.max_depth = a.max_depth;
    return cfg;
}

json config_json(const LearnerConfig& cfg) {
    json j;
    j["mode"] = to_string(cfg.mode);
    j["alpha"] = cfg.alpha;
    j["workers"] = cfg.workers;
    j["mem_efficient"] = cfg.mem_efficient;
    j["batch_size"] = cfg.batch_size ? json(*cfg.batch_size) : json("auto");
    j["memory_budget_bytes"] = cfg.memory_budget;
    j["max_depth"] = cfg.max_depth ? json(*cfg.max_depth) : json(nullptr);
    return j;
}

Dataset load_input(const InputArgs& in) {
    try {
        return load_dataset(in.path, CsvOptions{parse_delimiter(in.delimiter), !in.no_header});
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
}

/// Collects output files and writes the manifest next to them.
class OutputSet {
public:
    OutputSet(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
        started_ = utc_now();
        fs::create_directories(dir_);
    }

    template <class Fn>
    void write(const std::string& name, Fn&& body) {
        auto path = dir_ / name;
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        body(f);
        f.close();
        if (!f || !fs::exists(path)) throw std::runtime_error("write failure on " + path.string());
        files_.push_back(path.string());
    }

    json& manifest() { return manifest_; }

    void finish() {
        manifest_["tool"] = "parapc";
        manifest_["version"] = PARAPC_VERSION;
        manifest_["command"] = command_;
        manifest_["outputs"] = files_;
        manifest_["started"] = started_;
        manifest_["finished"] = utc_now();
        auto path = dir_ / "manifest.json";
        std::ofstream f(path);
        f << manifest_.dump(2) << '\n';
        f.close();
        if (!f) throw std::runtime_error("write failure on " + path.string());
    }

private:
    fs::path dir_;
    std::string command_;
    std::string started_;
    std::vector<std::string> files_;
    json manifest_;
};

struct SkeletonRun {
    Dataset data;
    LearnerConfig cfg;
    SkeletonResult result;
};

SkeletonRun learn(const InputArgs& in, const LearnArgs& a) {
    auto cfg = make_config(a);
    auto data = load_input(in);
    CorrelationMatrix corr = [&] {
        try {
            return correlations(data);
        } catch (const DataError& e) {
            throw UsageError(e.what());
        }
    }();
    FisherZTest test(std::move(corr));
    auto result = learn_skeleton(test, static_cast<int>(data.p()), cfg);
    return {std::move(data), cfg, std::move(result)};
}

void write_skeleton_outputs(OutputSet& out, const InputArgs& in, const SkeletonRun& run) {
    const auto& names = run.data.names();
    out.write("skeleton.tsv", [&](std::ostream& f) { write_skeleton_tsv(f, run.result.graph, names); });
    out.write("sepsets.tsv", [&](std::ostream& f) { write_sepsets_tsv(f, run.result.sepsets, names); });
    out.write("stats.tsv", [&](std::ostream& f) { write_stats_tsv(f, run.result); });
    auto& m = out.manifest();
    m["input"] = in.path;
    m["delimiter"] = std::string(1, parse_delimiter(in.delimiter));
    m["has_header"] = !in.no_header;
    m["config"] = config_json(run.cfg);
    m["samples"] = run.data.n();
    m["variables"] = run.data.p();
    m["edges"] = run.result.graph.edge_count();
    m["ci_tests"] = run.result.total_ci_tests();
    m["depth_truncated"] = run.result.depth_truncated;
}

CpdagGraph orient_and_report(const SkeletonRun& run, std::ostream& err) {
    std::vector<std::string> conflicts;
    auto cpdag = orient(run.result.graph, run.result.sepsets, &conflicts);
    for (const auto& c : conflicts) err << "warning: " << c << '\n';
    return cpdag;
}

std::vector<Node> read_name_list(const std::string& path, const Dataset& d, const char* what) {
    std::ifstream f(path);
    if (!f) throw UsageError(std::string("cannot open ") + what + " file " + path);
    std::vector<Node> out;
    std::string line;
    while (std::getline(f, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        line = line.substr(b);
        auto it = std::find(d.names().begin(), d.names().end(), line);
        if (it == d.names().end()) throw UsageError(std::string("unknown variable in ") + what + ": " + line);
        out.push_back(static_cast<Node>(it - d.names().begin()));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument("");
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(std::string("bad integer in ") + what + ": " + item);
        }
    }
    if (out.empty()) throw UsageError(std::string(what) + " is empty");
    return out;
}

long max_rss_kb() {
    rusage u{};
    getrusage(RUSAGE_SELF, &u);
    return u.ru_maxrss;
}

struct BenchArgs {
    int p = 100;
    double degree = 2;
    std::size_t n = 500;
    int seeds = 3;
    std::string workers_list = "1,2,4,8";
    double alpha = 0.05;
    bool mem_efficient = false;
    std::string batch_size = "auto";
    std::optional<int> max_depth;
    std::string out;
};

void run_bench(const BenchArgs& b, std::ostream& out) {
    if (b.p < 2) throw UsageError("p must be ≥ 2");
    if (b.n < 4) throw UsageError("n must be ≥ 4");
    if (b.seeds < 1) throw UsageError("seeds must be ≥ 1");
    if (!(b.degree >= 0 && b.degree <= b.p - 1)) throw UsageError("degree must be in [0, p - 1]");
    auto workers = parse_int_list(b.workers_list, "workers list");
    for (int w : workers)
        if (w < 1) throw UsageError("workers must be ≥ 1");

    LearnArgs la;
    la.alpha = b.alpha;
    la.mode = "parallel";
    la.mem_efficient = b.mem_efficient;
    la.batch_size = b.batch_size;
    la.max_depth = b.max_depth;

    std::vector<FisherZTest> tests;
    for (int s = 1; s <= b.seeds; ++s) {
        auto dag = random_dag(b.p, b.degree, static_cast<std::uint64_t>(s));
        auto sem = random_sem(dag, static_cast<std::uint64_t>(s));
        tests.emplace_back(correlations(sample_sem(sem, b.n, static_cast<std::uint64_t>(s))));
    }

    struct Row {
        int workers;
        double mean_millis;
        std::size_t ci_tests = 0, edges = 0, peak_inflight = 0, peak_bytes = 0;
    };
    std::vector<Row> rows;
    for (int w : workers) {
        la.workers = w;
        auto cfg = make_config(la);
        Row row{w, 0.0};
        for (const auto& t : tests) {
            auto t0 = std::chrono::steady_clock::now();
            auto r = learn_skeleton(t, b.p, cfg);
            row.mean_millis += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            row.ci_tests += r.total_ci_tests();
            row.edges += r.graph.edge_count();
            row.peak_inflight = std::max(row.peak_inflight, r.max_inflight_verdicts);
            std::size_t deepest = r.levels.empty() ? 0 : static_cast<std::size_t>(r.levels.back().level);
            row.peak_bytes = std::max(row.peak_bytes, r.max_inflight_verdicts * verdict_footprint(static_cast<int>(deepest)));
        }
        row.mean_millis /= b.seeds;
        rows.push_back(row);
    }

    double base = rows.front().mean_millis;
    for (const auto& r : rows)
        if (r.workers == 1) base = r.mean_millis;

    out << "workers,mem_efficient,batch_size,seeds,mean_millis,ci_tests,edges,speedup,peak_inflight_verdicts,"
           "peak_verdict_bytes,max_rss_kb\n";
    for (const auto& r : rows)
        out << r.workers << ',' << (b.mem_efficient ? "true" : "false") << ',' << (b.mem_efficient ? b.batch_size : "all")
            << ',' << b.seeds << ',' << std::fixed << std::setprecision(3) << r.mean_millis << ',' << r.ci_tests << ','
            << r.edges << ',' << std::setprecision(4) << (r.mean_millis > 0 ? base / r.mean_millis : 0.0) << ','
            << r.peak_inflight << ',' << r.peak_bytes << ',' << max_rss_kb() << std::defaultfloat << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constraint-based causal structure learning (PC, stable-PC, parallel-PC) and IDA effects", "parapc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PARAPC_VERSION);

    InputArgs in;
    LearnArgs la;

    auto* skel = app.add_subcommand("skeleton", "Learn the undirected skeleton");
    add_input_options(skel, in);
    add_learn_options(skel, la);

    InputArgs in_c;
    LearnArgs la_c;
    auto* cpdag = app.add_subcommand("cpdag", "Learn the skeleton and orient it into a CPDAG");
    add_input_options(cpdag, in_c);
    add_learn_options(cpdag, la_c);

    InputArgs in_i;
    LearnArgs la_i;
    std::string treatments_file, targets_file;
    bool zscore = false;
    auto* ida = app.add_subcommand("ida", "Estimate intervention effects over the learned CPDAG");
    add_input_options(ida, in_i);
    add_learn_options(ida, la_i);
    ida->add_option("--treatments", treatments_file, "File with one treatment variable name per line");
    ida->add_option("--targets", targets_file, "File with one target variable name per line");
    ida->add_flag("--zscore", zscore, "Standardize columns before estimating effects");

    int sim_p = 10;
    double sim_degree = 2;
    std::size_t sim_n = 1000;
    std::uint64_t sim_seed = 1;
    double wmin = 0.5, wmax = 2.0;
    std::string sim_data = "data.csv", sim_model;
    auto* sim = app.add_subcommand("simulate", "Sample a random linear-Gaussian SEM");
    sim->add_option("--p", sim_p, "Variables");
    sim->add_option("--degree", sim_degree, "Expected node degree");
    sim->add_option("--n", sim_n, "Samples");
    sim->add_option("--seed", sim_seed, "Random seed");
    sim->add_option("--min-weight", wmin, "Smallest coefficient magnitude");
    sim->add_option("--max-weight", wmax, "Largest coefficient magnitude");
    sim->add_option("--data", sim_data, "Output CSV path");
    sim->add_option("--model", sim_model, "Optional output path for the SEM (TSV)");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Runtime of parallel mode across worker counts");
    bench->add_option("--p", ba.p, "Variables");
    bench->add_option("--degree", ba.degree, "Expected node degree");
    bench->add_option("--n", ba.n, "Samples");
    bench->add_option("--seeds", ba.seeds, "Datasets (seeds 1..K) averaged per row");
    bench->add_option("--workers-list", ba.workers_list, "Comma-separated worker counts");
    bench->add_option("--alpha", ba.alpha, "Significance level");
    bench->add_flag("--mem-efficient", ba.mem_efficient, "Batch each level");
    bench->add_option("--batch-size", ba.batch_size, "Edges per batch, or auto");
    bench->add_option("--max-depth", ba.max_depth, "Largest conditioning-set size");
    bench->add_option("--out", ba.out, "CSV output path (default: standard output)");

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << PARAPC_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (skel->parsed()) {
            auto r = learn(in, la);
            OutputSet o(la.out, "skeleton");
            write_skeleton_outputs(o, in, r);
            o.finish();
        } else if (cpdag->parsed()) {
            auto r = learn(in_c, la_c);
            auto g = orient_and_report(r, err);
            OutputSet o(la_c.out, "cpdag");
            write_skeleton_outputs(o, in_c, r);
            o.write("cpdag.dot", [&](std::ostream& f) { write_cpdag_dot(f, g, r.data.names()); });
            o.finish();
        } else if (ida->parsed()) {
            auto cfg = make_config(la_i);
            auto r = learn(in_i, la_i);
            auto g = orient_and_report(r, err);
            std::vector<Node> all(r.data.p());
            std::iota(all.begin(), all.end(), 0);
            auto treatments = treatments_file.empty() ? all : read_name_list(treatments_file, r.data, "treatments");
            auto targets = targets_file.empty() ? all : read_name_list(targets_file, r.data, "targets");
            const Dataset& data_for_effects = r.data;
            Dataset scaled;
            if (zscore) scaled = r.data.standardized();
            auto effects = ida_all_effects(zscore ? scaled : data_for_effects, g, treatments, targets, cfg.workers);
            for (const auto& e : effects)
                if (e.singular)
                    err << "warning: singular design for " << r.data.names()[e.treatment] << " -> "
                        << r.data.names()[e.target] << "; minimum-norm estimate used\n";
            OutputSet o(la_i.out, "ida");
            write_skeleton_outputs(o, in_i, r);
            o.write("cpdag.dot", [&](std::ostream& f) { write_cpdag_dot(f, g, r.data.names()); });
            o.write("effects.tsv", [&](std::ostream& f) { write_effects_tsv(f, effects, r.data.names()); });
            o.manifest()["zscore"] = zscore;
            o.manifest()["treatments_file"] = treatments_file;
            o.manifest()["targets_file"] = targets_file;
            o.finish();
        } else if (sim->parsed()) {
            if (sim_p < 2) throw UsageError("p must be ≥ 2");
            if (sim_n < 2) throw UsageError("n must be ≥ 2");
            if (!(sim_degree >= 0 && sim_degree <= sim_p - 1)) throw UsageError("degree must be in [0, p - 1]");
            if (!(wmin >= 0 && wmax >= wmin)) throw UsageError("weight range must satisfy 0 ≤ min ≤ max");
            auto dag = random_dag(sim_p, sim_degree, sim_seed);
            auto sem = random_sem(dag, sim_seed, wmin, wmax);
            auto data = sample_sem(sem, sim_n, sim_seed);
            fs::path data_path(sim_data);
            if (data_path.has_parent_path()) fs::create_directories(data_path.parent_path());
            write_dataset(data_path, data);
            if (!sim_model.empty()) write_sem_tsv(sim_model, sem);
        } else if (bench->parsed()) {
            if (ba.out.empty()) {
                run_bench(ba, out);
            } else {
                std::ostringstream buf;
                run_bench(ba, buf);
                std::ofstream f(ba.out);
                f << buf.str();
                f.close();
                if (!f) throw std::runtime_error("write failure on " + ba.out);
            }
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace parapc::cli
