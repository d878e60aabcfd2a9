#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "parapc/parapc.hpp"

namespace py = pybind11;
using namespace parapc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dataset dataset_from_array(const Array& a, std::vector<std::string> names) {
    if (a.ndim() != 2) throw std::invalid_argument("data must be a 2-D array (rows = samples)");
    auto n = static_cast<std::size_t>(a.shape(0));
    auto p = static_cast<std::size_t>(a.shape(1));
    if (names.empty()) names = default_names(static_cast<int>(p));
    auto r = a.unchecked<2>();
    std::vector<double> values(n * p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i) values[j * n + i] = r(i, j);
    return Dataset(std::move(names), n, std::move(values));
}

Array dataset_to_array(const Dataset& d) {
    Array out({d.n(), d.p()});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t j = 0; j < d.p(); ++j) {
        auto col = d.column(j);
        for (std::size_t i = 0; i < d.n(); ++i) w(i, j) = col[i];
    }
    return out;
}

LearnerConfig make_config(const std::string& mode, double alpha, int workers, bool mem_efficient,
                          std::optional<std::size_t> batch_size, std::optional<int> max_depth) {
    LearnerConfig c;
    c.mode = parse_mode(mode);
    c.alpha = alpha;
    c.workers = workers;
    c.mem_efficient = mem_efficient;
    c.batch_size = batch_size;
    c.max_depth = max_depth;
    return c;
}

py::dict skeleton_dict(const SkeletonResult& r, const Dataset& d) {
    const auto& names = d.names();
    py::list edges;
    for (auto e : adjacent_pairs(r.graph)) edges.append(py::make_tuple(names[e.x], names[e.y]));
    py::dict seps;
    for (const auto& [pair, z] : r.sepsets.entries()) {
        py::list zs;
        for (Node v : z) zs.append(names[v]);
        seps[py::make_tuple(names[pair.x], names[pair.y])] = zs;
    }
    py::list levels;
    for (const auto& l : r.levels) {
        py::dict s;
        s["level"] = l.level;
        s["edges_at_start"] = l.edges_at_start;
        s["ci_tests"] = l.ci_tests;
        s["edges_removed"] = l.edges_removed;
        s["batches"] = l.batches;
        s["millis"] = l.millis;
        levels.append(s);
    }
    py::dict out;
    out["edges"] = edges;
    out["sepsets"] = seps;
    out["levels"] = levels;
    out["ci_tests"] = r.total_ci_tests();
    out["depth_truncated"] = r.depth_truncated;
    out["max_inflight_verdicts"] = r.max_inflight_verdicts;
    return out;
}

CpdagGraph learn_cpdag(const Dataset& d, const LearnerConfig& cfg, std::vector<std::string>* conflicts) {
    FisherZTest test(correlations(d));
    auto r = learn_skeleton(test, static_cast<int>(d.p()), cfg);
    return orient(r.graph, r.sepsets, conflicts);
}

std::vector<Node> resolve(const Dataset& d, const std::optional<std::vector<std::string>>& names) {
    std::vector<Node> out;
    if (!names) {
        for (std::size_t j = 0; j < d.p(); ++j) out.push_back(static_cast<Node>(j));
        return out;
    }
    for (const auto& n : *names) out.push_back(static_cast<Node>(d.index_of(n)));
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "PC-family causal structure learning and IDA effect estimation";
    m.attr("__version__") = PARAPC_VERSION_STRING;

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<SkeletonError>(m, "SkeletonError", PyExc_RuntimeError);
    py::register_exception<CiTestError>(m, "CiTestError", PyExc_ValueError);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&dataset_from_array), py::arg("data"), py::arg("names") = std::vector<std::string>{})
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("p", &Dataset::p)
        .def_property_readonly("names", &Dataset::names)
        .def("to_numpy", &dataset_to_array)
        .def("__repr__", [](const Dataset& d) {
            return "<Dataset n=" + std::to_string(d.n()) + " p=" + std::to_string(d.p()) + ">";
        });

    m.def("load_dataset", [](const std::filesystem::path& path, char delimiter, bool header) {
        return load_dataset(path, CsvOptions{delimiter, header});
    }, py::arg("path"), py::arg("delimiter") = ',', py::arg("header") = true);

    m.def("correlations", [](const Dataset& d) {
        auto c = correlations(d);
        Array out({d.p(), d.p()});
        auto w = out.mutable_unchecked<2>();
        for (std::size_t a = 0; a < d.p(); ++a)
            for (std::size_t b = 0; b < d.p(); ++b) w(a, b) = c(static_cast<Node>(a), static_cast<Node>(b));
        return out;
    }, py::arg("data"));

    m.def("fisher_z_test", [](const Dataset& d, const std::string& x, const std::string& y,
                              const std::vector<std::string>& z, double alpha) {
        std::vector<Node> zi;
        for (const auto& v : z) zi.push_back(static_cast<Node>(d.index_of(v)));
        auto r = fisher_z_test(correlations(d), static_cast<Node>(d.index_of(x)), static_cast<Node>(d.index_of(y)),
                               zi, alpha);
        py::dict out;
        out["independent"] = r.independent;
        out["pvalue"] = r.pvalue;
        out["statistic"] = r.statistic ? py::cast(*r.statistic) : py::none();
        out["partial_correlation"] = r.partial_correlation;
        out["singular"] = r.singular;
        return out;
    }, py::arg("data"), py::arg("x"), py::arg("y"), py::arg("z") = std::vector<std::string>{},
       py::arg("alpha") = 0.05);

    m.def("learn_skeleton", [](const Dataset& d, const std::string& mode, double alpha, int workers,
                               bool mem_efficient, std::optional<std::size_t> batch_size,
                               std::optional<int> max_depth) {
        auto cfg = make_config(mode, alpha, workers, mem_efficient, batch_size, max_depth);
        FisherZTest test(correlations(d));
        SkeletonResult r;
        {
            py::gil_scoped_release release;
            r = learn_skeleton(test, static_cast<int>(d.p()), cfg);
        }
        return skeleton_dict(r, d);
    }, py::arg("data"), py::arg("mode") = "parallel", py::arg("alpha") = 0.05, py::arg("workers") = 1,
       py::arg("mem_efficient") = false, py::arg("batch_size") = py::none(), py::arg("max_depth") = py::none());

    m.def("cpdag", [](const Dataset& d, const std::string& mode, double alpha, int workers) {
        std::vector<std::string> conflicts;
        CpdagGraph g;
        {
            py::gil_scoped_release release;
            g = learn_cpdag(d, make_config(mode, alpha, workers, false, std::nullopt, std::nullopt), &conflicts);
        }
        const auto& names = d.names();
        py::list directed, undirected;
        for (auto [a, b] : g.directed_edges()) directed.append(py::make_tuple(names[a], names[b]));
        for (auto e : g.undirected_edges()) undirected.append(py::make_tuple(names[e.x], names[e.y]));
        py::dict out;
        out["directed"] = directed;
        out["undirected"] = undirected;
        out["conflicts"] = conflicts;
        return out;
    }, py::arg("data"), py::arg("mode") = "parallel", py::arg("alpha") = 0.05, py::arg("workers") = 1);

    m.def("ida", [](const Dataset& d, std::optional<std::vector<std::string>> treatments,
                    std::optional<std::vector<std::string>> targets, double alpha, int workers) {
        auto tr = resolve(d, treatments);
        auto tg = resolve(d, targets);
        std::vector<EffectEstimate> effects;
        {
            py::gil_scoped_release release;
            auto g = learn_cpdag(d, make_config("parallel", alpha, workers, false, std::nullopt, std::nullopt),
                                 nullptr);
            effects = ida_all_effects(d, g, tr, tg, workers);
        }
        const auto& names = d.names();
        py::list out;
        for (const auto& e : effects) {
            py::dict row;
            row["treatment"] = names[e.treatment];
            row["target"] = names[e.target];
            row["summary"] = e.summary;
            row["effects"] = e.effects;
            row["singular"] = e.singular;
            out.append(row);
        }
        return out;
    }, py::arg("data"), py::arg("treatments") = py::none(), py::arg("targets") = py::none(),
       py::arg("alpha") = 0.05, py::arg("workers") = 1);

    m.def("simulate", [](int p, double degree, std::size_t n, std::uint64_t seed) {
        auto dag = random_dag(p, degree, seed);
        auto sem = random_sem(dag, seed);
        auto d = sample_sem(sem, n, seed);
        py::list edges;
        for (auto [a, b] : dag.edges())
            edges.append(py::make_tuple(sem.names[a], sem.names[b], sem.weight(a, b)));
        return py::make_tuple(d, edges);
    }, py::arg("p"), py::arg("degree") = 2.0, py::arg("n") = 1000, py::arg("seed") = 1,
       "Random DAG + linear-Gaussian SEM; returns (Dataset, [(parent, child, weight), ...]).");
}
