#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "debatenet/bicm.hpp"
#include "debatenet/community.hpp"
#include "debatenet/domain.hpp"
#include "debatenet/error.hpp"
#include "debatenet/graph.hpp"
#include "debatenet/projection.hpp"
#include "debatenet/stages.hpp"
#include "debatenet/stats.hpp"

namespace py = pybind11;
using namespace debatenet;

namespace {

py::dict test_dict(const TestResult& r) {
    py::dict d;
    d["statistic"] = r.statistic;
    d["p_value"] = r.p_value;
    d["effect"] = r.effect ? py::cast(*r.effect) : py::none();
    d["n_a"] = r.n_a;
    d["n_b"] = r.n_b;
    d["method"] = to_string(r.method);
    return d;
}

py::dict partition_dict(const Partition& p) {
    py::dict labels, origins;
    for (std::size_t i = 0; i < p.ids.size(); ++i) {
        labels[py::str(p.ids[i])] = p.labels[i] < 0 ? py::none() : py::cast(p.labels[i]);
        origins[py::str(p.ids[i])] = to_string(p.origins[i]);
    }
    py::dict d;
    d["labels"] = labels;
    d["origins"] = origins;
    d["modularity"] = p.modularity;
    d["pass_modularity"] = p.pass_modularity;
    d["sweeps"] = p.sweeps;
    d["converged"] = p.converged;
    d["sizes"] = p.community_sizes();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bipartite configuration model, validated projections, communities and debate statistics";
    m.attr("__version__") = DEBATENET_VERSION;

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

    py::class_<BipartiteGraph>(m, "BipartiteGraph")
        .def_property_readonly("top_ids", &BipartiteGraph::top_ids)
        .def_property_readonly("bottom_ids", &BipartiteGraph::bottom_ids)
        .def_property_readonly("edge_count", &BipartiteGraph::edge_count)
        .def("edges", [](const BipartiteGraph& g) {
            std::vector<std::pair<NodeIndex, NodeIndex>> out;
            for (const auto& e : g.edges()) out.emplace_back(e.top, e.bottom);
            return out;
        })
        .def("degrees", [](const BipartiteGraph& g) {
            const auto ds = degree_sequence(g);
            return std::make_pair(ds.top, ds.bottom);
        });

    m.def(
        "build_bipartite",
        [](const std::vector<std::pair<std::string, std::string>>& pairs) {
            std::vector<BipartiteRecord> records;
            for (const auto& [v, u] : pairs) records.push_back({v, u});
            return build_bipartite(records);
        },
        py::arg("pairs"), "Bipartite graph from (verified, unverified) id pairs.");

    py::class_<BicmModel>(m, "BicmModel")
        .def_property_readonly("top_multipliers", &BicmModel::top_multipliers)
        .def_property_readonly("bottom_multipliers", &BicmModel::bottom_multipliers)
        .def_property_readonly("fit_residual", &BicmModel::fit_residual)
        .def_property_readonly("iterations", [](const BicmModel& m) { return m.solver().iterations; })
        .def("probability", &BicmModel::probability, py::arg("top"), py::arg("bottom"))
        .def("probabilities",
             [](const BicmModel& m) {
                 std::vector<std::vector<double>> out(m.top_count(), std::vector<double>(m.bottom_count()));
                 for (NodeIndex i = 0; i < m.top_count(); ++i) {
                     for (NodeIndex a = 0; a < m.bottom_count(); ++a) out[i][a] = m.probability(i, a);
                 }
                 return out;
             })
        .def("expected_top_degrees", &BicmModel::expected_top_degrees)
        .def("expected_bottom_degrees", &BicmModel::expected_bottom_degrees)
        .def("sample", &sample_graph, py::arg("seed"))
        .def("log_likelihood", &log_likelihood, py::arg("graph"));

    m.def(
        "fit_bicm",
        [](std::vector<std::int64_t> top, std::vector<std::int64_t> bottom, double tol, int max_iter) {
            BicmOptions options;
            options.tol = tol;
            options.max_iter = max_iter;
            return fit_bicm(DegreeSequence{std::move(top), std::move(bottom)}, options);
        },
        py::arg("top_degrees"), py::arg("bottom_degrees"), py::arg("tol") = 1e-8, py::arg("max_iter") = 10000);

    m.def(
        "poisson_binomial_upper_tail",
        [](const std::vector<double>& probs, std::int64_t observed) {
            return poisson_binomial_upper_tail(probs, observed);
        },
        py::arg("probs"), py::arg("observed"));

    m.def(
        "validate_projection",
        [](const BipartiteGraph& g, const BicmModel& model, double alpha, const std::string& correction,
           unsigned threads) {
            ValidationOptions options;
            options.alpha = alpha;
            options.correction = parse_correction(correction);
            options.threads = threads;
            const auto p = validate_projection(g, model, options);
            py::list edges;
            for (const auto& e : p.edges) {
                edges.append(py::make_tuple(p.nodes[e.first], p.nodes[e.second], e.count, e.pvalue));
            }
            py::dict d;
            d["edges"] = edges;
            d["hypotheses"] = p.hypotheses;
            d["threshold"] = p.threshold ? py::cast(*p.threshold) : py::none();
            d["approximate"] = p.approximate;
            return d;
        },
        py::arg("graph"), py::arg("model"), py::arg("alpha") = 0.01, py::arg("correction") = "fdr",
        py::arg("threads") = 1u);

    m.def(
        "louvain",
        [](const std::vector<std::string>& nodes, const std::vector<std::tuple<NodeIndex, NodeIndex, double>>& edges,
           double resolution, std::uint64_t seed) {
            std::vector<WeightedEdge> list;
            for (const auto& [a, b, w] : edges) list.push_back({a, b, w});
            return partition_dict(louvain(UndirectedGraph(nodes, list), {resolution, seed}));
        },
        py::arg("nodes"), py::arg("edges"), py::arg("resolution") = 1.0, py::arg("seed") = 0,
        "Louvain on an undirected graph given as node ids and (index, index, weight) edges.");

    m.def(
        "label_propagation",
        [](const std::vector<std::tuple<std::string, std::string, std::int64_t>>& arcs,
           const std::map<std::string, int>& seeds, std::uint64_t seed, int max_sweeps) {
            std::vector<RetweetRecord> records;
            for (const auto& [r, a, c] : arcs) records.push_back({r, a, c});
            return partition_dict(label_propagation(build_retweet_network(records), seeds, {seed, max_sweeps}));
        },
        py::arg("arcs"), py::arg("seeds"), py::arg("seed") = 0, py::arg("max_sweeps") = 100);

    m.def(
        "chi_square", [](const std::vector<std::vector<double>>& table) { return test_dict(chi_square(table)); },
        py::arg("table"));
    m.def(
        "ks_test",
        [](const std::vector<double>& a, const std::vector<double>& b) { return test_dict(ks_test(a, b)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "mann_whitney_u",
        [](const std::vector<double>& a, const std::vector<double>& b) { return test_dict(mann_whitney_u(a, b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "assign_state",
        [](const std::string& text, const std::vector<std::pair<std::string, std::string>>& states) -> py::object {
            std::vector<StateSpec> specs;
            for (const auto& [name, kind] : states) specs.push_back({name, parse_state_kind(kind)});
            const auto a = assign_state(text, specs);
            switch (a.status) {
                case StateAssignment::Status::matched: return py::str(specs[a.state].name);
                case StateAssignment::Status::excluded_multi: return py::str("excluded-multi");
                case StateAssignment::Status::excluded_none: return py::str("excluded-none");
            }
            return py::none();
        },
        py::arg("text"), py::arg("states"), "Matched state name, or 'excluded-multi' / 'excluded-none'.");

    m.def(
        "registrable_domain", [](const std::string& url) { return registrable_domain(url); }, py::arg("url"));

    m.def(
        "decile_bot_classification",
        [](const std::map<std::string, double>& scores) {
            std::vector<BotScoreRecord> records;
            for (const auto& [u, s] : scores) records.push_back({u, s});
            const auto c = decile_bot_classification(records);
            std::map<std::string, std::string> out;
            for (const auto& [u, cls] : c.classes) out[u] = to_string(cls);
            return std::make_pair(out, c.warnings);
        },
        py::arg("scores"));

    m.def(
        "run_stage",
        [](const std::string& stage, const std::filesystem::path& out, const py::dict& options) {
            cli::StageConfig c;
            c.out = out;
            for (const auto& [key, value] : options) {
                const auto k = key.cast<std::string>();
                if (k == "tweets") c.tweets = value.cast<std::filesystem::path>();
                else if (k == "edges") c.edges = value.cast<std::filesystem::path>();
                else if (k == "states") c.states = value.cast<std::filesystem::path>();
                else if (k == "labels") c.labels = value.cast<std::filesystem::path>();
                else if (k == "bot_scores") c.bot_scores = value.cast<std::filesystem::path>();
                else if (k == "url_map") c.url_map = value.cast<std::filesystem::path>();
                else if (k == "lang") c.lang = value.cast<std::string>();
                else if (k == "state_first") c.state_first = value.cast<bool>();
                else if (k == "tol") c.tol = value.cast<double>();
                else if (k == "max_iter") c.max_iter = value.cast<int>();
                else if (k == "alpha") c.alpha = value.cast<double>();
                else if (k == "correction") c.correction = value.cast<std::string>();
                else if (k == "threads") c.threads = value.cast<unsigned>();
                else if (k == "resolution") c.resolution = value.cast<double>();
                else if (k == "seed") c.seed = value.cast<std::uint64_t>();
                else if (k == "min_component_size") c.min_component_size = value.cast<std::size_t>();
                else if (k == "max_sweeps") c.max_sweeps = value.cast<int>();
                else throw InputError("unknown option '" + k + "'");
            }
            std::vector<cli::StageOutcome> outcomes;
            if (stage == "all") {
                outcomes = cli::run_all(c);
            } else {
                outcomes.push_back(cli::run_stage(cli::parse_stage(stage), c));
            }
            std::vector<std::string> artifacts;
            for (const auto& o : outcomes) artifacts.insert(artifacts.end(), o.artifacts.begin(), o.artifacts.end());
            return artifacts;
        },
        py::arg("stage"), py::arg("out"), py::arg("options") = py::dict(),
        "Runs a pipeline stage (or 'all') and returns the artifact file names.");
}
