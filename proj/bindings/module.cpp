#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heterograph/analysis.hpp"
#include "heterograph/dataio.hpp"
#include "heterograph/graph.hpp"
#include "heterograph/model.hpp"
#include "heterograph/synth.hpp"
#include "heterograph/train.hpp"

namespace py = pybind11;
using namespace heterograph;

namespace {

Matrix matrix_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::copy(arr.data(), arr.data() + arr.size(), m.data());
    return m;
}

py::array_t<double> matrix_to_numpy(const Matrix& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    std::copy(m.data(), m.data() + m.size(), arr.mutable_data());
    return arr;
}

SplitAssignment split_from_dict(const Graph& g, const py::dict& d) {
    SplitAssignment split;
    split.tags.assign(static_cast<std::size_t>(g.num_nodes()), SplitTag::Test);
    const std::pair<const char*, SplitTag> parts[] = {
        {"train", SplitTag::Train}, {"val", SplitTag::Val}, {"test", SplitTag::Test}};
    for (auto [key, tag] : parts) {
        if (!d.contains(key)) throw std::invalid_argument("split dict needs train/val/test");
        for (auto v : d[key]) split.tags[v.cast<NodeId>()] = tag;
    }
    return split;
}

py::dict split_to_dict(const SplitAssignment& split) {
    py::dict d;
    d["train"] = split.indices_of(SplitTag::Train);
    d["val"] = split.indices_of(SplitTag::Val);
    d["test"] = split.indices_of(SplitTag::Test);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "heterograph C++ core";

    py::class_<Graph>(m, "Graph")
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("num_classes", &Graph::num_classes)
        .def_property_readonly("feature_dim", &Graph::feature_dim)
        .def_property_readonly("labels", [](const Graph& g) { return g.labels(); })
        .def_property_readonly("features",
                               [](const Graph& g) { return matrix_to_numpy(g.features()); })
        .def("degree", &Graph::degree)
        .def("neighbors", [](const Graph& g, NodeId u) {
            auto nb = g.neighbors(u);
            return std::vector<NodeId>(nb.begin(), nb.end());
        });

    py::class_<SparseOperator>(m, "SparseOperator")
        .def_property_readonly("n", [](const SparseOperator& op) { return op.n; })
        .def_property_readonly("nnz", &SparseOperator::nnz)
        .def("to_coo", [](const SparseOperator& op) {
            std::vector<NodeId> rows;
            rows.reserve(op.col.size());
            for (NodeId u = 0; u < op.n; ++u)
                for (std::int64_t i = op.row_ptr[u]; i < op.row_ptr[u + 1]; ++i)
                    rows.push_back(u);
            return py::make_tuple(rows, op.col, op.val);
        });

    m.def(
        "build_graph",
        [](NodeId n, const std::vector<EdgePair>& edges, std::vector<std::int32_t> labels,
           py::object features, std::int32_t num_classes) {
            Matrix f;
            if (!features.is_none())
                f = matrix_from_numpy(features.cast<
                    py::array_t<double, py::array::c_style | py::array::forcecast>>());
            return Graph::from_edge_list(edges, n, std::move(labels), std::move(f),
                                         num_classes);
        },
        py::arg("n"), py::arg("edges"), py::arg("labels"), py::arg("features") = py::none(),
        py::arg("num_classes") = 0);

    m.def("edge_homophily", &edge_homophily);
    m.def("compatibility_matrix", [](const Graph& g) {
        return matrix_to_numpy(compatibility_matrix(g));
    });
    m.def("compatibility_from_h", [](double h, std::int32_t k) {
        return matrix_to_numpy(compatibility_from_h(h, k));
    });
    m.def("exact_khop_adjacency", &exact_khop_adjacency, py::arg("graph"), py::arg("k"));
    m.def("sym_normalize", &sym_normalize);
    m.def("unnormalized_laplacian",
          [](const Graph& g) { return matrix_to_numpy(unnormalized_laplacian(g)); });
    m.def("spmm", [](const SparseOperator& op, py::array_t<double> dense) {
        return matrix_to_numpy(spmm(op, matrix_from_numpy(dense)));
    });

    m.def(
        "generate_graph",
        [](NodeId n, std::int32_t num_classes, double h, std::int64_t m_edges,
           std::uint64_t seed) {
            GenConfig cfg;
            cfg.n = n;
            cfg.num_classes = num_classes;
            cfg.target_h = h;
            cfg.edges_per_node = m_edges;
            cfg.seed = seed;
            return generate_graph(cfg);
        },
        py::arg("n"), py::arg("num_classes"), py::arg("h"), py::arg("m"), py::arg("seed") = 0);
    m.def(
        "attach_synthetic_features",
        [](const Graph& g, std::int64_t dim, double signal_strength, std::uint64_t seed) {
            FeatureConfig mode;
            mode.synthetic = SyntheticFeatureConfig{dim, signal_strength};
            return attach_features(g, mode, seed);
        },
        py::arg("graph"), py::arg("dim"), py::arg("signal_strength"), py::arg("seed") = 0);
    m.def(
        "make_splits",
        [](const Graph& g, double train, double val, double test, std::uint64_t seed) {
            return split_to_dict(make_splits(g, {train, val, test}, seed));
        },
        py::arg("graph"), py::arg("train") = 0.25, py::arg("val") = 0.25,
        py::arg("test") = 0.5, py::arg("seed") = 0);

    m.def("load_bundle", [](const std::string& dir) {
        GraphBundle b = load_bundle(dir);
        py::dict d;
        d["graph"] = b.graph;
        py::list splits;
        for (const auto& s : b.splits) splits.append(split_to_dict(s));
        d["splits"] = splits;
        d["name"] = b.name;
        d["measured_h"] = b.measured_h;
        return d;
    });
    m.def("write_bundle", [](const std::string& dir, const Graph& g, const py::list& splits,
                             const std::string& name) {
        GraphBundle b;
        b.graph = g;
        for (auto s : splits) b.splits.push_back(split_from_dict(g, s.cast<py::dict>()));
        b.name = name;
        b.measured_h = edge_homophily(g);
        write_bundle(dir, b);
    });

    m.def("variant_codes", [] { return known_variant_codes(); });
    m.def(
        "train_model",
        [](const Graph& g, const py::dict& split, const std::string& variant_code,
           double learning_rate, double l2, std::int64_t max_epochs, std::int64_t patience,
           std::int64_t embed_dim, double dropout, std::uint64_t seed) {
            VariantConfig variant = variant_from_code(variant_code);
            variant.dropout_rate = dropout;
            TrainConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.l2 = l2;
            cfg.max_epochs = max_epochs;
            cfg.patience = patience;
            cfg.embed_dim = embed_dim;
            cfg.seed = seed;
            SplitAssignment s = split_from_dict(g, split);
            TrainResult result = train(g, s, variant, cfg);
            const auto ops = build_operators(g, variant);
            py::dict out;
            out["best_epoch"] = result.best_epoch;
            out["epochs_run"] = result.epochs_run;
            out["val_acc"] = result.best_val_acc;
            out["train_acc"] = evaluate(result.best_params, g, ops, variant,
                                        s.indices_of(SplitTag::Train));
            out["test_acc"] = evaluate(result.best_params, g, ops, variant,
                                       s.indices_of(SplitTag::Test));
            return out;
        },
        py::arg("graph"), py::arg("split"), py::arg("variant"),
        py::arg("learning_rate") = 0.01, py::arg("l2") = 5e-4, py::arg("max_epochs") = 200,
        py::arg("patience") = 50, py::arg("embed_dim") = 64, py::arg("dropout") = 0.0,
        py::arg("seed") = 0);

    m.def("perturbation_thresholds", [](double h, std::int64_t d, std::int32_t num_classes) {
        auto r = gcn_perturbation_thresholds(h, d, num_classes);
        py::dict out;
        out["delta1_abs"] = r.delta1_abs;
        out["delta2_abs"] = r.delta2_abs;
        out["crossover_h"] = r.crossover_h;
        out["less_robust"] = r.less_robust;
        return out;
    });
    m.def("verify_optimal_weight", &verify_optimal_weight);
    m.def("two_hop_margin", [](double h, std::int32_t num_classes) {
        return two_hop_compatibility(h, num_classes).min_margin;
    });
    m.def("smoothness", [](const Graph& g, const std::vector<double>& s) {
        return smoothness(g, s);
    });
    m.def("homophily_from_smoothness", &homophily_from_smoothness);
    m.def("spectral_energy", [](const Graph& g, const std::vector<std::vector<double>>& sig) {
        SpectralReport r = spectral_energy(unnormalized_laplacian(g), sig);
        py::dict out;
        out["eigenvalues"] = r.eig.eigenvalues;
        out["parseval_residual"] = r.parseval_residual;
        py::list tails, smooth;
        for (const auto& spec : r.signals) {
            tails.append(spec.tail_energy);
            smooth.append(spec.smoothness);
        }
        out["tail_energy"] = tails;
        out["smoothness"] = smooth;
        return out;
    });
    m.def("energy_dominance", [](const Graph& g, const std::vector<double>& s,
                                 const std::vector<double>& t) -> py::object {
        auto m_opt = energy_dominance(g, s, t);
        if (!m_opt) return py::none();
        return py::cast(*m_opt);
    });
}
