#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "contactlab/errors.hpp"
#include "contactlab/experiment.hpp"
#include "contactlab/io.hpp"

namespace py = pybind11;
using namespace contactlab;
namespace ex = contactlab::experiment;

namespace {

using Rows = std::vector<std::vector<double>>;

geometry::Block make_block(int id, const std::vector<std::pair<double, double>>& vertices) {
    std::vector<geometry::Point> pts;
    for (const auto& [x, y] : vertices) pts.push_back({x, y});
    return geometry::Block(id, std::move(pts));
}

std::vector<std::pair<double, double>> vertex_list(const geometry::Block& b) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : b.vertices()) out.emplace_back(p.x, p.y);
    return out;
}

ex::ExperimentConfig config_for(std::optional<std::uint64_t> seed, const std::string& config_path) {
    auto c = config_path.empty() ? ex::ExperimentConfig{} : ex::load_config(config_path);
    if (seed) c.seed = *seed;
    return c;
}

py::dict split_dict(const std::vector<pipeline::Sample>& samples) {
    Rows x;
    std::vector<int> y;
    std::vector<int> step;
    for (const auto& s : samples) {
        x.push_back(s.features);
        y.push_back(geometry::code(s.label));
        step.push_back(s.step);
    }
    py::dict d;
    d["features"] = x;
    d["labels"] = y;
    d["steps"] = step;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Contact-state classification of 2D block pairs";

    auto base = py::register_exception<Error>(m, "ContactlabError", PyExc_RuntimeError);
    py::register_exception<OverlapError>(m, "OverlapError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<InvalidBlock>(m, "InvalidBlock", base.ptr());
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
    py::register_exception<UnlabeledGrid>(m, "UnlabeledGrid", base.ptr());
    py::register_exception<CalibrationError>(m, "CalibrationError", base.ptr());

    m.attr("DEFAULT_TOLERANCE") = geometry::kDefaultTolerance;
    m.attr("FEATURE_COUNT") = pipeline::kFeatureCount;

    py::class_<geometry::Block>(m, "Block")
        .def(py::init(&make_block), py::arg("id"), py::arg("vertices"))
        .def_property_readonly("id", &geometry::Block::id)
        .def_property_readonly("vertices", &vertex_list)
        .def("area", [](const geometry::Block& b) { return geometry::polygon_area(b); })
        .def("centroid",
             [](const geometry::Block& b) {
                 const auto c = geometry::centroid(b);
                 return std::pair{c.x, c.y};
             })
        .def("translated",
             [](const geometry::Block& b, double dx, double dy) { return b.translated({dx, dy}); })
        .def("rotated", [](const geometry::Block& b, double radians, double px,
                           double py_) { return b.rotated(radians, {px, py_}); },
             py::arg("radians"), py::arg("px") = 0.0, py::arg("py") = 0.0);

    m.def("classify_contact",
          [](const geometry::Block& a, const geometry::Block& b, double tol) {
              return geometry::code(geometry::classify_contact(a, b, tol));
          },
          py::arg("a"), py::arg("b"), py::arg("tol") = geometry::kDefaultTolerance,
          "Contact code: 0 none, 1 vertex-vertex, 2 vertex-edge, 3 edge-edge.");
    m.def("min_separation", &geometry::min_separation);
    m.def("penetration_depth", &geometry::penetration_depth);

    py::class_<anfis::TskModel>(m, "TskModel")
        .def_static("from_json", &io::model_from_json)
        .def_static("load", [](const std::string& path) { return io::load_model(path); })
        .def("to_json", [](const anfis::TskModel& model) { return io::model_to_json(model); })
        .def_readonly("n", &anfis::TskModel::n)
        .def_property_readonly("rule_count", &anfis::TskModel::rule_count)
        .def("infer", [](const anfis::TskModel& model, const std::vector<double>& x) { return anfis::infer(model, x); })
        .def("predict", [](const anfis::TskModel& model, const std::vector<double>& x) {
            return geometry::code(anfis::predict_contact_state(model, x));
        });

    m.def("subtractive_cluster",
          [](const Rows& data, double radius) {
              subclust::SubclustParams p;
              p.radius = radius;
              std::vector<std::size_t> idx;
              for (const auto& c : subclust::subtractive_cluster(data, p)) idx.push_back(c.index);
              return idx;
          },
          py::arg("data"), py::arg("radius"), "Indices of the selected cluster centers, in selection order.");

    m.def("generate",
          [](std::optional<std::uint64_t> seed, const std::string& config) {
              const auto r = ex::generate(config_for(seed, config));
              py::dict d;
              d["train"] = split_dict(r.dataset.train);
              d["check"] = split_dict(r.dataset.check);
              std::vector<int> trace;
              for (const auto& f : r.frames) trace.push_back(geometry::code(f.states.front()));
              d["trace"] = trace;
              return d;
          },
          py::arg("seed") = py::none(), py::arg("config") = "",
          "Simulates the scene and samples the train/check split.");

    m.def("train_nfis",
          [](std::size_t rules, std::optional<std::uint64_t> seed, const std::string& config) {
              const auto c = config_for(seed, config);
              const auto r = ex::train_nfis(c, ex::generate(c).dataset, rules);
              py::dict d;
              d["model"] = r.model;
              d["radius"] = r.radius;
              d["lse_rmse"] = r.training.lse_rmse;
              d["train_accuracy"] = r.train_metrics.accuracy;
              d["check_accuracy"] = r.check_metrics.accuracy;
              return d;
          },
          py::arg("rules") = 13, py::arg("seed") = py::none(), py::arg("config") = "",
          "Generates the dataset and trains a TSK model with the given rule count (0: configured radius).");

    m.def("train_som",
          [](std::optional<std::uint64_t> seed, const std::string& config) {
              const auto c = config_for(seed, config);
              const auto r = ex::train_som(c, ex::generate(c).dataset);
              std::vector<int> labels;
              for (const auto& l : r.grid.labels) labels.push_back(geometry::code(*l));
              py::dict d;
              d["weights"] = r.grid.weights;
              d["labels"] = labels;
              d["win_counts"] = r.win_counts;
              d["train_accuracy"] = r.train_metrics.accuracy;
              return d;
          },
          py::arg("seed") = py::none(), py::arg("config") = "");
}
