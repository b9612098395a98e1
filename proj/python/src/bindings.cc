#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <string>
#include <vector>

#include "treeint/engine.h"
#include "treeint/error.h"
#include "treeint/oracle.h"
#include "treeint/synth.h"
#include "treeint/treemodel.h"

namespace py = pybind11;

namespace treeint {
namespace {

poly::CiiSpec parse_index(const std::string& name) {
  poly::CiiSpec spec;
  if (name == "sii") return spec;
  if (name == "banzhaf") {
    spec.kind = poly::IndexKind::kBanzhaf;
    return spec;
  }
  throw InputError("unknown index \"" + name + "\" (sii or banzhaf)");
}

GridKind parse_grid(const std::string& name) {
  if (name == "unit") return GridKind::kUnitInterval;
  if (name == "chebyshev") return GridKind::kChebyshev;
  throw InputError("unknown grid \"" + name + "\" (unit or chebyshev)");
}

TraversalMode parse_mode(const std::string& name) {
  if (name == "restricted") return TraversalMode::kRestricted;
  if (name == "all-subsets") return TraversalMode::kAllSubsets;
  throw InputError("unknown mode \"" + name + "\" (restricted or all-subsets)");
}

py::dict score_dict(const ScoreTable& scores) {
  py::dict out;
  for (const auto& [subset, value] : scores.nonzero_entries()) {
    out[py::tuple(py::cast(subset))] = value;
  }
  return out;
}

}  // namespace
}  // namespace treeint

PYBIND11_MODULE(_core, m) {
  using namespace treeint;
  m.doc() = "Exact Shapley interactions for tree ensembles";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InputError> input_error(m, "InputError", error.ptr());
  static py::exception<SingularPointError> singular_error(
      m, "SingularPointError", error.ptr());
  static py::exception<LimitError> limit_error(m, "LimitError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      PyErr_SetString(input_error.ptr(), e.what());
    } catch (const SingularPointError& e) {
      PyErr_SetString(singular_error.ptr(), e.what());
    } catch (const LimitError& e) {
      PyErr_SetString(limit_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<Ensemble>(m, "Ensemble")
      .def_property_readonly("n_features",
                             [](const Ensemble& e) { return e.n_features; })
      .def_property_readonly("n_trees",
                             [](const Ensemble& e) { return e.trees.size(); })
      .def_property_readonly("feature_names",
                             [](const Ensemble& e) { return e.feature_names; })
      .def("predict",
           [](const Ensemble& e, const std::vector<double>& x) {
             return predict(e, x);
           })
      .def("to_json", [](const Ensemble& e) { return serialize(e); })
      .def("digest", [](const Ensemble& e) { return model_digest(e); });

  m.def("load_model", &load_ensemble_file, py::arg("path"),
        "Reads an interchange model document.");
  m.def(
      "parse_model",
      [](const std::string& text) { return load_ensemble_string(text); },
      py::arg("text"));
  m.def(
      "random_model",
      [](int n_features, int max_depth, int leaves, int n_trees,
         std::uint64_t seed) {
        TreeSpec spec;
        spec.n_features = n_features;
        spec.max_depth = max_depth;
        spec.leaves = leaves;
        return random_ensemble(spec, n_trees, seed);
      },
      py::arg("n_features"), py::arg("max_depth"), py::arg("leaves"),
      py::arg("n_trees") = 1, py::arg("seed") = 0);

  py::class_<InteractionResult>(m, "InteractionResult")
      .def_readonly("order", &InteractionResult::order)
      .def_readonly("index", &InteractionResult::index)
      .def_readonly("baseline", &InteractionResult::baseline)
      .def_readonly("prediction", &InteractionResult::prediction)
      .def_property_readonly(
          "scores",
          [](const InteractionResult& r) { return score_dict(r.scores); },
          "Nonzero scores keyed by sorted feature tuples.")
      .def(
          "get",
          [](const InteractionResult& r, std::vector<int> subset) {
            std::sort(subset.begin(), subset.end());
            return r.scores.get(subset);
          },
          py::arg("subset"))
      .def("total", [](const InteractionResult& r) { return r.scores.sum(); });

  py::class_<Explainer>(m, "Explainer")
      .def(py::init<const Ensemble&>(), py::arg("model"))
      .def_property_readonly("baseline", &Explainer::baseline)
      .def_property_readonly("n_features", &Explainer::n_features)
      .def(
          "explain",
          [](const Explainer& ex, const std::vector<double>& x, int order,
             const std::string& index, const std::string& grid,
             const std::string& mode) {
            ExplainConfig config;
            config.order = order;
            config.index = parse_index(index);
            config.grid = parse_grid(grid);
            config.mode = parse_mode(mode);
            py::gil_scoped_release release;
            return ex.explain(x, config);
          },
          py::arg("x"), py::arg("order") = 1, py::arg("index") = "sii",
          py::arg("grid") = "unit", py::arg("mode") = "restricted")
      .def(
          "shapley",
          [](const Explainer& ex, const std::vector<double>& x,
             const std::string& grid) {
            py::gil_scoped_release release;
            return ex.explain_sv(x, parse_grid(grid));
          },
          py::arg("x"), py::arg("grid") = "unit")
      .def(
          "nsii",
          [](const Explainer& ex, const std::vector<double>& x, int max_order) {
            py::gil_scoped_release release;
            return ex.explain_nsii(x, max_order);
          },
          py::arg("x"), py::arg("max_order"));

  m.def(
      "brute_force",
      [](const Ensemble& e, const std::vector<double>& x, int order,
         const std::string& index) {
        return oracle::brute_all(e, x, order, parse_index(index));
      },
      py::arg("model"), py::arg("x"), py::arg("order") = 1,
      py::arg("index") = "sii",
      "Brute-force reference scores over all coalitions.");
}
