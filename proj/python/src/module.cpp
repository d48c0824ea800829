#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "suffmdp/adnn.hpp"
#include "suffmdp/cli.hpp"
#include "suffmdp/dcov.hpp"
#include "suffmdp/error.hpp"
#include "suffmdp/experiment.hpp"
#include "suffmdp/generative.hpp"
#include "suffmdp/screening.hpp"
#include "suffmdp/serialize.hpp"

namespace py = pybind11;
using namespace suffmdp;

namespace {

template <class T>
T parse_config(const std::string& text) {
  return text.empty() ? T{} : Json::parse(text).get<T>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sufficient feature construction for batch MDP data (native core).";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("dcov_statistic", &dcov_statistic, py::arg("x"), py::arg("y"));
  m.def(
      "dcov_permutation_pvalue",
      [](const Matrix& x, const Matrix& y, std::size_t permutations, std::uint64_t seed) {
        py::gil_scoped_release release;
        return Json(dcov_permutation_pvalue(x, y, permutations, seed)).dump();
      },
      py::arg("x"), py::arg("y"), py::arg("permutations") = 999, py::arg("seed") = 0);
  m.def("pooled_pvalue", [](const std::vector<double>& p, std::size_t u) { return pooled_pvalue(p, u); },
        py::arg("p_values"), py::arg("u"));

  m.def(
      "simulate",
      [](const std::string& model, std::size_t n_noise, std::size_t n, std::size_t horizon,
         std::uint64_t seed, const std::string& path) {
        GenerativeModelSpec spec;
        spec.g = parse_transition_function(model);
        spec.n_noise = n_noise;
        spec.seed = seed;
        py::gil_scoped_release release;
        save_dataset_csv(sample_trajectories(spec, n, horizon), path);
      },
      py::arg("model"), py::arg("n_noise"), py::arg("n"), py::arg("horizon"), py::arg("seed"),
      py::arg("path"));

  m.def(
      "screen",
      [](const std::string& path, const std::string& config, std::uint64_t seed) {
        const auto cfg = parse_config<ScreenConfig>(config);
        py::gil_scoped_release release;
        return Json(screen(load_dataset_csv(path), cfg, seed)).dump();
      },
      py::arg("path"), py::arg("config") = "", py::arg("seed") = 0);

  m.def(
      "construct",
      [](const std::string& path, const std::string& config, std::uint64_t seed) {
        const auto cfg = parse_config<ConstructConfig>(config);
        py::gil_scoped_release release;
        return Json(construct_sufficient_features(load_dataset_csv(path), cfg, seed)).dump();
      },
      py::arg("path"), py::arg("config") = "", py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config) {
        const auto cfg = parse_config<ExperimentConfig>(config);
        std::string csv, detail;
        {
          py::gil_scoped_release release;
          const ExperimentResult res = run_experiment(cfg);
          csv = results_csv(res);
          detail = results_json(cfg, res).dump();
        }
        return py::make_tuple(csv, detail);
      },
      py::arg("config"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"suffmdp"};
        for (const auto& a : args) argv.push_back(a.c_str());
        py::gil_scoped_release release;
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"));
}
