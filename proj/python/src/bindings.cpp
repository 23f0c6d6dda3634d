#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flipscore/baselines.hpp"
#include "flipscore/cli.hpp"
#include "flipscore/error.hpp"
#include "flipscore/flip_test.hpp"
#include "flipscore/glm.hpp"
#include "flipscore/simulate.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace flipscore;

namespace {

ModelData make_data(Eigen::VectorXd y, Eigen::MatrixXd x, Eigen::MatrixXd z, ClusterLabels cluster,
                    std::optional<Eigen::VectorXd> offset)
{
    ModelData data;
    data.y = std::move(y);
    data.x = std::move(x);
    data.z = std::move(z);
    data.cluster = std::move(cluster);
    if (offset) {
        data.offset = std::move(*offset);
    }
    return data;
}

FlipPlan make_plan(const ModelData& data, std::size_t num_flips, std::uint64_t seed)
{
    FlipPlan plan;
    plan.num_flips = num_flips;
    plan.seed = seed;
    plan.blocks = block_structure(data.cluster);
    return plan;
}

py::tuple run_cli_py(const std::vector<std::string>& args)
{
    std::vector<const char*> argv{"flipscore"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = R"pbdoc(
        Block sign-flip score tests for generalized linear models on clustered data.
    )pbdoc";

    auto input_error = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    (void)input_error;

    py::class_<Family>(m, "Family")
        .def_static("binomial", &Family::binomial)
        .def_static("poisson", &Family::poisson)
        .def_static("gaussian", &Family::gaussian, py::arg("dispersion") = py::none())
        .def_static("from_name", &Family::from_name)
        .def_property_readonly("name", &Family::name)
        .def("inverse_link", &Family::inverse_link)
        .def("variance", &Family::variance, py::arg("mu"), py::arg("dispersion") = 1.0)
        .def("mean_derivative", &Family::mean_derivative)
        .def("__repr__", [](const Family& f) { return "Family('" + f.name() + "')"; });

    py::class_<ModelData>(m, "ModelData")
        .def(py::init(&make_data), py::arg("y"), py::arg("x"), py::arg("z"), py::arg("cluster"),
             py::arg("offset") = py::none())
        .def_readwrite("y", &ModelData::y)
        .def_readwrite("x", &ModelData::x)
        .def_readwrite("z", &ModelData::z)
        .def_readwrite("cluster", &ModelData::cluster)
        .def_property_readonly("n", &ModelData::rows);

    py::class_<NullFit>(m, "NullFit")
        .def_property_readonly("gamma_hat", &NullFit::gamma_hat)
        .def_readonly("eta", &NullFit::eta)
        .def_readonly("mu", &NullFit::mu)
        .def_readonly("w_diag", &NullFit::w_diag)
        .def_readonly("v_diag", &NullFit::v_diag)
        .def_readonly("dispersion", &NullFit::dispersion)
        .def_readonly("converged", &NullFit::converged)
        .def_readonly("iterations", &NullFit::iterations)
        .def_readonly("deviance", &NullFit::deviance);

    m.def(
        "fit_null",
        [](const ModelData& data, const Family& family, double tol, int max_iter) {
            return fit_null(data, family, IrlsOptions{tol, max_iter});
        },
        py::arg("data"), py::arg("family"), py::arg("tol") = 1e-8, py::arg("max_iter") = 50);

    m.def("hat_projection", &hat_projection, py::arg("z"), py::arg("w_diag"));

    m.def(
        "block_structure",
        [](const ClusterLabels& labels) {
            std::vector<std::vector<Eigen::Index>> out = block_structure(labels).blocks;
            return out;
        },
        py::arg("labels"));

    m.def(
        "generate_flips",
        [](const ClusterLabels& labels, std::size_t num_flips, std::uint64_t seed) {
            FlipPlan plan;
            plan.num_flips = num_flips;
            plan.seed = seed;
            plan.blocks = block_structure(labels);
            return generate_flips(plan);
        },
        py::arg("labels"), py::arg("num_flips"), py::arg("seed"),
        "n x W matrix of signs; column 0 is the identity.");

    py::class_<FlipTestResult>(m, "FlipTestResult")
        .def_readonly("columns", &FlipTestResult::columns)
        .def_readonly("score", &FlipTestResult::score)
        .def_readonly("std_error", &FlipTestResult::std_error)
        .def_readonly("z_value", &FlipTestResult::z_value)
        .def_readonly("partial_cor", &FlipTestResult::partial_cor)
        .def_readonly("flipped", &FlipTestResult::flipped)
        .def_readonly("p_values", &FlipTestResult::p_values)
        .def_readonly("combined_statistic", &FlipTestResult::combined_statistic)
        .def_readonly("combined_p", &FlipTestResult::combined_p)
        .def_readonly("num_flips", &FlipTestResult::num_flips)
        .def_readonly("degenerate_flips", &FlipTestResult::degenerate_flips);

    m.def(
        "flip_test",
        [](const ModelData& data, const Family& family, std::size_t num_flips, std::uint64_t seed,
           const std::string& alternative, Eigen::Index column) {
            return flip_test(data, family, make_plan(data, num_flips, seed),
                             alternative_from_name(alternative), column);
        },
        py::arg("data"), py::arg("family"), py::arg("num_flips") = 500, py::arg("seed") = 0,
        py::arg("alternative") = "two-sided", py::arg("column") = 0);

    m.def(
        "multi_df_test",
        [](const ModelData& data, const Family& family, const std::vector<Eigen::Index>& columns,
           std::size_t num_flips, std::uint64_t seed) {
            return multi_df_test(data, family, make_plan(data, num_flips, seed), columns);
        },
        py::arg("data"), py::arg("family"), py::arg("columns"), py::arg("num_flips") = 500,
        py::arg("seed") = 0);

    py::class_<WaldResult>(m, "WaldResult")
        .def_readonly("estimate", &WaldResult::estimate)
        .def_readonly("std_error", &WaldResult::std_error)
        .def_readonly("z", &WaldResult::z)
        .def_readonly("chi_square", &WaldResult::chi_square)
        .def_readonly("p_value", &WaldResult::p_value)
        .def_readonly("converged", &WaldResult::converged);

    py::class_<SandwichFit>(m, "SandwichFit")
        .def_readonly("beta_hat", &SandwichFit::beta_hat)
        .def_readonly("model_variance", &SandwichFit::model_variance)
        .def_readonly("sandwich_variance", &SandwichFit::sandwich_variance)
        .def_readonly("converged", &SandwichFit::converged);

    m.def("wald_glm_test",
          [](const ModelData& d, const Family& f, Eigen::Index column) {
              return wald_glm_test(d, f, column);
          },
          py::arg("data"), py::arg("family"), py::arg("column") = 0);
    m.def("gee_independence_fit",
          [](const ModelData& d, const Family& f) { return gee_independence_fit(d, f); },
          py::arg("data"), py::arg("family"));
    m.def("gee_wald_test", &gee_wald_test, py::arg("fit"), py::arg("column") = 0);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("clusters", &Scenario::clusters)
        .def_readwrite("per_cluster", &Scenario::per_cluster)
        .def_readwrite("beta", &Scenario::beta)
        .def_readwrite("gamma", &Scenario::gamma)
        .def_readwrite("random_sd", &Scenario::random_sd)
        .def_readwrite("random_slope", &Scenario::random_slope)
        .def_readwrite("nuisance_correlation", &Scenario::nuisance_correlation)
        .def_readwrite("family", &Scenario::family)
        .def_readwrite("reps", &Scenario::reps)
        .def_readwrite("alpha", &Scenario::alpha)
        .def_readwrite("flips", &Scenario::flips)
        .def_readwrite("seed", &Scenario::seed)
        .def_property(
            "mode", [](const Scenario& s) { return to_string(s.mode); },
            [](Scenario& s, const std::string& v) { s.mode = nuisance_mode_from_name(v); })
        .def_property(
            "methods",
            [](const Scenario& s) {
                std::vector<std::string> out;
                for (Method meth : s.methods) {
                    out.push_back(to_string(meth));
                }
                return out;
            },
            [](Scenario& s, const std::vector<std::string>& names) {
                s.methods.clear();
                for (const auto& n : names) {
                    s.methods.push_back(method_from_name(n));
                }
            })
        .def_property_readonly("documented_limitation", &Scenario::documented_limitation);

    py::class_<MethodSummary>(m, "MethodSummary")
        .def_property_readonly("method", [](const MethodSummary& s) { return to_string(s.method); })
        .def_readonly("rejections", &MethodSummary::rejections)
        .def_readonly("reps", &MethodSummary::reps)
        .def_readonly("rate", &MethodSummary::rate)
        .def_readonly("lower", &MethodSummary::lower)
        .def_readonly("upper", &MethodSummary::upper)
        .def_readonly("failures", &MethodSummary::failures);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("methods", &SimResult::methods)
        .def_readonly("nonconverged", &SimResult::nonconverged)
        .def_readonly("degenerate_flips", &SimResult::degenerate_flips)
        .def_readonly("documented_limitation", &SimResult::documented_limitation);

    m.def("simulate_cluster_dataset", &simulate_cluster_dataset, py::arg("scenario"),
          py::arg("rep_index"));
    m.def("run_scenario",
          [](const Scenario& s) { return run_scenario(s); }, py::arg("scenario"),
          py::call_guard<py::gil_scoped_release>());
    m.def("rejection_interval", &rejection_interval, py::arg("count"), py::arg("reps"),
          py::arg("level") = 0.95);

    m.def("run_cli", &run_cli_py, py::arg("args"),
          "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
