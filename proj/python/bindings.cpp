/*
 * Copyright 2026 The lodegp-mpc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Python bindings for the lodegp library.

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lodegp/controller.hpp"
#include "lodegp/errors.hpp"
#include "lodegp/experiment.hpp"
#include "lodegp/gp.hpp"
#include "lodegp/lode_gp.hpp"
#include "lodegp/plant.hpp"

namespace py = pybind11;
using namespace lodegp;

namespace {

using PriorPtr = std::shared_ptr<LodeGpPrior>;

struct Observation {
    double t;
    std::vector<std::optional<double>> values;
    std::optional<std::vector<double>> noise_var;
};

Dataset to_dataset(const std::vector<Observation>& obs) {
    Dataset d;
    for (const auto& o : obs) {
        DataPoint p;
        p.t = o.t;
        p.values = o.values;
        p.noise_var = o.noise_var.value_or(std::vector<double>(o.values.size(), 0.0));
        d.insert(std::move(p));
    }
    return d;
}

Hyperparams make_hp(double signal_variance, double lengthscale_sq, double jitter) {
    Hyperparams hp;
    hp.signal_variance = signal_variance;
    hp.lengthscale_sq = lengthscale_sq;
    hp.jitter = jitter;
    hp.validate();
    return hp;
}

py::dict algebra(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const LinearSystem sys(A, B);
    sys.validate();
    const PolyMatrix h = build_h(sys);
    const SmithDecomposition s = smith_normal_form(h);
    py::dict out;
    out["H"] = h.to_string();
    out["Q"] = s.Q.to_string();
    out["D"] = s.D.to_string();
    out["V"] = s.V.to_string();
    std::vector<std::string> factors;
    for (const auto& f : s.invariant_factors()) factors.push_back(f.to_string());
    out["invariant_factors"] = factors;
    out["controllable"] = controllability_check(sys);
    out["nullspace"] = right_nullspace_columns(h, s).to_string();
    return out;
}

py::dict trajectory_dict(const Trajectory& tr) {
    auto stack = [](const std::vector<Eigen::VectorXd>& rows) {
        Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        return m;
    };
    py::dict out;
    out["t"] = tr.times;
    out["x"] = stack(tr.states);
    out["u"] = stack(tr.controls);
    out["std"] = stack(tr.stddevs);
    out["constraint_error"] = tr.constraint_error;
    out["control_error"] = tr.control_error;
    out["max_hard_residual"] = tr.max_hard_residual;
    return out;
}

py::dict run_config(const std::string& path) {
    const auto cfg = ExperimentConfig::load(path);
    const auto result = run_experiment(cfg);
    py::dict out = trajectory_dict(result.trajectory);
    out["name"] = cfg.name;
    out["signal_variance"] = result.hp.signal_variance;
    out["lengthscale_sq"] = result.hp.lengthscale_sq;
    std::ostringstream metrics;
    write_metrics_json(metrics, cfg, result);
    out["metrics_json"] = metrics.str();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "LODE-GP model predictive control";

    auto base = py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    m.def("algebra", &algebra, py::arg("A"), py::arg("B"),
          "Operator matrix H of x' = Ax + Bu, its Smith form Q H V = D and the right nullspace basis.");
    m.def("steady_state_input", [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& x_ref) {
        return steady_state_input(LinearSystem(A, B), x_ref);
    }, py::arg("A"), py::arg("B"), py::arg("x_ref"));

    py::class_<LodeGpPrior, PriorPtr>(m, "Prior")
        .def(py::init([](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::optional<Eigen::VectorXd> x_ref) {
                 const LinearSystem sys(A, B);
                 return std::make_shared<LodeGpPrior>(
                     build_prior(sys, x_ref.value_or(Eigen::VectorXd::Zero(A.rows()))));
             }),
             py::arg("A"), py::arg("B"), py::arg("x_ref") = py::none())
        .def_property_readonly("channel_count", &LodeGpPrior::channel_count)
        .def_property_readonly("mean", [](const LodeGpPrior& p) { return p.prior_mean; })
        .def_property_readonly("H", [](const LodeGpPrior& p) { return p.H.to_string(); })
        .def_property_readonly("nullspace", [](const LodeGpPrior& p) { return p.v_cols.to_string(); });

    py::class_<Observation>(m, "Observation")
        .def(py::init<double, std::vector<std::optional<double>>, std::optional<std::vector<double>>>(), py::arg("t"),
             py::arg("values"), py::arg("noise_var") = py::none())
        .def_readonly("t", &Observation::t)
        .def_readonly("values", &Observation::values)
        .def_readonly("noise_var", &Observation::noise_var);

    py::class_<PosteriorGp, std::shared_ptr<PosteriorGp>>(m, "Posterior")
        .def(py::init([](PriorPtr prior, const std::vector<Observation>& obs, double sf2, double l2, double jitter) {
                 return std::make_shared<PosteriorGp>(std::move(prior), to_dataset(obs), make_hp(sf2, l2, jitter));
             }),
             py::arg("prior"), py::arg("observations"), py::arg("signal_variance") = 1.0,
             py::arg("lengthscale_sq") = 1.0, py::arg("jitter") = 1e-8)
        .def("mean", [](const PosteriorGp& gp, const std::vector<double>& t) { return gp.mean(t); }, py::arg("t"))
        .def("stddev", [](const PosteriorGp& gp, const std::vector<double>& t) { return gp.stddev(t); }, py::arg("t"))
        .def("covariance", [](const PosteriorGp& gp, const std::vector<double>& t) { return gp.covariance(t); },
             py::arg("t"))
        .def("sample", [](const PosteriorGp& gp, const std::vector<double>& t, std::size_t count, std::uint64_t seed) {
                 return sample_posterior(gp, t, count, seed);
             },
             py::arg("t"), py::arg("count"), py::arg("seed") = 0)
        .def_property_readonly("alpha", &PosteriorGp::alpha)
        .def_property_readonly("effective_jitter", &PosteriorGp::effective_jitter)
        .def("log_marginal_likelihood", py::overload_cast<>(&PosteriorGp::log_marginal_likelihood, py::const_));

    m.def("optimize_hyperparams",
          [](const LodeGpPrior& prior, const std::vector<Observation>& obs, std::pair<double, double> sf2_bounds,
             std::pair<double, double> l2_bounds, std::uint64_t seed) {
              HyperparamBounds b;
              b.signal_variance = {sf2_bounds.first, sf2_bounds.second};
              b.lengthscale_sq = {l2_bounds.first, l2_bounds.second};
              const Hyperparams hp = optimize_hyperparams(prior, to_dataset(obs), b, seed);
              return std::make_pair(hp.signal_variance, hp.lengthscale_sq);
          },
          py::arg("prior"), py::arg("observations"), py::arg("signal_variance_bounds") = std::make_pair(0.01, 100.0),
          py::arg("lengthscale_sq_bounds") = std::make_pair(0.01, 100.0), py::arg("seed") = 0,
          "Maximize the log marginal likelihood; returns (signal_variance, lengthscale_sq).");

    m.def("step_exact", &step_exact, py::arg("A"), py::arg("B"), py::arg("x"), py::arg("u"), py::arg("h"));
    m.def("simulate_rk4",
          [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
             double duration, int substeps) {
              return simulate_rk4(A, B, x, ControlSignal::hold(0.0, u), 0.0, duration, substeps);
          },
          py::arg("A"), py::arg("B"), py::arg("x"), py::arg("u"), py::arg("duration"), py::arg("substeps"));

    m.def("run", &run_config, py::arg("config"),
          "Run the closed-loop experiment described by a JSON config; returns trajectory arrays and metrics.");
    m.def("samples", [](const std::string& path, std::size_t count, std::uint64_t seed) {
        std::ostringstream os;
        dump_samples(ExperimentConfig::load(path), count, seed, os);
        return os.str();
    }, py::arg("config"), py::arg("count") = 10, py::arg("seed") = 0, "Posterior samples as CSV text.");
    m.def("dump_algebra", [](const std::string& path) {
        std::ostringstream os;
        dump_algebra(ExperimentConfig::load(path), os);
        return os.str();
    }, py::arg("config"));
}
