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

#include "lodegp/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"
#include "lodegp/errors.hpp"

namespace lodegp {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) config_fail(where, "expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!keys.count(k)) config_fail(where, "unknown key '" + k + "'");
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) config_fail(where, std::string("missing key '") + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) config_fail(where, "expected a number");
    return v.get<double>();
}

Eigen::VectorXd vector(const json& v, const std::string& where) {
    if (!v.is_array()) config_fail(where, "expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], where);
    return out;
}

Eigen::MatrixXd matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) config_fail(where, "expected a nonempty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_array() || v[i].size() != cols) config_fail(where, "rows must be arrays of equal length");
        for (std::size_t j = 0; j < cols; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], where);
    }
    return out;
}

Interval interval(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) config_fail(where, "expected [lo, hi]");
    return {number(v[0], where), number(v[1], where)};
}

struct Grid {
    double start, stop;
    std::size_t count;
};

Grid grid(const json& v, const std::string& where) {
    reject_unknown(v, where, {"start", "stop", "count"});
    const json& c = require(v, "count", where);
    if (!c.is_number_integer() || c.get<long long>() < 0) config_fail(where + ".count", "expected a nonnegative integer");
    return {number(require(v, "start", where), where + ".start"), number(require(v, "stop", where), where + ".stop"),
            c.get<std::size_t>()};
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) config_fail(where, "expected a string");
    return v.get<std::string>();
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& source, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    reject_unknown(doc, "root",
                   {"name", "system", "reference", "initial", "horizon", "bounds", "datasets", "hyperparameters",
                    "control", "samples", "seed", "output"});

    ExperimentConfig cfg;
    if (doc.contains("name")) cfg.name = text(doc["name"], "name");

    const json& sys = require(doc, "system", "root");
    reject_unknown(sys, "system", {"A", "B", "channels"});
    std::vector<std::string> names;
    if (sys.contains("channels")) {
        if (!sys["channels"].is_array()) config_fail("system.channels", "expected an array of strings");
        for (const auto& n : sys["channels"]) names.push_back(text(n, "system.channels"));
    }
    cfg.system = LinearSystem(matrix(require(sys, "A", "system"), "system.A"),
                              matrix(require(sys, "B", "system"), "system.B"), names);
    try {
        cfg.system.validate();
    } catch (const ModelError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const Eigen::Index nx = cfg.system.state_dim();
    const Eigen::Index nu = cfg.system.input_dim();

    const json& ref = require(doc, "reference", "root");
    reject_unknown(ref, "reference", {"x_ref"});
    cfg.controller.x_ref = vector(require(ref, "x_ref", "reference"), "reference.x_ref");
    if (cfg.controller.x_ref.size() != nx) config_fail("reference.x_ref", "expected " + std::to_string(nx) + " entries");

    const json& init = require(doc, "initial", "root");
    reject_unknown(init, "initial", {"x0", "u0"});
    cfg.x0 = vector(require(init, "x0", "initial"), "initial.x0");
    cfg.u0 = init.contains("u0") ? vector(init["u0"], "initial.u0") : Eigen::VectorXd::Zero(nu);
    if (cfg.x0.size() != nx) config_fail("initial.x0", "expected " + std::to_string(nx) + " entries");
    if (cfg.u0.size() != nu) config_fail("initial.u0", "expected " + std::to_string(nu) + " entries");

    const json& hor = require(doc, "horizon", "root");
    reject_unknown(hor, "horizon", {"t0", "tT", "dt"});
    cfg.controller.t0 = number(require(hor, "t0", "horizon"), "horizon.t0");
    cfg.controller.tT = number(require(hor, "tT", "horizon"), "horizon.tT");
    cfg.controller.dt = number(require(hor, "dt", "horizon"), "horizon.dt");

    const json& bounds = require(doc, "bounds", "root");
    reject_unknown(bounds, "bounds", {"z_min", "z_max"});
    cfg.controller.z_min = vector(require(bounds, "z_min", "bounds"), "bounds.z_min");
    cfg.controller.z_max = vector(require(bounds, "z_max", "bounds"), "bounds.z_max");

    if (doc.contains("datasets")) {
        const json& ds = doc["datasets"];
        reject_unknown(ds, "datasets", {"constraint_grid", "past_window", "virtual_start"});
        if (ds.contains("constraint_grid")) {
            const Grid g = grid(ds["constraint_grid"], "datasets.constraint_grid");
            cfg.controller.constraint_times = equidistant_grid(g.start, g.stop, g.count);
        }
        if (ds.contains("past_window")) {
            const json& m = ds["past_window"];
            if (!m.is_number_integer() || m.get<long long>() < 0)
                config_fail("datasets.past_window", "expected a nonnegative integer");
            cfg.controller.past_window = m.get<std::size_t>();
        }
        if (ds.contains("virtual_start") && !ds["virtual_start"].is_null())
            cfg.controller.virtual_start = number(ds["virtual_start"], "datasets.virtual_start");
    }

    if (doc.contains("hyperparameters")) {
        const json& hp = doc["hyperparameters"];
        reject_unknown(hp, "hyperparameters",
                       {"signal_variance_bounds", "lengthscale_sq_bounds", "signal_variance", "lengthscale_sq", "jitter",
                        "train_on_virtual"});
        if (hp.contains("signal_variance_bounds"))
            cfg.hp_bounds.signal_variance = interval(hp["signal_variance_bounds"], "hyperparameters.signal_variance_bounds");
        if (hp.contains("lengthscale_sq_bounds"))
            cfg.hp_bounds.lengthscale_sq = interval(hp["lengthscale_sq_bounds"], "hyperparameters.lengthscale_sq_bounds");
        if (hp.contains("signal_variance") && !hp["signal_variance"].is_null())
            cfg.fixed_signal_variance = number(hp["signal_variance"], "hyperparameters.signal_variance");
        if (hp.contains("lengthscale_sq") && !hp["lengthscale_sq"].is_null())
            cfg.fixed_lengthscale_sq = number(hp["lengthscale_sq"], "hyperparameters.lengthscale_sq");
        if (hp.contains("jitter")) cfg.jitter = number(hp["jitter"], "hyperparameters.jitter");
        if (hp.contains("train_on_virtual")) {
            if (!hp["train_on_virtual"].is_boolean())
                config_fail("hyperparameters.train_on_virtual", "expected a boolean");
            cfg.train_on_virtual = hp["train_on_virtual"].get<bool>();
        }
    }

    if (doc.contains("control")) {
        const json& ctl = doc["control"];
        reject_unknown(ctl, "control", {"application", "subgrid_count", "constraint_noise_is_variance"});
        if (ctl.contains("application")) {
            const std::string app = text(ctl["application"], "control.application");
            if (app == "hold_endpoint")
                cfg.controller.control_application = ControlApplication::hold_endpoint;
            else if (app == "subgrid_interpolation")
                cfg.controller.control_application = ControlApplication::subgrid_interpolation;
            else
                config_fail("control.application", "expected 'hold_endpoint' or 'subgrid_interpolation'");
        }
        if (ctl.contains("subgrid_count")) {
            if (!ctl["subgrid_count"].is_number_integer()) config_fail("control.subgrid_count", "expected an integer");
            cfg.controller.subgrid_count = ctl["subgrid_count"].get<int>();
        }
        if (ctl.contains("constraint_noise_is_variance")) {
            if (!ctl["constraint_noise_is_variance"].is_boolean())
                config_fail("control.constraint_noise_is_variance", "expected a boolean");
            cfg.controller.constraint_noise_is_variance = ctl["constraint_noise_is_variance"].get<bool>();
        }
    }

    cfg.samples.start = cfg.controller.t0;
    cfg.samples.stop = cfg.controller.tT;
    if (doc.contains("samples")) {
        const json& s = doc["samples"];
        reject_unknown(s, "samples", {"grid", "endpoints", "setpoints"});
        if (s.contains("grid")) {
            const Grid g = grid(s["grid"], "samples.grid");
            cfg.samples.start = g.start;
            cfg.samples.stop = g.stop;
            cfg.samples.count = g.count;
        }
        if (s.contains("endpoints")) {
            if (!s["endpoints"].is_boolean()) config_fail("samples.endpoints", "expected a boolean");
            cfg.samples.endpoints = s["endpoints"].get<bool>();
        }
        if (s.contains("setpoints")) {
            if (!s["setpoints"].is_array()) config_fail("samples.setpoints", "expected an array");
            for (const auto& sp : s["setpoints"]) {
                reject_unknown(sp, "samples.setpoints[]", {"t", "values"});
                Setpoint p;
                p.t = number(require(sp, "t", "samples.setpoints[]"), "samples.setpoints[].t");
                const json& vals = require(sp, "values", "samples.setpoints[]");
                if (!vals.is_array() || vals.size() != static_cast<std::size_t>(nx + nu))
                    config_fail("samples.setpoints[].values", "expected " + std::to_string(nx + nu) + " entries");
                for (const auto& v : vals)
                    p.values.push_back(v.is_null() ? std::nullopt
                                                   : std::optional<double>(number(v, "samples.setpoints[].values")));
                cfg.samples.setpoints.push_back(std::move(p));
            }
        }
    }

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) config_fail("seed", "expected a nonnegative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }

    if (doc.contains("output")) {
        const json& out = doc["output"];
        reject_unknown(out, "output", {"dir", "trajectory", "metrics", "samples"});
        if (out.contains("dir")) cfg.output_dir = text(out["dir"], "output.dir");
        if (out.contains("trajectory")) cfg.trajectory_file = text(out["trajectory"], "output.trajectory");
        if (out.contains("metrics")) cfg.metrics_file = text(out["metrics"], "output.metrics");
        if (out.contains("samples")) cfg.samples_file = text(out["samples"], "output.samples");
    }
    if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;

    try {
        cfg.controller.validate(nx + nu);
        cfg.hp_bounds.validate();
        Hyperparams probe;
        probe.jitter = cfg.jitter;
        if (cfg.fixed_signal_variance) probe.signal_variance = *cfg.fixed_signal_variance;
        if (cfg.fixed_lengthscale_sq) probe.lengthscale_sq = *cfg.fixed_lengthscale_sq;
        probe.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str(), path.parent_path());
}

Eigen::VectorXd ExperimentConfig::z0() const {
    Eigen::VectorXd z(x0.size() + u0.size());
    z << x0, u0;
    return z;
}

std::filesystem::path ExperimentConfig::resolved_output_dir() const {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return output_dir;
}

Dataset training_dataset(const ExperimentConfig& cfg, const LodeGpPrior& prior) {
    ControllerState state;
    state.t = cfg.controller.t0;
    state.z = cfg.z0();
    ControllerConfig controller = cfg.controller;
    if (!cfg.train_on_virtual) controller.virtual_start.reset();
    return build_dataset(controller, state, prior.prior_mean);
}

Hyperparams resolve_hyperparams(const ExperimentConfig& cfg, const LodeGpPrior& prior, const Dataset& data) {
    Hyperparams base;
    base.jitter = cfg.jitter;
    if (cfg.fixed_signal_variance) base.signal_variance = *cfg.fixed_signal_variance;
    if (cfg.fixed_lengthscale_sq) base.lengthscale_sq = *cfg.fixed_lengthscale_sq;
    if (cfg.fixed_signal_variance && cfg.fixed_lengthscale_sq) return base;

    HyperparamBounds bounds = cfg.hp_bounds;
    if (cfg.fixed_signal_variance) bounds.signal_variance = {base.signal_variance, base.signal_variance};
    if (cfg.fixed_lengthscale_sq) bounds.lengthscale_sq = {base.lengthscale_sq, base.lengthscale_sq};
    return optimize_hyperparams(prior, data, bounds, cfg.seed, base);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    ExperimentResult result;
    const auto t_start = clock::now();
    result.prior = std::make_shared<const LodeGpPrior>(build_prior(cfg.system, cfg.controller.x_ref));
    result.hp = resolve_hyperparams(cfg, *result.prior, training_dataset(cfg, *result.prior));
    const auto t_trained = clock::now();
    result.trajectory = run_closed_loop(result.prior, cfg.system, cfg.controller, result.hp, cfg.z0());
    const auto t_done = clock::now();
    result.training_seconds = std::chrono::duration<double>(t_trained - t_start).count();
    result.loop_seconds = std::chrono::duration<double>(t_done - t_trained).count();
    return result;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    if (traj.size() == 0) return;
    const auto nx = traj.states.front().size();
    const auto nu = traj.controls.front().size();
    std::string header = "t";
    for (Eigen::Index i = 0; i < nx; ++i) header += fmt::format(",x{}", i + 1);
    for (Eigen::Index i = 0; i < nu; ++i) header += fmt::format(",u{}", i + 1);
    for (Eigen::Index i = 0; i < nx; ++i) header += fmt::format(",std_x{}", i + 1);
    for (Eigen::Index i = 0; i < nu; ++i) header += fmt::format(",std_u{}", i + 1);
    os << header << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::string line = fmt_double(traj.times[k]);
        for (Eigen::Index i = 0; i < nx; ++i) line += ',' + fmt_double(traj.states[k](i));
        for (Eigen::Index i = 0; i < nu; ++i) line += ',' + fmt_double(traj.controls[k](i));
        for (Eigen::Index i = 0; i < nx + nu; ++i) line += ',' + fmt_double(traj.stddevs[k](i));
        os << line << '\n';
    }
}

void write_metrics_json(std::ostream& os, const ExperimentConfig& cfg, const ExperimentResult& result) {
    json doc;
    doc["name"] = cfg.name;
    doc["constraint_error"] = result.trajectory.constraint_error;
    doc["control_error"] = result.trajectory.control_error;
    doc["max_hard_residual"] = result.trajectory.max_hard_residual;
    doc["final_state_norm"] = result.trajectory.states.back().norm();
    doc["steps"] = result.trajectory.size() - 1;
    doc["hyperparameters"] = {{"signal_variance", result.hp.signal_variance},
                              {"lengthscale_sq", result.hp.lengthscale_sq},
                              {"jitter", result.hp.jitter}};
    doc["wall_time_seconds"] = {{"training", result.training_seconds},
                                {"closed_loop", result.loop_seconds},
                                {"total", result.training_seconds + result.loop_seconds}};
    os << doc.dump(2) << '\n';
}

Dataset samples_dataset(const ExperimentConfig& cfg, const LodeGpPrior& prior) {
    const auto nx = static_cast<std::size_t>(cfg.system.state_dim());
    const auto nz = static_cast<std::size_t>(cfg.system.channel_dim());
    Dataset d;
    auto state_point = [&](double t, const Eigen::VectorXd& x) {
        DataPoint p;
        p.t = t;
        p.values.assign(nz, std::nullopt);
        p.noise_var.assign(nz, 0.0);
        for (std::size_t i = 0; i < nx; ++i) p.values[i] = x(static_cast<Eigen::Index>(i));
        return p;
    };
    if (cfg.samples.endpoints) {
        d.insert(state_point(cfg.controller.t0, cfg.x0));
        DataPoint end = state_point(cfg.controller.tT, prior.prior_mean.head(static_cast<Eigen::Index>(nx)));
        end.role = DataRole::virtual_reference;
        d.insert(std::move(end));
    }
    for (const auto& sp : cfg.samples.setpoints) {
        DataPoint p;
        p.t = sp.t;
        p.values = sp.values;
        p.noise_var.assign(nz, 0.0);
        p.role = DataRole::virtual_reference;
        d.insert(std::move(p));
    }
    return d;
}

void dump_samples(const ExperimentConfig& cfg, std::size_t count, std::uint64_t seed, std::ostream& os) {
    auto prior = std::make_shared<const LodeGpPrior>(build_prior(cfg.system, cfg.controller.x_ref));
    const Dataset data = samples_dataset(cfg, *prior);
    const Hyperparams hp = data.observation_count() > 0 ? resolve_hyperparams(cfg, *prior, data) : [&] {
        Hyperparams h;
        h.jitter = cfg.jitter;
        if (cfg.fixed_signal_variance) h.signal_variance = *cfg.fixed_signal_variance;
        if (cfg.fixed_lengthscale_sq) h.lengthscale_sq = *cfg.fixed_lengthscale_sq;
        return h;
    }();
    const PosteriorGp gp(prior, data, hp);
    const std::vector<double> grid = equidistant_grid(cfg.samples.start, cfg.samples.stop, cfg.samples.count);

    os << "sample_id,t,channel,value\n";
    const auto draws = sample_posterior(gp, grid, count, seed);
    for (std::size_t s = 0; s < draws.size(); ++s)
        for (std::size_t q = 0; q < grid.size(); ++q)
            for (std::size_t c = 0; c < cfg.system.channel_names.size(); ++c)
                os << s << ',' << fmt_double(grid[q]) << ',' << cfg.system.channel_names[c] << ','
                   << fmt_double(draws[s](static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c))) << '\n';
}

void dump_algebra(const ExperimentConfig& cfg, std::ostream& os) {
    const PolyMatrix h = build_h(cfg.system);
    const SmithDecomposition snf = smith_normal_form(h);
    os << "# channels: ";
    for (std::size_t i = 0; i < cfg.system.channel_names.size(); ++i)
        os << (i ? ", " : "") << cfg.system.channel_names[i];
    os << "\n# H\n" << h << "# D\n" << snf.D << "# Q\n" << snf.Q << "# V\n" << snf.V;
    for (const Poly& f : snf.invariant_factors())
        if (!f.is_constant())
            throw ModelError("system is not controllable: non-constant invariant factor " + f.to_string());
    const PolyMatrix v = right_nullspace_columns(h, snf);
    os << "# nullspace columns\n" << v;
    os << "# kernel\n" << build_operator_kernel(v).to_string(cfg.system.channel_names);
}

}  // namespace lodegp
