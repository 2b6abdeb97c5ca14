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

#ifndef LODEGP_EXPERIMENT_HPP
#define LODEGP_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodegp/controller.hpp"
#include "lodegp/gp.hpp"
#include "lodegp/lode_gp.hpp"
#include "lodegp/plant.hpp"

namespace lodegp {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Environment variable that overrides output.dir of every config.
inline constexpr const char* kOutputDirEnv = "LODEGP_MPC_OUTPUT_DIR";

struct Setpoint {
    double t = 0.0;
    std::vector<std::optional<double>> values;  ///< one per channel, null = masked
};

struct SamplesConfig {
    double start = 0.0;
    double stop = 10.0;
    std::size_t count = 101;
    /// Condition on x0 at t0 and x_ref at tT (inputs masked).
    bool endpoints = true;
    std::vector<Setpoint> setpoints;
};

struct ExperimentConfig {
    std::string name;
    LinearSystem system;
    Eigen::VectorXd x0;
    Eigen::VectorXd u0;
    ControllerConfig controller;
    HyperparamBounds hp_bounds;
    std::optional<double> fixed_signal_variance;
    std::optional<double> fixed_lengthscale_sq;
    double jitter = 1e-8;
    /// Include virtual references in the offline training dataset.
    bool train_on_virtual = true;
    std::uint64_t seed = 0;
    SamplesConfig samples;
    std::filesystem::path output_dir = "out";
    std::string trajectory_file = "trajectory.csv";
    std::string metrics_file = "metrics.json";
    std::string samples_file = "samples.csv";

    /// Parses the JSON document; relative output dirs resolve against base_dir.
    /// Throws ConfigError with a one-line message on any schema problem.
    static ExperimentConfig from_json_text(const std::string& text, const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);

    Eigen::VectorXd z0() const;
    /// output_dir, unless overridden through kOutputDirEnv.
    std::filesystem::path resolved_output_dir() const;
};

struct ExperimentResult {
    std::shared_ptr<const LodeGpPrior> prior;
    Hyperparams hp;
    Trajectory trajectory;
    double training_seconds = 0.0;
    double loop_seconds = 0.0;
};

/// Offline training dataset: the controller dataset at t0 with empty history.
Dataset training_dataset(const ExperimentConfig& cfg, const LodeGpPrior& prior);

/// Fixed values where configured, otherwise optimized on data.
Hyperparams resolve_hyperparams(const ExperimentConfig& cfg, const LodeGpPrior& prior, const Dataset& data);

/// build prior -> train hyperparameters -> closed loop.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_metrics_json(std::ostream& os, const ExperimentConfig& cfg, const ExperimentResult& result);

/// Dataset used by dump_samples: endpoints (if enabled) plus explicit setpoints.
Dataset samples_dataset(const ExperimentConfig& cfg, const LodeGpPrior& prior);

/// Writes `sample_id,t,channel,value` rows for count posterior draws.
void dump_samples(const ExperimentConfig& cfg, std::size_t count, std::uint64_t seed, std::ostream& os);

/// Prints H, its Smith form, the nullspace generators and the kernel entries.
/// For a non-controllable system the algebra is printed before ModelError.
void dump_algebra(const ExperimentConfig& cfg, std::ostream& os);

}  // namespace lodegp

#endif  // LODEGP_EXPERIMENT_HPP
