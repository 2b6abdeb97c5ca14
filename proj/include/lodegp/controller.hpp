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

#ifndef LODEGP_CONTROLLER_HPP
#define LODEGP_CONTROLLER_HPP

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lodegp/gp.hpp"
#include "lodegp/lode_gp.hpp"
#include "lodegp/plant.hpp"

namespace lodegp {

enum class ControlApplication {
    hold_endpoint,          ///< zero-order hold of u*(t_{i+1}) over [t_i, t_{i+1}]
    subgrid_interpolation,  ///< u* on a subgrid of [t_i, t_{i+1}], applied piecewise-linearly
};

struct ControllerConfig {
    double t0 = 0.0;
    double tT = 10.0;
    double dt = 0.1;
    Eigen::VectorXd z_min;
    Eigen::VectorXd z_max;
    Eigen::VectorXd x_ref;
    std::size_t past_window = 0;
    /// Virtual references on constraint-grid times after this instant.
    std::optional<double> virtual_start;
    std::vector<double> constraint_times;
    /// Use (z_max - z_min)/2 directly as the noise variance instead of as the
    /// standard deviation.
    bool constraint_noise_is_variance = false;
    ControlApplication control_application = ControlApplication::hold_endpoint;
    int subgrid_count = 10;

    /// Throws std::invalid_argument on inconsistent settings. The constraint
    /// grid must be strictly increasing and spaced at integer multiples of dt.
    void validate(Eigen::Index channel_count) const;
    std::size_t step_count() const;
};

/// `count` equidistant times from start to stop inclusive.
std::vector<double> equidistant_grid(double start, double stop, std::size_t count);

/// Observation history of the loop. `current` is the latest observation;
/// `history` holds every earlier one in time order.
struct ControllerState {
    std::size_t step = 0;
    double t = 0.0;
    Eigen::VectorXd z;
    std::vector<double> history_t;
    std::vector<Eigen::VectorXd> history_z;
    Dataset active;

    /// Moves the current observation into the history. Throws
    /// std::invalid_argument unless t is after the current time.
    void observe(double t_new, Eigen::VectorXd z_new);
};

Dataset make_d_init(double t, const std::vector<std::optional<double>>& z);
Dataset make_d_init(double t, const Eigen::VectorXd& z);

/// Soft constraints at grid times strictly after t_now.
Dataset make_d_con(const ControllerConfig& cfg, double t_now);

/// Up to m_p most recent history entries as hard points.
Dataset make_d_past(const ControllerState& state, std::size_t m_p);

/// Hard references z_ref at grid times after max(t_v, t_now); empty without t_v.
Dataset make_d_v(const ControllerConfig& cfg, const Eigen::VectorXd& z_ref, double t_now);

/// D_init + D_con + D_past + D_v with virtual points replacing soft
/// constraints at the same time.
Dataset build_dataset(const ControllerConfig& cfg, const ControllerState& state, const Eigen::VectorXd& z_ref);

struct StepResult {
    ControlSignal control;
    double t_next = 0.0;
    Eigen::VectorXd mean_next;    ///< mu*(t_{i+1}) over all channels
    Eigen::VectorXd stddev_next;  ///< posterior std at t_{i+1}
    /// Largest |mu*(t) - z| over the hard points in the dataset.
    double hard_residual = 0.0;
    std::shared_ptr<const PosteriorGp> posterior;
};

/// Conditions the prior on build_dataset(...) and extracts the control for
/// [t_i, t_i + dt]. Factorization failures propagate as NumericalError.
StepResult mpc_step(std::shared_ptr<const LodeGpPrior> prior, ControllerState& state, const ControllerConfig& cfg,
                    const Hyperparams& hp);

/// Observe -> condition -> apply from t0 to tT. The plant starts at
/// z0 = (x0, u0); records hold x(t_i) and the input arriving at t_i.
/// Throws NumericalError if ||x|| exceeds 1e6.
Trajectory run_closed_loop(std::shared_ptr<const LodeGpPrior> prior, const LinearSystem& plant,
                           const ControllerConfig& cfg, const Hyperparams& hp, const Eigen::VectorXd& z0);

}  // namespace lodegp

#endif  // LODEGP_CONTROLLER_HPP
