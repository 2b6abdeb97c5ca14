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

#ifndef LODEGP_PLANT_HPP
#define LODEGP_PLANT_HPP

#include <vector>

#include <Eigen/Dense>

namespace lodegp {

/// Input signal over time. `constant` holds each knot value until the next
/// knot (zero-order hold); `piecewise_linear` interpolates between knots.
/// Both clamp to the first / last knot outside the knot range.
struct ControlSignal {
    enum class Kind { constant, piecewise_linear };

    Kind kind = Kind::constant;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;

    static ControlSignal hold(double t, Eigen::VectorXd u);
    static ControlSignal linear(std::vector<double> times, std::vector<Eigen::VectorXd> values);

    /// Throws std::invalid_argument if empty, sizes differ or times are not strictly increasing.
    void validate() const;
    Eigen::VectorXd at(double t) const;
};

/// Closed-loop record sampled at t0 + k*dt.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> controls;
    /// Posterior standard deviation per channel (x then u) at each record.
    std::vector<Eigen::VectorXd> stddevs;
    double constraint_error = 0.0;
    double control_error = 0.0;
    /// Largest |mu*(t) - z| over the hard points of any step.
    double max_hard_residual = 0.0;

    std::size_t size() const { return times.size(); }
};

/// e^{Ah} x + (int_0^h e^{As} ds) B u via the exponential of the augmented
/// matrix [[A, B], [0, 0]] h. Throws std::invalid_argument if h <= 0.
Eigen::VectorXd step_exact(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, double h);

/// Classical RK4 step from t to t+h, with u sampled at t, t+h/2, t+h.
Eigen::VectorXd step_rk4(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& x,
                         const ControlSignal& u, double t, double h);

/// Integrates from t over `duration` with `substeps` equal RK4 steps.
Eigen::VectorXd simulate_rk4(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::VectorXd x,
                             const ControlSignal& u, double t, double duration, int substeps);

}  // namespace lodegp

#endif  // LODEGP_PLANT_HPP
