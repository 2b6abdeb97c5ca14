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

#include "lodegp/plant.hpp"

#include <algorithm>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace lodegp {

ControlSignal ControlSignal::hold(double t, Eigen::VectorXd u) {
    return ControlSignal{Kind::constant, {t}, {std::move(u)}};
}

ControlSignal ControlSignal::linear(std::vector<double> times, std::vector<Eigen::VectorXd> values) {
    ControlSignal s{Kind::piecewise_linear, std::move(times), std::move(values)};
    s.validate();
    return s;
}

void ControlSignal::validate() const {
    if (times.empty() || times.size() != values.size())
        throw std::invalid_argument("ControlSignal: knots must be nonempty with one value per time");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("ControlSignal: knot times must increase strictly");
        if (values[k].size() != values[0].size()) throw std::invalid_argument("ControlSignal: knot sizes differ");
    }
}

Eigen::VectorXd ControlSignal::at(double t) const {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    const std::size_t lo = hi - 1;
    if (kind == Kind::constant) return values[lo];
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * values[lo] + w * values[hi];
}

Eigen::VectorXd step_exact(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step_exact: step must be positive");
    const auto nx = A.rows();
    const auto nu = B.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
    aug.topLeftCorner(nx, nx) = A * h;
    aug.topRightCorner(nx, nu) = B * h;
    const Eigen::MatrixXd e = aug.exp();
    return e.topLeftCorner(nx, nx) * x + e.topRightCorner(nx, nu) * u;
}

Eigen::VectorXd step_rk4(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& x,
                         const ControlSignal& u, double t, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step_rk4: step must be positive");
    const Eigen::VectorXd u0 = u.at(t);
    const Eigen::VectorXd um = u.at(t + 0.5 * h);
    const Eigen::VectorXd u1 = u.at(t + h);
    const Eigen::VectorXd k1 = A * x + B * u0;
    const Eigen::VectorXd k2 = A * (x + 0.5 * h * k1) + B * um;
    const Eigen::VectorXd k3 = A * (x + 0.5 * h * k2) + B * um;
    const Eigen::VectorXd k4 = A * (x + h * k3) + B * u1;
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd simulate_rk4(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::VectorXd x,
                             const ControlSignal& u, double t, double duration, int substeps) {
    if (substeps < 1) throw std::invalid_argument("simulate_rk4: substeps must be >= 1");
    const double h = duration / substeps;
    for (int k = 0; k < substeps; ++k) x = step_rk4(A, B, x, u, t + k * h, h);
    return x;
}

}  // namespace lodegp
