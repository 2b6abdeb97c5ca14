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

#include "lodegp/metrics.hpp"

#include <stdexcept>

namespace lodegp {

namespace {

std::size_t first_record(const Trajectory& traj) {
    if (traj.size() == 0) throw std::invalid_argument("metrics: empty trajectory");
    if (traj.states.size() != traj.size() || traj.controls.size() != traj.size())
        throw std::invalid_argument("metrics: trajectory columns have different lengths");
    return traj.size() > 1 ? 1 : 0;
}

}  // namespace

double constraint_violation(const Trajectory& traj, const Eigen::VectorXd& z_min, const Eigen::VectorXd& z_max) {
    const std::size_t first = first_record(traj);
    double total = 0.0;
    for (std::size_t i = first; i < traj.size(); ++i) {
        Eigen::VectorXd z(traj.states[i].size() + traj.controls[i].size());
        z << traj.states[i], traj.controls[i];
        if (z.size() != z_min.size() || z.size() != z_max.size())
            throw std::invalid_argument("constraint_violation: bound dimension mismatch");
        total += (z - z_max).cwiseMax(0.0).sum() + (z_min - z).cwiseMax(0.0).sum();
    }
    return total / static_cast<double>(traj.size() - first);
}

double control_error(const Trajectory& traj, const Eigen::VectorXd& x_ref) {
    const std::size_t first = first_record(traj);
    double total = 0.0;
    for (std::size_t i = first; i < traj.size(); ++i) {
        if (traj.states[i].size() != x_ref.size()) throw std::invalid_argument("control_error: dimension mismatch");
        total += (traj.states[i] - x_ref).squaredNorm();
    }
    return total / static_cast<double>(traj.size() - first);
}

}  // namespace lodegp
