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

#ifndef LODEGP_METRICS_HPP
#define LODEGP_METRICS_HPP

#include <Eigen/Dense>

#include "lodegp/plant.hpp"

namespace lodegp {

// Both metrics average over the records after t0 (i = 1..T). A trajectory
// holding only its initial record is averaged over that single record.

/// Mean over records of the summed per-channel box violation of z = (x, u).
double constraint_violation(const Trajectory& traj, const Eigen::VectorXd& z_min, const Eigen::VectorXd& z_max);

/// Mean over records of ||x - x_ref||^2.
double control_error(const Trajectory& traj, const Eigen::VectorXd& x_ref);

}  // namespace lodegp

#endif  // LODEGP_METRICS_HPP
