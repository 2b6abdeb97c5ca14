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

#ifndef LODEGP_LODE_GP_HPP
#define LODEGP_LODE_GP_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lodegp/kernel.hpp"
#include "lodegp/poly.hpp"

namespace lodegp {

/// x' = A x + B u. Channels are ordered (x_1..x_nx, u_1..u_nu).
struct LinearSystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    std::vector<std::string> channel_names;

    LinearSystem() = default;
    /// Default channel names x1.., u1.. when names is empty.
    LinearSystem(Eigen::MatrixXd a, Eigen::MatrixXd b, std::vector<std::string> names = {});

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }
    Eigen::Index channel_dim() const { return A.rows() + B.cols(); }

    /// Throws ModelError on inconsistent dimensions or n_u == 0.
    void validate() const;
};

/// LODE-GP prior for a system: the algebraic pipeline H -> SNF -> nullspace ->
/// operator kernel, plus the constant reference mean (x_ref, u_ref).
struct LodeGpPrior {
    LinearSystem system;
    PolyMatrix H;
    SmithDecomposition decomposition;
    PolyMatrix v_cols;
    OperatorKernel kernel;
    Eigen::VectorXd prior_mean;

    std::size_t channel_count() const { return kernel.size(); }
};

/// Nearest rational with small denominator when it reproduces x to 1e-12
/// relative, otherwise the exact binary value of x.
Rational to_rational(double x);

/// H = [A - d*I | B].
PolyMatrix build_h(const LinearSystem& sys);

/// True iff every nonzero invariant factor of H is a constant.
bool controllability_check(const LinearSystem& sys);

/// Steady-state input for x_ref: the minimum-norm solution of B u = -A x_ref.
/// Throws ModelError naming the violated rows if the residual exceeds 1e-8.
Eigen::VectorXd steady_state_input(const LinearSystem& sys, const Eigen::VectorXd& x_ref);

/// Full prior. Throws ModelError for non-controllable systems (naming the
/// offending invariant factor) or infeasible references.
LodeGpPrior build_prior(const LinearSystem& sys, const Eigen::VectorXd& x_ref);

}  // namespace lodegp

#endif  // LODEGP_LODE_GP_HPP
