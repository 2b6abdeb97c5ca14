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

// Shared fixtures for the test suites.

#ifndef LODEGP_TESTS_SUPPORT_HPP
#define LODEGP_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lodegp/controller.hpp"
#include "lodegp/gp.hpp"
#include "lodegp/lode_gp.hpp"
#include "lodegp/poly.hpp"

namespace lodegp::test {

/// x1' = x2, x2' = x1 + x2 + u.
inline LinearSystem unstable_plant() {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, 1, 1;
    Eigen::MatrixXd b(2, 1);
    b << 0, 1;
    return LinearSystem(a, b);
}

/// Mass-spring-damper: x1' = x2, x2' = -2 x1 - x2 + u.
inline LinearSystem damped_oscillator() {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, -2, -1;
    Eigen::MatrixXd b(2, 1);
    b << 0, 1;
    return LinearSystem(a, b);
}

/// Two decoupled integrators, the first one without an input.
inline LinearSystem uncontrollable_system() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = -1;
    Eigen::MatrixXd b(2, 1);
    b << 0, 1;
    return LinearSystem(a, b);
}

inline std::shared_ptr<const LodeGpPrior> make_prior(const LinearSystem& sys,
                                                     Eigen::VectorXd x_ref = Eigen::VectorXd()) {
    if (x_ref.size() == 0) x_ref = Eigen::VectorXd::Zero(sys.state_dim());
    return std::make_shared<const LodeGpPrior>(build_prior(sys, x_ref));
}

/// The regulation task: x0 = (1, 0), u0 = 0, bounds [-1,1]^2 x [-2.5,2.5],
/// 100 constraint points on (0, 10].
inline ControllerConfig regulation_config() {
    ControllerConfig cfg;
    cfg.t0 = 0.0;
    cfg.tT = 10.0;
    cfg.dt = 0.1;
    cfg.z_min = Eigen::Vector3d(-1, -1, -2.5);
    cfg.z_max = Eigen::Vector3d(1, 1, 2.5);
    cfg.x_ref = Eigen::Vector2d::Zero();
    cfg.constraint_times = equidistant_grid(0.1, 10.0, 100);
    cfg.constraint_noise_is_variance = true;
    cfg.control_application = ControlApplication::subgrid_interpolation;
    return cfg;
}

inline DataPoint point(double t, std::vector<std::optional<double>> values, std::vector<double> noise,
                       DataRole role = DataRole::constraint) {
    DataPoint p;
    p.t = t;
    p.values = std::move(values);
    p.noise_var = std::move(noise);
    p.role = role;
    return p;
}

/// Random rational with small numerator and denominator.
inline Rational random_rational(std::mt19937_64& rng, int max_num = 5, int max_den = 3) {
    std::uniform_int_distribution<int> num(-max_num, max_num);
    std::uniform_int_distribution<int> den(1, max_den);
    Rational r(num(rng), den(rng));
    r.canonicalize();
    return r;
}

inline Poly random_poly(std::mt19937_64& rng, int max_degree) {
    std::uniform_int_distribution<int> deg(-1, max_degree);
    const int d = deg(rng);
    std::vector<Rational> c;
    for (int k = 0; k <= d; ++k) c.push_back(random_rational(rng));
    return Poly(std::move(c));
}

inline PolyMatrix random_poly_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int max_degree) {
    PolyMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = random_poly(rng, max_degree);
    return m;
}

/// Random controllable pair (A, B): B has full row rank in its first block or
/// A is a companion matrix driven through the last state.
inline LinearSystem random_controllable_system(std::mt19937_64& rng, int nx) {
    std::uniform_int_distribution<int> small(-3, 3);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nx, nx);
    for (int i = 0; i + 1 < nx; ++i) a(i, i + 1) = 1;
    for (int j = 0; j < nx; ++j) a(nx - 1, j) = small(rng);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nx, 1);
    b(nx - 1, 0) = 1;
    return LinearSystem(a, b);
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace lodegp::test

#endif  // LODEGP_TESTS_SUPPORT_HPP
