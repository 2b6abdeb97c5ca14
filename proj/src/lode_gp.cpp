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

#include "lodegp/lode_gp.hpp"

#include <cmath>
#include <sstream>

#include "lodegp/errors.hpp"

namespace lodegp {

LinearSystem::LinearSystem(Eigen::MatrixXd a, Eigen::MatrixXd b, std::vector<std::string> names)
    : A(std::move(a)), B(std::move(b)), channel_names(std::move(names)) {
    if (channel_names.empty()) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) channel_names.push_back("x" + std::to_string(i + 1));
        for (Eigen::Index i = 0; i < B.cols(); ++i) channel_names.push_back("u" + std::to_string(i + 1));
    }
}

void LinearSystem::validate() const {
    if (A.rows() == 0 || A.rows() != A.cols()) throw ModelError("system: A must be a nonempty square matrix");
    if (B.rows() != A.rows()) throw ModelError("system: B must have as many rows as A");
    if (B.cols() < 1) throw ModelError("system: at least one input is required");
    if (!A.allFinite() || !B.allFinite()) throw ModelError("system: A and B must be finite");
    if (channel_names.size() != static_cast<std::size_t>(channel_dim()))
        throw ModelError("system: expected " + std::to_string(channel_dim()) + " channel names, got " +
                         std::to_string(channel_names.size()));
}

Rational to_rational(double x) {
    if (!std::isfinite(x)) throw ModelError("to_rational: non-finite value");
    // Continued-fraction convergents up to denominator 1e6.
    const double tol = 1e-12 * std::max(1.0, std::abs(x));
    mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 40; ++it) {
        const double a = std::floor(r);
        const mpz_class ai(a);
        const mpz_class h2 = ai * h1 + h0;
        const mpz_class k2 = ai * k1 + k0;
        if (k2 > 1000000) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        Rational q(h1, k1);
        q.canonicalize();
        if (std::abs(q.get_d() - x) <= tol) return q;
        const double frac = r - a;
        if (frac == 0.0) break;
        r = 1.0 / frac;
    }
    return Rational(x);
}

PolyMatrix build_h(const LinearSystem& sys) {
    sys.validate();
    const auto nx = static_cast<std::size_t>(sys.state_dim());
    const auto nu = static_cast<std::size_t>(sys.input_dim());
    PolyMatrix h(nx, nx + nu);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
            Poly e(to_rational(sys.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
            if (i == j) e -= Poly::monomial(1);
            h(i, j) = e;
        }
        for (std::size_t j = 0; j < nu; ++j)
            h(i, nx + j) = Poly(to_rational(sys.B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    return h;
}

namespace {

const Poly* first_nonconstant_factor(const SmithDecomposition& d) {
    for (std::size_t k = 0; k < d.rank(); ++k)
        if (!d.D(k, k).is_constant()) return &d.D(k, k);
    return nullptr;
}

}  // namespace

bool controllability_check(const LinearSystem& sys) {
    return first_nonconstant_factor(smith_normal_form(build_h(sys))) == nullptr;
}

Eigen::VectorXd steady_state_input(const LinearSystem& sys, const Eigen::VectorXd& x_ref) {
    sys.validate();
    if (x_ref.size() != sys.state_dim())
        throw ModelError("reference: x_ref has " + std::to_string(x_ref.size()) + " entries, expected " +
                         std::to_string(sys.state_dim()));
    const Eigen::VectorXd rhs = -sys.A * x_ref;
    Eigen::VectorXd u = sys.B.completeOrthogonalDecomposition().solve(rhs);
    const Eigen::VectorXd residual = sys.B * u - rhs;
    std::ostringstream bad;
    for (Eigen::Index i = 0; i < residual.size(); ++i)
        if (std::abs(residual(i)) > 1e-8) bad << (bad.tellp() > 0 ? ", " : "") << i + 1;
    if (bad.tellp() > 0)
        throw ModelError("reference: x_ref is not an equilibrium for any input; A x + B u = 0 violated in row(s) " +
                         bad.str());
    return u;
}

LodeGpPrior build_prior(const LinearSystem& sys, const Eigen::VectorXd& x_ref) {
    LodeGpPrior prior;
    prior.system = sys;
    prior.H = build_h(sys);
    prior.decomposition = smith_normal_form(prior.H);
    if (const Poly* f = first_nonconstant_factor(prior.decomposition))
        throw ModelError("system is not controllable: non-constant invariant factor " + f->to_string());
    prior.v_cols = right_nullspace_columns(prior.H, prior.decomposition);
    if (prior.v_cols.cols() == 0) throw ModelError("system has an empty nullspace");
    prior.kernel = build_operator_kernel(prior.v_cols);

    const Eigen::VectorXd u_ref = steady_state_input(sys, x_ref);
    prior.prior_mean.resize(sys.channel_dim());
    prior.prior_mean << x_ref, u_ref;
    return prior;
}

}  // namespace lodegp
