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

#ifndef LODEGP_KERNEL_HPP
#define LODEGP_KERNEL_HPP

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lodegp/poly.hpp"

namespace lodegp {

struct Hyperparams {
    double signal_variance = 1.0;  ///< sigma_f^2
    double lengthscale_sq = 1.0;   ///< l^2
    double jitter = 1e-8;

    /// Throws std::invalid_argument unless sigma_f^2 > 0, l^2 > 0, jitter >= 0.
    void validate() const;
    double inverse_lengthscale_sq() const { return 1.0 / lengthscale_sq; }
};

/// c(u, lambda) * exp(-lambda u^2 / 2) with u = t - t' and lambda = 1/l^2.
/// The polynomial c is stored as a table (power of u, power of lambda) -> coefficient
/// without explicit zeros. The signal variance is applied at evaluation.
class GaussPolyTerm {
public:
    using Key = std::pair<int, int>;
    using Table = std::map<Key, Rational>;

    GaussPolyTerm() = default;
    explicit GaussPolyTerm(Table table);

    const Table& table() const noexcept { return table_; }
    bool is_zero() const noexcept { return table_.empty(); }
    int max_u_power() const;

    GaussPolyTerm& operator+=(const GaussPolyTerm& rhs);
    GaussPolyTerm& operator*=(const Rational& s);
    friend bool operator==(const GaussPolyTerm&, const GaussPolyTerm&) = default;

    /// sigma_f^2 * c(u, 1/l^2) * exp(-u^2 / (2 l^2)).
    double evaluate(double u, const Hyperparams& hp) const;

    /// Coefficients of c(u, lambda) as a dense polynomial in u for fixed lambda.
    std::vector<double> u_coefficients(double lambda) const;

    /// e.g. "(λ - λ^2*u^2) * exp(-λ u²/2)".
    std::string to_string() const;

private:
    void add(Key k, const Rational& c);
    Table table_;
};

GaussPolyTerm operator+(GaussPolyTerm a, const GaussPolyTerm& b);

/// The squared-exponential base term, table {(0,0): 1}.
GaussPolyTerm se_kernel();

/// Derivative in the first argument t: p -> dp/du - lambda*u*p.
GaussPolyTerm diff_first(const GaussPolyTerm& term);

/// Derivative in the second argument t': p -> -dp/du + lambda*u*p.
GaussPolyTerm diff_second(const GaussPolyTerm& term);

/// vi(d/dt) vj(d/dt') applied to base.
GaussPolyTerm apply_operator_pair(const Poly& vi, const Poly& vj, const GaussPolyTerm& base);

/// Matrix-valued covariance V k_SE V'^T built from the nullspace generators.
class OperatorKernel {
public:
    OperatorKernel() = default;
    OperatorKernel(std::size_t n, std::vector<GaussPolyTerm> entries);

    std::size_t size() const noexcept { return n_; }
    const GaussPolyTerm& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

    /// Human-readable listing of every entry.
    std::string to_string(const std::vector<std::string>& channel_names = {}) const;

private:
    std::size_t n_ = 0;
    std::vector<GaussPolyTerm> entries_;
};

/// Entry (i,j) = sum over latent channels c of apply_operator_pair(v(i,c), v(j,c), se_kernel()).
/// Throws std::invalid_argument if v_cols has no columns.
OperatorKernel build_operator_kernel(const PolyMatrix& v_cols);

/// Floating-point evaluation of a single channel pair.
double eval_kernel(const OperatorKernel& k, double t, double t_prime, const Hyperparams& hp, std::size_t ch_i,
                   std::size_t ch_j);

/// OperatorKernel with hyperparameters substituted: every entry is reduced to a
/// dense polynomial in u so repeated evaluation avoids the rational table.
class KernelEvaluator {
public:
    KernelEvaluator(const OperatorKernel& k, const Hyperparams& hp);

    std::size_t size() const noexcept { return n_; }
    const Hyperparams& hyperparams() const noexcept { return hp_; }

    double operator()(double t, double t_prime, std::size_t ch_i, std::size_t ch_j) const;

private:
    std::size_t n_;
    Hyperparams hp_;
    double lambda_;
    std::vector<std::vector<double>> coeffs_;
};

}  // namespace lodegp

#endif  // LODEGP_KERNEL_HPP
