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

#ifndef LODEGP_POLY_HPP
#define LODEGP_POLY_HPP

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace lodegp {

using Rational = mpq_class;

/// Univariate polynomial in the differentiation operator d = d/dt with exact
/// rational coefficients. coeffs()[k] multiplies d^k. The zero polynomial is
/// stored as an empty coefficient list.
class Poly {
public:
    /// degree() of the zero polynomial.
    static constexpr int kMinusInfinity = -1;

    Poly() = default;
    Poly(int c);
    Poly(const Rational& c);
    Poly(std::initializer_list<Rational> coeffs);
    explicit Poly(std::vector<Rational> coeffs);

    /// d^k
    static Poly monomial(std::size_t k, const Rational& c = 1);

    const std::vector<Rational>& coeffs() const noexcept { return coeffs_; }
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    bool is_constant() const noexcept { return coeffs_.size() <= 1; }
    /// Coefficient of d^k, zero beyond the stored range.
    Rational coeff(std::size_t k) const;
    Rational leading() const;

    Poly operator-() const;
    Poly& operator+=(const Poly& rhs);
    Poly& operator-=(const Poly& rhs);
    Poly& operator*=(const Poly& rhs);

    friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }

    /// Renders as e.g. "1 - d + 3/2*d^2"; zero renders as "0".
    std::string to_string(std::string_view symbol = "d") const;

private:
    void canonicalize();
    std::vector<Rational> coeffs_;
};

Poly operator+(Poly a, const Poly& b);
Poly operator-(Poly a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
std::ostream& operator<<(std::ostream& os, const Poly& p);

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);

/// Euclidean division: a = q*b + r with degree(r) < degree(b).
/// Throws std::domain_error if b is zero.
std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b);

/// Parses the textual form produced by Poly::to_string, e.g. "1 - d + d^2",
/// "-3/2*d", "2 d^3". Throws std::invalid_argument on malformed input.
Poly parse_poly(std::string_view text);

/// Dense row-major matrix of polynomials.
class PolyMatrix {
public:
    PolyMatrix() = default;
    PolyMatrix(std::size_t rows, std::size_t cols);
    PolyMatrix(std::initializer_list<std::initializer_list<Poly>> rows);

    static PolyMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Poly& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const Poly& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    bool is_zero() const;
    PolyMatrix column(std::size_t j) const;
    /// Columns [first, cols()).
    PolyMatrix columns_from(std::size_t first) const;

    friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) = default;

    /// One row per line, entries separated by "; ".
    std::string to_string(std::string_view symbol = "d") const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Poly> entries_;
};

std::ostream& operator<<(std::ostream& os, const PolyMatrix& m);

/// Throws std::invalid_argument if a.cols() != b.rows().
PolyMatrix matrix_mul(const PolyMatrix& a, const PolyMatrix& b);
PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b);

/// Exact determinant by fraction-free expansion over the polynomial ring.
/// Throws std::invalid_argument for non-square input.
Poly determinant(const PolyMatrix& m);

/// Parses the debug matrix format: one row per line, entries separated by ';'.
PolyMatrix parse_poly_matrix(std::string_view text);

/// Q * H * V = D with Q, V unimodular and D in Smith normal form.
struct SmithDecomposition {
    PolyMatrix Q;
    PolyMatrix D;
    PolyMatrix V;

    /// Number of nonzero diagonal entries of D.
    std::size_t rank() const;
    std::vector<Poly> invariant_factors() const;
};

/// Smith normal form over Q[d] by elementary row and column operations.
/// Pivot is the lowest-degree nonzero entry of the trailing block, ties broken
/// by the lowest (row, col); nonzero diagonal entries are made monic.
/// Throws std::invalid_argument on an empty matrix.
SmithDecomposition smith_normal_form(const PolyMatrix& h);

/// Columns of V beyond the rank of D. Each returned column n satisfies
/// h * n == 0 and is scaled so that its first nonzero entry is monic.
PolyMatrix right_nullspace_columns(const PolyMatrix& h, const SmithDecomposition& d);

}  // namespace lodegp

#endif  // LODEGP_POLY_HPP
