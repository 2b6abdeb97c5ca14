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

#include "lodegp/poly.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lodegp {

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(int c) : coeffs_{Rational(c)} { canonicalize(); }

Poly::Poly(const Rational& c) : coeffs_{c} { canonicalize(); }

Poly::Poly(std::initializer_list<Rational> coeffs) : coeffs_(coeffs) { canonicalize(); }

Poly::Poly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { canonicalize(); }

Poly Poly::monomial(std::size_t k, const Rational& c) {
    std::vector<Rational> coeffs(k + 1);
    coeffs[k] = c;
    return Poly(std::move(coeffs));
}

void Poly::canonicalize() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Rational Poly::coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : Rational(0); }

Rational Poly::leading() const { return coeffs_.empty() ? Rational(0) : coeffs_.back(); }

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& c : r.coeffs_) c = -c;
    return r;
}

Poly& Poly::operator+=(const Poly& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
    canonicalize();
    return *this;
}

Poly& Poly::operator-=(const Poly& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
    for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] -= rhs.coeffs_[k];
    canonicalize();
    return *this;
}

Poly& Poly::operator*=(const Poly& rhs) {
    *this = *this * rhs;
    return *this;
}

std::string Poly::to_string(std::string_view symbol) const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        const Rational& c = coeffs_[k];
        if (c == 0) continue;
        Rational mag = abs(c);
        if (first) {
            if (c < 0) os << '-';
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        if (k == 0) {
            os << mag.get_str();
            continue;
        }
        if (mag != 1) os << mag.get_str() << '*';
        os << symbol;
        if (k > 1) os << '^' << k;
    }
    return os.str();
}

Poly operator+(Poly a, const Poly& b) { return a += b; }

Poly operator-(Poly a, const Poly& b) { return a -= b; }

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    const auto& ac = a.coeffs();
    const auto& bc = b.coeffs();
    std::vector<Rational> out(ac.size() + bc.size() - 1);
    for (std::size_t i = 0; i < ac.size(); ++i) {
        if (ac[i] == 0) continue;
        for (std::size_t j = 0; j < bc.size(); ++j) out[i + j] += ac[i] * bc[j];
    }
    return Poly(std::move(out));
}

std::ostream& operator<<(std::ostream& os, const Poly& p) { return os << p.to_string(); }

Poly poly_add(const Poly& a, const Poly& b) { return a + b; }

Poly poly_mul(const Poly& a, const Poly& b) { return a * b; }

std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::domain_error("poly_divmod: division by the zero polynomial");
    if (a.degree() < b.degree()) return {Poly{}, a};

    std::vector<Rational> rem = a.coeffs();
    const auto& bc = b.coeffs();
    const Rational lead = b.leading();
    const std::size_t db = bc.size() - 1;
    std::vector<Rational> quot(rem.size() - db);
    for (std::size_t k = rem.size(); k-- > db;) {
        if (rem[k] == 0) continue;
        Rational f = rem[k] / lead;
        quot[k - db] = f;
        for (std::size_t j = 0; j <= db; ++j) rem[k - db + j] -= f * bc[j];
    }
    return {Poly(std::move(quot)), Poly(std::move(rem))};
}

namespace {

Rational parse_rational(std::string_view s) {
    Rational r;
    if (r.set_str(std::string(s), 10) != 0) throw std::invalid_argument("parse_poly: bad number '" + std::string(s) + "'");
    r.canonicalize();
    return r;
}

Poly parse_term(std::string_view term, bool negative, std::string_view whole) {
    auto fail = [&] { throw std::invalid_argument("parse_poly: malformed term in '" + std::string(whole) + "'"); };
    std::size_t pos = 0;
    while (pos < term.size() && (std::isdigit(static_cast<unsigned char>(term[pos])) || term[pos] == '/')) ++pos;
    Rational c = pos > 0 ? parse_rational(term.substr(0, pos)) : Rational(1);
    std::string_view rest = term.substr(pos);
    std::size_t power = 0;
    if (!rest.empty() && rest.front() == '*') {
        if (pos == 0) fail();
        rest.remove_prefix(1);
        if (rest.empty()) fail();
    }
    if (!rest.empty()) {
        if (rest.front() != 'd') fail();
        rest.remove_prefix(1);
        power = 1;
        if (!rest.empty()) {
            if (rest.front() != '^' || rest.size() < 2) fail();
            rest.remove_prefix(1);
            power = 0;
            for (char ch : rest) {
                if (!std::isdigit(static_cast<unsigned char>(ch))) fail();
                power = power * 10 + static_cast<std::size_t>(ch - '0');
            }
        }
    } else if (pos == 0) {
        fail();
    }
    return Poly::monomial(power, negative ? Rational(-c) : c);
}

}  // namespace

Poly parse_poly(std::string_view text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw std::invalid_argument("parse_poly: empty polynomial");

    Poly out;
    std::size_t i = 0;
    while (i < s.size()) {
        bool negative = false;
        if (s[i] == '+' || s[i] == '-') {
            negative = s[i] == '-';
            ++i;
        } else if (i != 0) {
            throw std::invalid_argument("parse_poly: expected sign in '" + std::string(text) + "'");
        }
        std::size_t j = i;
        while (j < s.size() && s[j] != '+' && s[j] != '-') ++j;
        if (j == i) throw std::invalid_argument("parse_poly: dangling sign in '" + std::string(text) + "'");
        out += parse_term(std::string_view(s).substr(i, j - i), negative, text);
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// PolyMatrix

PolyMatrix::PolyMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}

PolyMatrix::PolyMatrix(std::initializer_list<std::initializer_list<Poly>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) throw std::invalid_argument("PolyMatrix: ragged initializer");
        entries_.insert(entries_.end(), row.begin(), row.end());
    }
}

PolyMatrix PolyMatrix::identity(std::size_t n) {
    PolyMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Poly(1);
    return m;
}

bool PolyMatrix::is_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Poly& p) { return p.is_zero(); });
}

PolyMatrix PolyMatrix::column(std::size_t j) const {
    PolyMatrix c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
}

PolyMatrix PolyMatrix::columns_from(std::size_t first) const {
    const std::size_t n = first >= cols_ ? 0 : cols_ - first;
    PolyMatrix c(rows_, n);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < n; ++j) c(i, j) = (*this)(i, first + j);
    return c;
}

std::string PolyMatrix::to_string(std::string_view symbol) const {
    std::string out;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (j > 0) out += "; ";
            out += (*this)(i, j).to_string(symbol);
        }
        out += '\n';
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const PolyMatrix& m) { return os << m.to_string(); }

PolyMatrix matrix_mul(const PolyMatrix& a, const PolyMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matrix_mul: dimension mismatch (" + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
    PolyMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            if (a(i, k).is_zero()) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
        }
    return out;
}

PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) { return matrix_mul(a, b); }

Poly determinant(const PolyMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("determinant: matrix is not square");
    const std::size_t n = m.rows();
    if (n == 0) return Poly(1);

    // Bareiss elimination; every division below is exact in Q[d].
    PolyMatrix w = m;
    Poly prev(1);
    bool negate = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (w(k, k).is_zero()) {
            std::size_t p = k + 1;
            while (p < n && w(p, k).is_zero()) ++p;
            if (p == n) return {};
            for (std::size_t j = 0; j < n; ++j) std::swap(w(k, j), w(p, j));
            negate = !negate;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                Poly num = w(i, j) * w(k, k) - w(i, k) * w(k, j);
                w(i, j) = poly_divmod(num, prev).first;
            }
            w(i, k) = Poly{};
        }
        prev = w(k, k);
    }
    Poly det = w(n - 1, n - 1);
    return negate ? -det : det;
}

PolyMatrix parse_poly_matrix(std::string_view text) {
    std::vector<std::vector<Poly>> rows;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            std::vector<Poly> row;
            std::size_t s = 0;
            while (true) {
                std::size_t e = line.find(';', s);
                row.push_back(parse_poly(line.substr(s, e == std::string_view::npos ? line.size() - s : e - s)));
                if (e == std::string_view::npos) break;
                s = e + 1;
            }
            if (!rows.empty() && row.size() != rows.front().size())
                throw std::invalid_argument("parse_poly_matrix: rows have different lengths");
            rows.push_back(std::move(row));
        }
        start = end + 1;
    }
    if (rows.empty()) throw std::invalid_argument("parse_poly_matrix: no rows");
    PolyMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = std::move(rows[i][j]);
    return m;
}

// ---------------------------------------------------------------------------
// Smith normal form

std::size_t SmithDecomposition::rank() const {
    std::size_t r = 0;
    const std::size_t n = std::min(D.rows(), D.cols());
    while (r < n && !D(r, r).is_zero()) ++r;
    return r;
}

std::vector<Poly> SmithDecomposition::invariant_factors() const {
    std::vector<Poly> out;
    for (std::size_t k = 0; k < rank(); ++k) out.push_back(D(k, k));
    return out;
}

namespace {

// Elementary operations on the working matrix, mirrored into Q (rows) or V (columns).
struct SmithWork {
    PolyMatrix w, q, v;

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t j = 0; j < w.cols(); ++j) std::swap(w(a, j), w(b, j));
        for (std::size_t j = 0; j < q.cols(); ++j) std::swap(q(a, j), q(b, j));
    }
    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t i = 0; i < w.rows(); ++i) std::swap(w(i, a), w(i, b));
        for (std::size_t i = 0; i < v.rows(); ++i) std::swap(v(i, a), v(i, b));
    }
    // row_dst += f * row_src
    void add_row(std::size_t dst, std::size_t src, const Poly& f) {
        for (std::size_t j = 0; j < w.cols(); ++j)
            if (!w(src, j).is_zero()) w(dst, j) += f * w(src, j);
        for (std::size_t j = 0; j < q.cols(); ++j)
            if (!q(src, j).is_zero()) q(dst, j) += f * q(src, j);
    }
    // col_dst += f * col_src
    void add_col(std::size_t dst, std::size_t src, const Poly& f) {
        for (std::size_t i = 0; i < w.rows(); ++i)
            if (!w(i, src).is_zero()) w(i, dst) += f * w(i, src);
        for (std::size_t i = 0; i < v.rows(); ++i)
            if (!v(i, src).is_zero()) v(i, dst) += f * v(i, src);
    }
    void scale_row(std::size_t r, const Rational& f) {
        const Poly s(f);
        for (std::size_t j = 0; j < w.cols(); ++j) w(r, j) *= s;
        for (std::size_t j = 0; j < q.cols(); ++j) q(r, j) *= s;
    }
};

}  // namespace

SmithDecomposition smith_normal_form(const PolyMatrix& h) {
    if (h.rows() == 0 || h.cols() == 0) throw std::invalid_argument("smith_normal_form: empty matrix");
    const std::size_t m = h.rows();
    const std::size_t n = h.cols();
    SmithWork s{h, PolyMatrix::identity(m), PolyMatrix::identity(n)};

    for (std::size_t k = 0; k < std::min(m, n); ++k) {
        bool exhausted = false;
        while (true) {
            std::size_t pr = m, pc = n;
            for (std::size_t i = k; i < m; ++i)
                for (std::size_t j = k; j < n; ++j) {
                    const Poly& e = s.w(i, j);
                    if (!e.is_zero() && (pr == m || e.degree() < s.w(pr, pc).degree())) {
                        pr = i;
                        pc = j;
                    }
                }
            if (pr == m) {
                exhausted = true;
                break;
            }
            s.swap_rows(k, pr);
            s.swap_cols(k, pc);

            bool clean = true;
            for (std::size_t i = k + 1; i < m; ++i) {
                if (s.w(i, k).is_zero()) continue;
                auto [quot, rem] = poly_divmod(s.w(i, k), s.w(k, k));
                s.add_row(i, k, -quot);
                if (!rem.is_zero()) clean = false;
            }
            for (std::size_t j = k + 1; j < n; ++j) {
                if (s.w(k, j).is_zero()) continue;
                auto [quot, rem] = poly_divmod(s.w(k, j), s.w(k, k));
                s.add_col(j, k, -quot);
                if (!rem.is_zero()) clean = false;
            }
            if (!clean) continue;

            // Divisibility chain: pull a non-divisible entry into row k and retry.
            std::size_t bad_row = m;
            for (std::size_t i = k + 1; i < m && bad_row == m; ++i)
                for (std::size_t j = k + 1; j < n; ++j)
                    if (!poly_divmod(s.w(i, j), s.w(k, k)).second.is_zero()) {
                        bad_row = i;
                        break;
                    }
            if (bad_row == m) break;
            s.add_row(k, bad_row, Poly(1));
        }
        if (exhausted) break;
        const Rational lead = s.w(k, k).leading();
        if (lead != 1) s.scale_row(k, 1 / lead);
    }
    return {std::move(s.q), std::move(s.w), std::move(s.v)};
}

PolyMatrix right_nullspace_columns(const PolyMatrix& h, const SmithDecomposition& d) {
    if (d.V.rows() != h.cols()) throw std::invalid_argument("right_nullspace_columns: decomposition does not match H");
    PolyMatrix out = d.V.columns_from(d.rank());
    for (std::size_t j = 0; j < out.cols(); ++j) {
        std::size_t i = 0;
        while (i < out.rows() && out(i, j).is_zero()) ++i;
        if (i == out.rows()) continue;
        const Poly scale(1 / out(i, j).leading());
        for (std::size_t r = 0; r < out.rows(); ++r) out(r, j) *= scale;
    }
    return out;
}

}  // namespace lodegp
