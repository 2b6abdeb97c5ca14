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

#include "lodegp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lodegp {

void Hyperparams::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
        throw std::invalid_argument("Hyperparams: signal variance must be positive");
    if (!(lengthscale_sq > 0.0) || !std::isfinite(lengthscale_sq))
        throw std::invalid_argument("Hyperparams: squared lengthscale must be positive");
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw std::invalid_argument("Hyperparams: jitter must be >= 0");
}

GaussPolyTerm::GaussPolyTerm(Table table) {
    for (auto& [k, c] : table) add(k, c);
}

void GaussPolyTerm::add(Key k, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = table_.try_emplace(k, c);
    if (inserted) return;
    it->second += c;
    if (it->second == 0) table_.erase(it);
}

int GaussPolyTerm::max_u_power() const {
    int m = -1;
    for (const auto& [k, c] : table_) m = std::max(m, k.first);
    return m;
}

GaussPolyTerm& GaussPolyTerm::operator+=(const GaussPolyTerm& rhs) {
    for (const auto& [k, c] : rhs.table_) add(k, c);
    return *this;
}

GaussPolyTerm& GaussPolyTerm::operator*=(const Rational& s) {
    if (s == 0) {
        table_.clear();
        return *this;
    }
    for (auto& [k, c] : table_) c *= s;
    return *this;
}

GaussPolyTerm operator+(GaussPolyTerm a, const GaussPolyTerm& b) { return a += b; }

std::vector<double> GaussPolyTerm::u_coefficients(double lambda) const {
    std::vector<double> out(static_cast<std::size_t>(max_u_power() + 1), 0.0);
    for (const auto& [k, c] : table_) out[static_cast<std::size_t>(k.first)] += c.get_d() * std::pow(lambda, k.second);
    return out;
}

namespace {

double horner(const std::vector<double>& c, double u) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
    return acc;
}

}  // namespace

double GaussPolyTerm::evaluate(double u, const Hyperparams& hp) const {
    const double lambda = hp.inverse_lengthscale_sq();
    return hp.signal_variance * horner(u_coefficients(lambda), u) * std::exp(-0.5 * lambda * u * u);
}

std::string GaussPolyTerm::to_string() const {
    if (table_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : table_) {
        Rational mag = abs(c);
        if (first)
            os << (c < 0 ? "-" : "");
        else
            os << (c < 0 ? " - " : " + ");
        first = false;
        const bool bare = k.first == 0 && k.second == 0;
        if (mag != 1 || bare) os << mag.get_str();
        bool need_star = mag != 1 && !bare;
        if (k.second > 0) {
            os << (need_star ? "*" : "") << "λ";
            if (k.second > 1) os << '^' << k.second;
            need_star = true;
        }
        if (k.first > 0) {
            os << (need_star ? "*" : "") << "u";
            if (k.first > 1) os << '^' << k.first;
        }
    }
    return "(" + os.str() + ") * exp(-λ u²/2)";
}

GaussPolyTerm se_kernel() { return GaussPolyTerm(GaussPolyTerm::Table{{{0, 0}, Rational(1)}}); }

GaussPolyTerm diff_first(const GaussPolyTerm& term) {
    GaussPolyTerm r;
    for (const auto& [k, c] : term.table()) {
        auto [pu, pl] = k;
        if (pu > 0) r += GaussPolyTerm(GaussPolyTerm::Table{{{pu - 1, pl}, Rational(c * pu)}});
        r += GaussPolyTerm(GaussPolyTerm::Table{{{pu + 1, pl + 1}, Rational(-c)}});
    }
    return r;
}

GaussPolyTerm diff_second(const GaussPolyTerm& term) {
    GaussPolyTerm r = diff_first(term);
    r *= Rational(-1);
    return r;
}

GaussPolyTerm apply_operator_pair(const Poly& vi, const Poly& vj, const GaussPolyTerm& base) {
    GaussPolyTerm second;
    GaussPolyTerm power = base;
    for (std::size_t b = 0; b < vj.coeffs().size(); ++b) {
        if (b > 0) power = diff_second(power);
        if (vj.coeffs()[b] == 0) continue;
        GaussPolyTerm scaled = power;
        scaled *= vj.coeffs()[b];
        second += scaled;
    }
    GaussPolyTerm out;
    power = second;
    for (std::size_t a = 0; a < vi.coeffs().size(); ++a) {
        if (a > 0) power = diff_first(power);
        if (vi.coeffs()[a] == 0) continue;
        GaussPolyTerm scaled = power;
        scaled *= vi.coeffs()[a];
        out += scaled;
    }
    return out;
}

OperatorKernel::OperatorKernel(std::size_t n, std::vector<GaussPolyTerm> entries)
    : n_(n), entries_(std::move(entries)) {
    if (entries_.size() != n_ * n_) throw std::invalid_argument("OperatorKernel: entry count does not match size");
}

std::string OperatorKernel::to_string(const std::vector<std::string>& channel_names) const {
    auto name = [&](std::size_t i) {
        return i < channel_names.size() ? channel_names[i] : "z" + std::to_string(i + 1);
    };
    std::ostringstream os;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            os << "k[" << name(i) << "," << name(j) << "] = " << (*this)(i, j).to_string() << '\n';
    return os.str();
}

OperatorKernel build_operator_kernel(const PolyMatrix& v_cols) {
    if (v_cols.cols() == 0)
        throw std::invalid_argument("build_operator_kernel: empty nullspace (system is over-determined or not controllable)");
    const std::size_t n = v_cols.rows();
    const GaussPolyTerm base = se_kernel();
    std::vector<GaussPolyTerm> entries(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            GaussPolyTerm e;
            for (std::size_t c = 0; c < v_cols.cols(); ++c) e += apply_operator_pair(v_cols(i, c), v_cols(j, c), base);
            entries[i * n + j] = e;
        }
    // k_ji(u) = k_ij(-u): flip the sign of odd powers of u.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            GaussPolyTerm::Table t;
            for (const auto& [k, c] : entries[j * n + i].table()) t.emplace(k, k.first % 2 ? Rational(-c) : c);
            entries[i * n + j] = GaussPolyTerm(std::move(t));
        }
    return OperatorKernel(n, std::move(entries));
}

double eval_kernel(const OperatorKernel& k, double t, double t_prime, const Hyperparams& hp, std::size_t ch_i,
                   std::size_t ch_j) {
    if (ch_i >= k.size() || ch_j >= k.size()) throw std::out_of_range("eval_kernel: channel index out of range");
    return k(ch_i, ch_j).evaluate(t - t_prime, hp);
}

KernelEvaluator::KernelEvaluator(const OperatorKernel& k, const Hyperparams& hp)
    : n_(k.size()), hp_(hp), lambda_(hp.inverse_lengthscale_sq()) {
    hp_.validate();
    coeffs_.reserve(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) coeffs_.push_back(k(i, j).u_coefficients(lambda_));
}

double KernelEvaluator::operator()(double t, double t_prime, std::size_t ch_i, std::size_t ch_j) const {
    const double u = t - t_prime;
    return hp_.signal_variance * horner(coeffs_[ch_i * n_ + ch_j], u) * std::exp(-0.5 * lambda_ * u * u);
}

}  // namespace lodegp
