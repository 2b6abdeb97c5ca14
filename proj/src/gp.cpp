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

#include "lodegp/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lodegp/errors.hpp"

namespace lodegp {

std::string_view to_string(DataRole role) {
    switch (role) {
        case DataRole::init: return "init";
        case DataRole::constraint: return "constraint";
        case DataRole::past: return "past";
        case DataRole::virtual_reference: return "virtual";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// DataPoint / Dataset

std::size_t DataPoint::observed_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
}

void DataPoint::validate() const {
    if (!std::isfinite(t)) throw std::invalid_argument("DataPoint: time must be finite");
    if (values.size() != noise_var.size())
        throw std::invalid_argument("DataPoint: values and noise variances have different lengths");
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (!values[c]) continue;
        if (!std::isfinite(*values[c])) throw std::invalid_argument("DataPoint: non-finite value");
        if (!std::isfinite(noise_var[c]) || noise_var[c] < 0.0)
            throw std::invalid_argument("DataPoint: noise variance must be finite and nonnegative");
    }
}

void Dataset::insert(DataPoint p) {
    p.validate();
    auto it = std::lower_bound(points_.begin(), points_.end(), p.t,
                               [](const DataPoint& a, double t) { return a.t < t; });
    if (it == points_.end() || it->t != p.t) {
        points_.insert(it, std::move(p));
        return;
    }
    if (it->channel_count() != p.channel_count())
        throw std::invalid_argument("Dataset: points at equal time have different channel counts");
    for (std::size_t c = 0; c < p.channel_count(); ++c) {
        if (!p.values[c]) continue;
        if (it->values[c]) {
            if (*it->values[c] != *p.values[c] || it->noise_var[c] != p.noise_var[c]) {
                std::ostringstream os;
                os << "Dataset: conflicting observations of channel " << c << " at t=" << p.t;
                throw std::invalid_argument(os.str());
            }
            continue;
        }
        it->values[c] = p.values[c];
        it->noise_var[c] = p.noise_var[c];
    }
}

void Dataset::insert(const Dataset& other) {
    for (const auto& p : other.points()) insert(p);
}

std::size_t Dataset::observation_count() const {
    std::size_t n = 0;
    for (const auto& p : points_) n += p.observed_count();
    return n;
}

// ---------------------------------------------------------------------------
// Gram assembly

Eigen::MatrixXd GramSystem::matrix() const {
    Eigen::MatrixXd m = K;
    m.diagonal() += noise;
    return m;
}

namespace {

GramSystem assemble(const LodeGpPrior& prior, std::span<const DataPoint> data, const KernelEvaluator& k,
                    double jitter) {
    const std::size_t nz = prior.channel_count();
    GramSystem g;
    std::vector<double> noise;
    std::vector<double> residual;
    for (const auto& p : data) {
        if (p.channel_count() != nz)
            throw std::invalid_argument("assemble_gram: data point has " + std::to_string(p.channel_count()) +
                                        " channels, prior has " + std::to_string(nz));
        p.validate();
        for (std::size_t c = 0; c < nz; ++c) {
            if (!p.values[c]) continue;
            g.times.push_back(p.t);
            g.channels.push_back(c);
            g.hard.push_back(p.noise_var[c] == 0.0);
            noise.push_back(g.hard.back() ? jitter : p.noise_var[c]);
            residual.push_back(*p.values[c] - prior.prior_mean(static_cast<Eigen::Index>(c)));
        }
    }
    const auto n = static_cast<Eigen::Index>(g.times.size());
    g.K.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = k(g.times[i], g.times[j], g.channels[i], g.channels[j]);
            g.K(i, j) = v;
            g.K(j, i) = v;
        }
    g.noise = Eigen::Map<const Eigen::VectorXd>(noise.data(), n);
    g.residual = Eigen::Map<const Eigen::VectorXd>(residual.data(), n);
    return g;
}

}  // namespace

GramSystem assemble_gram(const LodeGpPrior& prior, std::span<const DataPoint> data, const Hyperparams& hp) {
    if (data.empty()) throw std::invalid_argument("assemble_gram: empty dataset");
    return assemble(prior, data, KernelEvaluator(prior.kernel, hp), hp.jitter);
}

GramSystem assemble_gram(const LodeGpPrior& prior, const Dataset& data, const Hyperparams& hp) {
    return assemble_gram(prior, std::span<const DataPoint>(data.points()), hp);
}

// ---------------------------------------------------------------------------
// PosteriorGp

namespace {

constexpr double kMaxJitter = 1e-4;

}  // namespace

PosteriorGp::PosteriorGp(std::shared_ptr<const LodeGpPrior> prior, Dataset data, Hyperparams hp)
    : prior_(std::move(prior)), data_(std::move(data)), hp_(hp), kernel_(prior_->kernel, hp), jitter_(hp.jitter) {
    if (data_.observation_count() == 0) {
        gram_.K.resize(0, 0);
        gram_.noise.resize(0);
        gram_.residual.resize(0);
        L_.resize(0, 0);
        alpha_.resize(0);
        return;
    }
    gram_ = assemble(*prior_, std::span<const DataPoint>(data_.points()), kernel_, jitter_);
    while (true) {
        Eigen::LLT<Eigen::MatrixXd> llt(gram_.matrix());
        if (llt.info() == Eigen::Success) {
            L_ = llt.matrixL();
            alpha_ = llt.solve(gram_.residual);
            return;
        }
        const double next = jitter_ > 0.0 ? jitter_ * 10.0 : 1e-10;
        if (next > kMaxJitter * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "Cholesky factorization failed for " << gram_.K.rows() << " observations (jitter escalated to "
               << jitter_ << ")";
            throw NumericalError(os.str());
        }
        jitter_ = next;
        for (Eigen::Index i = 0; i < gram_.noise.size(); ++i)
            if (gram_.hard[static_cast<std::size_t>(i)]) gram_.noise(i) = jitter_;
    }
}

Eigen::MatrixXd PosteriorGp::cross_covariance(std::span<const double> t_query) const {
    const auto nz = prior_->channel_count();
    const auto n = static_cast<Eigen::Index>(gram_.times.size());
    Eigen::MatrixXd ks(n, static_cast<Eigen::Index>(t_query.size() * nz));
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t q = 0; q < t_query.size(); ++q)
            for (std::size_t c = 0; c < nz; ++c)
                ks(i, static_cast<Eigen::Index>(q * nz + c)) = kernel_(gram_.times[i], t_query[q], gram_.channels[i], c);
    return ks;
}

Eigen::MatrixXd PosteriorGp::prior_covariance(std::span<const double> t_query) const {
    const auto nz = prior_->channel_count();
    const auto m = static_cast<Eigen::Index>(t_query.size() * nz);
    Eigen::MatrixXd kss(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b <= a; ++b) {
            const double v = kernel_(t_query[a / nz], t_query[b / nz], a % nz, b % nz);
            kss(a, b) = v;
            kss(b, a) = v;
        }
    return kss;
}

Eigen::MatrixXd PosteriorGp::mean(std::span<const double> t_query) const {
    const auto nz = static_cast<Eigen::Index>(prior_->channel_count());
    Eigen::MatrixXd out = prior_->prior_mean.transpose().replicate(static_cast<Eigen::Index>(t_query.size()), 1);
    if (alpha_.size() == 0) return out;
    const Eigen::VectorXd delta = cross_covariance(t_query).transpose() * alpha_;
    for (Eigen::Index q = 0; q < out.rows(); ++q) out.row(q) += delta.segment(q * nz, nz).transpose();
    return out;
}

Eigen::MatrixXd PosteriorGp::covariance(std::span<const double> t_query) const {
    Eigen::MatrixXd kss = prior_covariance(t_query);
    if (alpha_.size() == 0) return kss;
    const Eigen::MatrixXd v = L_.triangularView<Eigen::Lower>().solve(cross_covariance(t_query));
    kss.noalias() -= v.transpose() * v;
    return kss;
}

Eigen::MatrixXd PosteriorGp::stddev(std::span<const double> t_query) const {
    const auto nz = static_cast<Eigen::Index>(prior_->channel_count());
    const auto m = static_cast<Eigen::Index>(t_query.size());
    Eigen::MatrixXd out(m, nz);
    // Diagonal only: avoid forming the full posterior covariance.
    const Eigen::MatrixXd v = alpha_.size() == 0 ? Eigen::MatrixXd()
                                                 : Eigen::MatrixXd(L_.triangularView<Eigen::Lower>().solve(
                                                       cross_covariance(t_query)));
    for (Eigen::Index q = 0; q < m; ++q)
        for (Eigen::Index c = 0; c < nz; ++c) {
            double var = kernel_(t_query[q], t_query[q], c, c);
            if (v.size() > 0) var -= v.col(q * nz + c).squaredNorm();
            out(q, c) = std::sqrt(std::max(var, 0.0));
        }
    return out;
}

double PosteriorGp::log_marginal_likelihood() const {
    if (alpha_.size() == 0) return 0.0;
    return -0.5 * gram_.residual.dot(alpha_) - L_.diagonal().array().log().sum();
}

Eigen::MatrixXd posterior_mean(const PosteriorGp& gp, std::span<const double> t_query) { return gp.mean(t_query); }

Eigen::MatrixXd posterior_cov(const PosteriorGp& gp, std::span<const double> t_query) {
    return gp.covariance(t_query);
}

double log_marginal_likelihood(const LodeGpPrior& prior, const Dataset& data, const Hyperparams& hp) {
    if (data.observation_count() == 0) throw std::invalid_argument("log_marginal_likelihood: empty dataset");
    // Non-owning alias; the posterior does not outlive this call.
    std::shared_ptr<const LodeGpPrior> alias(std::shared_ptr<const LodeGpPrior>(), &prior);
    return PosteriorGp(alias, data, hp).log_marginal_likelihood();
}

// ---------------------------------------------------------------------------
// Hyperparameter optimization

void HyperparamBounds::validate() const {
    for (const Interval& i : {signal_variance, lengthscale_sq})
        if (!(i.lo > 0.0) || !(i.hi >= i.lo) || !std::isfinite(i.hi))
            throw std::invalid_argument("HyperparamBounds: bounds must be positive intervals with lo <= hi");
}

namespace {

using Point2 = std::array<double, 2>;

struct Objective {
    const LodeGpPrior& prior;
    const Dataset& data;
    const Hyperparams& base;
    Point2 lo, hi;

    Point2 clamp(Point2 p) const {
        for (int i = 0; i < 2; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
        return p;
    }
    // Negative MLL in log-parameter space; factorization failure is +inf.
    double operator()(const Point2& p) const {
        Hyperparams hp = base;
        hp.signal_variance = std::exp(p[0]);
        hp.lengthscale_sq = std::exp(p[1]);
        try {
            return -log_marginal_likelihood(prior, data, hp);
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    }
};

std::pair<Point2, double> nelder_mead(const Objective& f, Point2 start, double fstart, double step) {
    std::array<Point2, 3> s{start, f.clamp({start[0] + step, start[1]}), f.clamp({start[0], start[1] + step})};
    if (s[1] == start) s[1] = f.clamp({start[0] - step, start[1]});
    if (s[2] == start) s[2] = f.clamp({start[0], start[1] - step});
    std::array<double, 3> v{fstart, f(s[1]), f(s[2])};

    for (int iter = 0; iter < 200; ++iter) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
        const int best = idx[0], mid = idx[1], worst = idx[2];
        const double spread = std::max(std::abs(s[worst][0] - s[best][0]), std::abs(s[worst][1] - s[best][1]));
        if (spread < 1e-6 && std::abs(v[worst] - v[best]) < 1e-9 * (1.0 + std::abs(v[best]))) break;

        const Point2 centroid{(s[best][0] + s[mid][0]) / 2, (s[best][1] + s[mid][1]) / 2};
        auto along = [&](double a) {
            return f.clamp({centroid[0] + a * (s[worst][0] - centroid[0]), centroid[1] + a * (s[worst][1] - centroid[1])});
        };
        const Point2 r = along(-1.0);
        const double fr = f(r);
        if (fr < v[best]) {
            const Point2 e = along(-2.0);
            const double fe = f(e);
            if (fe < fr) {
                s[worst] = e;
                v[worst] = fe;
            } else {
                s[worst] = r;
                v[worst] = fr;
            }
        } else if (fr < v[mid]) {
            s[worst] = r;
            v[worst] = fr;
        } else {
            const Point2 c = fr < v[worst] ? along(-0.5) : along(0.5);
            const double fc = f(c);
            if (fc < std::min(fr, v[worst])) {
                s[worst] = c;
                v[worst] = fc;
            } else {
                for (int k : {mid, worst}) {
                    s[k] = f.clamp({(s[k][0] + s[best][0]) / 2, (s[k][1] + s[best][1]) / 2});
                    v[k] = f(s[k]);
                }
            }
        }
    }
    const auto b = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    return {s[b], v[b]};
}

}  // namespace

Hyperparams optimize_hyperparams(const LodeGpPrior& prior, const Dataset& data, const HyperparamBounds& bounds,
                                 std::uint64_t seed, const Hyperparams& base) {
    bounds.validate();
    if (data.observation_count() == 0) throw std::invalid_argument("optimize_hyperparams: empty dataset");
    const Objective f{prior,
                      data,
                      base,
                      {std::log(bounds.signal_variance.lo), std::log(bounds.lengthscale_sq.lo)},
                      {std::log(bounds.signal_variance.hi), std::log(bounds.lengthscale_sq.hi)}};

    std::vector<std::pair<double, Point2>> probes;
    constexpr int kGrid = 7;
    for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j) {
            const Point2 p{f.lo[0] + (f.hi[0] - f.lo[0]) * i / (kGrid - 1), f.lo[1] + (f.hi[1] - f.lo[1]) * j / (kGrid - 1)};
            probes.emplace_back(f(p), p);
        }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 8; ++k) {
        const Point2 p{f.lo[0] + (f.hi[0] - f.lo[0]) * unit(rng), f.lo[1] + (f.hi[1] - f.lo[1]) * unit(rng)};
        probes.emplace_back(f(p), p);
    }
    std::stable_sort(probes.begin(), probes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const double step = std::max(0.5, std::max(f.hi[0] - f.lo[0], f.hi[1] - f.lo[1]) / (2.0 * (kGrid - 1)));
    Point2 best = probes.front().second;
    double best_v = probes.front().first;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, probes.size()); ++k) {
        if (!std::isfinite(probes[k].first)) break;
        auto [p, v] = nelder_mead(f, probes[k].second, probes[k].first, step);
        if (v < best_v) {
            best = p;
            best_v = v;
        }
    }
    if (!std::isfinite(best_v)) throw NumericalError("optimize_hyperparams: every probe failed to factorize");
    Hyperparams out = base;
    out.signal_variance = std::exp(best[0]);
    out.lengthscale_sq = std::exp(best[1]);
    return out;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<Eigen::MatrixXd> sample_posterior(const PosteriorGp& gp, std::span<const double> t_query,
                                              std::size_t count, std::uint64_t seed) {
    std::vector<Eigen::MatrixXd> out;
    if (count == 0 || t_query.empty()) return out;
    const Eigen::MatrixXd mu = gp.mean(t_query);
    Eigen::MatrixXd cov = gp.covariance(t_query);
    cov.diagonal().array() += gp.hyperparams().jitter;

    // Eigendecomposition tolerates the numerically rank-deficient covariances
    // produced by derivative channels on dense grids.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd transform = eig.eigenvectors() * scale.asDiagonal();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto m = cov.rows();
    const auto nz = mu.cols();
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        Eigen::VectorXd w(m);
        for (Eigen::Index i = 0; i < m; ++i) w(i) = normal(rng);
        const Eigen::VectorXd draw = transform * w;
        Eigen::MatrixXd sample = mu;
        for (Eigen::Index q = 0; q < mu.rows(); ++q) sample.row(q) += draw.segment(q * nz, nz).transpose();
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace lodegp
