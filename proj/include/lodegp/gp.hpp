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

#ifndef LODEGP_GP_HPP
#define LODEGP_GP_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lodegp/kernel.hpp"
#include "lodegp/lode_gp.hpp"

namespace lodegp {

enum class DataRole { init, constraint, past, virtual_reference };

std::string_view to_string(DataRole role);

/// Observation of the stacked trajectory z = (x, u) at one time. Channels
/// without a value are masked. A zero noise variance marks a hard constraint,
/// realized numerically as jitter.
struct DataPoint {
    double t = 0.0;
    std::vector<std::optional<double>> values;
    std::vector<double> noise_var;
    DataRole role = DataRole::init;

    std::size_t channel_count() const { return values.size(); }
    std::size_t observed_count() const;
    /// Throws std::invalid_argument if sizes differ or an unmasked channel has
    /// a non-finite value or a negative / non-finite noise variance.
    void validate() const;
};

/// Time-ordered collection of DataPoint with at most one point per time.
/// Inserting at an existing time merges channel masks; overlapping channels
/// must agree exactly (value and noise), otherwise std::invalid_argument.
class Dataset {
public:
    Dataset() = default;

    void insert(DataPoint p);
    void insert(const Dataset& other);

    const std::vector<DataPoint>& points() const noexcept { return points_; }
    bool empty() const noexcept { return points_.empty(); }
    std::size_t size() const noexcept { return points_.size(); }
    /// Total number of unmasked (point, channel) pairs.
    std::size_t observation_count() const;

private:
    std::vector<DataPoint> points_;
};

/// Gram system over all unmasked (point, channel) pairs in point-major,
/// channel-minor order.
struct GramSystem {
    Eigen::MatrixXd K;         ///< noise-free covariance
    Eigen::VectorXd noise;     ///< per-observation noise, zeros replaced by jitter
    Eigen::VectorXd residual;  ///< z - mu(t)
    std::vector<double> times;
    std::vector<std::size_t> channels;
    std::vector<bool> hard;    ///< zero nominal noise

    Eigen::MatrixXd matrix() const;
};

/// Throws std::invalid_argument on an empty dataset.
GramSystem assemble_gram(const LodeGpPrior& prior, std::span<const DataPoint> data, const Hyperparams& hp);
GramSystem assemble_gram(const LodeGpPrior& prior, const Dataset& data, const Hyperparams& hp);

/// Conditioned LODE-GP. Immutable; conditioning on new data builds a new value.
class PosteriorGp {
public:
    /// Factorizes K + noise. If Cholesky fails, the jitter used for hard
    /// constraints is escalated by 10x up to 1e-4 before NumericalError.
    PosteriorGp(std::shared_ptr<const LodeGpPrior> prior, Dataset data, Hyperparams hp);

    const LodeGpPrior& prior() const { return *prior_; }
    const Dataset& data() const { return data_; }
    const Hyperparams& hyperparams() const { return hp_; }
    double effective_jitter() const { return jitter_; }

    const Eigen::VectorXd& alpha() const { return alpha_; }
    const Eigen::MatrixXd& cholesky_factor() const { return L_; }
    const GramSystem& gram() const { return gram_; }

    /// Rows are query times, columns channels.
    Eigen::MatrixXd mean(std::span<const double> t_query) const;
    /// Covariance over (query, channel) pairs in query-major order.
    Eigen::MatrixXd covariance(std::span<const double> t_query) const;
    /// Marginal standard deviations, same layout as mean().
    Eigen::MatrixXd stddev(std::span<const double> t_query) const;
    /// -1/2 r^T (K+S)^-1 r - 1/2 log det(K+S), constant omitted.
    double log_marginal_likelihood() const;

private:
    Eigen::MatrixXd cross_covariance(std::span<const double> t_query) const;
    Eigen::MatrixXd prior_covariance(std::span<const double> t_query) const;

    std::shared_ptr<const LodeGpPrior> prior_;
    Dataset data_;
    Hyperparams hp_;
    KernelEvaluator kernel_;
    GramSystem gram_;
    double jitter_ = 0.0;
    Eigen::MatrixXd L_;
    Eigen::VectorXd alpha_;
};

Eigen::MatrixXd posterior_mean(const PosteriorGp& gp, std::span<const double> t_query);
Eigen::MatrixXd posterior_cov(const PosteriorGp& gp, std::span<const double> t_query);

/// Throws std::invalid_argument on empty data, NumericalError on factorization failure.
double log_marginal_likelihood(const LodeGpPrior& prior, const Dataset& data, const Hyperparams& hp);

struct Interval {
    double lo;
    double hi;
};

struct HyperparamBounds {
    Interval signal_variance{0.01, 100.0};
    Interval lengthscale_sq{0.01, 100.0};

    void validate() const;
};

/// Maximizes the marginal likelihood over (log sigma_f^2, log l^2) inside the
/// bounds: a fixed probe grid plus seeded random probes, then Nelder-Mead from
/// the best probes. Deterministic for a given seed. Returns the best point
/// found; jitter is copied from base.
Hyperparams optimize_hyperparams(const LodeGpPrior& prior, const Dataset& data, const HyperparamBounds& bounds,
                                 std::uint64_t seed = 0, const Hyperparams& base = {});

/// count draws from N(mean, cov + jitter I) on t_query; each draw has the
/// layout of PosteriorGp::mean.
std::vector<Eigen::MatrixXd> sample_posterior(const PosteriorGp& gp, std::span<const double> t_query,
                                              std::size_t count, std::uint64_t seed);

}  // namespace lodegp

#endif  // LODEGP_GP_HPP
