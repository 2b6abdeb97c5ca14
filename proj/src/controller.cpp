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

#include "lodegp/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lodegp/errors.hpp"
#include "lodegp/metrics.hpp"

namespace lodegp {

namespace {

// Grid times are produced by floating-point arithmetic; treat anything within
// this fraction of dt as the same instant.
constexpr double kTimeTolerance = 1e-9;

bool is_after(double t, double t_now, double dt) { return t > t_now + kTimeTolerance * dt; }

bool same_time(double a, double b, double dt) { return std::abs(a - b) <= kTimeTolerance * dt; }

DataPoint full_point(double t, const Eigen::VectorXd& z, double noise, DataRole role) {
    DataPoint p;
    p.t = t;
    p.role = role;
    p.values.assign(z.data(), z.data() + z.size());
    p.noise_var.assign(static_cast<std::size_t>(z.size()), noise);
    return p;
}

}  // namespace

void ControllerConfig::validate(Eigen::Index channel_count) const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("controller config: " + msg); };
    if (!std::isfinite(t0) || !std::isfinite(tT) || tT < t0) fail("require t0 <= tT");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
    const double steps = (tT - t0) / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) fail("horizon length must be an integer multiple of dt");
    if (z_min.size() != channel_count || z_max.size() != channel_count)
        fail("bounds must have " + std::to_string(channel_count) + " entries");
    for (Eigen::Index c = 0; c < channel_count; ++c)
        if (!(z_min(c) <= z_max(c))) fail("z_min must not exceed z_max (channel " + std::to_string(c + 1) + ")");
    if (x_ref.size() == 0 || x_ref.size() >= channel_count) fail("x_ref has the wrong dimension");
    for (std::size_t k = 1; k < constraint_times.size(); ++k) {
        const double gap = constraint_times[k] - constraint_times[k - 1];
        if (!(gap > 0.0)) fail("constraint grid must be strictly increasing");
        const double ratio = gap / dt;
        if (std::round(ratio) < 1.0 || std::abs(ratio - std::round(ratio)) > 1e-6)
            fail("constraint grid spacing must be an integer multiple of dt");
    }
    if (control_application == ControlApplication::subgrid_interpolation && subgrid_count < 1)
        fail("subgrid count must be >= 1");
}

std::size_t ControllerConfig::step_count() const {
    return static_cast<std::size_t>(std::llround((tT - t0) / dt));
}

std::vector<double> equidistant_grid(double start, double stop, std::size_t count) {
    std::vector<double> out;
    if (count == 0) return out;
    if (count == 1) return {start};
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) out.push_back(k + 1 == count ? stop : start + step * static_cast<double>(k));
    return out;
}

void ControllerState::observe(double t_new, Eigen::VectorXd z_new) {
    if (!(t_new > t)) throw std::invalid_argument("ControllerState: observations must have increasing times");
    history_t.push_back(t);
    history_z.push_back(std::move(z));
    t = t_new;
    z = std::move(z_new);
}

Dataset make_d_init(double t, const std::vector<std::optional<double>>& z) {
    DataPoint p;
    p.t = t;
    p.role = DataRole::init;
    p.values = z;
    p.noise_var.assign(z.size(), 0.0);
    Dataset d;
    d.insert(std::move(p));
    return d;
}

Dataset make_d_init(double t, const Eigen::VectorXd& z) {
    Dataset d;
    d.insert(full_point(t, z, 0.0, DataRole::init));
    return d;
}

Dataset make_d_con(const ControllerConfig& cfg, double t_now) {
    const Eigen::VectorXd center = 0.5 * (cfg.z_max + cfg.z_min);
    const Eigen::VectorXd half_width = 0.5 * (cfg.z_max - cfg.z_min);
    Eigen::VectorXd variance = half_width;
    if (!cfg.constraint_noise_is_variance) variance = half_width.cwiseAbs2();
    Dataset d;
    for (double t : cfg.constraint_times) {
        if (!is_after(t, t_now, cfg.dt)) continue;
        DataPoint p = full_point(t, center, 0.0, DataRole::constraint);
        p.noise_var.assign(variance.data(), variance.data() + variance.size());
        d.insert(std::move(p));
    }
    return d;
}

Dataset make_d_past(const ControllerState& state, std::size_t m_p) {
    Dataset d;
    const std::size_t n = state.history_t.size();
    for (std::size_t k = n - std::min(n, m_p); k < n; ++k)
        d.insert(full_point(state.history_t[k], state.history_z[k], 0.0, DataRole::past));
    return d;
}

Dataset make_d_v(const ControllerConfig& cfg, const Eigen::VectorXd& z_ref, double t_now) {
    Dataset d;
    if (!cfg.virtual_start) return d;
    const double start = std::max(*cfg.virtual_start, t_now);
    for (double t : cfg.constraint_times)
        if (is_after(t, start, cfg.dt)) d.insert(full_point(t, z_ref, 0.0, DataRole::virtual_reference));
    return d;
}

Dataset build_dataset(const ControllerConfig& cfg, const ControllerState& state, const Eigen::VectorXd& z_ref) {
    Dataset d = make_d_init(state.t, state.z);
    const Dataset virt = make_d_v(cfg, z_ref, state.t);
    const Dataset con = make_d_con(cfg, state.t);
    for (const auto& p : con.points()) {
        const bool replaced = std::any_of(virt.points().begin(), virt.points().end(),
                                          [&](const DataPoint& v) { return same_time(v.t, p.t, cfg.dt); });
        if (!replaced) d.insert(p);
    }
    d.insert(make_d_past(state, cfg.past_window));
    d.insert(virt);
    return d;
}

StepResult mpc_step(std::shared_ptr<const LodeGpPrior> prior, ControllerState& state, const ControllerConfig& cfg,
                    const Hyperparams& hp) {
    const Eigen::Index nu = prior->system.input_dim();
    state.active = build_dataset(cfg, state, prior->prior_mean);
    auto gp = std::make_shared<const PosteriorGp>(prior, state.active, hp);

    StepResult r;
    r.t_next = state.t + cfg.dt;
    const int k = cfg.control_application == ControlApplication::subgrid_interpolation ? cfg.subgrid_count : 1;
    std::vector<double> knots;
    for (int j = 0; j <= k; ++j) knots.push_back(j == k ? r.t_next : state.t + cfg.dt * j / k);
    const Eigen::MatrixXd mu = gp->mean(knots);
    r.mean_next = mu.row(k).transpose();
    const double t_next[] = {r.t_next};
    r.stddev_next = gp->stddev(t_next).row(0).transpose();

    if (cfg.control_application == ControlApplication::hold_endpoint) {
        r.control = ControlSignal::hold(state.t, mu.row(k).tail(nu).transpose());
    } else {
        std::vector<Eigen::VectorXd> values;
        for (int j = 0; j <= k; ++j) values.push_back(mu.row(j).tail(nu).transpose());
        r.control = ControlSignal::linear(knots, std::move(values));
    }

    std::vector<double> hard_times;
    for (const auto& p : state.active.points()) hard_times.push_back(p.t);
    const Eigen::MatrixXd at_data = gp->mean(hard_times);
    for (std::size_t i = 0; i < state.active.size(); ++i) {
        const auto& p = state.active.points()[i];
        for (std::size_t c = 0; c < p.channel_count(); ++c)
            if (p.values[c] && p.noise_var[c] == 0.0)
                r.hard_residual = std::max(r.hard_residual,
                                           std::abs(at_data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - *p.values[c]));
    }
    r.posterior = std::move(gp);
    return r;
}

Trajectory run_closed_loop(std::shared_ptr<const LodeGpPrior> prior, const LinearSystem& plant,
                           const ControllerConfig& cfg, const Hyperparams& hp, const Eigen::VectorXd& z0) {
    plant.validate();
    const Eigen::Index nx = plant.state_dim();
    const Eigen::Index nu = plant.input_dim();
    if (nx != prior->system.state_dim() || nu != prior->system.input_dim())
        throw std::invalid_argument("run_closed_loop: plant dimensions do not match the prior");
    if (z0.size() != nx + nu) throw std::invalid_argument("run_closed_loop: z0 has the wrong dimension");
    cfg.validate(nx + nu);

    ControllerState state;
    state.t = cfg.t0;
    state.z = z0;

    Trajectory traj;
    traj.times.push_back(cfg.t0);
    traj.states.push_back(z0.head(nx));
    traj.controls.push_back(z0.tail(nu));
    traj.stddevs.push_back(Eigen::VectorXd::Zero(nx + nu));

    const std::size_t steps = cfg.step_count();
    for (std::size_t i = 0; i < steps; ++i) {
        StepResult r = mpc_step(prior, state, cfg, hp);
        traj.max_hard_residual = std::max(traj.max_hard_residual, r.hard_residual);
        if (i == 0) {
            const double t_now[] = {state.t};
            traj.stddevs.front() = r.posterior->stddev(t_now).row(0).transpose();
        }
        const double t_next = cfg.t0 + cfg.dt * static_cast<double>(i + 1);
        const Eigen::VectorXd x = state.z.head(nx);
        Eigen::VectorXd x_next;
        if (r.control.kind == ControlSignal::Kind::constant)
            x_next = step_exact(plant.A, plant.B, x, r.control.at(state.t), cfg.dt);
        else
            x_next = simulate_rk4(plant.A, plant.B, x, r.control, state.t, cfg.dt, 10);
        if (!x_next.allFinite() || x_next.norm() > 1e6) {
            std::ostringstream os;
            os << "plant diverged at t=" << t_next << " (|x| = " << x_next.norm() << ")";
            throw NumericalError(os.str());
        }
        Eigen::VectorXd z_next(nx + nu);
        z_next << x_next, r.control.at(t_next);

        traj.times.push_back(t_next);
        traj.states.push_back(x_next);
        traj.controls.push_back(z_next.tail(nu));
        traj.stddevs.push_back(r.stddev_next);
        state.observe(t_next, std::move(z_next));
        ++state.step;
    }
    traj.constraint_error = constraint_violation(traj, cfg.z_min, cfg.z_max);
    traj.control_error = control_error(traj, cfg.x_ref);
    return traj;
}

}  // namespace lodegp
