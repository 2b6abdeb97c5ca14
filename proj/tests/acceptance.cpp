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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "lodegp/experiment.hpp"
#include "lodegp/gp.hpp"
#include "lodegp/plant.hpp"
#include "support.hpp"

using namespace lodegp;

namespace {

using Clock = std::chrono::steady_clock;
using Opt = std::optional<double>;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

const std::filesystem::path kConfigDir = LODEGP_CONFIG_DIR;

Outcome snf_correctness() {
    const auto start = Clock::now();
    const PolyMatrix h = build_h(test::unstable_plant());
    const SmithDecomposition s = smith_normal_form(h);
    const PolyMatrix expected{{Poly(1), Poly(), Poly()}, {Poly(), Poly(1), Poly()}};
    const Poly det_q = determinant(s.Q), det_v = determinant(s.V);
    const bool ok = s.D == expected && s.Q * h * s.V == s.D && det_q.degree() == 0 && det_v.degree() == 0;
    const double t = seconds_since(start);
    return {ok && t < 1.0, fmt::format("D = [[{}]], det Q = {}, det V = {}, {:.3f} s", s.D.to_string(),
                                       det_q.to_string(), det_v.to_string(), t)};
}

Outcome ode_satisfaction() {
    const auto cfg = ExperimentConfig::load(kConfigDir / "regulation_baseline.json");
    auto prior = std::make_shared<const LodeGpPrior>(build_prior(cfg.system, cfg.controller.x_ref));
    const bool exact = (prior->H * prior->v_cols).is_zero();
    const Hyperparams hp = resolve_hyperparams(cfg, *prior, training_dataset(cfg, *prior));

    const double h = 1e-3;
    const double lo = cfg.controller.t0 + 0.1, hi = cfg.controller.tT - 0.1;
    std::vector<double> grid;
    for (double t = lo; t <= hi + 1e-12; t += h) grid.push_back(t);
    const Eigen::Index nx = cfg.system.state_dim();

    ControllerState st;
    st.t = cfg.controller.t0;
    st.z = cfg.z0();
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.controller.step_count(); ++i) {
        const StepResult r = mpc_step(prior, st, cfg.controller, hp);
        if (i % 10 == 0) {
            const Eigen::MatrixXd mu = r.posterior->mean(grid);
            for (Eigen::Index k = 1; k + 1 < mu.rows(); ++k) {
                const Eigen::VectorXd xdot = (mu.row(k + 1).head(nx) - mu.row(k - 1).head(nx)).transpose() / (2 * h);
                const Eigen::VectorXd rhs = cfg.system.A * mu.row(k).head(nx).transpose() +
                                            cfg.system.B * mu.row(k).tail(cfg.system.input_dim()).transpose();
                worst = std::max(worst, (xdot - rhs).cwiseAbs().maxCoeff());
            }
        }
        const Eigen::VectorXd x = simulate_rk4(cfg.system.A, cfg.system.B, st.z.head(nx), r.control, st.t,
                                               cfg.controller.dt, 10);
        Eigen::VectorXd z(cfg.system.channel_dim());
        z << x, r.control.at(r.t_next);
        st.observe(r.t_next, z);
    }
    return {exact && worst <= 1e-3,
            fmt::format("H*V = 0 {}, max FD residual {:.3e} over 10 closed-loop posteriors", exact ? "exactly" : "FAILED",
                        worst)};
}

Outcome stability() {
    const auto prior = test::make_prior(test::unstable_plant());
    Dataset d;
    const Eigen::Vector3d z0(1.0, 0.0, 0.0);
    d.insert(test::point(0.0, {z0(0), z0(1), z0(2)}, {0, 0, 0}, DataRole::init));
    Hyperparams hp;
    hp.lengthscale_sq = 1.0;
    const PosteriorGp gp(prior, d, hp);
    const double scale = (z0 - prior->prior_mean).cwiseAbs().maxCoeff();
    std::vector<double> envelope;
    bool ok = true;
    for (double a : {8.0, 9.0, 10.0}) {
        const double q[] = {-a, a};
        const Eigen::MatrixXd dev = (gp.mean(q).rowwise() - prior->prior_mean.transpose()).cwiseAbs();
        envelope.push_back(dev.maxCoeff());
    }
    ok = envelope[0] <= 1e-6 * scale && envelope[1] < envelope[0] && envelope[2] < envelope[1];
    return {ok, fmt::format("deviation at |t| = 8, 9, 10: {:.2e}, {:.2e}, {:.2e}", envelope[0], envelope[1],
                            envelope[2])};
}

Outcome representer() {
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> time(0.0, 15.0), value(-2.0, 2.0), logn(std::log(1e-2), std::log(1.0));
    std::uniform_int_distribution<int> size(5, 40);
    std::bernoulli_distribution keep(0.7), hard_init(0.5);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto prior = test::make_prior(trial % 2 ? test::unstable_plant() : test::damped_oscillator());
        Dataset data;
        const std::size_t n = static_cast<std::size_t>(size(rng));
        if (hard_init(rng)) data.insert(test::point(0.0, {value(rng), value(rng), value(rng)}, {0, 0, 0}));
        while (data.size() < n) {
            DataPoint p = test::point(time(rng), {}, {});
            for (int c = 0; c < 3; ++c) {
                p.values.push_back(keep(rng) ? Opt(value(rng)) : std::nullopt);
                p.noise_var.push_back(std::exp(logn(rng)));
            }
            if (p.observed_count() == 0) p.values[0] = value(rng);
            data.insert(std::move(p));
        }
        const PosteriorGp gp(prior, data, Hyperparams{});
        // Stationarity of the regularized risk |r - K c|^2_{S^-1} + c^T K c gives (K + S) c = r.
        const Eigen::MatrixXd system = gp.gram().K + Eigen::MatrixXd(gp.gram().noise.asDiagonal());
        const Eigen::VectorXd c = system.fullPivLu().solve(gp.gram().residual);
        worst = std::max(worst, (gp.alpha() - c).norm() / c.norm());
    }
    return {worst <= 1e-8, fmt::format("max relative weight error {:.2e} on 20 datasets", worst)};
}

Outcome table_reproduction(std::vector<ExperimentResult>& results) {
    const char* names[] = {"baseline", "past", "virtual"};
    std::vector<double> con, ctl, wall;
    for (const char* name : names) {
        const auto cfg = ExperimentConfig::load(kConfigDir / fmt::format("regulation_{}.json", name));
        const auto start = Clock::now();
        results.push_back(run_experiment(cfg));
        wall.push_back(seconds_since(start));
        con.push_back(results.back().trajectory.constraint_error);
        ctl.push_back(results.back().trajectory.control_error);
    }
    bool ok = true;
    for (int k = 0; k < 3; ++k) ok = ok && con[k] <= 0.01 && ctl[k] >= 0.03 && ctl[k] <= 0.45 && wall[k] <= 300.0;
    ok = ok && ctl[0] > ctl[1] && ctl[2] <= 1.05 * ctl[1];
    return {ok, fmt::format("constraint {:.4f} / {:.4f} / {:.4f}, control {:.4f} / {:.4f} / {:.4f}, "
                            "wall {:.1f} / {:.1f} / {:.1f} s",
                            con[0], con[1], con[2], ctl[0], ctl[1], ctl[2], wall[0], wall[1], wall[2])};
}

Outcome regulation(const std::vector<ExperimentResult>& results) {
    double worst = 0.0;
    for (const auto& r : results) worst = std::max(worst, r.trajectory.states.back().norm());
    const auto sys = test::unstable_plant();
    Eigen::VectorXd x = Eigen::Vector2d(1, 0);
    const Eigen::VectorXd u = Eigen::VectorXd::Zero(1);
    double escape = -1.0;
    for (int k = 1; k <= 400; ++k) {
        x = step_exact(sys.A, sys.B, x, u, 0.01);
        if (x.norm() > 100.0) {
            escape = 0.01 * k;
            break;
        }
    }
    const bool ok = results.size() == 3 && worst <= 0.15 && escape > 0.0 && escape < 4.0;
    return {ok, fmt::format("max |x(10)| = {:.4f}; uncontrolled |x| > 100 at t = {:.2f}", worst, escape)};
}

Outcome gp_numerics() {
    const auto start = Clock::now();
    bool ok = true;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> time(-5.0, 5.0), logv(-1.0, 1.0);
    const auto prior = test::make_prior(test::unstable_plant());

    double psd = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Hyperparams hp;
        hp.signal_variance = std::exp(logv(rng));
        hp.lengthscale_sq = std::exp(logv(rng));
        std::vector<DataPoint> pts;
        for (int k = 0; k < 16; ++k) pts.push_back(test::point(time(rng), {0.0, 0.0, 0.0}, {0, 0, 0}));
        const GramSystem g = assemble_gram(*prior, std::span<const DataPoint>(pts), hp);
        ok = ok && g.K == g.K.transpose();
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g.K).eigenvalues();
        psd = std::min(psd, ev.minCoeff() / ev.maxCoeff());
    }
    ok = ok && psd >= -1e-8;

    Dataset hard;
    hard.insert(test::point(0.0, {1.0, 0.0, 0.0}, {0, 0, 0}));
    hard.insert(test::point(1.5, {0.3, -0.4, 0.2}, {0, 0, 0}));
    hard.insert(test::point(3.0, {0.0, 0.0, 0.0}, {1, 1, 2.5}));
    const PosteriorGp gp(prior, hard, Hyperparams{});
    const double q[] = {0.0, 1.5};
    const Eigen::MatrixXd mu = gp.mean(q);
    const double interp = std::max((mu.row(0) - Eigen::RowVector3d(1, 0, 0)).cwiseAbs().maxCoeff(),
                                   (mu.row(1) - Eigen::RowVector3d(0.3, -0.4, 0.2)).cwiseAbs().maxCoeff());
    ok = ok && interp <= 1e-5;

    const auto shifted = test::make_prior(test::unstable_plant(), Eigen::Vector2d(1, 0));
    Dataset eq;
    for (double t : {0.0, 1.0, 2.0}) eq.insert(test::point(t, {1.0, 0.0, -1.0}, {0, 0.5, 0}));
    const PosteriorGp still(shifted, eq, Hyperparams{});
    const double qe[] = {-2.0, 0.5, 7.0};
    const double equilibrium = (still.mean(qe).rowwise() - shifted->prior_mean.transpose()).cwiseAbs().maxCoeff();
    ok = ok && equilibrium == 0.0;

    Hyperparams half;
    half.signal_variance = 0.5;
    Dataset unit;
    unit.insert(test::point(0.0, {1.0, std::nullopt, std::nullopt}, {0.5, 0, 0}));
    const double mll = log_marginal_likelihood(*prior, unit, half);
    ok = ok && std::abs(mll + 0.5) <= 1e-12;

    double deriv = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Hyperparams hp;
        hp.signal_variance = std::exp(logv(rng));
        hp.lengthscale_sq = std::exp(logv(rng));
        const double t = time(rng), tp = time(rng), h = 1e-5;
        for (std::size_t i = 0; i < 3; ++i) {
            const GaussPolyTerm& k = prior->kernel(i, 0);
            const double fd = (k.evaluate(t + h - tp, hp) - k.evaluate(t - h - tp, hp)) / (2 * h);
            const double exact = diff_first(k).evaluate(t - tp, hp);
            const double scale = std::max({std::abs(exact), std::abs(k.evaluate(t - tp, hp)), 1e-3});
            deriv = std::max(deriv, std::abs(fd - exact) / scale);
        }
    }
    ok = ok && deriv <= 1e-6;
    const double t = seconds_since(start);
    return {ok && t < 30.0,
            fmt::format("min eig ratio {:.1e}, interpolation {:.1e}, equilibrium {:.1e}, MLL {:.6f}, "
                        "derivative rel err {:.1e}, {:.2f} s",
                        psd, interp, equilibrium, mll, deriv, t)};
}

Outcome integrator() {
    const auto sys = test::unstable_plant();
    const Eigen::Vector2d x0(1.0, -0.5);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.4);
    const ControlSignal sig = ControlSignal::hold(0.0, u);
    const Eigen::VectorXd ex = step_exact(sys.A, sys.B, x0, u, 1e-2);
    const double agree = (step_rk4(sys.A, sys.B, x0, sig, 0.0, 1e-2) - ex).norm() / ex.norm();
    const Eigen::VectorXd target = step_exact(sys.A, sys.B, x0, u, 2.0);
    const double e1 = (simulate_rk4(sys.A, sys.B, x0, sig, 0.0, 2.0, 20) - target).norm();
    const double e2 = (simulate_rk4(sys.A, sys.B, x0, sig, 0.0, 2.0, 40) - target).norm();
    const double ratio = e1 / e2;
    return {agree <= 1e-8 && ratio >= 12.0 && ratio <= 20.0,
            fmt::format("one-step relative difference {:.2e}, halving ratio {:.2f}", agree, ratio)};
}

}  // namespace

int main() {
    std::vector<ExperimentResult> runs;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 SNF correctness", snf_correctness},
        {"2 ODE satisfaction", ode_satisfaction},
        {"3 stability of a single hard point", stability},
        {"4 representer weights", representer},
        {"5 regulation table", [&] { return table_reproduction(runs); }},
        {"6 closed-loop regulation", [&] { return regulation(runs); }},
        {"7 GP numerics", gp_numerics},
        {"8 integrator cross-check", integrator},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
