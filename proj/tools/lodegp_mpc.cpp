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

// Command-line driver: run | samples | algebra.
// Exit codes: 0 success, 1 configuration/model error, 2 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lodegp/errors.hpp"
#include "lodegp/experiment.hpp"

namespace {

constexpr int kConfigFailure = 1;
constexpr int kNumericalFailure = 2;

std::ofstream open_output(const std::filesystem::path& dir, const std::string& file) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / file);
    if (!out) throw lodegp::ConfigError("cannot write " + (dir / file).string());
    return out;
}

int cmd_run(const std::string& path) {
    const auto cfg = lodegp::ExperimentConfig::load(path);
    const auto result = lodegp::run_experiment(cfg);
    const auto dir = cfg.resolved_output_dir();
    {
        auto out = open_output(dir, cfg.trajectory_file);
        lodegp::write_trajectory_csv(out, result.trajectory);
    }
    {
        auto out = open_output(dir, cfg.metrics_file);
        lodegp::write_metrics_json(out, cfg, result);
    }
    lodegp::write_metrics_json(std::cout, cfg, result);
    return 0;
}

int cmd_samples(const std::string& path, std::size_t count, std::uint64_t seed) {
    const auto cfg = lodegp::ExperimentConfig::load(path);
    auto out = open_output(cfg.resolved_output_dir(), cfg.samples_file);
    lodegp::dump_samples(cfg, count, seed, out);
    std::cout << (cfg.resolved_output_dir() / cfg.samples_file).string() << '\n';
    return 0;
}

int cmd_algebra(const std::string& path) {
    const auto cfg = lodegp::ExperimentConfig::load(path);
    lodegp::dump_algebra(cfg, std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LODE-GP model predictive control"};
    app.require_subcommand(1);

    std::string config;
    std::size_t count = 10;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "closed-loop simulation; writes trajectory CSV and metrics JSON");
    run->add_option("config", config, "experiment config (JSON)")->required();
    auto* samples = app.add_subcommand("samples", "draw posterior samples of the LODE-GP");
    samples->add_option("config", config, "experiment config (JSON)")->required();
    samples->add_option("--count", count, "number of samples");
    samples->add_option("--seed", seed, "random seed");
    auto* algebra = app.add_subcommand("algebra", "print H, its Smith form and the kernel");
    algebra->add_option("config", config, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigFailure;
    }

    try {
        if (*run) return cmd_run(config);
        if (*samples) return cmd_samples(config, count, seed);
        return cmd_algebra(config);
    } catch (const lodegp::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const lodegp::ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const lodegp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}
