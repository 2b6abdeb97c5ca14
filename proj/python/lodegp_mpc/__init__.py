# Copyright 2026 The lodegp-mpc Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""LODE-GP model predictive control."""

from ._core import (
    ConfigError,
    ModelError,
    NumericalError,
    Observation,
    Posterior,
    Prior,
    algebra,
    dump_algebra,
    optimize_hyperparams,
    run,
    samples,
    simulate_rk4,
    steady_state_input,
    step_exact,
)

__all__ = [
    "ConfigError",
    "ModelError",
    "NumericalError",
    "Observation",
    "Posterior",
    "Prior",
    "algebra",
    "dump_algebra",
    "optimize_hyperparams",
    "run",
    "samples",
    "simulate_rk4",
    "steady_state_input",
    "step_exact",
]
