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

#ifndef LODEGP_ERRORS_HPP
#define LODEGP_ERRORS_HPP

#include <stdexcept>

namespace lodegp {

/// Invalid experiment or model setup: inconsistent dimensions, infeasible
/// reference, non-controllable system.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cholesky failure after jitter escalation, or a diverging plant.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lodegp

#endif  // LODEGP_ERRORS_HPP
