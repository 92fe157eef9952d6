/*
 * Copyright 2026 The autotune Authors
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

#pragma once

#include <Eigen/Core>

#include <string>

namespace autotune::bench {

/// Benchmark-free objectives over the unit cube, for exercising the tuning loop
/// without timing noise.
enum class SyntheticFn {
    quadratic,  ///< sum (u_i - 0.7)^2, minimum 0 at u = 0.7
    sphere,     ///< sum u_i^2, minimum 0 at the origin
    jagged,     ///< sum of sinusoids plus a shallow bowl; many local minima
};

SyntheticFn synthetic_fn_from_string(const std::string& s);
const char* to_string(SyntheticFn fn);

double synthetic_objective(SyntheticFn fn, const Eigen::Ref<const Eigen::VectorXd>& u);

}  // namespace autotune::bench
