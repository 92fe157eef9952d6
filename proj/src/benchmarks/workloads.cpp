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

#include <autotune/benchmarks/synthetic.hpp>
#include <autotune/error.hpp>

#include <cmath>
#include <numbers>

namespace autotune::bench {

SyntheticFn synthetic_fn_from_string(const std::string& s) {
    if (s == "quadratic") return SyntheticFn::quadratic;
    if (s == "sphere") return SyntheticFn::sphere;
    if (s == "jagged") return SyntheticFn::jagged;
    throw SpecError("unknown synthetic function '" + s + "'");
}

const char* to_string(SyntheticFn fn) {
    switch (fn) {
        case SyntheticFn::quadratic: return "quadratic";
        case SyntheticFn::sphere: return "sphere";
        case SyntheticFn::jagged: return "jagged";
    }
    return "?";
}

double synthetic_objective(SyntheticFn fn, const Eigen::Ref<const Eigen::VectorXd>& u) {
    constexpr double pi = std::numbers::pi;
    switch (fn) {
        case SyntheticFn::quadratic: return (u.array() - 0.7).square().sum();
        case SyntheticFn::sphere: return u.squaredNorm();
        case SyntheticFn::jagged: {
            double f = 0.0;
            for (Eigen::Index i = 0; i < u.size(); ++i) {
                const double x = u[i];
                f += 0.5 * std::sin(11.0 * pi * x) + 0.3 * std::sin(29.0 * pi * x + 1.0) + (x - 0.35) * (x - 0.35);
            }
            return f;
        }
    }
    return 0.0;
}

}  // namespace autotune::bench
