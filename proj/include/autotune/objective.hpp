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

#include <autotune/telemetry.hpp>

#include <cstdint>
#include <string>

namespace autotune {

enum class Direction { minimize, maximize };
enum class AggregateField { mean, p50, p95, p99, sum, count_rate };

const char* to_string(Direction d);
const char* to_string(AggregateField f);
Direction direction_from_string(const std::string& s);
AggregateField aggregate_field_from_string(const std::string& s);

/// What an episode optimizes: one field of one declared metric's aggregate.
struct Objective {
    std::string metric;
    Direction direction = Direction::minimize;
    AggregateField field = AggregateField::mean;
};

/// The user-facing objective value. count_rate is samples per second of run wall time.
double objective_value(AggregateField field, const MetricAggregate& agg, std::uint64_t wall_ns);

/// Optimizers always minimize: maximized objectives are negated.
inline double canonical_value(Direction d, double value) { return d == Direction::maximize ? -value : value; }

nlohmann::json objective_to_json(const Objective& o);
Objective objective_from_json(const nlohmann::json& j);

}  // namespace autotune
