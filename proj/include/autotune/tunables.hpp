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

#include <autotune/error.hpp>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace autotune {

enum class TunableKind { integer, real, boolean, categorical };
enum class Scale { linear, log };

/// A concrete parameter value. Categorical values are carried by name.
using TunableValue = std::variant<std::int64_t, double, bool, std::string>;

struct TunableDef {
    std::string name;
    std::uint32_t param_id = 0;
    TunableKind kind = TunableKind::integer;
    double lower = 0.0;
    double upper = 0.0;
    Scale scale = Scale::linear;
    std::vector<std::string> categories;
    TunableValue default_value = std::int64_t{0};

    /// Index of `category` in `categories`, if present.
    std::optional<std::size_t> category_index(const std::string& category) const;
};

struct MetricDef {
    std::uint32_t metric_id = 0;
    std::string name;
    std::string unit;
};

struct ComponentSpec {
    std::uint32_t component_id = 0;
    std::string name;
    std::vector<TunableDef> tunables;
    std::vector<MetricDef> metrics;

    const TunableDef* find_tunable(const std::string& name) const;
    const TunableDef* find_tunable(std::uint32_t param_id) const;
    const MetricDef* find_metric(const std::string& name) const;
    const MetricDef* find_metric(std::uint32_t metric_id) const;
    std::size_t dimension() const { return tunables.size(); }
};

struct TunableAssignment {
    std::uint32_t component_id = 0;
    std::map<std::string, TunableValue> values;

    bool operator==(const TunableAssignment&) const = default;
};

enum class ViolationKind { unknown_parameter, missing_parameter, out_of_bounds, kind_mismatch };

struct Violation {
    ViolationKind kind;
    std::string parameter;
    std::string message;

    bool operator==(const Violation&) const = default;
};

const char* to_string(ViolationKind kind);
const char* to_string(TunableKind kind);
const char* to_string(Scale scale);

/// Structural checks on a spec: bounds, scales, defaults, unique ids and names.
/// Returns every problem found; an empty list means the spec is usable.
std::vector<std::string> check_spec(const ComponentSpec& spec);

/// Throws SpecError listing every problem reported by check_spec.
void require_valid_spec(const ComponentSpec& spec);

/// Checks `a` against `spec` and reports all violations, in declaration order
/// followed by unknown names. Empty result means the assignment is valid.
std::vector<Violation> validate_assignment(const ComponentSpec& spec, const TunableAssignment& a);

/// Thrown by encode/decode on invalid input; carries the violation list when there is one.
class AssignmentError : public Error {
public:
    explicit AssignmentError(std::vector<Violation> violations);
    explicit AssignmentError(const std::string& what) : Error(what) {}
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Maps an assignment to the unit hypercube, one coordinate per tunable in declaration order.
Eigen::VectorXd encode_unit(const ComponentSpec& spec, const TunableAssignment& a);

/// Inverse of encode_unit. Integers and categories round to the nearest valid
/// value with ties rounding up; the result always validates.
TunableAssignment decode_unit(const ComponentSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u);

TunableAssignment default_assignment(const ComponentSpec& spec);

// JSON search-space documents. The same document is the REGISTER payload.
ComponentSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const ComponentSpec& spec);

/// Parses a JSON value as the given tunable's kind (JSON integers are accepted for reals).
TunableValue value_from_json(const TunableDef& def, const nlohmann::json& value);
nlohmann::json value_to_json(const TunableValue& value);

/// Parses `{name: value, ...}` against the spec. Unknown names are kept as-is
/// so validate_assignment can report them.
TunableAssignment assignment_from_json(const ComponentSpec& spec, const nlohmann::json& values);
nlohmann::json assignment_to_json(const TunableAssignment& a);

/// Numeric view of a value for a given tunable, as carried on the wire and in telemetry echoes.
double numeric_value(const TunableDef& def, const TunableValue& value);

}  // namespace autotune
