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

#include <autotune/tunables.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace autotune {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string describe(const TunableValue& v) {
    return std::visit(overloaded{
                          [](std::int64_t x) { return std::to_string(x); },
                          [](double x) {
                              std::ostringstream os;
                              os << x;
                              return os.str();
                          },
                          [](bool x) { return std::string(x ? "true" : "false"); },
                          [](const std::string& x) { return '"' + x + '"'; },
                      },
                      v);
}

const char* value_kind_name(const TunableValue& v) {
    switch (v.index()) {
        case 0: return "integer";
        case 1: return "real";
        case 2: return "boolean";
        default: return "categorical";
    }
}

bool kind_matches(TunableKind kind, const TunableValue& v) {
    switch (kind) {
        case TunableKind::integer: return std::holds_alternative<std::int64_t>(v);
        case TunableKind::real: return std::holds_alternative<double>(v);
        case TunableKind::boolean: return std::holds_alternative<bool>(v);
        case TunableKind::categorical: return std::holds_alternative<std::string>(v);
    }
    return false;
}

bool is_numeric(TunableKind kind) { return kind == TunableKind::integer || kind == TunableKind::real; }

// Position of v inside [lower, upper] on the tunable's scale, in [0, 1].
double scaled_position(const TunableDef& def, double v) {
    if (def.upper == def.lower) return 0.0;
    if (def.scale == Scale::log)
        return (std::log(v) - std::log(def.lower)) / (std::log(def.upper) - std::log(def.lower));
    return (v - def.lower) / (def.upper - def.lower);
}

double unscaled_position(const TunableDef& def, double u) {
    if (def.upper == def.lower) return def.lower;
    if (def.scale == Scale::log)
        return std::exp(std::log(def.lower) + u * (std::log(def.upper) - std::log(def.lower)));
    return def.lower + u * (def.upper - def.lower);
}

std::int64_t round_half_up(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

std::optional<std::string> check_value(const TunableDef& def, const TunableValue& v) {
    switch (def.kind) {
        case TunableKind::integer: {
            auto x = static_cast<double>(std::get<std::int64_t>(v));
            if (x < def.lower || x > def.upper) return "out of bounds";
            break;
        }
        case TunableKind::real: {
            double x = std::get<double>(v);
            if (!std::isfinite(x) || x < def.lower || x > def.upper) return "out of bounds";
            break;
        }
        case TunableKind::boolean: break;
        case TunableKind::categorical:
            if (!def.category_index(std::get<std::string>(v))) return "out of bounds (not a declared category)";
            break;
    }
    return std::nullopt;
}

TunableKind kind_from_string(const std::string& s) {
    if (s == "integer" || s == "int") return TunableKind::integer;
    if (s == "real" || s == "float" || s == "double") return TunableKind::real;
    if (s == "boolean" || s == "bool") return TunableKind::boolean;
    if (s == "categorical") return TunableKind::categorical;
    throw SpecError("unknown tunable kind '" + s + "'");
}

Scale scale_from_string(const std::string& s) {
    if (s == "linear") return Scale::linear;
    if (s == "log") return Scale::log;
    throw SpecError("unknown scale '" + s + "'");
}

}  // namespace

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::unknown_parameter: return "unknown parameter";
        case ViolationKind::missing_parameter: return "missing parameter";
        case ViolationKind::out_of_bounds: return "out of bounds";
        case ViolationKind::kind_mismatch: return "kind mismatch";
    }
    return "?";
}

const char* to_string(TunableKind kind) {
    switch (kind) {
        case TunableKind::integer: return "integer";
        case TunableKind::real: return "real";
        case TunableKind::boolean: return "boolean";
        case TunableKind::categorical: return "categorical";
    }
    return "?";
}

const char* to_string(Scale scale) { return scale == Scale::log ? "log" : "linear"; }

std::optional<std::size_t> TunableDef::category_index(const std::string& category) const {
    auto it = std::find(categories.begin(), categories.end(), category);
    if (it == categories.end()) return std::nullopt;
    return static_cast<std::size_t>(it - categories.begin());
}

const TunableDef* ComponentSpec::find_tunable(const std::string& n) const {
    for (const auto& t : tunables)
        if (t.name == n) return &t;
    return nullptr;
}

const TunableDef* ComponentSpec::find_tunable(std::uint32_t id) const {
    for (const auto& t : tunables)
        if (t.param_id == id) return &t;
    return nullptr;
}

const MetricDef* ComponentSpec::find_metric(const std::string& n) const {
    for (const auto& m : metrics)
        if (m.name == n) return &m;
    return nullptr;
}

const MetricDef* ComponentSpec::find_metric(std::uint32_t id) const {
    for (const auto& m : metrics)
        if (m.metric_id == id) return &m;
    return nullptr;
}

std::vector<std::string> check_spec(const ComponentSpec& spec) {
    std::vector<std::string> problems;
    std::set<std::string> names;
    std::set<std::uint32_t> ids;
    for (const auto& t : spec.tunables) {
        const std::string where = "tunable '" + t.name + "': ";
        if (t.name.empty()) problems.push_back("tunable with empty name");
        if (!names.insert(t.name).second) problems.push_back(where + "duplicate name");
        if (!ids.insert(t.param_id).second)
            problems.push_back(where + "duplicate param_id " + std::to_string(t.param_id));
        if (is_numeric(t.kind)) {
            if (!std::isfinite(t.lower) || !std::isfinite(t.upper)) problems.push_back(where + "non-finite bounds");
            if (t.lower > t.upper) problems.push_back(where + "lower > upper");
            if (t.scale == Scale::log && !(t.lower > 0.0)) problems.push_back(where + "log scale requires lower > 0");
            if (t.kind == TunableKind::integer &&
                (std::floor(t.lower) != t.lower || std::floor(t.upper) != t.upper))
                problems.push_back(where + "integer bounds must be integral");
        }
        if (t.kind == TunableKind::categorical) {
            if (t.categories.empty()) problems.push_back(where + "no categories");
            std::set<std::string> cats(t.categories.begin(), t.categories.end());
            if (cats.size() != t.categories.size()) problems.push_back(where + "duplicate category");
        }
        if (!kind_matches(t.kind, t.default_value)) {
            problems.push_back(where + "default has kind " + value_kind_name(t.default_value));
        } else if (auto bad = check_value(t, t.default_value)) {
            problems.push_back(where + "default " + describe(t.default_value) + " " + *bad);
        }
    }
    std::set<std::uint32_t> metric_ids;
    std::set<std::string> metric_names;
    for (const auto& m : spec.metrics) {
        if (!metric_ids.insert(m.metric_id).second)
            problems.push_back("metric '" + m.name + "': duplicate metric_id " + std::to_string(m.metric_id));
        if (!metric_names.insert(m.name).second) problems.push_back("metric '" + m.name + "': duplicate name");
    }
    return problems;
}

void require_valid_spec(const ComponentSpec& spec) {
    auto problems = check_spec(spec);
    if (problems.empty()) return;
    std::string msg = "invalid component spec '" + spec.name + "':";
    for (const auto& p : problems) msg += "\n  " + p;
    throw SpecError(msg);
}

std::vector<Violation> validate_assignment(const ComponentSpec& spec, const TunableAssignment& a) {
    std::vector<Violation> out;
    for (const auto& def : spec.tunables) {
        auto it = a.values.find(def.name);
        if (it == a.values.end()) {
            out.push_back({ViolationKind::missing_parameter, def.name, "missing parameter '" + def.name + "'"});
            continue;
        }
        const auto& v = it->second;
        if (!kind_matches(def.kind, v)) {
            out.push_back({ViolationKind::kind_mismatch, def.name,
                           "kind mismatch for '" + def.name + "': expected " + to_string(def.kind) + ", got " +
                               value_kind_name(v)});
            continue;
        }
        if (auto bad = check_value(def, v)) {
            std::ostringstream msg;
            msg << "'" << def.name << "' = " << describe(v) << " " << *bad;
            if (is_numeric(def.kind)) msg << " [" << def.lower << ", " << def.upper << "]";
            out.push_back({ViolationKind::out_of_bounds, def.name, msg.str()});
        }
    }
    for (const auto& [name, v] : a.values) {
        if (!spec.find_tunable(name))
            out.push_back({ViolationKind::unknown_parameter, name, "unknown parameter '" + name + "'"});
    }
    return out;
}

AssignmentError::AssignmentError(std::vector<Violation> violations)
    : Error([&] {
          std::string msg = "invalid assignment:";
          for (const auto& v : violations) msg += "\n  " + v.message;
          return msg;
      }()),
      violations_(std::move(violations)) {}

Eigen::VectorXd encode_unit(const ComponentSpec& spec, const TunableAssignment& a) {
    if (auto violations = validate_assignment(spec, a); !violations.empty())
        throw AssignmentError(std::move(violations));

    Eigen::VectorXd u(static_cast<Eigen::Index>(spec.tunables.size()));
    for (std::size_t i = 0; i < spec.tunables.size(); ++i) {
        const auto& def = spec.tunables[i];
        const auto& v = a.values.at(def.name);
        double coord = 0.0;
        switch (def.kind) {
            case TunableKind::integer:
                coord = scaled_position(def, static_cast<double>(std::get<std::int64_t>(v)));
                break;
            case TunableKind::real: coord = scaled_position(def, std::get<double>(v)); break;
            case TunableKind::boolean: coord = std::get<bool>(v) ? 1.0 : 0.0; break;
            case TunableKind::categorical: {
                const auto k = def.categories.size();
                if (k > 1)
                    coord = static_cast<double>(*def.category_index(std::get<std::string>(v))) /
                            static_cast<double>(k - 1);
                break;
            }
        }
        u[static_cast<Eigen::Index>(i)] = std::clamp(coord, 0.0, 1.0);
    }
    return u;
}

TunableAssignment decode_unit(const ComponentSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u) {
    if (static_cast<std::size_t>(u.size()) != spec.tunables.size())
        throw AssignmentError("unit vector has " + std::to_string(u.size()) + " coordinates, spec declares " +
                              std::to_string(spec.tunables.size()));
    TunableAssignment a;
    a.component_id = spec.component_id;
    for (std::size_t i = 0; i < spec.tunables.size(); ++i) {
        const auto& def = spec.tunables[i];
        const double x = u[static_cast<Eigen::Index>(i)];
        if (!(x >= 0.0 && x <= 1.0))
            throw AssignmentError("coordinate " + std::to_string(i) + " (" + def.name + ") outside [0,1]");
        switch (def.kind) {
            case TunableKind::integer: {
                auto v = round_half_up(unscaled_position(def, x));
                v = std::clamp(v, static_cast<std::int64_t>(def.lower), static_cast<std::int64_t>(def.upper));
                a.values[def.name] = v;
                break;
            }
            case TunableKind::real:
                a.values[def.name] = std::clamp(unscaled_position(def, x), def.lower, def.upper);
                break;
            case TunableKind::boolean: a.values[def.name] = x >= 0.5; break;
            case TunableKind::categorical: {
                const auto k = static_cast<std::int64_t>(def.categories.size());
                auto idx = k > 1 ? round_half_up(x * static_cast<double>(k - 1)) : 0;
                idx = std::clamp<std::int64_t>(idx, 0, k - 1);
                a.values[def.name] = def.categories[static_cast<std::size_t>(idx)];
                break;
            }
        }
    }
    return a;
}

TunableAssignment default_assignment(const ComponentSpec& spec) {
    TunableAssignment a;
    a.component_id = spec.component_id;
    for (const auto& def : spec.tunables) a.values[def.name] = def.default_value;
    return a;
}

TunableValue value_from_json(const TunableDef& def, const nlohmann::json& value) {
    switch (def.kind) {
        case TunableKind::integer:
            if (value.is_number_integer()) return value.get<std::int64_t>();
            break;
        case TunableKind::real:
            if (value.is_number()) return value.get<double>();
            break;
        case TunableKind::boolean:
            if (value.is_boolean()) return value.get<bool>();
            break;
        case TunableKind::categorical:
            if (value.is_string()) return value.get<std::string>();
            break;
    }
    // Keep the mismatching value so validation can report it.
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_number_integer()) return value.get<std::int64_t>();
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) return value.get<std::string>();
    throw SpecError("tunable '" + def.name + "': unsupported JSON value " + value.dump());
}

nlohmann::json value_to_json(const TunableValue& value) {
    return std::visit([](const auto& x) { return nlohmann::json(x); }, value);
}

ComponentSpec spec_from_json(const nlohmann::json& doc) {
    try {
        ComponentSpec spec;
        spec.component_id = doc.at("component_id").get<std::uint32_t>();
        spec.name = doc.at("name").get<std::string>();
        for (const auto& t : doc.at("tunables")) {
            TunableDef def;
            def.name = t.at("name").get<std::string>();
            def.param_id = t.at("param_id").get<std::uint32_t>();
            def.kind = kind_from_string(t.at("kind").get<std::string>());
            def.scale = scale_from_string(t.value("scale", std::string("linear")));
            switch (def.kind) {
                case TunableKind::integer:
                case TunableKind::real:
                    def.lower = t.at("lower").get<double>();
                    def.upper = t.at("upper").get<double>();
                    break;
                case TunableKind::boolean:
                    def.lower = 0.0;
                    def.upper = 1.0;
                    break;
                case TunableKind::categorical:
                    def.categories = t.at("categories").get<std::vector<std::string>>();
                    break;
            }
            if (t.contains("default") && !t.at("default").is_null()) {
                def.default_value = value_from_json(def, t.at("default"));
            } else {
                switch (def.kind) {
                    case TunableKind::integer: def.default_value = static_cast<std::int64_t>(def.lower); break;
                    case TunableKind::real: def.default_value = def.lower; break;
                    case TunableKind::boolean: def.default_value = false; break;
                    case TunableKind::categorical:
                        def.default_value = def.categories.empty() ? std::string() : def.categories.front();
                        break;
                }
            }
            spec.tunables.push_back(std::move(def));
        }
        if (doc.contains("metrics")) {
            for (const auto& m : doc.at("metrics")) {
                spec.metrics.push_back(MetricDef{m.at("metric_id").get<std::uint32_t>(), m.at("name").get<std::string>(),
                                                 m.value("unit", std::string())});
            }
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed search-space document: ") + e.what());
    }
}

nlohmann::json spec_to_json(const ComponentSpec& spec) {
    nlohmann::json tunables = nlohmann::json::array();
    for (const auto& t : spec.tunables) {
        nlohmann::json j{{"name", t.name}, {"param_id", t.param_id}, {"kind", to_string(t.kind)}};
        if (is_numeric(t.kind)) {
            j["lower"] = t.lower;
            j["upper"] = t.upper;
            j["scale"] = to_string(t.scale);
        }
        if (t.kind == TunableKind::categorical) j["categories"] = t.categories;
        j["default"] = value_to_json(t.default_value);
        tunables.push_back(std::move(j));
    }
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& m : spec.metrics)
        metrics.push_back({{"metric_id", m.metric_id}, {"name", m.name}, {"unit", m.unit}});
    return {{"component_id", spec.component_id}, {"name", spec.name}, {"tunables", tunables}, {"metrics", metrics}};
}

TunableAssignment assignment_from_json(const ComponentSpec& spec, const nlohmann::json& values) {
    if (!values.is_object()) throw SpecError("assignment must be a JSON object");
    TunableAssignment a;
    a.component_id = spec.component_id;
    for (const auto& [name, v] : values.items()) {
        if (const auto* def = spec.find_tunable(name)) {
            a.values[name] = value_from_json(*def, v);
        } else {
            TunableDef loose;
            loose.name = name;
            loose.kind = v.is_string() ? TunableKind::categorical
                         : v.is_boolean() ? TunableKind::boolean
                         : v.is_number_integer() ? TunableKind::integer
                                                 : TunableKind::real;
            a.values[name] = value_from_json(loose, v);
        }
    }
    return a;
}

nlohmann::json assignment_to_json(const TunableAssignment& a) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, v] : a.values) j[name] = value_to_json(v);
    return j;
}

double numeric_value(const TunableDef& def, const TunableValue& value) {
    switch (def.kind) {
        case TunableKind::integer: return static_cast<double>(std::get<std::int64_t>(value));
        case TunableKind::real: return std::get<double>(value);
        case TunableKind::boolean: return std::get<bool>(value) ? 1.0 : 0.0;
        case TunableKind::categorical:
            return static_cast<double>(def.category_index(std::get<std::string>(value)).value_or(0));
    }
    return 0.0;
}

}  // namespace autotune
