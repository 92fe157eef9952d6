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

#include <autotune/config.hpp>

#include <fstream>

namespace autotune {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(path.string() + " is not valid JSON: " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

ComponentSpec load_spec(const std::filesystem::path& path) {
    auto spec = spec_from_json(read_json(path));
    require_valid_spec(spec);
    return spec;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    try {
        if (!doc.is_object()) throw SpecError("experiment config must be a JSON object");
        const auto& space = doc.at("space");
        c.spec = space.is_string() ? load_spec(resolve(base_dir, space.get<std::string>())) : spec_from_json(space);
        require_valid_spec(c.spec);
        c.workload = doc.value("workload", nlohmann::json::object());
        c.benchmark = doc.contains("benchmark") ? doc.at("benchmark").get<std::string>()
                                                : c.workload.value("benchmark", std::string());
        if (c.benchmark.empty()) throw SpecError("experiment config names no benchmark");
        c.workload_name = c.workload.value("name", c.benchmark);
        c.objective = objective_from_json(doc.at("objective"));
        if (!c.spec.find_metric(c.objective.metric))
            throw SpecError("objective metric '" + c.objective.metric + "' is not declared by " + c.spec.name);
        c.optimizer = optimizer_config_from_json(doc.value("optimizer", nlohmann::json::object()));
        c.workload_seed = c.workload.value("seed", c.optimizer.seed);
        if (doc.contains("transport")) c.transport = resolve(base_dir, doc.at("transport").get<std::string>());
        if (doc.contains("out")) c.out = resolve(base_dir, doc.at("out").get<std::string>());
        if (doc.contains("assignment")) {
            auto a = default_assignment(c.spec);
            const auto partial = assignment_from_json(c.spec, doc.at("assignment"));
            for (const auto& [name, value] : partial.values) a.values[name] = value;
            if (auto v = validate_assignment(c.spec, a); !v.empty()) throw AssignmentError(std::move(v));
            c.assignment = std::move(a);
        }
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("invalid experiment config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return experiment_config_from_json(read_json(path), path.parent_path());
}

}  // namespace autotune
