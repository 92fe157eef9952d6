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

#include <autotune/objective.hpp>
#include <autotune/optimizer.hpp>
#include <autotune/tunables.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace autotune {

/// Everything one `run` or `optimize` invocation needs, read from a JSON file:
///
///   {"space": "hashtable.space.json", "benchmark": "hashtable",
///    "workload": {"name": "zipf-50k", "n_keys": 50000, "key_dist": "zipf", ...},
///    "objective": {"metric": "probe_len", "direction": "minimize", "aggregate": "mean"},
///    "optimizer": {"kind": "bo", "seed": 7, "budget": 50, "strategy": "all_at_once"},
///    "transport": "/dev/shm/autotune.ring", "out": "runs.jsonl",
///    "assignment": {"bucket_count_log2": 12}}
///
/// Relative paths are resolved against the config file's directory. "transport"
/// is optional (in-process rings when absent); "assignment" is optional and may
/// be partial, missing tunables take their defaults.
struct ExperimentConfig {
    ComponentSpec spec;
    std::string benchmark;
    nlohmann::json workload = nlohmann::json::object();
    std::string workload_name;
    Objective objective;
    OptimizerConfig optimizer;
    std::optional<std::filesystem::path> transport;
    std::optional<std::filesystem::path> out;
    std::optional<TunableAssignment> assignment;
    std::uint64_t workload_seed = 0;  ///< "seed" in the workload block, else the optimizer seed
};

/// Throws SpecError for invalid content and StoreError for unreadable files.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

ComponentSpec load_spec(const std::filesystem::path& path);

}  // namespace autotune
