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

#include <autotune/agent.hpp>
#include <autotune/component.hpp>
#include <autotune/config.hpp>

#include <functional>
#include <memory>

namespace autotune {

/// Runs one benchmark invocation inside a component, reading tunables from its
/// registry and publishing every declared metric it produces.
using BenchmarkJob = std::function<void(Component&)>;

/// Benchmarks: "hashtable", "spinlock" and "synthetic". Tunables missing from the
/// spec keep the benchmark's own defaults; metrics missing from the spec are not sent.
///
/// hashtable metrics: probe_len, op_latency_ns (ns), collisions, resident_bytes, inserts.
/// spinlock metrics: throughput_ops_s (ops/s), acquire_ns (ns), acquisitions,
///   contended_acquisitions, backoff_events.
/// synthetic metric: objective, one sample of workload.fn over the encoded assignment.
BenchmarkJob make_benchmark_job(const std::string& benchmark, const nlohmann::json& workload, std::uint64_t seed);

/// A component and an agent connected through one transport, handshake done.
struct Session {
    std::shared_ptr<channel::Transport> transport;
    std::unique_ptr<Component> component;
    std::unique_ptr<Agent> agent;
    BenchmarkJob job;

    WorkloadTrigger trigger();
    ~Session();
};

std::unique_ptr<Session> open_session(const ExperimentConfig& config, AgentOptions options = {});

/// One run at the config's assignment (defaults when none is given).
RunRecord run_single(const ExperimentConfig& config, RunStore* store = nullptr);

/// A full episode; records go to `store` when given.
std::vector<IterationResult> optimize(const ExperimentConfig& config, RunStore* store,
                                      std::string episode_id = {});

}  // namespace autotune
