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

#include <autotune/channel/transport.hpp>
#include <autotune/error.hpp>
#include <autotune/experiment.hpp>
#include <autotune/objective.hpp>
#include <autotune/optimizer.hpp>
#include <autotune/telemetry.hpp>
#include <autotune/tunables.hpp>

#include <chrono>
#include <functional>
#include <future>
#include <memory>

namespace autotune {

struct AgentOptions {
    std::chrono::milliseconds handshake_timeout{5000};
    std::chrono::milliseconds ack_timeout{5000};
    int send_retries = 100;
    std::chrono::microseconds send_backoff{1000};
    std::chrono::milliseconds run_timeout{600000};
};

class HandshakeError : public Error {
public:
    using Error::Error;
};

/// Agent side of one component connection. Owns the agent end of the transport,
/// so all calls must come from one execution context.
class Agent {
public:
    explicit Agent(std::shared_ptr<channel::Transport> transport, AgentOptions options = {});

    /// Waits for REGISTER, validates the spec and ACKs it. Telemetry that arrives
    /// first is kept. Throws HandshakeError (no ACK sent) or TimeoutError.
    const ComponentSpec& handshake();

    /// Sends one CONFIG_UPDATE per tunable in declaration order and waits for each
    /// ACK before sending the next. Throws AssignmentError for an invalid
    /// assignment, TimeoutError when the ring stays full or an ACK never arrives,
    /// and Error when the component rejects a value.
    void enact(const TunableAssignment& assignment);

    /// Drains every pending frame; telemetry goes to the collector. Returns the
    /// number of frames consumed.
    std::size_t pump();

    /// Pumps until `done` is ready, then drains what is left and rethrows its error.
    void wait(std::future<void>& done);

    bool connected() const noexcept { return spec_ != nullptr; }
    const ComponentSpec& spec() const;
    TelemetryCollector& collector() noexcept { return collector_; }
    std::uint64_t frame_errors() const noexcept { return frame_errors_; }
    std::uint64_t updates_sent() const noexcept { return updates_sent_; }

private:
    void dispatch(const channel::Received& received);
    void await_ack(std::uint64_t sequence, const std::string& what);

    std::shared_ptr<channel::Transport> transport_;
    AgentOptions options_;
    channel::Endpoint endpoint_;
    std::unique_ptr<ComponentSpec> spec_;
    TelemetryCollector collector_;
    std::uint64_t frame_errors_ = 0;
    std::uint64_t updates_sent_ = 0;
    std::optional<channel::AckPayload> last_ack_;
};

/// Starts one benchmark run on the component; the future resolves once every
/// sample of the run has been published.
using WorkloadTrigger = std::function<std::future<void>()>;

struct IterationResult {
    std::uint64_t iteration = 0;
    TunableAssignment assignment;
    ObjectiveResult objective;
    std::vector<NamedAggregate> metrics;
    CounterDelta counters;
    std::uint64_t wall_ns = 0;
};

/// Enacts `assignment`, runs the workload once and scores it.
IterationResult run_iteration(Agent& agent, const TunableAssignment& assignment, const Objective& objective,
                              const WorkloadTrigger& trigger, std::uint64_t iteration = 0);

struct Episode {
    Objective objective;
    OptimizerConfig optimizer;
    std::string benchmark;
    std::string workload_name;
    nlohmann::json workload = nlohmann::json::object();
    RunStore* store = nullptr;  ///< optional
    std::string episode_id;     ///< generated when empty
};

/// The record persisted for one iteration.
RunRecord make_run_record(const ComponentSpec& spec, const Episode& episode, const std::string& episode_id,
                          const IterationResult& result);

/// budget iterations of suggest, enact, run, score, persist and observe. An error
/// aborts the episode; iterations already completed stay in the store.
std::vector<IterationResult> run_episode(Agent& agent, const Episode& episode, const WorkloadTrigger& trigger);

}  // namespace autotune
