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

#include <autotune/agent.hpp>
#include <autotune/component.hpp>

#include <cmath>
#include <thread>

namespace autotune {

using channel::MsgType;
using Clock = std::chrono::steady_clock;

Agent::Agent(std::shared_ptr<channel::Transport> transport, AgentOptions options)
    : transport_(std::move(transport)), options_(options), endpoint_(transport_, channel::Endpoint::Side::agent) {}

const ComponentSpec& Agent::spec() const {
    if (!spec_) throw Error("agent has not completed a handshake");
    return *spec_;
}

void Agent::dispatch(const channel::Received& received) {
    const auto& frame = received.frame;
    switch (frame.type) {
        case MsgType::telemetry: collector_.ingest(channel::decode_telemetry(frame.payload)); break;
        case MsgType::ack: last_ack_ = channel::decode_ack(frame.payload); break;
        default: break;
    }
}

std::size_t Agent::pump() {
    std::size_t n = 0;
    for (;;) {
        std::optional<channel::Received> received;
        try {
            received = endpoint_.try_receive();
        } catch (const channel::FrameError&) {
            ++frame_errors_;
            ++n;
            continue;
        }
        if (!received) return n;
        dispatch(*received);
        ++n;
    }
}

const ComponentSpec& Agent::handshake() {
    const auto deadline = Clock::now() + options_.handshake_timeout;
    for (;;) {
        std::optional<channel::Received> received;
        try {
            received = endpoint_.try_receive();
        } catch (const channel::FrameError& e) {
            throw HandshakeError(std::string("corrupt frame during handshake: ") + e.what());
        }
        if (!received) {
            if (Clock::now() >= deadline) throw TimeoutError("no REGISTER frame within the handshake timeout");
            std::this_thread::sleep_for(std::chrono::microseconds(100));
            continue;
        }
        if (received->frame.type != MsgType::register_component) {
            dispatch(*received);
            continue;
        }
        const auto& payload = received->frame.payload;
        ComponentSpec spec;
        try {
            spec = spec_from_json(nlohmann::json::parse(payload.begin(), payload.end()));
        } catch (const std::exception& e) {
            throw HandshakeError(std::string("malformed REGISTER spec: ") + e.what());
        }
        if (const auto problems = check_spec(spec); !problems.empty())
            throw HandshakeError("invalid REGISTER spec: " + problems.front());

        const auto ack = channel::encode(channel::AckPayload{received->sequence, MsgType::register_component,
                                                             channel::AckStatus::ok});
        if (!endpoint_.send_with_retry(MsgType::ack, ack, options_.send_retries, options_.send_backoff))
            throw TimeoutError("component ring full while acknowledging REGISTER");
        spec_ = std::make_unique<ComponentSpec>(std::move(spec));
        return *spec_;
    }
}

void Agent::await_ack(std::uint64_t sequence, const std::string& what) {
    const auto deadline = Clock::now() + options_.ack_timeout;
    for (;;) {
        last_ack_.reset();
        for (;;) {
            std::optional<channel::Received> received;
            try {
                received = endpoint_.try_receive();
            } catch (const channel::FrameError&) {
                ++frame_errors_;
                continue;
            }
            if (!received) break;
            dispatch(*received);
            if (last_ack_ && last_ack_->acked_type == MsgType::config_update && last_ack_->sequence == sequence) {
                if (last_ack_->status != channel::AckStatus::ok)
                    throw Error("component rejected the update of '" + what + "'");
                return;
            }
        }
        if (Clock::now() >= deadline) throw TimeoutError("no ACK for the update of '" + what + "'");
        std::this_thread::sleep_for(std::chrono::microseconds(50));
    }
}

void Agent::enact(const TunableAssignment& assignment) {
    const auto& s = spec();
    if (auto violations = validate_assignment(s, assignment); !violations.empty())
        throw AssignmentError(std::move(violations));
    for (const auto& def : s.tunables) {
        const auto payload = channel::encode(make_config_update(s.component_id, def, assignment.values.at(def.name)));
        const auto seq = endpoint_.send_with_retry(MsgType::config_update, payload, options_.send_retries,
                                                   options_.send_backoff);
        if (!seq) throw TimeoutError("component ring stayed full while enacting '" + def.name + "'");
        ++updates_sent_;
        await_ack(*seq, def.name);
    }
}

void Agent::wait(std::future<void>& done) {
    const auto deadline = Clock::now() + options_.run_timeout;
    while (done.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
        if (pump() == 0) {
            if (Clock::now() >= deadline) throw TimeoutError("benchmark run exceeded the run timeout");
            std::this_thread::sleep_for(std::chrono::microseconds(50));
        }
    }
    pump();
    done.get();
}

IterationResult run_iteration(Agent& agent, const TunableAssignment& assignment, const Objective& objective,
                              const WorkloadTrigger& trigger, std::uint64_t iteration) {
    const auto& spec = agent.spec();
    const auto* metric = spec.find_metric(objective.metric);
    if (!metric) throw SpecError("objective metric '" + objective.metric + "' is not declared by " + spec.name);

    agent.enact(assignment);
    agent.pump();
    agent.collector().clear();

    const auto before = sample_counters();
    auto done = trigger();
    agent.wait(done);
    const auto after = sample_counters();

    IterationResult r;
    r.iteration = iteration;
    r.assignment = assignment;
    r.counters = counter_delta(before, after);
    r.wall_ns = r.counters.wall_ns;

    const MetricAggregate* objective_agg = nullptr;
    for (const auto& agg : agent.collector().aggregates()) {
        const auto* def = spec.find_metric(agg.metric_id);
        r.metrics.push_back({def ? def->name : "metric." + std::to_string(agg.metric_id), def ? def->unit : "", agg});
    }
    for (const auto& m : r.metrics)
        if (m.aggregate.metric_id == metric->metric_id) objective_agg = &m.aggregate;
    if (!objective_agg) throw Error("run produced no samples for objective metric '" + objective.metric + "'");

    r.objective.metric = objective.metric;
    r.objective.direction = objective.direction;
    r.objective.aggregate = objective.field;
    r.objective.value = objective_value(objective.field, *objective_agg, r.wall_ns);
    r.objective.canonical = canonical_value(objective.direction, r.objective.value);
    if (!std::isfinite(r.objective.value)) throw Error("objective value is not finite");
    return r;
}

RunRecord make_run_record(const ComponentSpec& spec, const Episode& episode, const std::string& episode_id,
                          const IterationResult& result) {
    RunRecord rec;
    rec.run_id = new_run_id();
    rec.episode_id = episode_id;
    rec.iteration = result.iteration;
    rec.timestamp_utc = utc_timestamp();
    rec.component = spec.name;
    rec.benchmark = episode.benchmark;
    rec.workload_name = episode.workload_name.empty() ? episode.benchmark : episode.workload_name;
    rec.workload = episode.workload;
    rec.assignment = assignment_to_json(result.assignment);
    rec.objective = result.objective;
    rec.metrics = result.metrics;
    rec.counters = result.counters;
    rec.optimizer_kind = to_string(episode.optimizer.kind);
    rec.seed = episode.optimizer.seed;
    rec.strategy = to_string(episode.optimizer.strategy);
    return rec;
}

std::vector<IterationResult> run_episode(Agent& agent, const Episode& episode, const WorkloadTrigger& trigger) {
    const auto& spec = agent.spec();
    if (!spec.find_metric(episode.objective.metric))
        throw SpecError("objective metric '" + episode.objective.metric + "' is not declared by " + spec.name);
    const auto episode_id = episode.episode_id.empty() ? new_episode_id() : episode.episode_id;

    Optimizer optimizer(episode.optimizer, spec.dimension(), encode_unit(spec, default_assignment(spec)));
    std::vector<IterationResult> results;
    results.reserve(episode.optimizer.budget);
    for (std::size_t i = 0; i < episode.optimizer.budget; ++i) {
        const auto assignment = decode_unit(spec, optimizer.suggest());
        auto result = run_iteration(agent, assignment, episode.objective, trigger, i);
        if (episode.store) episode.store->append(make_run_record(spec, episode, episode_id, result));
        optimizer.observe(encode_unit(spec, assignment), result.objective.canonical);
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace autotune
