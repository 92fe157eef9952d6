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

#include <autotune/channel/messages.hpp>
#include <autotune/channel/transport.hpp>
#include <autotune/telemetry.hpp>
#include <autotune/tunables.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>

namespace autotune {

/// Live parameter values of an instrumented component. Each value is one 64-bit
/// atomic word, so readers never see a torn value; a multi-parameter update is
/// not atomic as a whole.
class TunableRegistry {
public:
    explicit TunableRegistry(const ComponentSpec& spec);

    /// Applies a CONFIG_UPDATE. Returns false (and leaves the value unchanged) when
    /// the parameter is unknown, the value type does not match the tunable's kind,
    /// or the value is out of bounds.
    bool apply(const channel::ConfigUpdatePayload& update);

    TunableValue get(const std::string& name) const;
    std::int64_t get_int(const std::string& name) const;
    double get_real(const std::string& name) const;
    bool get_bool(const std::string& name) const;
    std::string get_category(const std::string& name) const;
    bool has(const std::string& name) const { return spec_.find_tunable(name) != nullptr; }

    TunableAssignment snapshot() const;

private:
    std::size_t index_of(const std::string& name) const;

    const ComponentSpec& spec_;
    std::unique_ptr<std::atomic<std::uint64_t>[]> words_;
};

/// Wire encoding of one assignment value for `def`.
channel::ConfigUpdatePayload make_config_update(std::uint32_t component_id, const TunableDef& def,
                                                const TunableValue& value);

/// Component-side runtime: registers with the agent, applies configuration
/// updates and runs submitted jobs. A single service thread owns the component's
/// end of the transport, so it is the only producer on the component→agent ring.
class Component {
public:
    struct Options {
        /// After applying a parameter, emit its numeric value on metric
        /// "applied.<name>" when the spec declares such a metric.
        bool echo_applied = false;
        std::chrono::microseconds idle_sleep{50};
    };

    Component(ComponentSpec spec, std::shared_ptr<channel::Transport> transport, Options options);
    Component(ComponentSpec spec, std::shared_ptr<channel::Transport> transport)
        : Component(std::move(spec), std::move(transport), Options{}) {}
    ~Component();

    Component(const Component&) = delete;
    Component& operator=(const Component&) = delete;

    /// Starts the service thread, which sends REGISTER first.
    void start();
    void stop();

    /// Runs `job` on the service thread. Jobs run strictly one at a time and never
    /// overlap with configuration updates.
    std::future<void> submit(std::function<void(Component&)> job);

    const ComponentSpec& spec() const noexcept { return spec_; }
    TunableRegistry& tunables() noexcept { return registry_; }
    /// Only valid from inside a submitted job (service-thread context).
    TelemetrySink& sink() noexcept { return sink_; }
    bool registered() const noexcept { return registered_.load(std::memory_order_acquire); }
    std::uint64_t updates_applied() const noexcept { return updates_applied_.load(std::memory_order_relaxed); }
    std::uint64_t updates_rejected() const noexcept { return updates_rejected_.load(std::memory_order_relaxed); }
    /// First error raised on the service thread, if any (the thread exits on error).
    std::exception_ptr failure() const;

private:
    void service_loop();
    bool drain_incoming();
    void send_ack(std::uint64_t sequence, channel::MsgType type, channel::AckStatus status);

    ComponentSpec spec_;
    std::shared_ptr<channel::Transport> transport_;
    Options options_;
    channel::Endpoint endpoint_;
    TunableRegistry registry_;
    TelemetrySink sink_;
    std::vector<std::byte> register_doc_;

    std::thread thread_;
    std::atomic<bool> stop_{false};
    std::atomic<bool> registered_{false};
    std::atomic<std::uint64_t> updates_applied_{0};
    std::atomic<std::uint64_t> updates_rejected_{0};
    std::uint64_t register_sequence_ = 0;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::packaged_task<void()>> jobs_;
    std::exception_ptr failure_;
};

}  // namespace autotune
