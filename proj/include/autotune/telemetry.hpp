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
#include <autotune/tunables.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace autotune {

/// Order statistics over one metric's samples. Percentiles use nearest rank:
/// the p-th percentile is the sorted sample at 1-based index ceil(p/100 * n).
struct MetricAggregate {
    std::uint32_t metric_id = 0;
    std::uint64_t count = 0;
    double sum = 0.0;
    double min = 0.0;
    double max = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;

    double mean() const noexcept { return count ? sum / static_cast<double>(count) : 0.0; }
    bool operator==(const MetricAggregate&) const = default;
};

/// Nearest-rank percentile of an ascending range; `percent` in (0, 100].
double nearest_rank(std::span<const double> sorted, unsigned percent);

/// Throws Error on an empty sample set.
MetricAggregate aggregate(std::span<const double> samples, std::uint32_t metric_id = 0);

/// Monotonic clock reading in nanoseconds.
std::uint64_t monotonic_ns() noexcept;

/// Process resource counters. Fields a platform cannot report stay empty.
struct CounterSnapshot {
    std::uint64_t wall_ns = 0;
    std::optional<std::uint64_t> cpu_ns;
    std::optional<std::uint64_t> max_rss_bytes;
    std::optional<std::uint64_t> ctx_switches;
};

using CounterDelta = CounterSnapshot;

class CounterProvider {
public:
    virtual ~CounterProvider() = default;
    virtual CounterSnapshot sample() const = 0;
};

/// wall clock, user+system cpu time, peak RSS and context switches via getrusage.
class PortableCounterProvider final : public CounterProvider {
public:
    CounterSnapshot sample() const override;
};

CounterSnapshot sample_counters();

/// after - before, per field. A field is present only when both snapshots carry it;
/// decreases clamp to zero. For max_rss_bytes that is the growth of the peak
/// resident set during the interval.
CounterDelta counter_delta(const CounterSnapshot& before, const CounterSnapshot& after);

/// Component-side emitter of TELEMETRY frames.
///
/// A sink is bound to one emitting context: every call must come from the thread
/// that owns the component's outgoing ring (the component service thread).
/// Multi-threaded benchmarks aggregate samples per worker and emit after joining.
class TelemetrySink {
public:
    TelemetrySink(const ComponentSpec& spec, channel::Endpoint& endpoint);

    /// Hot-path hook: never blocks. When the ring is full the event is dropped
    /// and the metric's drop counter incremented. Throws Error for undeclared metrics.
    void record_event(std::uint32_t metric_id, double value, std::uint64_t timestamp_ns);
    void record_event(std::uint32_t metric_id, double value) { record_event(metric_id, value, monotonic_ns()); }

    /// Off the hot path: waits (yielding) for ring space up to `timeout`, then drops.
    /// Returns true when the event was published.
    bool publish_event(std::uint32_t metric_id, double value,
                       std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

    std::uint64_t emitted() const noexcept { return emitted_.load(std::memory_order_relaxed); }
    std::uint64_t dropped(std::uint32_t metric_id) const;
    std::uint64_t dropped_total() const;

private:
    std::size_t slot_for(std::uint32_t metric_id) const;

    const ComponentSpec& spec_;
    channel::Endpoint& endpoint_;
    std::vector<std::uint32_t> metric_ids_;
    std::unique_ptr<std::atomic<std::uint64_t>[]> drops_;
    std::atomic<std::uint64_t> emitted_{0};
};

/// Agent-side accumulation of received telemetry, keyed by metric id.
class TelemetryCollector {
public:
    void ingest(const channel::TelemetryPayload& event);
    std::uint64_t received() const noexcept { return received_; }
    const std::map<std::uint32_t, std::vector<double>>& samples() const noexcept { return samples_; }
    /// One aggregate per metric with at least one sample, ordered by metric id.
    std::vector<MetricAggregate> aggregates() const;
    void clear();

private:
    std::map<std::uint32_t, std::vector<double>> samples_;
    std::uint64_t received_ = 0;
};

nlohmann::json counters_to_json(const CounterDelta& c);
CounterDelta counters_from_json(const nlohmann::json& j);
nlohmann::json aggregate_to_json(const MetricAggregate& a, const std::string& name);
MetricAggregate aggregate_from_json(const nlohmann::json& j);

}  // namespace autotune
