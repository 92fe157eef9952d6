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

#include <autotune/telemetry.hpp>

#include <algorithm>
#include <thread>

#include <sys/resource.h>

namespace autotune {

double nearest_rank(std::span<const double> sorted, unsigned percent) {
    if (sorted.empty()) throw Error("percentile of an empty sample set");
    const std::size_t n = sorted.size();
    // ceil(percent * n / 100) in integer arithmetic.
    std::size_t rank = (std::size_t{percent} * n + 99) / 100;
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

MetricAggregate aggregate(std::span<const double> samples, std::uint32_t metric_id) {
    if (samples.empty()) throw Error("aggregate of an empty sample set");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    MetricAggregate a;
    a.metric_id = metric_id;
    a.count = sorted.size();
    for (double v : sorted) a.sum += v;
    a.min = sorted.front();
    a.max = sorted.back();
    a.p50 = nearest_rank(sorted, 50);
    a.p95 = nearest_rank(sorted, 95);
    a.p99 = nearest_rank(sorted, 99);
    return a;
}

std::uint64_t monotonic_ns() noexcept {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

CounterSnapshot PortableCounterProvider::sample() const {
    CounterSnapshot s;
    s.wall_ns = monotonic_ns();
    rusage ru{};
    if (::getrusage(RUSAGE_SELF, &ru) == 0) {
        auto to_ns = [](const timeval& tv) {
            return static_cast<std::uint64_t>(tv.tv_sec) * 1'000'000'000ull +
                   static_cast<std::uint64_t>(tv.tv_usec) * 1'000ull;
        };
        s.cpu_ns = to_ns(ru.ru_utime) + to_ns(ru.ru_stime);
        // Linux reports ru_maxrss in KiB.
        s.max_rss_bytes = static_cast<std::uint64_t>(ru.ru_maxrss) * 1024ull;
        s.ctx_switches = static_cast<std::uint64_t>(ru.ru_nvcsw) + static_cast<std::uint64_t>(ru.ru_nivcsw);
    }
    return s;
}

CounterSnapshot sample_counters() { return PortableCounterProvider{}.sample(); }

CounterDelta counter_delta(const CounterSnapshot& before, const CounterSnapshot& after) {
    auto diff = [](std::uint64_t b, std::uint64_t a) { return a >= b ? a - b : 0; };
    auto opt_diff = [&](const std::optional<std::uint64_t>& b, const std::optional<std::uint64_t>& a) {
        return (a && b) ? std::optional<std::uint64_t>(diff(*b, *a)) : std::nullopt;
    };
    CounterDelta d;
    d.wall_ns = diff(before.wall_ns, after.wall_ns);
    d.cpu_ns = opt_diff(before.cpu_ns, after.cpu_ns);
    d.max_rss_bytes = opt_diff(before.max_rss_bytes, after.max_rss_bytes);
    d.ctx_switches = opt_diff(before.ctx_switches, after.ctx_switches);
    return d;
}

TelemetrySink::TelemetrySink(const ComponentSpec& spec, channel::Endpoint& endpoint)
    : spec_(spec), endpoint_(endpoint), drops_(new std::atomic<std::uint64_t>[spec.metrics.size()]) {
    for (std::size_t i = 0; i < spec.metrics.size(); ++i) {
        metric_ids_.push_back(spec.metrics[i].metric_id);
        drops_[i].store(0, std::memory_order_relaxed);
    }
}

std::size_t TelemetrySink::slot_for(std::uint32_t metric_id) const {
    for (std::size_t i = 0; i < metric_ids_.size(); ++i)
        if (metric_ids_[i] == metric_id) return i;
    throw Error("metric_id " + std::to_string(metric_id) + " is not declared by component '" + spec_.name + "'");
}

void TelemetrySink::record_event(std::uint32_t metric_id, double value, std::uint64_t timestamp_ns) {
    const auto slot = slot_for(metric_id);
    const auto payload = channel::encode(channel::TelemetryPayload{spec_.component_id, metric_id, timestamp_ns, value});
    if (endpoint_.try_send(channel::MsgType::telemetry, payload))
        emitted_.fetch_add(1, std::memory_order_relaxed);
    else
        drops_[slot].fetch_add(1, std::memory_order_relaxed);
}

bool TelemetrySink::publish_event(std::uint32_t metric_id, double value, std::chrono::milliseconds timeout) {
    const auto slot = slot_for(metric_id);
    const auto payload =
        channel::encode(channel::TelemetryPayload{spec_.component_id, metric_id, monotonic_ns(), value});
    const auto frame = channel::encode_frame(channel::MsgType::telemetry, payload);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (!endpoint_.outgoing().push(frame)) {
        if (std::chrono::steady_clock::now() >= deadline) {
            drops_[slot].fetch_add(1, std::memory_order_relaxed);
            return false;
        }
        std::this_thread::yield();
    }
    emitted_.fetch_add(1, std::memory_order_relaxed);
    return true;
}

std::uint64_t TelemetrySink::dropped(std::uint32_t metric_id) const {
    return drops_[slot_for(metric_id)].load(std::memory_order_relaxed);
}

std::uint64_t TelemetrySink::dropped_total() const {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < metric_ids_.size(); ++i) total += drops_[i].load(std::memory_order_relaxed);
    return total;
}

void TelemetryCollector::ingest(const channel::TelemetryPayload& event) {
    samples_[event.metric_id].push_back(event.value);
    ++received_;
}

std::vector<MetricAggregate> TelemetryCollector::aggregates() const {
    std::vector<MetricAggregate> out;
    for (const auto& [id, values] : samples_)
        if (!values.empty()) out.push_back(aggregate(values, id));
    return out;
}

void TelemetryCollector::clear() {
    samples_.clear();
    received_ = 0;
}

nlohmann::json counters_to_json(const CounterDelta& c) {
    nlohmann::json j{{"wall_ns", c.wall_ns}};
    if (c.cpu_ns) j["cpu_ns"] = *c.cpu_ns;
    if (c.max_rss_bytes) j["max_rss_bytes"] = *c.max_rss_bytes;
    if (c.ctx_switches) j["ctx_switches"] = *c.ctx_switches;
    return j;
}

CounterDelta counters_from_json(const nlohmann::json& j) {
    CounterDelta c;
    c.wall_ns = j.value("wall_ns", std::uint64_t{0});
    if (j.contains("cpu_ns")) c.cpu_ns = j.at("cpu_ns").get<std::uint64_t>();
    if (j.contains("max_rss_bytes")) c.max_rss_bytes = j.at("max_rss_bytes").get<std::uint64_t>();
    if (j.contains("ctx_switches")) c.ctx_switches = j.at("ctx_switches").get<std::uint64_t>();
    return c;
}

nlohmann::json aggregate_to_json(const MetricAggregate& a, const std::string& name) {
    return {{"metric_id", a.metric_id}, {"name", name}, {"count", a.count}, {"sum", a.sum},  {"mean", a.mean()},
            {"min", a.min},             {"max", a.max},  {"p50", a.p50},     {"p95", a.p95}, {"p99", a.p99}};
}

MetricAggregate aggregate_from_json(const nlohmann::json& j) {
    MetricAggregate a;
    a.metric_id = j.at("metric_id").get<std::uint32_t>();
    a.count = j.at("count").get<std::uint64_t>();
    a.sum = j.at("sum").get<double>();
    a.min = j.at("min").get<double>();
    a.max = j.at("max").get<double>();
    a.p50 = j.at("p50").get<double>();
    a.p95 = j.at("p95").get<double>();
    a.p99 = j.at("p99").get<double>();
    return a;
}

}  // namespace autotune
