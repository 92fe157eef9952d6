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

#include <autotune/telemetry.hpp>

#include <atomic>
#include <cstdint>
#include <optional>
#include <vector>

namespace autotune::bench {

struct SpinlockConfig {
    std::uint32_t max_spin = 1024;          // [0, 2^20] polls before backing off
    std::uint32_t backoff_initial_us = 1;   // [1, 1024]
    std::uint32_t backoff_cap_us = 1024;    // [1, 65536], >= backoff_initial_us

    void validate() const;
};

/// Test-and-set lock that polls up to max_spin times on contention and then
/// sleeps with exponential backoff (doubling from initial to cap) between
/// further rounds of polling.
class BackoffSpinlock {
public:
    explicit BackoffSpinlock(const SpinlockConfig& config) : config_(config) {}

    struct AcquireInfo {
        bool contended = false;
        std::uint32_t backoffs = 0;
    };

    AcquireInfo lock();
    void unlock() noexcept { locked_.store(false, std::memory_order_release); }

private:
    bool try_lock() noexcept { return !locked_.exchange(true, std::memory_order_acquire); }

    SpinlockConfig config_;
    alignas(64) std::atomic<bool> locked_{false};
};

/// Several light workers plus exactly one heavy worker sharing one lock.
struct ContentionWorkload {
    int k = 1;                    // family index 1..7
    int n_light = 2;
    int light_ops = 16;           // arithmetic steps per light critical section
    int heavy_ops = 256;          // arithmetic steps per heavy critical section
    int duration_ms = 500;
    /// When set, each worker performs exactly this many acquisitions instead of running for duration_ms.
    std::optional<std::uint64_t> acquisitions_per_worker;

    void validate() const;
    bool operator==(const ContentionWorkload&) const = default;
};

inline constexpr int kHeavyOpsUnit = 256;
inline constexpr int kFamilySize = 7;

/// Default template: hardware parallelism - 1 light workers (at least 2), 16 light ops,
/// 256 heavy ops, 500 ms.
ContentionWorkload default_contention_workload();

/// The seven workloads k = 1..7 with heavy_ops = k * 256, all else copied from `base`.
std::vector<ContentionWorkload> workload_family(const ContentionWorkload& base);

struct SpinlockResult {
    double throughput_ops_s = 0.0;  // critical sections completed per second
    std::uint64_t acquisitions = 0;
    std::uint64_t contended_acquisitions = 0;
    std::uint64_t backoff_events = 0;
    double p99_acquire_ns = 0.0;
    std::vector<double> acquire_ns;   // per-acquisition wait samples (capped per worker)
    std::uint64_t protected_counter = 0;  // incremented non-atomically under the lock
    bool low_fidelity = false;        // fewer than two hardware execution units
    double elapsed_s = 0.0;
    CounterDelta counters;
};

SpinlockResult spinlock_run(const SpinlockConfig& config, const ContentionWorkload& workload, std::uint64_t seed);

unsigned hardware_units() noexcept;

}  // namespace autotune::bench
