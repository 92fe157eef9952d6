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

#include <autotune/benchmarks/spinlock.hpp>

#include <algorithm>
#include <chrono>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace autotune::bench {

namespace {

constexpr std::size_t kMaxLatencySamplesPerWorker = 1 << 18;
constexpr std::uint64_t kLcgMul = 6364136223846793005ull;
constexpr std::uint64_t kLcgAdd = 1442695040888963407ull;

// Receives the arithmetic results so the simulated work is not elided.
std::atomic<std::uint64_t> g_work_sink{0};

inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    _mm_pause();
#endif
}

struct WorkerStats {
    std::uint64_t acquisitions = 0;
    std::uint64_t contended = 0;
    std::uint64_t backoffs = 0;
    std::vector<double> acquire_ns;
};

}  // namespace

void SpinlockConfig::validate() const {
    if (max_spin > (1u << 20)) throw SpecError("max_spin outside [0, 2^20]");
    if (backoff_initial_us < 1 || backoff_initial_us > 1024) throw SpecError("backoff_initial_us outside [1, 1024]");
    if (backoff_cap_us < 1 || backoff_cap_us > 65536) throw SpecError("backoff_cap_us outside [1, 65536]");
    if (backoff_initial_us > backoff_cap_us) throw SpecError("backoff_initial_us exceeds backoff_cap_us");
}

BackoffSpinlock::AcquireInfo BackoffSpinlock::lock() {
    AcquireInfo info;
    if (try_lock()) return info;
    info.contended = true;
    std::uint32_t backoff = config_.backoff_initial_us;
    for (;;) {
        for (std::uint32_t s = 0; s < config_.max_spin; ++s) {
            cpu_relax();
            if (!locked_.load(std::memory_order_relaxed) && try_lock()) return info;
        }
        std::this_thread::sleep_for(std::chrono::microseconds(backoff));
        ++info.backoffs;
        backoff = std::min(backoff * 2, config_.backoff_cap_us);
        if (try_lock()) return info;
    }
}

void ContentionWorkload::validate() const {
    if (k < 1 || k > kFamilySize) throw SpecError("contention workload family index outside [1, 7]");
    if (n_light < 0) throw SpecError("n_light must be non-negative");
    if (light_ops < 0 || heavy_ops < 0) throw SpecError("critical-section op counts must be non-negative");
    if (!acquisitions_per_worker && duration_ms <= 0) throw SpecError("duration_ms must be positive");
}

unsigned hardware_units() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

ContentionWorkload default_contention_workload() {
    ContentionWorkload w;
    w.n_light = std::max(2, static_cast<int>(hardware_units()) - 1);
    w.light_ops = 16;
    w.heavy_ops = kHeavyOpsUnit;
    w.duration_ms = 500;
    return w;
}

std::vector<ContentionWorkload> workload_family(const ContentionWorkload& base) {
    std::vector<ContentionWorkload> family;
    for (int k = 1; k <= kFamilySize; ++k) {
        auto w = base;
        w.k = k;
        w.heavy_ops = k * kHeavyOpsUnit;
        family.push_back(w);
    }
    return family;
}

SpinlockResult spinlock_run(const SpinlockConfig& config, const ContentionWorkload& workload, std::uint64_t seed) {
    config.validate();
    workload.validate();

    BackoffSpinlock lock(config);
    std::uint64_t shared_state = seed;
    std::uint64_t protected_counter = 0;
    std::atomic<bool> go{false};
    std::atomic<bool> stop{false};
    std::atomic<int> ready{0};

    const int n_workers = workload.n_light + 1;
    std::vector<WorkerStats> stats(static_cast<std::size_t>(n_workers));

    auto worker = [&](int index) {
        const bool heavy = index == n_workers - 1;
        const int cs_ops = heavy ? workload.heavy_ops : workload.light_ops;
        auto& st = stats[static_cast<std::size_t>(index)];
        st.acquire_ns.reserve(4096);
        std::uint64_t local = seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(index + 1));
        ready.fetch_add(1);
        while (!go.load(std::memory_order_acquire)) std::this_thread::yield();
        for (;;) {
            if (workload.acquisitions_per_worker) {
                if (st.acquisitions >= *workload.acquisitions_per_worker) break;
            } else if (stop.load(std::memory_order_relaxed)) {
                break;
            }
            const auto t0 = std::chrono::steady_clock::now();
            const auto info = lock.lock();
            const auto t1 = std::chrono::steady_clock::now();
            for (int i = 0; i < cs_ops; ++i) shared_state = shared_state * kLcgMul + kLcgAdd;
            ++protected_counter;
            lock.unlock();

            ++st.acquisitions;
            if (info.contended) ++st.contended;
            st.backoffs += info.backoffs;
            if (st.acquire_ns.size() < kMaxLatencySamplesPerWorker)
                st.acquire_ns.push_back(
                    static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
            for (int i = 0; i < workload.light_ops; ++i) local = local * kLcgMul + kLcgAdd;
        }
        g_work_sink.fetch_xor(local, std::memory_order_relaxed);
    };

    const auto before = sample_counters();
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker, i);
    while (ready.load() < n_workers) std::this_thread::yield();

    const auto start = std::chrono::steady_clock::now();
    go.store(true, std::memory_order_release);
    if (!workload.acquisitions_per_worker) {
        std::this_thread::sleep_for(std::chrono::milliseconds(workload.duration_ms));
        stop.store(true, std::memory_order_relaxed);
    }
    for (auto& t : threads) t.join();
    const auto end = std::chrono::steady_clock::now();

    SpinlockResult r;
    r.counters = counter_delta(before, sample_counters());
    r.elapsed_s = std::chrono::duration<double>(end - start).count();
    for (auto& st : stats) {
        r.acquisitions += st.acquisitions;
        r.contended_acquisitions += st.contended;
        r.backoff_events += st.backoffs;
        r.acquire_ns.insert(r.acquire_ns.end(), st.acquire_ns.begin(), st.acquire_ns.end());
    }
    r.protected_counter = protected_counter;
    r.throughput_ops_s = r.elapsed_s > 0 ? static_cast<double>(r.acquisitions) / r.elapsed_s : 0.0;
    if (!r.acquire_ns.empty()) r.p99_acquire_ns = aggregate(r.acquire_ns).p99;
    r.low_fidelity = hardware_units() < 2;
    g_work_sink.fetch_xor(shared_state, std::memory_order_relaxed);
    return r;
}

}  // namespace autotune::bench
