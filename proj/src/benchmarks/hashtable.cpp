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

#include <autotune/benchmarks/hashtable.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

namespace autotune::bench {

namespace {

constexpr int kMaxBucketLog2 = 30;

// Keeps lookup results observable so the read path is not optimized away.
std::atomic<std::uint64_t> g_lookup_sink{0};

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::uint64_t key) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (int i = 0; i < 8; ++i) {
        h ^= (key >> (8 * i)) & 0xFFu;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Inverse-CDF sampler over ranks [0, n) with P(r) proportional to 1/(r+1)^s.
class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double s) : cdf_(n) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
            cdf_[r] = acc;
        }
        for (auto& c : cdf_) c /= acc;
    }

    std::size_t operator()(std::mt19937_64& rng) const {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

private:
    std::vector<double> cdf_;
};

}  // namespace

const char* to_string(HashFn fn) { return fn == HashFn::fnv1a ? "fnv1a" : "multiply_shift"; }

HashFn hash_fn_from_string(const std::string& s) {
    if (s == "multiply_shift") return HashFn::multiply_shift;
    if (s == "fnv1a") return HashFn::fnv1a;
    throw SpecError("unknown hash_fn '" + s + "'");
}

void HashTableConfig::validate() const {
    if (bucket_count_log2 < 0 || bucket_count_log2 > 24) throw SpecError("bucket_count_log2 outside [0, 24]");
    if (!(max_load_factor >= 0.25 && max_load_factor <= 8.0)) throw SpecError("max_load_factor outside [0.25, 8]");
    if (growth_log2 < 1 || growth_log2 > 3) throw SpecError("growth_log2 outside [1, 3]");
}

ChainedHashTable::ChainedHashTable(const HashTableConfig& config)
    : config_(config), log2_(config.bucket_count_log2), heads_(std::size_t{1} << config.bucket_count_log2, kEmpty) {
    config_.validate();
}

std::size_t ChainedHashTable::bucket_of(std::uint64_t key) const noexcept {
    if (config_.hash_fn == HashFn::fnv1a) return static_cast<std::size_t>(fnv1a(key) & (heads_.size() - 1));
    if (log2_ == 0) return 0;
    return static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ull) >> (64 - log2_));
}

ChainedHashTable::OpResult ChainedHashTable::find(std::uint64_t key, std::uint64_t* value) const {
    OpResult r;
    for (auto i = heads_[bucket_of(key)]; i != kEmpty; i = nodes_[i].next) {
        ++r.probes;
        if (nodes_[i].key == key) {
            r.found = true;
            if (value) *value = nodes_[i].value;
            return r;
        }
    }
    return r;
}

ChainedHashTable::OpResult ChainedHashTable::insert(std::uint64_t key, std::uint64_t value) {
    OpResult r;
    const auto b = bucket_of(key);
    std::uint32_t last = kEmpty;
    for (auto i = heads_[b]; i != kEmpty; i = nodes_[i].next) {
        ++r.probes;
        if (nodes_[i].key == key) {
            nodes_[i].value = value;
            r.found = true;
            return r;
        }
        last = i;
    }
    const auto idx = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({key, value, kEmpty});
    ++inserts_;
    if (last == kEmpty) {
        heads_[b] = idx;
    } else {
        nodes_[last].next = idx;
        ++collisions_;
    }
    if (config_.resizing_enabled &&
        static_cast<double>(nodes_.size()) > config_.max_load_factor * static_cast<double>(heads_.size()) &&
        log2_ < kMaxBucketLog2) {
        rehash(std::min(log2_ + config_.growth_log2, kMaxBucketLog2));
    }
    return r;
}

void ChainedHashTable::rehash(int new_log2) {
    log2_ = new_log2;
    heads_.assign(std::size_t{1} << new_log2, kEmpty);
    std::vector<std::uint32_t> tails(heads_.size(), kEmpty);
    // Relink in node order so chains keep insertion order.
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        nodes_[i].next = kEmpty;
        const auto b = bucket_of(nodes_[i].key);
        if (tails[b] == kEmpty)
            heads_[b] = i;
        else
            nodes_[tails[b]].next = i;
        tails[b] = i;
    }
    ++resizes_;
}

HashTableMetrics hashtable_run(const HashTableConfig& config, const HashTableWorkload& workload, std::uint64_t seed) {
    config.validate();
    if (workload.n_keys == 0) throw SpecError("hashtable workload needs n_keys > 0");
    if (!(workload.read_fraction >= 0.0 && workload.read_fraction <= 1.0))
        throw SpecError("read_fraction outside [0, 1]");

    std::mt19937_64 rng(seed);
    const std::uint64_t salt = rng();
    auto key_of = [salt](std::size_t rank) { return mix64(static_cast<std::uint64_t>(rank) ^ salt); };

    std::vector<std::size_t> order(workload.n_keys);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    const auto before = sample_counters();
    HashTableMetrics m;
    ChainedHashTable table(config);
    const std::size_t n_ops = workload.n_ops ? workload.n_ops : workload.n_keys;
    m.probe_len.reserve(workload.n_keys + n_ops);
    m.op_latency_ns.reserve(n_ops);

    for (auto rank : order) m.probe_len.push_back(table.insert(key_of(rank), rank).probes);

    std::optional<ZipfSampler> zipf;
    if (workload.key_dist == KeyDist::zipf) zipf.emplace(workload.n_keys, workload.zipf_s);
    std::uniform_int_distribution<std::size_t> uniform_rank(0, workload.n_keys - 1);
    std::uint64_t sink = 0;
    for (std::size_t op = 0; op < n_ops; ++op) {
        const std::size_t rank = zipf ? (*zipf)(rng) : uniform_rank(rng);
        const bool read = static_cast<double>(rng() >> 11) * 0x1.0p-53 < workload.read_fraction;
        const auto key = key_of(rank);
        const auto t0 = std::chrono::steady_clock::now();
        ChainedHashTable::OpResult r;
        if (read) {
            std::uint64_t v = 0;
            r = table.find(key, &v);
            sink += v;
        } else {
            r = table.insert(key, op);
        }
        const auto t1 = std::chrono::steady_clock::now();
        m.probe_len.push_back(r.probes);
        m.op_latency_ns.push_back(
            static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
    }
    m.counters = counter_delta(before, sample_counters());
    m.inserts = table.inserts();
    m.collisions = table.collisions();
    m.resident_bytes = table.resident_bytes();
    m.final_bucket_count = table.bucket_count();
    g_lookup_sink.store(sink, std::memory_order_relaxed);
    return m;
}

double expected_collisions(std::size_t n, std::size_t buckets) {
    const double b = static_cast<double>(buckets);
    return static_cast<double>(n) - b * (1.0 - std::pow(1.0 - 1.0 / b, static_cast<double>(n)));
}

}  // namespace autotune::bench
