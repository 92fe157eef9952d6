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

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace autotune::bench {

enum class HashFn { multiply_shift, fnv1a };

const char* to_string(HashFn fn);
HashFn hash_fn_from_string(const std::string& s);

struct HashTableConfig {
    int bucket_count_log2 = 4;     // [0, 24]
    double max_load_factor = 1.0;  // [0.25, 8.0]
    int growth_log2 = 1;           // [1, 3]
    HashFn hash_fn = HashFn::multiply_shift;
    bool resizing_enabled = true;

    /// Throws SpecError when a field is outside its range.
    void validate() const;
};

/// Bytes charged per node in the analytic footprint (key, value, next link, allocator overhead).
inline constexpr std::uint64_t kNodeBytes = 48;
inline constexpr std::uint64_t kBucketBytes = 8;

/// Separately chained hash table with collision accounting. A collision is an
/// insert of a new key into a bucket that already holds at least one node.
class ChainedHashTable {
public:
    explicit ChainedHashTable(const HashTableConfig& config);

    struct OpResult {
        bool found = false;        // key was present before the op
        std::uint32_t probes = 0;  // chain nodes visited
    };

    OpResult insert(std::uint64_t key, std::uint64_t value);
    OpResult find(std::uint64_t key, std::uint64_t* value = nullptr) const;

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t bucket_count() const noexcept { return heads_.size(); }
    std::uint64_t collisions() const noexcept { return collisions_; }
    std::uint64_t inserts() const noexcept { return inserts_; }
    std::uint64_t resizes() const noexcept { return resizes_; }
    std::uint64_t resident_bytes() const noexcept {
        return heads_.size() * kBucketBytes + nodes_.size() * kNodeBytes;
    }

private:
    static constexpr std::uint32_t kEmpty = std::numeric_limits<std::uint32_t>::max();

    struct Node {
        std::uint64_t key;
        std::uint64_t value;
        std::uint32_t next;
    };

    std::size_t bucket_of(std::uint64_t key) const noexcept;
    void rehash(int new_log2);

    HashTableConfig config_;
    int log2_;
    std::vector<std::uint32_t> heads_;
    std::vector<Node> nodes_;
    std::uint64_t collisions_ = 0;
    std::uint64_t inserts_ = 0;
    std::uint64_t resizes_ = 0;
};

enum class KeyDist { uniform, zipf };

struct HashTableWorkload {
    std::size_t n_keys = 10'000;
    KeyDist key_dist = KeyDist::uniform;
    double zipf_s = 1.1;
    double read_fraction = 0.9;
    std::size_t n_ops = 0;  // mixed operations after loading; 0 means n_keys
};

struct HashTableMetrics {
    std::uint64_t inserts = 0;
    std::uint64_t collisions = 0;
    std::vector<double> probe_len;      // one sample per operation, load phase included
    std::vector<double> op_latency_ns;  // mixed phase only
    std::uint64_t resident_bytes = 0;
    std::size_t final_bucket_count = 0;
    CounterDelta counters;
};

/// Loads n_keys distinct keys in a seeded random order, then performs n_ops
/// reads/updates whose keys follow `key_dist`. Key choice and probe counts are a
/// function of (config, workload, seed); latencies are measured.
HashTableMetrics hashtable_run(const HashTableConfig& config, const HashTableWorkload& workload, std::uint64_t seed);

/// Expected collisions for n distinct uniformly hashed keys in b buckets without
/// resizing: n - b (1 - (1 - 1/b)^n).
double expected_collisions(std::size_t n, std::size_t buckets);

}  // namespace autotune::bench
