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

#include <autotune/experiment.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace autotune {

enum class RpiSource { declared, learned };

struct RpiCaps {
    std::optional<double> cpu_ns_max;
    std::optional<double> max_rss_bytes_max;
    std::optional<double> latency_p99_ns_max;
    std::optional<double> throughput_ops_s_min;

    bool empty() const noexcept {
        return !cpu_ns_max && !max_rss_bytes_max && !latency_p99_ns_max && !throughput_ops_s_min;
    }
};

/// Acceptable resource and performance envelope of one component under one workload.
struct RpiEnvelope {
    std::string component;
    std::string workload;
    RpiCaps caps;
    RpiSource source = RpiSource::declared;
};

/// Throws SpecError unless at least one cap is present and every cap is positive and finite.
void validate_envelope(const RpiEnvelope& envelope);

/// The quantities a run offers for checking. Latency is the largest p99 over the
/// run's metrics measured in "ns"; throughput is the mean of its first "ops/s" metric.
struct RpiMeasurement {
    std::optional<double> cpu_ns;
    std::optional<double> max_rss_bytes;
    std::optional<double> latency_p99_ns;
    std::optional<double> throughput_ops_s;
};

RpiMeasurement measure(const RunRecord& run);

struct RpiViolation {
    std::string cap;
    double limit = 0.0;
    std::optional<double> measured;  ///< empty: capped but unmeasured
};

struct RpiVerdict {
    bool pass = true;
    std::vector<RpiViolation> violations;
};

/// Inclusive bounds: measured <= max and measured >= min pass. Throws Error when
/// the run's component or workload differs from the envelope's.
RpiVerdict check_rpi(const RpiEnvelope& envelope, const RunRecord& run);

inline constexpr double kDefaultRpiMargin = 0.10;

/// Caps from the observed extremes: max * (1 + margin) for maxima, min * (1 - margin)
/// for throughput. Only quantities measured (and non-zero) in every run get a cap.
/// Throws Error on empty input, mixed component/workload, negative margin or when
/// no quantity can be capped.
RpiEnvelope learn_envelope(const std::vector<RunRecord>& runs, double margin = kDefaultRpiMargin);

struct GateFailure {
    std::string run_id;
    std::string cap;
};

struct GateResult {
    int exit_code = 0;  ///< 0 pass, 2 violation
    std::size_t checks = 0;
    std::size_t warnings = 0;  ///< runs without a matching envelope
    std::vector<GateFailure> failures;
    std::string report;  ///< one line per (run, envelope), then a JSON summary line
};

GateResult rpi_gate(const std::vector<RpiEnvelope>& envelopes, const std::vector<RunRecord>& runs);

const char* to_string(RpiSource source);
nlohmann::json envelope_to_json(const RpiEnvelope& e);
RpiEnvelope envelope_from_json(const nlohmann::json& j);

/// An RPI file holds one envelope object or an array of them. Throws StoreError
/// when unreadable and SpecError when invalid.
std::vector<RpiEnvelope> load_envelopes(const std::filesystem::path& path);
void save_envelopes(const std::filesystem::path& path, const std::vector<RpiEnvelope>& envelopes);

}  // namespace autotune
