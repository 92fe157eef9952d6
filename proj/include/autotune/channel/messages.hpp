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

#include <autotune/channel/frame.hpp>

#include <array>
#include <cstdint>

namespace autotune::channel {

inline constexpr std::size_t kTelemetryPayloadSize = 24;
inline constexpr std::size_t kConfigUpdatePayloadSize = 24;
inline constexpr std::size_t kAckPayloadSize = 12;

struct TelemetryPayload {
    std::uint32_t component_id = 0;
    std::uint32_t metric_id = 0;
    std::uint64_t timestamp_ns = 0;
    double value = 0.0;

    bool operator==(const TelemetryPayload&) const = default;
};

enum class ValueType : std::uint8_t { int64 = 0, real64 = 1, boolean = 2, category_index = 3 };

/// One parameter update. The 8 value bytes hold an int64 for int64/boolean/category_index
/// and an IEEE-754 double for real64.
struct ConfigUpdatePayload {
    std::uint32_t component_id = 0;
    std::uint32_t param_id = 0;
    ValueType value_type = ValueType::int64;
    std::uint64_t raw_value = 0;

    static ConfigUpdatePayload integer(std::uint32_t component, std::uint32_t param, std::int64_t v,
                                       ValueType type = ValueType::int64);
    static ConfigUpdatePayload real(std::uint32_t component, std::uint32_t param, double v);

    std::int64_t as_int() const noexcept { return static_cast<std::int64_t>(raw_value); }
    double as_real() const noexcept;

    bool operator==(const ConfigUpdatePayload&) const = default;
};

enum class AckStatus : std::uint8_t { ok = 0, rejected = 1 };

/// Acknowledges the frame published at ring position `sequence` on the opposite ring.
/// Layout: sequence u64, acked msg_type u8, status u8, 2 zero bytes.
struct AckPayload {
    std::uint64_t sequence = 0;
    MsgType acked_type = MsgType::heartbeat;
    AckStatus status = AckStatus::ok;

    bool operator==(const AckPayload&) const = default;
};

std::array<std::uint8_t, kTelemetryPayloadSize> encode(const TelemetryPayload& p) noexcept;
std::array<std::uint8_t, kConfigUpdatePayloadSize> encode(const ConfigUpdatePayload& p) noexcept;
std::array<std::uint8_t, kAckPayloadSize> encode(const AckPayload& p) noexcept;

// Decoders throw FrameError(truncated) on a wrong length and reject non-zero pad bytes.
TelemetryPayload decode_telemetry(std::span<const std::uint8_t> payload);
ConfigUpdatePayload decode_config_update(std::span<const std::uint8_t> payload);
AckPayload decode_ack(std::span<const std::uint8_t> payload);

}  // namespace autotune::channel
