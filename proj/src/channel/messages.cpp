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

#include <autotune/channel/messages.hpp>

#include <algorithm>
#include <bit>

namespace autotune::channel {

namespace {

void require_length(std::span<const std::uint8_t> payload, std::size_t expected, const char* what) {
    if (payload.size() != expected)
        throw FrameError(FrameErrorCode::truncated, std::string(what) + " payload is " +
                                                        std::to_string(payload.size()) + " bytes, expected " +
                                                        std::to_string(expected));
}

}  // namespace

ConfigUpdatePayload ConfigUpdatePayload::integer(std::uint32_t component, std::uint32_t param, std::int64_t v,
                                                 ValueType type) {
    return {component, param, type, static_cast<std::uint64_t>(v)};
}

ConfigUpdatePayload ConfigUpdatePayload::real(std::uint32_t component, std::uint32_t param, double v) {
    return {component, param, ValueType::real64, std::bit_cast<std::uint64_t>(v)};
}

double ConfigUpdatePayload::as_real() const noexcept { return std::bit_cast<double>(raw_value); }

std::array<std::uint8_t, kTelemetryPayloadSize> encode(const TelemetryPayload& p) noexcept {
    std::array<std::uint8_t, kTelemetryPayloadSize> out{};
    le::put_u32(out.data(), p.component_id);
    le::put_u32(out.data() + 4, p.metric_id);
    le::put_u64(out.data() + 8, p.timestamp_ns);
    le::put_f64(out.data() + 16, p.value);
    return out;
}

std::array<std::uint8_t, kConfigUpdatePayloadSize> encode(const ConfigUpdatePayload& p) noexcept {
    std::array<std::uint8_t, kConfigUpdatePayloadSize> out{};
    le::put_u32(out.data(), p.component_id);
    le::put_u32(out.data() + 4, p.param_id);
    out[8] = static_cast<std::uint8_t>(p.value_type);
    le::put_u64(out.data() + 16, p.raw_value);
    return out;
}

std::array<std::uint8_t, kAckPayloadSize> encode(const AckPayload& p) noexcept {
    std::array<std::uint8_t, kAckPayloadSize> out{};
    le::put_u64(out.data(), p.sequence);
    out[8] = static_cast<std::uint8_t>(p.acked_type);
    out[9] = static_cast<std::uint8_t>(p.status);
    return out;
}

TelemetryPayload decode_telemetry(std::span<const std::uint8_t> payload) {
    require_length(payload, kTelemetryPayloadSize, "TELEMETRY");
    return {le::get_u32(payload.data()), le::get_u32(payload.data() + 4), le::get_u64(payload.data() + 8),
            le::get_f64(payload.data() + 16)};
}

ConfigUpdatePayload decode_config_update(std::span<const std::uint8_t> payload) {
    require_length(payload, kConfigUpdatePayloadSize, "CONFIG_UPDATE");
    if (payload[8] > 3) throw Error("CONFIG_UPDATE: unknown value_type " + std::to_string(payload[8]));
    if (std::any_of(payload.begin() + 9, payload.begin() + 16, [](auto b) { return b != 0; }))
        throw Error("CONFIG_UPDATE: non-zero pad bytes");
    return {le::get_u32(payload.data()), le::get_u32(payload.data() + 4), static_cast<ValueType>(payload[8]),
            le::get_u64(payload.data() + 16)};
}

AckPayload decode_ack(std::span<const std::uint8_t> payload) {
    require_length(payload, kAckPayloadSize, "ACK");
    if (payload[10] != 0 || payload[11] != 0) throw Error("ACK: non-zero pad bytes");
    if (payload[8] < 1 || payload[8] > 5 || payload[9] > 1) throw Error("ACK: bad type or status byte");
    return {le::get_u64(payload.data()), static_cast<MsgType>(payload[8]), static_cast<AckStatus>(payload[9])};
}

}  // namespace autotune::channel
