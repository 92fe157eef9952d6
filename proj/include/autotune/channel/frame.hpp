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

#include <autotune/error.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace autotune::channel {

/// CRC-32 (IEEE, reflected polynomial 0xEDB88320, init and xorout 0xFFFFFFFF).
std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

enum class MsgType : std::uint8_t {
    register_component = 1,
    telemetry = 2,
    config_update = 3,
    ack = 4,
    heartbeat = 5,
};

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{0x4D, 0x4C, 0x4F, 0x53};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 12;
inline constexpr std::size_t kFrameOverhead = 16;  // header + trailing crc
inline constexpr std::size_t kSlotSize = 1024;
inline constexpr std::size_t kMaxPayload = kSlotSize - kFrameOverhead;

enum class FrameErrorCode { oversized, truncated, bad_magic, unsupported_version, unknown_type, crc_mismatch };

const char* to_string(FrameErrorCode code);

class FrameError : public Error {
public:
    FrameError(FrameErrorCode code, const std::string& detail);
    FrameErrorCode code() const noexcept { return code_; }

private:
    FrameErrorCode code_;
};

struct Frame {
    MsgType type = MsgType::heartbeat;
    std::vector<std::uint8_t> payload;

    bool operator==(const Frame&) const = default;
};

/// Layout (little-endian): magic[4] version u8 type u8 flags u16 payload_len u32 payload crc u32.
std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload);

/// Total encoded size the frame at the front of `bytes` claims, or 0 if the header is incomplete.
std::size_t frame_size(std::span<const std::uint8_t> bytes) noexcept;

/// Verifies magic, version, length and CRC, in that order. Trailing bytes past the frame are ignored.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Little-endian field helpers shared by the payload codecs.
namespace le {
void put_u16(std::uint8_t* p, std::uint16_t v) noexcept;
void put_u32(std::uint8_t* p, std::uint32_t v) noexcept;
void put_u64(std::uint8_t* p, std::uint64_t v) noexcept;
void put_f64(std::uint8_t* p, double v) noexcept;
std::uint16_t get_u16(const std::uint8_t* p) noexcept;
std::uint32_t get_u32(const std::uint8_t* p) noexcept;
std::uint64_t get_u64(const std::uint8_t* p) noexcept;
double get_f64(const std::uint8_t* p) noexcept;
}  // namespace le

}  // namespace autotune::channel
