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

#include <autotune/channel/frame.hpp>

#include <algorithm>
#include <bit>
#include <cstring>

namespace autotune::channel {

namespace le {

void put_u16(std::uint8_t* p, std::uint16_t v) noexcept {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* p, std::uint32_t v) noexcept {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_u64(std::uint8_t* p, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_f64(std::uint8_t* p, double v) noexcept { put_u64(p, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t get_u16(const std::uint8_t* p) noexcept {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) noexcept {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) noexcept {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

double get_f64(const std::uint8_t* p) noexcept { return std::bit_cast<double>(get_u64(p)); }

}  // namespace le

const char* to_string(FrameErrorCode code) {
    switch (code) {
        case FrameErrorCode::oversized: return "oversized payload";
        case FrameErrorCode::truncated: return "truncated frame";
        case FrameErrorCode::bad_magic: return "bad magic";
        case FrameErrorCode::unsupported_version: return "unsupported version";
        case FrameErrorCode::unknown_type: return "unknown message type";
        case FrameErrorCode::crc_mismatch: return "CRC mismatch";
    }
    return "?";
}

FrameError::FrameError(FrameErrorCode code, const std::string& detail)
    : Error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)), code_(code) {}

std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxPayload)
        throw FrameError(FrameErrorCode::oversized,
                         std::to_string(payload.size()) + " bytes exceeds " + std::to_string(kMaxPayload));
    std::vector<std::uint8_t> out(kFrameOverhead + payload.size());
    std::copy(kFrameMagic.begin(), kFrameMagic.end(), out.begin());
    out[4] = kFrameVersion;
    out[5] = static_cast<std::uint8_t>(type);
    le::put_u16(out.data() + 6, 0);
    le::put_u32(out.data() + 8, static_cast<std::uint32_t>(payload.size()));
    std::copy(payload.begin(), payload.end(), out.begin() + kFrameHeaderSize);
    const auto body = std::span<const std::uint8_t>(out).first(kFrameHeaderSize + payload.size());
    le::put_u32(out.data() + body.size(), crc32(body));
    return out;
}

std::size_t frame_size(std::span<const std::uint8_t> bytes) noexcept {
    if (bytes.size() < kFrameHeaderSize) return 0;
    return kFrameOverhead + le::get_u32(bytes.data() + 8);
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameOverhead)
        throw FrameError(FrameErrorCode::truncated, std::to_string(bytes.size()) + " bytes");
    if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin()))
        throw FrameError(FrameErrorCode::bad_magic, "");
    if (bytes[4] != kFrameVersion)
        throw FrameError(FrameErrorCode::unsupported_version, "version " + std::to_string(bytes[4]));
    const std::size_t payload_len = le::get_u32(bytes.data() + 8);
    if (payload_len > kMaxPayload)
        throw FrameError(FrameErrorCode::oversized, "payload_len " + std::to_string(payload_len));
    if (bytes.size() < kFrameOverhead + payload_len)
        throw FrameError(FrameErrorCode::truncated, "payload_len " + std::to_string(payload_len) + " but " +
                                                        std::to_string(bytes.size()) + " bytes");
    const auto body = bytes.first(kFrameHeaderSize + payload_len);
    const auto stored = le::get_u32(bytes.data() + body.size());
    if (crc32(body) != stored) throw FrameError(FrameErrorCode::crc_mismatch, "");
    const std::uint8_t type = bytes[5];
    if (type < 1 || type > 5) throw FrameError(FrameErrorCode::unknown_type, std::to_string(type));

    Frame f;
    f.type = static_cast<MsgType>(type);
    f.payload.assign(body.begin() + kFrameHeaderSize, body.end());
    return f;
}

}  // namespace autotune::channel
