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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace autotune::channel {

inline constexpr std::size_t kRingHeaderSize = 64;

/// A frame taken off a ring together with the position it was published at.
struct PoppedFrame {
    std::uint64_t sequence = 0;
    std::vector<std::uint8_t> bytes;
};

/// Single-producer/single-consumer ring of fixed 1024-byte slots laid over a byte region.
///
/// Region layout: a 64-byte header (magic[4], version u8, 3 pad, slot_size u32,
/// capacity u32, head u64, tail u64, zero pad) followed by capacity slots.
/// head is written only by the producer and tail only by the consumer; both are
/// published with release stores and read with acquire loads, so a slot's bytes
/// are visible before the counter that exposes them.
///
/// The view does not own the region. The region must be 8-byte aligned and
/// outlive the view.
class Ring {
public:
    static std::size_t region_size(std::uint32_t capacity) noexcept {
        return kRingHeaderSize + std::size_t{capacity} * kSlotSize;
    }

    /// Writes a fresh header into `region`. `capacity` must be a power of two.
    static Ring format(std::span<std::uint8_t> region, std::uint32_t capacity);
    /// Attaches to a region previously formatted (possibly by another process).
    static Ring attach(std::span<std::uint8_t> region);

    std::uint32_t capacity() const noexcept { return capacity_; }

    /// Producer side. Returns the sequence number the frame was published at, or
    /// nullopt when the ring is full (ring unchanged).
    std::optional<std::uint64_t> push(std::span<const std::uint8_t> frame);

    /// Consumer side. Returns nullopt when the ring is empty.
    std::optional<PoppedFrame> pop();

    std::uint64_t head() const noexcept;
    std::uint64_t tail() const noexcept;
    std::uint64_t size() const noexcept { return head() - tail(); }

private:
    Ring(std::uint8_t* base, std::uint32_t capacity) : base_(base), capacity_(capacity) {}

    std::uint64_t& head_word() const noexcept;
    std::uint64_t& tail_word() const noexcept;
    std::uint8_t* slot(std::uint64_t counter) const noexcept {
        return base_ + kRingHeaderSize + (counter & (capacity_ - 1)) * kSlotSize;
    }

    std::uint8_t* base_;
    std::uint32_t capacity_;
};

}  // namespace autotune::channel
