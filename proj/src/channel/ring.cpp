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

#include <autotune/channel/ring.hpp>

#include <atomic>
#include <bit>
#include <cstring>

namespace autotune::channel {

namespace {

constexpr std::size_t kSlotSizeOffset = 8;
constexpr std::size_t kCapacityOffset = 12;
constexpr std::size_t kHeadOffset = 16;
constexpr std::size_t kTailOffset = 24;

void check_region(std::span<std::uint8_t> region, std::uint32_t capacity) {
    if (reinterpret_cast<std::uintptr_t>(region.data()) % alignof(std::uint64_t) != 0)
        throw Error("ring region must be 8-byte aligned");
    if (region.size() < Ring::region_size(capacity))
        throw Error("ring region of " + std::to_string(region.size()) + " bytes cannot hold " +
                    std::to_string(capacity) + " slots");
}

}  // namespace

Ring Ring::format(std::span<std::uint8_t> region, std::uint32_t capacity) {
    if (capacity == 0 || !std::has_single_bit(capacity)) throw Error("ring capacity must be a power of two");
    check_region(region, capacity);
    std::memset(region.data(), 0, kRingHeaderSize);
    std::memcpy(region.data(), kFrameMagic.data(), kFrameMagic.size());
    region[4] = kFrameVersion;
    le::put_u32(region.data() + kSlotSizeOffset, static_cast<std::uint32_t>(kSlotSize));
    le::put_u32(region.data() + kCapacityOffset, capacity);
    Ring ring(region.data(), capacity);
    std::atomic_ref<std::uint64_t>(ring.head_word()).store(0, std::memory_order_release);
    std::atomic_ref<std::uint64_t>(ring.tail_word()).store(0, std::memory_order_release);
    return ring;
}

Ring Ring::attach(std::span<std::uint8_t> region) {
    if (region.size() < kRingHeaderSize) throw Error("ring region smaller than its header");
    if (std::memcmp(region.data(), kFrameMagic.data(), kFrameMagic.size()) != 0)
        throw Error("ring region has bad magic");
    if (region[4] != kFrameVersion) throw Error("ring region has unsupported version");
    if (le::get_u32(region.data() + kSlotSizeOffset) != kSlotSize) throw Error("ring region has unexpected slot size");
    const auto capacity = le::get_u32(region.data() + kCapacityOffset);
    if (capacity == 0 || !std::has_single_bit(capacity)) throw Error("ring region has invalid capacity");
    check_region(region, capacity);
    return Ring(region.data(), capacity);
}

std::uint64_t& Ring::head_word() const noexcept {
    return *reinterpret_cast<std::uint64_t*>(base_ + kHeadOffset);
}

std::uint64_t& Ring::tail_word() const noexcept {
    return *reinterpret_cast<std::uint64_t*>(base_ + kTailOffset);
}

std::uint64_t Ring::head() const noexcept {
    return std::atomic_ref<std::uint64_t>(head_word()).load(std::memory_order_acquire);
}

std::uint64_t Ring::tail() const noexcept {
    return std::atomic_ref<std::uint64_t>(tail_word()).load(std::memory_order_acquire);
}

std::optional<std::uint64_t> Ring::push(std::span<const std::uint8_t> frame) {
    if (frame.size() > kSlotSize)
        throw FrameError(FrameErrorCode::oversized, std::to_string(frame.size()) + " bytes exceeds slot size");
    std::atomic_ref<std::uint64_t> head_ref(head_word());
    const auto head = head_ref.load(std::memory_order_relaxed);
    if (head - tail() >= capacity_) return std::nullopt;
    std::memcpy(slot(head), frame.data(), frame.size());
    head_ref.store(head + 1, std::memory_order_release);
    return head;
}

std::optional<PoppedFrame> Ring::pop() {
    std::atomic_ref<std::uint64_t> tail_ref(tail_word());
    const auto tail = tail_ref.load(std::memory_order_relaxed);
    if (tail == head()) return std::nullopt;
    const std::uint8_t* s = slot(tail);
    std::size_t n = frame_size({s, kSlotSize});
    if (n == 0 || n > kSlotSize) n = kSlotSize;  // corrupt length; hand the whole slot to the decoder
    PoppedFrame out{tail, std::vector<std::uint8_t>(s, s + n)};
    tail_ref.store(tail + 1, std::memory_order_release);
    return out;
}

}  // namespace autotune::channel
