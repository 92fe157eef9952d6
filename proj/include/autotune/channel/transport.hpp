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
#include <autotune/channel/ring.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>

namespace autotune::channel {

/// A pair of rings in one region: component→agent first, then agent→component.
/// Backed either by process-private memory or by a shared memory-mapped file.
class Transport {
public:
    static constexpr std::uint32_t kDefaultCapacity = 1024;

    static std::shared_ptr<Transport> in_process(std::uint32_t capacity = kDefaultCapacity);
    /// Creates (or truncates) `path` and formats both rings.
    static std::shared_ptr<Transport> create_file(const std::filesystem::path& path,
                                                  std::uint32_t capacity = kDefaultCapacity);
    /// Maps an existing transport file created by another process.
    static std::shared_ptr<Transport> open_file(const std::filesystem::path& path);

    ~Transport();
    Transport(const Transport&) = delete;
    Transport& operator=(const Transport&) = delete;

    static std::size_t file_size(std::uint32_t capacity) noexcept { return 2 * Ring::region_size(capacity); }

    Ring& component_to_agent() noexcept { return to_agent_; }
    Ring& agent_to_component() noexcept { return to_component_; }

    struct Backing;

private:
    Transport(std::unique_ptr<Backing> backing, Ring to_agent, Ring to_component);

    std::unique_ptr<Backing> backing_;
    Ring to_agent_;
    Ring to_component_;
};

struct Received {
    std::uint64_t sequence = 0;
    Frame frame;
};

/// One side's view of a transport: the ring it produces into and the ring it consumes from.
/// An endpoint must be driven by one execution context at a time.
class Endpoint {
public:
    enum class Side { component, agent };

    Endpoint(std::shared_ptr<Transport> transport, Side side);

    /// Non-blocking send; nullopt when the outgoing ring is full.
    std::optional<std::uint64_t> try_send(MsgType type, std::span<const std::uint8_t> payload);

    /// Retries a full ring `retries` times, sleeping `backoff` between attempts.
    std::optional<std::uint64_t> send_with_retry(MsgType type, std::span<const std::uint8_t> payload, int retries,
                                                 std::chrono::microseconds backoff);

    /// Pops and decodes one frame. Throws FrameError on a corrupt slot (the slot is consumed).
    std::optional<Received> try_receive();

    Ring& outgoing() noexcept { return *tx_; }
    Ring& incoming() noexcept { return *rx_; }

private:
    std::shared_ptr<Transport> transport_;
    Ring* tx_;
    Ring* rx_;
};

}  // namespace autotune::channel
