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

#include <autotune/channel/transport.hpp>

#include <cerrno>
#include <cstring>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

namespace autotune::channel {

struct Transport::Backing {
    virtual ~Backing() = default;
    virtual std::span<std::uint8_t> bytes() = 0;
};

namespace {

class HeapBacking final : public Transport::Backing {
public:
    explicit HeapBacking(std::size_t size) : words_((size + 7) / 8, 0), size_(size) {}
    std::span<std::uint8_t> bytes() override { return {reinterpret_cast<std::uint8_t*>(words_.data()), size_}; }

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_;
};

class MappedBacking final : public Transport::Backing {
public:
    MappedBacking(const std::filesystem::path& path, std::optional<std::size_t> create_size) {
        const int flags = create_size ? (O_RDWR | O_CREAT | O_TRUNC) : O_RDWR;
        fd_ = ::open(path.c_str(), flags, 0600);
        if (fd_ < 0) throw Error("open " + path.string() + ": " + std::strerror(errno));
        if (create_size) {
            if (::ftruncate(fd_, static_cast<off_t>(*create_size)) != 0) fail("ftruncate", path);
            size_ = *create_size;
        } else {
            struct stat st {};
            if (::fstat(fd_, &st) != 0) fail("fstat", path);
            size_ = static_cast<std::size_t>(st.st_size);
        }
        if (size_ == 0) fail("empty transport file", path);
        void* p = ::mmap(nullptr, size_, PROT_READ | PROT_WRITE, MAP_SHARED, fd_, 0);
        if (p == MAP_FAILED) fail("mmap", path);
        data_ = static_cast<std::uint8_t*>(p);
    }

    ~MappedBacking() override {
        if (data_) ::munmap(data_, size_);
        if (fd_ >= 0) ::close(fd_);
    }

    std::span<std::uint8_t> bytes() override { return {data_, size_}; }

private:
    [[noreturn]] void fail(const char* what, const std::filesystem::path& path) {
        const std::string msg = std::string(what) + " " + path.string() + ": " + std::strerror(errno);
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
        throw Error(msg);
    }

    int fd_ = -1;
    std::uint8_t* data_ = nullptr;
    std::size_t size_ = 0;
};

}  // namespace

Transport::Transport(std::unique_ptr<Backing> backing, Ring to_agent, Ring to_component)
    : backing_(std::move(backing)), to_agent_(to_agent), to_component_(to_component) {}

Transport::~Transport() = default;

std::shared_ptr<Transport> Transport::in_process(std::uint32_t capacity) {
    auto backing = std::make_unique<HeapBacking>(file_size(capacity));
    auto bytes = backing->bytes();
    const auto half = Ring::region_size(capacity);
    auto a = Ring::format(bytes.first(half), capacity);
    auto b = Ring::format(bytes.subspan(half, half), capacity);
    return std::shared_ptr<Transport>(new Transport(std::move(backing), a, b));
}

std::shared_ptr<Transport> Transport::create_file(const std::filesystem::path& path, std::uint32_t capacity) {
    auto backing = std::make_unique<MappedBacking>(path, file_size(capacity));
    auto bytes = backing->bytes();
    const auto half = Ring::region_size(capacity);
    auto a = Ring::format(bytes.first(half), capacity);
    auto b = Ring::format(bytes.subspan(half, half), capacity);
    return std::shared_ptr<Transport>(new Transport(std::move(backing), a, b));
}

std::shared_ptr<Transport> Transport::open_file(const std::filesystem::path& path) {
    auto backing = std::make_unique<MappedBacking>(path, std::nullopt);
    auto bytes = backing->bytes();
    auto a = Ring::attach(bytes);
    const auto half = Ring::region_size(a.capacity());
    if (bytes.size() < 2 * half) throw Error("transport file " + path.string() + " is too small");
    auto b = Ring::attach(bytes.subspan(half));
    return std::shared_ptr<Transport>(new Transport(std::move(backing), a, b));
}

Endpoint::Endpoint(std::shared_ptr<Transport> transport, Side side) : transport_(std::move(transport)) {
    if (side == Side::component) {
        tx_ = &transport_->component_to_agent();
        rx_ = &transport_->agent_to_component();
    } else {
        tx_ = &transport_->agent_to_component();
        rx_ = &transport_->component_to_agent();
    }
}

std::optional<std::uint64_t> Endpoint::try_send(MsgType type, std::span<const std::uint8_t> payload) {
    const auto bytes = encode_frame(type, payload);
    return tx_->push(bytes);
}

std::optional<std::uint64_t> Endpoint::send_with_retry(MsgType type, std::span<const std::uint8_t> payload,
                                                       int retries, std::chrono::microseconds backoff) {
    const auto bytes = encode_frame(type, payload);
    for (int attempt = 0;; ++attempt) {
        if (auto seq = tx_->push(bytes)) return seq;
        if (attempt >= retries) return std::nullopt;
        std::this_thread::sleep_for(backoff);
    }
}

std::optional<Received> Endpoint::try_receive() {
    auto popped = rx_->pop();
    if (!popped) return std::nullopt;
    return Received{popped->sequence, decode_frame(popped->bytes)};
}

}  // namespace autotune::channel
