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

#include <autotune/component.hpp>

#include <bit>
#include <cmath>

namespace autotune {

using channel::AckStatus;
using channel::ConfigUpdatePayload;
using channel::MsgType;
using channel::ValueType;

namespace {

constexpr int kAckRetries = 1000;
constexpr auto kAckBackoff = std::chrono::microseconds(100);

ValueType value_type_for(TunableKind kind) {
    switch (kind) {
        case TunableKind::integer: return ValueType::int64;
        case TunableKind::real: return ValueType::real64;
        case TunableKind::boolean: return ValueType::boolean;
        case TunableKind::categorical: return ValueType::category_index;
    }
    return ValueType::int64;
}

std::uint64_t to_word(const TunableDef& def, const TunableValue& v) {
    switch (def.kind) {
        case TunableKind::integer: return static_cast<std::uint64_t>(std::get<std::int64_t>(v));
        case TunableKind::real: return std::bit_cast<std::uint64_t>(std::get<double>(v));
        case TunableKind::boolean: return std::get<bool>(v) ? 1 : 0;
        case TunableKind::categorical: return def.category_index(std::get<std::string>(v)).value_or(0);
    }
    return 0;
}

TunableValue from_word(const TunableDef& def, std::uint64_t w) {
    switch (def.kind) {
        case TunableKind::integer: return static_cast<std::int64_t>(w);
        case TunableKind::real: return std::bit_cast<double>(w);
        case TunableKind::boolean: return w != 0;
        case TunableKind::categorical: return def.categories.at(static_cast<std::size_t>(w));
    }
    return std::int64_t{0};
}

}  // namespace

ConfigUpdatePayload make_config_update(std::uint32_t component_id, const TunableDef& def, const TunableValue& value) {
    return {component_id, def.param_id, value_type_for(def.kind), to_word(def, value)};
}

TunableRegistry::TunableRegistry(const ComponentSpec& spec)
    : spec_(spec), words_(new std::atomic<std::uint64_t>[spec.tunables.size()]) {
    for (std::size_t i = 0; i < spec.tunables.size(); ++i)
        words_[i].store(to_word(spec.tunables[i], spec.tunables[i].default_value), std::memory_order_relaxed);
}

std::size_t TunableRegistry::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < spec_.tunables.size(); ++i)
        if (spec_.tunables[i].name == name) return i;
    throw Error("component '" + spec_.name + "' has no tunable '" + name + "'");
}

bool TunableRegistry::apply(const ConfigUpdatePayload& update) {
    if (update.component_id != spec_.component_id) return false;
    for (std::size_t i = 0; i < spec_.tunables.size(); ++i) {
        const auto& def = spec_.tunables[i];
        if (def.param_id != update.param_id) continue;
        if (update.value_type != value_type_for(def.kind)) return false;
        switch (def.kind) {
            case TunableKind::integer: {
                const auto v = static_cast<double>(update.as_int());
                if (v < def.lower || v > def.upper) return false;
                break;
            }
            case TunableKind::real: {
                const double v = update.as_real();
                if (!std::isfinite(v) || v < def.lower || v > def.upper) return false;
                break;
            }
            case TunableKind::boolean:
                if (update.raw_value > 1) return false;
                break;
            case TunableKind::categorical:
                if (update.raw_value >= def.categories.size()) return false;
                break;
        }
        words_[i].store(update.raw_value, std::memory_order_release);
        return true;
    }
    return false;
}

TunableValue TunableRegistry::get(const std::string& name) const {
    const auto i = index_of(name);
    return from_word(spec_.tunables[i], words_[i].load(std::memory_order_acquire));
}

std::int64_t TunableRegistry::get_int(const std::string& name) const { return std::get<std::int64_t>(get(name)); }
double TunableRegistry::get_real(const std::string& name) const { return std::get<double>(get(name)); }
bool TunableRegistry::get_bool(const std::string& name) const { return std::get<bool>(get(name)); }
std::string TunableRegistry::get_category(const std::string& name) const { return std::get<std::string>(get(name)); }

TunableAssignment TunableRegistry::snapshot() const {
    TunableAssignment a;
    a.component_id = spec_.component_id;
    for (const auto& def : spec_.tunables) a.values[def.name] = get(def.name);
    return a;
}

Component::Component(ComponentSpec spec, std::shared_ptr<channel::Transport> transport, Options options)
    : spec_(std::move(spec)),
      transport_(std::move(transport)),
      options_(options),
      endpoint_(transport_, channel::Endpoint::Side::component),
      registry_(spec_),
      sink_(spec_, endpoint_) {
    require_valid_spec(spec_);
    const auto doc = spec_to_json(spec_).dump();
    if (doc.size() > channel::kMaxPayload)
        throw SpecError("REGISTER document for '" + spec_.name + "' is " + std::to_string(doc.size()) +
                        " bytes; the limit is " + std::to_string(channel::kMaxPayload));
    for (char c : doc) register_doc_.push_back(static_cast<std::byte>(c));
}

Component::~Component() { stop(); }

void Component::start() {
    if (thread_.joinable()) return;
    stop_.store(false);
    thread_ = std::thread([this] { service_loop(); });
}

void Component::stop() {
    stop_.store(true);
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

std::future<void> Component::submit(std::function<void(Component&)> job) {
    std::packaged_task<void()> task([this, job = std::move(job)] { job(*this); });
    auto fut = task.get_future();
    {
        std::lock_guard lock(mutex_);
        jobs_.push_back(std::move(task));
    }
    cv_.notify_all();
    return fut;
}

std::exception_ptr Component::failure() const {
    std::lock_guard lock(mutex_);
    return failure_;
}

void Component::send_ack(std::uint64_t sequence, MsgType type, AckStatus status) {
    const auto payload = channel::encode(channel::AckPayload{sequence, type, status});
    if (!endpoint_.send_with_retry(MsgType::ack, payload, kAckRetries, kAckBackoff))
        throw TimeoutError("component '" + spec_.name + "': agent ring stayed full while sending ACK");
}

bool Component::drain_incoming() {
    bool any = false;
    while (auto received = endpoint_.try_receive()) {
        any = true;
        const auto& frame = received->frame;
        switch (frame.type) {
            case MsgType::config_update: {
                const auto update = channel::decode_config_update(frame.payload);
                const bool ok = registry_.apply(update);
                (ok ? updates_applied_ : updates_rejected_).fetch_add(1, std::memory_order_relaxed);
                send_ack(received->sequence, MsgType::config_update, ok ? AckStatus::ok : AckStatus::rejected);
                if (ok && options_.echo_applied) {
                    const auto* def = spec_.find_tunable(update.param_id);
                    if (const auto* metric = spec_.find_metric("applied." + def->name))
                        sink_.publish_event(metric->metric_id, numeric_value(*def, registry_.get(def->name)));
                }
                break;
            }
            case MsgType::ack: {
                const auto ack = channel::decode_ack(frame.payload);
                if (ack.acked_type == MsgType::register_component && ack.sequence == register_sequence_)
                    registered_.store(true, std::memory_order_release);
                break;
            }
            default: break;
        }
    }
    return any;
}

void Component::service_loop() {
    try {
        const auto* bytes = reinterpret_cast<const std::uint8_t*>(register_doc_.data());
        std::optional<std::uint64_t> seq;
        while (!seq && !stop_.load()) {
            seq = endpoint_.try_send(MsgType::register_component, {bytes, register_doc_.size()});
            if (!seq) std::this_thread::sleep_for(options_.idle_sleep);
        }
        if (seq) register_sequence_ = *seq;

        while (!stop_.load()) {
            bool busy = drain_incoming();
            std::optional<std::packaged_task<void()>> job;
            {
                std::lock_guard lock(mutex_);
                if (!jobs_.empty()) {
                    job.emplace(std::move(jobs_.front()));
                    jobs_.pop_front();
                }
            }
            if (job) {
                (*job)();
                busy = true;
            }
            if (!busy) {
                std::unique_lock lock(mutex_);
                cv_.wait_for(lock, options_.idle_sleep, [this] { return stop_.load() || !jobs_.empty(); });
            }
        }
    } catch (...) {
        std::lock_guard lock(mutex_);
        failure_ = std::current_exception();
    }
}

}  // namespace autotune
