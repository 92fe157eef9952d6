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

#include <autotune/benchmarks/hashtable.hpp>
#include <autotune/benchmarks/spinlock.hpp>
#include <autotune/benchmarks/synthetic.hpp>
#include <autotune/driver.hpp>

#include <cmath>
#include <span>

namespace autotune {

namespace {

void publish(Component& c, const std::string& metric, std::span<const double> values) {
    const auto* m = c.spec().find_metric(metric);
    if (!m) return;
    for (double v : values)
        if (!c.sink().publish_event(m->metric_id, v))
            throw TimeoutError("agent stopped draining telemetry for '" + metric + "'");
}

void publish(Component& c, const std::string& metric, double value) { publish(c, metric, std::span(&value, 1)); }

double number(const TunableRegistry& r, const std::string& name, double fallback) {
    if (!r.has(name)) return fallback;
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>)
                throw SpecError("tunable '" + name + "' must be numeric");
            else
                return static_cast<double>(v);
        },
        r.get(name));
}

bench::HashTableWorkload hashtable_workload(const nlohmann::json& w) {
    bench::HashTableWorkload h;
    h.n_keys = w.value("n_keys", h.n_keys);
    const auto dist = w.value("key_dist", std::string("uniform"));
    if (dist == "uniform") h.key_dist = bench::KeyDist::uniform;
    else if (dist == "zipf") h.key_dist = bench::KeyDist::zipf;
    else throw SpecError("unknown key_dist '" + dist + "'");
    h.zipf_s = w.value("zipf_s", h.zipf_s);
    h.read_fraction = w.value("read_fraction", h.read_fraction);
    h.n_ops = w.value("n_ops", h.n_ops);
    if (h.n_keys == 0) throw SpecError("hashtable workload needs n_keys > 0");
    if (!(h.read_fraction >= 0.0 && h.read_fraction <= 1.0)) throw SpecError("read_fraction outside [0, 1]");
    if (h.key_dist == bench::KeyDist::zipf && !(h.zipf_s > 0.0)) throw SpecError("zipf_s must be positive");
    return h;
}

bench::ContentionWorkload spinlock_workload(const nlohmann::json& w) {
    auto c = bench::default_contention_workload();
    const int k = w.value("family_k", w.value("k", 1));
    c.k = k;
    c.n_light = w.value("n_light", c.n_light);
    c.light_ops = w.value("light_ops", c.light_ops);
    c.heavy_ops = w.value("heavy_ops", k * bench::kHeavyOpsUnit);
    c.duration_ms = w.value("duration_ms", c.duration_ms);
    if (w.contains("acquisitions_per_worker")) c.acquisitions_per_worker = w.at("acquisitions_per_worker").get<std::uint64_t>();
    c.validate();
    return c;
}

}  // namespace

BenchmarkJob make_benchmark_job(const std::string& benchmark, const nlohmann::json& workload, std::uint64_t seed) {
    if (benchmark == "hashtable") {
        const auto w = hashtable_workload(workload);
        const bool resizing = workload.value("resizing_enabled", true);
        return [w, resizing, seed](Component& c) {
            const auto& r = c.tunables();
            bench::HashTableConfig cfg;
            cfg.bucket_count_log2 = static_cast<int>(number(r, "bucket_count_log2", cfg.bucket_count_log2));
            cfg.max_load_factor = number(r, "max_load_factor", cfg.max_load_factor);
            cfg.growth_log2 = static_cast<int>(number(r, "growth_log2", cfg.growth_log2));
            if (r.has("hash_fn")) cfg.hash_fn = bench::hash_fn_from_string(r.get_category("hash_fn"));
            cfg.resizing_enabled = r.has("resizing_enabled") ? number(r, "resizing_enabled", 1.0) != 0.0 : resizing;
            const auto m = bench::hashtable_run(cfg, w, seed);
            publish(c, "probe_len", m.probe_len);
            publish(c, "op_latency_ns", m.op_latency_ns);
            publish(c, "collisions", static_cast<double>(m.collisions));
            publish(c, "resident_bytes", static_cast<double>(m.resident_bytes));
            publish(c, "inserts", static_cast<double>(m.inserts));
        };
    }
    if (benchmark == "spinlock") {
        const auto w = spinlock_workload(workload);
        return [w, seed](Component& c) {
            const auto& r = c.tunables();
            bench::SpinlockConfig cfg;
            cfg.max_spin = static_cast<std::uint32_t>(number(r, "max_spin", cfg.max_spin));
            cfg.backoff_initial_us = static_cast<std::uint32_t>(number(r, "backoff_initial_us", cfg.backoff_initial_us));
            cfg.backoff_cap_us = static_cast<std::uint32_t>(number(r, "backoff_cap_us", cfg.backoff_cap_us));
            cfg.backoff_cap_us = std::max(cfg.backoff_cap_us, cfg.backoff_initial_us);
            const auto m = bench::spinlock_run(cfg, w, seed);
            publish(c, "throughput_ops_s", m.throughput_ops_s);
            publish(c, "acquire_ns", m.acquire_ns);
            publish(c, "acquisitions", static_cast<double>(m.acquisitions));
            publish(c, "contended_acquisitions", static_cast<double>(m.contended_acquisitions));
            publish(c, "backoff_events", static_cast<double>(m.backoff_events));
        };
    }
    if (benchmark == "synthetic") {
        const auto fn = bench::synthetic_fn_from_string(workload.value("fn", std::string("quadratic")));
        return [fn](Component& c) {
            const auto u = encode_unit(c.spec(), c.tunables().snapshot());
            publish(c, "objective", bench::synthetic_objective(fn, u));
        };
    }
    throw SpecError("unknown benchmark '" + benchmark + "'");
}

WorkloadTrigger Session::trigger() {
    return [this] { return component->submit(job); };
}

Session::~Session() {
    if (component) component->stop();
}

std::unique_ptr<Session> open_session(const ExperimentConfig& config, AgentOptions options) {
    auto s = std::make_unique<Session>();
    s->job = make_benchmark_job(config.benchmark, config.workload, config.workload_seed);
    s->transport = config.transport ? channel::Transport::create_file(*config.transport)
                                    : channel::Transport::in_process();
    s->component = std::make_unique<Component>(config.spec, s->transport);
    s->agent = std::make_unique<Agent>(s->transport, options);
    s->component->start();
    s->agent->handshake();
    return s;
}

namespace {

Episode episode_for(const ExperimentConfig& config, RunStore* store, std::string episode_id) {
    Episode e;
    e.objective = config.objective;
    e.optimizer = config.optimizer;
    e.benchmark = config.benchmark;
    e.workload_name = config.workload_name;
    e.workload = config.workload;
    e.store = store;
    e.episode_id = std::move(episode_id);
    return e;
}

void rethrow_component_failure(Session& s) {
    if (auto f = s.component->failure()) std::rethrow_exception(f);
}

}  // namespace

RunRecord run_single(const ExperimentConfig& config, RunStore* store) {
    auto session = open_session(config);
    const auto assignment = config.assignment ? *config.assignment : default_assignment(config.spec);
    IterationResult result;
    try {
        result = run_iteration(*session->agent, assignment, config.objective, session->trigger(), 0);
    } catch (...) {
        rethrow_component_failure(*session);
        throw;
    }
    auto episode = episode_for(config, store, {});
    auto record = make_run_record(config.spec, episode, new_episode_id(), result);
    record.optimizer_kind = "none";
    record.strategy = "none";
    if (store) store->append(record);
    return record;
}

std::vector<IterationResult> optimize(const ExperimentConfig& config, RunStore* store, std::string episode_id) {
    auto session = open_session(config);
    try {
        return run_episode(*session->agent, episode_for(config, store, std::move(episode_id)), session->trigger());
    } catch (...) {
        rethrow_component_failure(*session);
        throw;
    }
}

}  // namespace autotune
