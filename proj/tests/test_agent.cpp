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

#include <autotune/driver.hpp>

#include <doctest.h>

#include <filesystem>
#include <thread>

using namespace autotune;
using channel::MsgType;

namespace {

ComponentSpec three_knobs(bool with_echo) {
    ComponentSpec s;
    s.component_id = 21;
    s.name = "knobs";
    TunableDef a;
    a.name = "depth";
    a.param_id = 7;
    a.kind = TunableKind::integer;
    a.lower = 1;
    a.upper = 64;
    a.default_value = std::int64_t{8};
    TunableDef b;
    b.name = "ratio";
    b.param_id = 3;
    b.kind = TunableKind::real;
    b.lower = 0.01;
    b.upper = 10.0;
    b.scale = Scale::log;
    b.default_value = 1.0;
    TunableDef c;
    c.name = "mode";
    c.param_id = 5;
    c.kind = TunableKind::categorical;
    c.categories = {"fast", "safe", "lazy"};
    c.default_value = std::string("safe");
    s.tunables = {a, b, c};
    s.metrics = {{1, "objective", "value"}};
    if (with_echo) {
        s.metrics.push_back({10, "applied.depth", "value"});
        s.metrics.push_back({11, "applied.ratio", "value"});
        s.metrics.push_back({12, "applied.mode", "index"});
    }
    return s;
}

std::filesystem::path temp_store(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("autotune_test_" + name + ".jsonl");
    std::filesystem::remove(p);
    return p;
}

ExperimentConfig synthetic_config(std::uint64_t seed, std::size_t budget, OptimizerKind kind) {
    ExperimentConfig c;
    c.spec = three_knobs(false);
    c.benchmark = "synthetic";
    c.workload = {{"fn", "sphere"}};
    c.workload_name = "sphere";
    c.objective = {"objective", Direction::minimize, AggregateField::mean};
    c.optimizer = {kind, seed, budget, StrategyMode::all_at_once, 10};
    return c;
}

void send_raw_register(channel::Endpoint& ep, const std::string& doc) {
    std::vector<std::uint8_t> bytes(doc.begin(), doc.end());
    REQUIRE(ep.try_send(MsgType::register_component, bytes));
}

}  // namespace

TEST_SUITE("agent") {

TEST_CASE("handshake returns the declared spec and acknowledges REGISTER") {
    auto t = channel::Transport::in_process();
    const auto spec = three_knobs(false);
    Component comp(spec, t);
    comp.start();
    Agent agent(t);
    const auto& got = agent.handshake();
    CHECK(spec_to_json(got) == spec_to_json(spec));
    for (int i = 0; i < 2000 && !comp.registered(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    CHECK(comp.registered());
}

TEST_CASE("REGISTER with a duplicate param_id is refused without ACK") {
    auto t = channel::Transport::in_process();
    channel::Endpoint comp(t, channel::Endpoint::Side::component);
    auto doc = spec_to_json(three_knobs(false));
    doc["tunables"][1]["param_id"] = 7;
    send_raw_register(comp, doc.dump());
    Agent agent(t);
    CHECK_THROWS_AS(agent.handshake(), HandshakeError);
    CHECK(t->agent_to_component().size() == 0);
    CHECK_FALSE(agent.connected());
}

TEST_CASE("malformed REGISTER and missing REGISTER") {
    auto t = channel::Transport::in_process();
    channel::Endpoint comp(t, channel::Endpoint::Side::component);
    send_raw_register(comp, "{not json");
    Agent agent(t, AgentOptions{std::chrono::milliseconds(50)});
    CHECK_THROWS_AS(agent.handshake(), HandshakeError);
    CHECK_THROWS_AS(agent.handshake(), TimeoutError);
}

TEST_CASE("enact sends one CONFIG_UPDATE per tunable in declaration order") {
    auto t = channel::Transport::in_process();
    const auto spec = three_knobs(false);
    std::vector<channel::ConfigUpdatePayload> seen;
    std::atomic<bool> stop{false};
    std::thread fake([&] {
        channel::Endpoint ep(t, channel::Endpoint::Side::component);
        send_raw_register(ep, spec_to_json(spec).dump());
        while (!stop) {
            auto r = ep.try_receive();
            if (!r) {
                std::this_thread::yield();
                continue;
            }
            if (r->frame.type != MsgType::config_update) continue;
            seen.push_back(channel::decode_config_update(r->frame.payload));
            ep.send_with_retry(MsgType::ack, channel::encode(channel::AckPayload{r->sequence, MsgType::config_update,
                                                                                channel::AckStatus::ok}),
                               100, std::chrono::microseconds(100));
        }
    });
    Agent agent(t);
    agent.handshake();
    TunableAssignment a{21, {{"depth", std::int64_t{32}}, {"ratio", 0.5}, {"mode", std::string("lazy")}}};
    agent.enact(a);
    stop = true;
    fake.join();
    REQUIRE(seen.size() == 3);
    CHECK(seen[0].param_id == 7);
    CHECK(seen[0].as_int() == 32);
    CHECK(seen[1].param_id == 3);
    CHECK(seen[1].as_real() == 0.5);
    CHECK(seen[2].param_id == 5);
    CHECK(seen[2].value_type == channel::ValueType::category_index);
    CHECK(seen[2].raw_value == 2);
    CHECK(agent.updates_sent() == 3);
}

TEST_CASE("a loopback component echoes exactly the enacted values") {
    auto t = channel::Transport::in_process();
    const auto spec = three_knobs(true);
    Component comp(spec, t, Component::Options{true, std::chrono::microseconds(50)});
    comp.start();
    Agent agent(t);
    agent.handshake();
    const TunableAssignment a{21, {{"depth", std::int64_t{17}}, {"ratio", 2.75}, {"mode", std::string("fast")}}};
    agent.enact(a);
    agent.pump();
    const auto& samples = agent.collector().samples();
    REQUIRE(samples.count(10));
    CHECK(samples.at(10) == std::vector<double>{17.0});
    CHECK(samples.at(11) == std::vector<double>{2.75});
    CHECK(samples.at(12) == std::vector<double>{0.0});
    CHECK(comp.tunables().snapshot() == a);
    CHECK(comp.updates_applied() == 3);
}

TEST_CASE("invalid assignments and rejected updates") {
    auto t = channel::Transport::in_process();
    const auto spec = three_knobs(false);
    Component comp(spec, t);
    comp.start();
    Agent agent(t);
    agent.handshake();
    CHECK_THROWS_AS(agent.enact({21, {{"depth", std::int64_t{99}}, {"ratio", 1.0}, {"mode", std::string("safe")}}}),
                    AssignmentError);
    CHECK(agent.updates_sent() == 0);

    // Hand-built update outside the bounds: the component must refuse it and keep its value.
    channel::ConfigUpdatePayload bad{21, 7, channel::ValueType::int64, 1000};
    CHECK_FALSE(comp.tunables().apply(bad));
    CHECK(comp.tunables().get_int("depth") == 8);
    CHECK_FALSE(comp.tunables().apply({21, 3, channel::ValueType::int64, 1}));
    CHECK_FALSE(comp.tunables().apply({99, 7, channel::ValueType::int64, 9}));
}

TEST_CASE("budget 0 sends nothing and returns nothing") {
    auto session = open_session(synthetic_config(1, 0, OptimizerKind::random_search));
    Episode e;
    e.objective = {"objective", Direction::minimize, AggregateField::mean};
    e.optimizer.budget = 0;
    CHECK(run_episode(*session->agent, e, session->trigger()).empty());
    CHECK(session->agent->updates_sent() == 0);
}

TEST_CASE("random-search episode matches a replay oracle and persists every iteration") {
    const auto path = temp_store("episode");
    const auto config = synthetic_config(2024, 20, OptimizerKind::random_search);
    std::vector<IterationResult> results;
    {
        RunStore store(path);
        results = optimize(config, &store, "ep-rs");
    }
    REQUIRE(results.size() == 20);

    // Oracle: the same seeded draws, decoded and scored offline.
    Rng rng(2024);
    double oracle_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
        const auto a = decode_unit(config.spec, rs_suggest(3, rng));
        CHECK(a == results[static_cast<std::size_t>(i)].assignment);
        oracle_best = std::min(oracle_best, encode_unit(config.spec, a).squaredNorm());
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : results) best = std::min(best, r.objective.value);
    CHECK(best == oracle_best);

    const auto loaded = load_runs(path);
    REQUIRE(loaded.records.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(loaded.records[i].iteration == results[i].iteration);
        CHECK(loaded.records[i].episode_id == "ep-rs");
        CHECK(loaded.records[i].assignment == assignment_to_json(results[i].assignment));
        CHECK(loaded.records[i].objective.value == results[i].objective.value);
    }
    std::filesystem::remove(path);
}

TEST_CASE("replaying a store through the optimizer reproduces its suggestions") {
    const auto path = temp_store("replay");
    const auto config = synthetic_config(99, 12, OptimizerKind::bayesian);
    {
        RunStore store(path);
        optimize(config, &store, "ep-bo");
    }
    const auto records = load_runs(path).records;
    REQUIRE(records.size() == 12);
    Optimizer replay(config.optimizer, 3, encode_unit(config.spec, default_assignment(config.spec)));
    for (const auto& r : records) {
        const auto a = decode_unit(config.spec, replay.suggest());
        CHECK(assignment_to_json(a) == r.assignment);
        replay.observe(encode_unit(config.spec, assignment_from_json(config.spec, r.assignment)), r.objective.canonical);
    }
    std::filesystem::remove(path);
}

TEST_CASE("an aborted episode leaves a prefix of the completed episode") {
    const auto full_path = temp_store("full");
    const auto cut_path = temp_store("cut");
    const auto config = synthetic_config(5, 10, OptimizerKind::random_search);
    {
        RunStore store(full_path);
        optimize(config, &store, "same");
    }
    {
        RunStore store(cut_path);
        auto session = open_session(config);
        int calls = 0;
        WorkloadTrigger failing = [&]() -> std::future<void> {
            if (++calls == 5) throw Error("benchmark crashed");
            return session->trigger()();
        };
        Episode e;
        e.objective = config.objective;
        e.optimizer = config.optimizer;
        e.benchmark = "synthetic";
        e.store = &store;
        e.episode_id = "same";
        CHECK_THROWS_AS(run_episode(*session->agent, e, failing), Error);
    }
    const auto full = load_runs(full_path).records;
    const auto cut = load_runs(cut_path).records;
    REQUIRE(cut.size() == 4);
    for (std::size_t i = 0; i < cut.size(); ++i) {
        CHECK(cut[i].iteration == full[i].iteration);
        CHECK(cut[i].assignment == full[i].assignment);
        CHECK(cut[i].objective.value == full[i].objective.value);
    }
    std::filesystem::remove(full_path);
    std::filesystem::remove(cut_path);
}

TEST_CASE("maximized objectives are negated for the optimizer only") {
    auto config = synthetic_config(3, 6, OptimizerKind::random_search);
    config.objective.direction = Direction::maximize;
    const auto results = optimize(config, nullptr);
    for (const auto& r : results) {
        CHECK(r.objective.canonical == -r.objective.value);
        CHECK(r.objective.value >= 0.0);
    }
}

TEST_CASE("objective metric must be declared") {
    auto config = synthetic_config(3, 2, OptimizerKind::random_search);
    config.objective.metric = "nope";
    CHECK_THROWS_AS(optimize(config, nullptr), SpecError);
}

TEST_CASE("hashtable and spinlock benchmarks run through the agent") {
    ExperimentConfig h;
    h.spec = load_spec(std::filesystem::path(AUTOTUNE_SOURCE_DIR) / "configs/hashtable.space.json");
    h.benchmark = "hashtable";
    h.workload = {{"n_keys", 2000}, {"key_dist", "zipf"}};
    h.workload_name = "small";
    h.objective = {"probe_len", Direction::minimize, AggregateField::mean};
    const auto hr = run_single(h);
    CHECK(hr.find_metric("probe_len")->aggregate.count == 4000);
    CHECK(hr.find_metric("collisions")->aggregate.count == 1);
    CHECK(hr.counters.cpu_ns.has_value());

    ExperimentConfig s;
    s.spec = load_spec(std::filesystem::path(AUTOTUNE_SOURCE_DIR) / "configs/spinlock.space.json");
    s.benchmark = "spinlock";
    s.workload = {{"family_k", 2}, {"n_light", 2}, {"duration_ms", 30}};
    s.workload_name = "k2";
    s.objective = {"throughput_ops_s", Direction::maximize, AggregateField::mean};
    const auto sr = run_single(s);
    CHECK(sr.objective.value > 0);
    CHECK(sr.objective.canonical == -sr.objective.value);
    CHECK(sr.find_metric("acquire_ns")->unit == "ns");
}

}  // TEST_SUITE
