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

// Command-line front end: run, optimize, report, rpi, agent, component.
#include <autotune/driver.hpp>
#include <autotune/rpi.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace autotune;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRpi = 2;
constexpr int kExitRuntime = 3;

struct UsageError : Error {
    using Error::Error;
};

LoadResult load_with_warnings(const std::string& path, const RunFilter& filter = {}) {
    auto result = load_runs(path, filter);
    for (const auto& w : result.warnings) std::cerr << "warning: " << path << ": " << w << '\n';
    return result;
}

std::shared_ptr<channel::Transport> open_transport_when_ready(const std::string& path, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        try {
            return channel::Transport::open_file(path);
        } catch (const Error&) {
            if (std::chrono::steady_clock::now() >= deadline) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"autotune: black-box tuning of instrumented components"};
    app.require_subcommand(1);

    std::string config_path, runs_path, out_path, format = "table", rpi_path, transport_path, space_path,
                                                   assignment_path, episode_filter, benchmark_filter, episode_id;
    double margin = kDefaultRpiMargin;
    int timeout_ms = 5000, listen_ms = 0, serve_ms = 10000;

    auto* run = app.add_subcommand("run", "one run at the config's assignment; prints its run record");
    run->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_path, "also append the record to this store");

    auto* opt = app.add_subcommand("optimize", "a full tuning episode; writes every run to the config's out");
    opt->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
    opt->add_option("--out", out_path, "run store (overrides the config's out)");
    opt->add_option("--episode-id", episode_id, "episode id (random when omitted)");

    auto* rep = app.add_subcommand("report", "best run, convergence trace and comparison");
    rep->add_option("--runs", runs_path, "run store")->required();
    rep->add_option("--format", format, "table, json or csv")->check(CLI::IsMember({"table", "json", "csv"}));
    rep->add_option("--episode", episode_filter, "only this episode");
    rep->add_option("--benchmark", benchmark_filter, "only this benchmark");

    auto* rpi = app.add_subcommand("rpi", "resource performance interfaces");
    rpi->require_subcommand(1);
    auto* learn = rpi->add_subcommand("learn", "learn an envelope from runs");
    learn->add_option("--runs", runs_path, "run store")->required();
    learn->add_option("--margin", margin, "relative slack")->check(CLI::NonNegativeNumber);
    learn->add_option("--out", out_path, "RPI file to write")->required();
    learn->add_option("--episode", episode_filter, "only this episode");
    learn->add_option("--benchmark", benchmark_filter, "only this benchmark");
    auto* check = rpi->add_subcommand("check", "gate runs against envelopes; exit 2 on a violation");
    check->add_option("--runs", runs_path, "run store")->required();
    check->add_option("--rpi", rpi_path, "RPI file")->required();

    auto* agent_cmd = app.add_subcommand("agent", "standalone agent awaiting a component handshake");
    agent_cmd->add_option("--transport", transport_path, "transport file to create")->required();
    agent_cmd->add_option("--timeout-ms", timeout_ms, "handshake timeout");
    agent_cmd->add_option("--assignment", assignment_path, "JSON assignment to enact after the handshake");
    agent_cmd->add_option("--listen-ms", listen_ms, "collect telemetry for this long, then print aggregates");

    auto* comp_cmd = app.add_subcommand("component", "loopback component that registers with an agent");
    comp_cmd->add_option("--transport", transport_path, "transport file created by the agent")->required();
    comp_cmd->add_option("--space", space_path, "component spec")->required()->check(CLI::ExistingFile);
    comp_cmd->add_option("--timeout-ms", timeout_ms, "wait this long for the transport file");
    comp_cmd->add_option("--serve-ms", serve_ms, "serve configuration updates for this long");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            ExperimentConfig config;
            try {
                config = load_experiment_config(config_path);
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
            std::optional<RunStore> store;
            if (!out_path.empty()) store.emplace(out_path);
            const auto record = run_single(config, store ? &*store : nullptr);
            std::cout << run_record_to_json(record).dump(2) << '\n';
            return kExitOk;
        }
        if (*opt) {
            ExperimentConfig config;
            try {
                config = load_experiment_config(config_path);
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
            if (!out_path.empty()) config.out = out_path;
            if (!config.out) throw UsageError("optimize needs a run store: set \"out\" or pass --out");
            RunStore store(*config.out);
            const auto results = optimize(config, &store, episode_id);
            if (results.empty()) {
                std::cout << "budget 0: no runs\n";
                return kExitOk;
            }
            std::size_t best = 0;
            for (std::size_t i = 1; i < results.size(); ++i)
                if (results[i].objective.canonical < results[best].objective.canonical) best = i;
            std::cout << "runs: " << results.size() << " -> " << store.path().string() << '\n'
                      << "best: iteration " << results[best].iteration << ' ' << config.objective.metric << '='
                      << results[best].objective.value << ' ' << assignment_to_json(results[best].assignment).dump()
                      << '\n';
            return kExitOk;
        }
        if (*rep) {
            RunFilter filter;
            if (!episode_filter.empty()) filter.episode = episode_filter;
            if (!benchmark_filter.empty()) filter.benchmark = benchmark_filter;
            const auto loaded = load_with_warnings(runs_path, filter);
            if (loaded.records.empty()) throw UsageError("no runs to report in " + runs_path);
            std::cout << format_report(make_report(loaded.records), report_format_from_string(format));
            return kExitOk;
        }
        if (*learn) {
            RunFilter filter;
            if (!episode_filter.empty()) filter.episode = episode_filter;
            if (!benchmark_filter.empty()) filter.benchmark = benchmark_filter;
            const auto loaded = load_with_warnings(runs_path, filter);
            const auto envelope = learn_envelope(loaded.records, margin);
            save_envelopes(out_path, {envelope});
            std::cout << envelope_to_json(envelope).dump(2) << '\n';
            return kExitOk;
        }
        if (*check) {
            std::vector<RpiEnvelope> envelopes;
            LoadResult loaded;
            try {
                envelopes = load_envelopes(rpi_path);
                loaded = load_with_warnings(runs_path);
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kExitRuntime;
            }
            const auto gate = rpi_gate(envelopes, loaded.records);
            std::cout << gate.report;
            return gate.exit_code == 0 ? kExitOk : kExitRpi;
        }
        if (*agent_cmd) {
            AgentOptions options;
            options.handshake_timeout = std::chrono::milliseconds(timeout_ms);
            Agent agent(channel::Transport::create_file(transport_path), options);
            const auto& spec = agent.handshake();
            std::cout << "registered " << spec_to_json(spec).dump() << '\n';
            if (!assignment_path.empty()) {
                std::ifstream in(assignment_path);
                if (!in) throw UsageError("cannot read " + assignment_path);
                auto a = default_assignment(spec);
                for (const auto& [name, v] : assignment_from_json(spec, nlohmann::json::parse(in)).values)
                    a.values[name] = v;
                agent.enact(a);
                std::cout << "enacted " << assignment_to_json(a).dump() << '\n';
            }
            if (listen_ms > 0) {
                const auto end = std::chrono::steady_clock::now() + std::chrono::milliseconds(listen_ms);
                while (std::chrono::steady_clock::now() < end) {
                    if (agent.pump() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
                }
                for (const auto& agg : agent.collector().aggregates()) {
                    const auto* m = spec.find_metric(agg.metric_id);
                    std::cout << aggregate_to_json(agg, m ? m->name : std::to_string(agg.metric_id)).dump() << '\n';
                }
            }
            return kExitOk;
        }
        if (*comp_cmd) {
            auto spec = load_spec(space_path);
            auto transport = open_transport_when_ready(transport_path, std::chrono::milliseconds(timeout_ms));
            Component component(spec, transport, Component::Options{true, std::chrono::microseconds(50)});
            component.start();
            std::this_thread::sleep_for(std::chrono::milliseconds(serve_ms));
            component.stop();
            if (auto f = component.failure()) std::rethrow_exception(f);
            std::cout << "registered=" << component.registered() << " applied=" << component.updates_applied()
                      << " rejected=" << component.updates_rejected() << ' '
                      << assignment_to_json(component.tunables().snapshot()).dump() << '\n';
            return kExitOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const AssignmentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
