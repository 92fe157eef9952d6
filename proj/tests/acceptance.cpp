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

// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion; exits non-zero
// when any criterion fails. `--timing` runs only the timing-sensitive spinlock
// sweep and exits 77 when it has to be skipped. `--expect-fail=N[,M]` lists
// criteria known to fail; the exit code is then 0 only when exactly those fail.

#include <autotune/benchmarks/hashtable.hpp>
#include <autotune/benchmarks/spinlock.hpp>
#include <autotune/benchmarks/synthetic.hpp>
#include <autotune/channel/transport.hpp>
#include <autotune/driver.hpp>
#include <autotune/gp.hpp>
#include <autotune/rpi.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace autotune;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

std::string str(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

fs::path scratch_dir() {
    auto p = fs::temp_directory_path() / ("autotune_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

// 1. GP posterior vs an explicit-inverse oracle in extended precision.

constexpr double kGpTolerance = 1e-8;

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

long double oracle_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const gp::Hypers<double>& h) {
    long double r2 = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - b[i];
        r2 += d * d;
    }
    const long double s = std::sqrt(3.0L) * std::sqrt(r2) / h.lengthscale;
    return static_cast<long double>(h.signal_variance) * (1.0L + s) * std::exp(-s);
}

Outcome gp_posterior() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 30);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 5);
        const gp::Hypers<double> h{gp::kLengthscaleGrid[rng() % 6], gp::kSignalVarianceGrid[rng() % 3],
                                   gp::kNoiseVarianceGrid[rng() % 3]};
        Eigen::MatrixXd x(n, d);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
            y[i] = 10.0 * u(rng) - 5.0;
        }
        const auto model = gp::GpModel<double>::fit(x, y, h);

        long double mu = 0, var = 0;
        for (Eigen::Index i = 0; i < n; ++i) mu += y[i];
        mu /= n;
        for (Eigen::Index i = 0; i < n; ++i) var += (y[i] - mu) * (y[i] - mu);
        var /= n;
        const long double scale = var > 0 ? std::sqrt(var) : 1.0L;
        LMatrix k(n, n);
        LVector ys(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            ys[i] = (y[i] - mu) / scale;
            for (Eigen::Index j = 0; j < n; ++j) k(i, j) = oracle_kernel(x.row(i), x.row(j), h);
            k(i, i) += static_cast<long double>(h.noise_variance) + model.jitter();
        }
        const LMatrix kinv = k.fullPivLu().inverse();
        for (int q = 0; q < 10; ++q) {
            Eigen::VectorXd at(d);
            for (Eigen::Index j = 0; j < d; ++j) at[j] = u(rng);
            LVector ks(n);
            for (Eigen::Index i = 0; i < n; ++i) ks[i] = oracle_kernel(x.row(i), at, h);
            const long double m = mu + scale * ks.dot(kinv * ys);
            long double v = static_cast<long double>(h.signal_variance) - ks.dot(kinv * ks);
            if (v < 0) v = 0;
            const auto p = model.predict(at);
            worst = std::max({worst, static_cast<double>(std::abs(p.mean - m)),
                              static_cast<double>(std::abs(p.variance - v))});
        }
    }
    return {worst < kGpTolerance ? Status::pass : Status::fail,
            "max |err| " + str(worst) + " over 50 instances (tol " + str(kGpTolerance) + ")"};
}

// 2. Closed-form EI vs stratified Monte Carlo.

constexpr double kEiTolerance = 1e-3;
constexpr std::size_t kEiSamples = 1'000'000;

double std_normal_quantile(double p) {
    double lo = -12, hi = 12;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome ei_monte_carlo() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // One draw per stratum of (0, 1); the same standard-normal sample serves every triple.
    std::vector<double> z(kEiSamples);
    for (std::size_t i = 0; i < kEiSamples; ++i)
        z[i] = std_normal_quantile((static_cast<double>(i) + u(rng)) / static_cast<double>(kEiSamples));
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        const double mean = 4 * u(rng) - 2, sigma = 0.05 + 1.95 * u(rng), f_best = 4 * u(rng) - 2;
        double acc = 0;
        for (double zi : z) acc += std::max(f_best - gp::kExplorationMargin - (mean + sigma * zi), 0.0);
        const double mc = acc / static_cast<double>(kEiSamples);
        worst = std::max(worst, std::abs(mc - gp::expected_improvement(mean, sigma, f_best)));
    }
    return {worst < kEiTolerance ? Status::pass : Status::fail,
            "max |err| " + str(worst) + " over 20 triples (tol " + str(kEiTolerance) + ")"};
}

// 3. BO on a 1-D quadratic, and BO vs RS at budget 15.

std::vector<double> best_so_far(OptimizerKind kind, std::uint64_t seed, std::size_t budget, double* best_u) {
    Optimizer opt({kind, seed, budget, StrategyMode::all_at_once, 10}, 1, Eigen::VectorXd());
    std::vector<double> trace;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < budget; ++i) {
        auto u = opt.suggest();
        const double y = bench::synthetic_objective(bench::SyntheticFn::quadratic, u);
        if (y < best) {
            best = y;
            if (best_u) *best_u = u[0];
        }
        opt.observe(u, y);
        trace.push_back(best);
    }
    return trace;
}

Outcome bo_convergence() {
    constexpr double kDistance = 0.05;
    double worst = 0;
    std::vector<double> bo15, rs15;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        double u = 0;
        const auto trace = best_so_far(OptimizerKind::bayesian, seed, 30, &u);
        worst = std::max(worst, std::abs(u - 0.7));
        bo15.push_back(trace[14]);
        rs15.push_back(best_so_far(OptimizerKind::random_search, seed, 15, nullptr)[14]);
    }
    const bool ok = worst <= kDistance && median(bo15) <= median(rs15);
    return {ok ? Status::pass : Status::fail, "worst |u* - 0.7| " + str(worst) + "; median best@15 BO " +
                                                  str(median(bo15)) + " vs RS " + str(median(rs15))};
}

// 4. RS on the jagged 2-D surface vs a 1001x1001 grid oracle.

Outcome rs_competitiveness() {
    constexpr double kGap = 0.10;
    constexpr int kGrid = 1001;
    double f_min = std::numeric_limits<double>::infinity(), f_max = -f_min;
    Eigen::VectorXd p(2);
    for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j) {
            p << i / double(kGrid - 1), j / double(kGrid - 1);
            const double f = bench::synthetic_objective(bench::SyntheticFn::jagged, p);
            f_min = std::min(f_min, f);
            f_max = std::max(f_max, f);
        }
    std::vector<double> gaps;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 50; ++i)
            best = std::min(best, bench::synthetic_objective(bench::SyntheticFn::jagged, rs_suggest(2, rng)));
        gaps.push_back((best - f_min) / (f_max - f_min));
    }
    const double m = median(gaps);
    return {m <= kGap ? Status::pass : Status::fail,
            "median normalized gap " + str(m) + " (tol " + str(kGap) + "), grid min " + str(f_min)};
}

// 5. Hash-table tuning lift through the full agent/component path.

Outcome hashtable_lift() {
    constexpr double kLift = 0.20;
    auto config = load_experiment_config(fs::path(AUTOTUNE_SOURCE_DIR) / "configs/hashtable.json");
    const auto base = run_single(config);
    const auto results = optimize(config, nullptr);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : results) best = std::min(best, r.objective.value);
    const double lift = 1.0 - best / base.objective.value;
    return {lift >= kLift ? Status::pass : Status::fail, "default probe_len " + str(base.objective.value) +
                                                             ", best " + str(best) + ", lift " + str(lift * 100) +
                                                             "% over " + std::to_string(results.size()) + " runs"};
}

// 6. Collision counts vs the closed form, sigma from a balls-in-bins simulation.

Outcome collision_model() {
    struct Case {
        std::size_t n, log2;
    };
    std::mt19937_64 rng(606);
    double worst_z = 0;
    for (const auto c : {Case{1000, 10}, Case{5000, 12}, Case{200, 6}}) {
        const std::size_t bins = std::size_t{1} << c.log2;
        std::uniform_int_distribution<std::size_t> pick(0, bins - 1);
        double s = 0, s2 = 0;
        constexpr int kReps = 2000;
        for (int r = 0; r < kReps; ++r) {
            std::vector<char> used(bins, 0);
            double hits = 0;
            for (std::size_t i = 0; i < c.n; ++i) {
                auto& slot = used[pick(rng)];
                hits += slot;
                slot = 1;
            }
            s += hits;
            s2 += hits * hits;
        }
        const double sd = std::sqrt(s2 / kReps - (s / kReps) * (s / kReps));
        const double expected = bench::expected_collisions(c.n, bins);
        for (std::uint64_t seed = 1; seed <= 10; ++seed)
            for (auto fn : {bench::HashFn::multiply_shift, bench::HashFn::fnv1a}) {
                bench::HashTableConfig cfg;
                cfg.bucket_count_log2 = static_cast<int>(c.log2);
                cfg.hash_fn = fn;
                cfg.resizing_enabled = false;
                bench::HashTableWorkload w;
                w.n_keys = c.n;
                w.n_ops = 1;
                const auto m = bench::hashtable_run(cfg, w, seed);
                worst_z = std::max(worst_z, std::abs(static_cast<double>(m.collisions) - expected) / sd);
            }
    }
    return {worst_z <= 5.0 ? Status::pass : Status::fail, "worst |z| " + str(worst_z) + " over 60 runs (tol 5)"};
}

// 7. Spinlock: the best max_spin differs between the lightest and heaviest workload.

Outcome spinlock_sensitivity() {
    const unsigned units = bench::hardware_units();
    if (units < 4) return {Status::skip, std::to_string(units) + " hardware execution units (< 4)"};
    const auto family = bench::workload_family([] {
        auto w = bench::default_contention_workload();
        w.duration_ms = 100;
        return w;
    }());
    std::vector<double> median_log2(family.size());
    for (std::size_t k = 0; k < family.size(); ++k) {
        std::vector<double> argmax;
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            double best = -1;
            int best_log2 = 0;
            for (int e = 0; e <= 16; ++e) {
                bench::SpinlockConfig cfg;
                cfg.max_spin = 1u << e;
                const auto r = bench::spinlock_run(cfg, family[k], rep);
                if (r.throughput_ops_s > best) {
                    best = r.throughput_ops_s;
                    best_log2 = e;
                }
            }
            argmax.push_back(best_log2);
        }
        median_log2[k] = median(argmax);
    }
    std::string detail = "median argmax log2(max_spin) per k:";
    for (double m : median_log2) detail += " " + str(m);
    return {median_log2.front() != median_log2.back() ? Status::pass : Status::fail, detail};
}

// 8. 10^5 random frames through a capacity-8 ring, concurrent producer and consumer.

Outcome ring_stress() {
    constexpr std::uint64_t kFrames = 100000;
    auto transport = channel::Transport::in_process(8);
    auto& ring = transport->component_to_agent();
    const channel::MsgType types[] = {channel::MsgType::telemetry, channel::MsgType::heartbeat,
                                      channel::MsgType::config_update, channel::MsgType::ack};
    std::mt19937_64 rng(808);
    std::vector<std::vector<std::uint8_t>> sent(kFrames);
    for (std::uint64_t i = 0; i < kFrames; ++i) {
        std::vector<std::uint8_t> payload(8 + rng() % (channel::kMaxPayload - 8));
        for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
        channel::le::put_u64(payload.data(), i);
        sent[i] = channel::encode_frame(types[rng() % 4], payload);
    }
    std::thread producer([&] {
        for (const auto& f : sent)
            while (!ring.push(f)) std::this_thread::yield();
    });
    std::uint64_t received = 0, mismatches = 0, crc_failures = 0, out_of_order = 0;
    while (received < kFrames) {
        auto p = ring.pop();
        if (!p) {
            std::this_thread::yield();
            continue;
        }
        try {
            const auto frame = channel::decode_frame(p->bytes);
            if (channel::le::get_u64(frame.payload.data()) != received || p->sequence != received) ++out_of_order;
            if (p->bytes != sent[received]) ++mismatches;
        } catch (const channel::FrameError&) {
            ++crc_failures;
        }
        ++received;
    }
    producer.join();
    const bool ok = mismatches == 0 && crc_failures == 0 && out_of_order == 0;
    return {ok ? Status::pass : Status::fail, std::to_string(received) + " frames, " + std::to_string(mismatches) +
                                                  " mismatched, " + std::to_string(crc_failures) + " crc failures, " +
                                                  std::to_string(out_of_order) + " out of order"};
}

// 9. RPI gate on learned envelopes, in-process and through the CLI.

int run_cli(const std::string& args) {
    const int rc = std::system((std::string(AUTOTUNE_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome rpi_gate_check() {
    ExperimentConfig config;
    config.spec = load_spec(fs::path(AUTOTUNE_SOURCE_DIR) / "configs/hashtable.space.json");
    config.benchmark = "hashtable";
    config.workload = {{"n_keys", 20000}, {"key_dist", "zipf"}};
    config.workload_name = "zipf-20k";
    config.objective = {"probe_len", Direction::minimize, AggregateField::mean};
    const auto dir = scratch_dir();
    const auto store_path = dir / "rpi.runs.jsonl";
    fs::remove(store_path);
    std::vector<RunRecord> training;
    {
        RunStore store(store_path);
        for (int i = 0; i < 5; ++i) training.push_back(run_single(config, &store));
    }
    const auto envelope = learn_envelope(training, 0.10);
    if (!envelope.caps.cpu_ns_max) return {Status::fail, "cpu_ns was not measured in every training run"};
    const auto train_gate = rpi_gate({envelope}, training);

    auto injected = *std::max_element(training.begin(), training.end(), [](const RunRecord& a, const RunRecord& b) {
        return *a.counters.cpu_ns < *b.counters.cpu_ns;
    });
    injected.run_id = new_run_id();
    injected.counters.cpu_ns = *injected.counters.cpu_ns * 2;
    auto with_injected = training;
    with_injected.push_back(injected);
    const auto gate = rpi_gate({envelope}, with_injected);

    save_envelopes(dir / "rpi.json", {envelope});
    const int cli_train = run_cli("rpi check --runs " + store_path.string() + " --rpi " + (dir / "rpi.json").string());
    {
        RunStore store(store_path);
        store.append(injected);
    }
    const int cli_injected =
        run_cli("rpi check --runs " + store_path.string() + " --rpi " + (dir / "rpi.json").string());

    const bool ok = train_gate.exit_code == 0 && gate.exit_code == 2 && gate.failures.size() == 1 &&
                    gate.failures[0].cap == "cpu_ns_max" && cli_train == 0 && cli_injected == 2;
    return {ok ? Status::pass : Status::fail,
            "training exit " + std::to_string(train_gate.exit_code) + ", injected exit " +
                std::to_string(gate.exit_code) + " with " + std::to_string(gate.failures.size()) +
                " violation(s); cli exits " + std::to_string(cli_train) + "/" + std::to_string(cli_injected)};
}

// 10. Two optimize invocations give byte-identical assignment sequences.

std::vector<std::string> assignment_lines(const fs::path& path) {
    std::vector<std::string> out;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(nlohmann::json::parse(line).at("assignment").dump());
    return out;
}

Outcome determinism() {
    const auto dir = scratch_dir();
    const auto config = (fs::path(AUTOTUNE_SOURCE_DIR) / "configs/synthetic.json").string();
    std::vector<std::vector<std::string>> seqs;
    for (int i = 0; i < 2; ++i) {
        const auto out = dir / ("det" + std::to_string(i) + ".jsonl");
        fs::remove(out);
        const int rc = run_cli("optimize --config " + config + " --out " + out.string());
        if (rc != 0) return {Status::fail, "optimize exited " + std::to_string(rc)};
        seqs.push_back(assignment_lines(out));
    }
    const bool ok = !seqs[0].empty() && seqs[0] == seqs[1];
    return {ok ? Status::pass : Status::fail,
            std::to_string(seqs[0].size()) + " and " + std::to_string(seqs[1].size()) + " assignments, " +
                (seqs[0] == seqs[1] ? "identical" : "different")};
}

Outcome not_requested() { return {Status::skip, "timing-sensitive; run with --timing"}; }

}  // namespace

int main(int argc, char** argv) {
    bool timing = false;
    std::set<int> expected_failures;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--timing") {
            timing = true;
        } else if (arg.rfind("--expect-fail=", 0) == 0) {
            std::istringstream list(arg.substr(14));
            for (std::string id; std::getline(list, id, ',');) expected_failures.insert(std::stoi(id));
        } else {
            std::fprintf(stderr, "usage: %s [--timing] [--expect-fail=N[,M...]]\n", argv[0]);
            return 2;
        }
    }
    std::vector<Criterion> criteria;
    if (timing) {
        criteria = {{7, "spinlock_sensitivity", 300, spinlock_sensitivity}};
    } else {
        criteria = {{1, "gp_posterior", 10, gp_posterior},
                    {2, "ei_monte_carlo", 30, ei_monte_carlo},
                    {3, "bo_convergence", 30, bo_convergence},
                    {4, "rs_competitiveness", 30, rs_competitiveness},
                    {5, "hashtable_lift", 120, hashtable_lift},
                    {6, "collision_model", 10, collision_model},
                    {7, "spinlock_sensitivity", 300, not_requested},
                    {8, "ring_stress", 10, ring_stress},
                    {9, "rpi_gate", 5, rpi_gate_check},
                    {10, "determinism", 10, determinism}};
    }
    int skips = 0;
    std::set<int> failed;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (o.status == Status::pass && secs > c.limit_s) {
            o.status = Status::fail;
            o.detail += "; runtime over " + str(c.limit_s) + " s";
        }
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        std::printf("%s %2d %-22s %7.2fs  %s\n", tag, c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
        if (o.status == Status::fail) failed.insert(c.id);
        skips += o.status == Status::skip;
    }
    if (!expected_failures.empty()) {
        std::printf("expected failures:");
        for (int id : expected_failures) std::printf(" %d", id);
        std::printf("\n");
        return failed == expected_failures ? 0 : 1;
    }
    if (!failed.empty()) return 1;
    return timing && skips ? 77 : 0;
}
