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

#include <autotune/benchmarks/synthetic.hpp>
#include <autotune/optimizer.hpp>

#include <doctest.h>

#include <cmath>

using namespace autotune;

namespace {

ComponentSpec integer_space(double lo, double hi) {
    ComponentSpec s;
    s.component_id = 1;
    s.name = "s";
    TunableDef t;
    t.name = "n";
    t.param_id = 1;
    t.kind = TunableKind::integer;
    t.lower = lo;
    t.upper = hi;
    t.default_value = static_cast<std::int64_t>(lo);
    s.tunables = {t};
    return s;
}

double quadratic(const Eigen::VectorXd& u) { return (u.array() - 0.7).square().sum(); }

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("uniform draws use the top 53 bits of mt19937_64") {
    Rng a(5);
    std::mt19937_64 ref(5);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == static_cast<double>(ref() >> 11) / 9007199254740992.0);
}

TEST_CASE("same seed, same random-search sequence") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(rs_suggest(3, a) == rs_suggest(3, b));
}

TEST_CASE("single-category space always decodes to that category") {
    ComponentSpec s;
    s.component_id = 1;
    TunableDef t;
    t.name = "only";
    t.param_id = 1;
    t.kind = TunableKind::categorical;
    t.categories = {"one"};
    t.default_value = std::string("one");
    s.tunables = {t};
    Rng rng(1);
    for (int i = 0; i < 50; ++i)
        CHECK(std::get<std::string>(decode_unit(s, rs_suggest(1, rng)).values.at("only")) == "one");
}

TEST_CASE("decoded integer suggestions are uniform within a binomial bound") {
    const auto s = integer_space(1, 10);
    Rng rng(99);
    constexpr int kDraws = 100000;
    std::array<int, 10> counts{};
    for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(std::get<std::int64_t>(decode_unit(s, rs_suggest(1, rng)).values.at("n")) - 1)];
    // Rounding to the nearest integer gives the end values half-width cells.
    for (int v = 1; v <= 10; ++v) {
        const double p = (v == 1 || v == 10) ? 0.5 / 9.0 : 1.0 / 9.0;
        const double expected = kDraws * p;
        const double sd = std::sqrt(kDraws * p * (1 - p));
        CHECK_MESSAGE(std::abs(counts[static_cast<std::size_t>(v - 1)] - expected) <= 4 * sd, "value " << v);
    }
}

TEST_CASE("BO with no observations equals random search") {
    Rng a(7), b(7);
    BoDiagnostics d;
    CHECK(bo_suggest(4, {}, a, &d) == rs_suggest(4, b));
    CHECK(d.warmup);
}

TEST_CASE("BO returns the EI argmax over all 576 candidates") {
    Rng rng(31);
    std::vector<Observation> obs;
    for (int i = 0; i < 8; ++i) {
        auto u = rs_suggest(2, rng);
        obs.push_back({u, quadratic(u)});
    }
    BoDiagnostics d;
    d.keep_candidates = true;
    const auto u = bo_suggest(2, obs, rng, &d);
    REQUIRE(d.candidates.size() == kUniformCandidates + kLocalCandidates);
    CHECK_FALSE(d.warmup);
    const auto best = std::max_element(d.candidate_ei.begin(), d.candidate_ei.end());
    CHECK(*best == d.best_ei);
    CHECK(d.candidates[static_cast<std::size_t>(best - d.candidate_ei.begin())] == u);
    for (double ei : d.candidate_ei) CHECK(ei <= d.best_ei);
    for (const auto& c : d.candidates) CHECK(((c.array() >= 0.0) && (c.array() <= 1.0)).all());
}

TEST_CASE("BO is deterministic given seed and observations") {
    auto run = [](std::uint64_t seed) {
        Optimizer opt({OptimizerKind::bayesian, seed, 12, StrategyMode::all_at_once, 10}, 2, Eigen::VectorXd());
        std::vector<Eigen::VectorXd> seq;
        for (int i = 0; i < 12; ++i) {
            auto u = opt.suggest();
            opt.observe(u, quadratic(u));
            seq.push_back(u);
        }
        return seq;
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}

TEST_CASE("BO finds the 1-D quadratic minimum within 30 steps") {
    for (std::uint64_t seed : {1, 2, 3}) {
        Optimizer opt({OptimizerKind::bayesian, seed, 30, StrategyMode::all_at_once, 10}, 1, Eigen::VectorXd());
        for (int i = 0; i < 30; ++i) {
            auto u = opt.suggest();
            opt.observe(u, quadratic(u));
        }
        const auto& best = opt.observations()[*incumbent_index(opt.observations())];
        CHECK(std::abs(best.u[0] - 0.7) <= 0.05);
    }
}

TEST_CASE("strategies coincide in one dimension") {
    for (auto kind : {OptimizerKind::random_search, OptimizerKind::bayesian}) {
        Optimizer a({kind, 9, 15, StrategyMode::all_at_once, 3}, 1, Eigen::VectorXd::Constant(1, 0.5));
        Optimizer b({kind, 9, 15, StrategyMode::one_at_a_time, 3}, 1, Eigen::VectorXd::Constant(1, 0.5));
        for (int i = 0; i < 15; ++i) {
            const auto ua = a.suggest();
            const auto ub = b.suggest();
            REQUIRE(ua == ub);
            a.observe(ua, quadratic(ua));
            b.observe(ub, quadratic(ub));
        }
    }
}

TEST_CASE("one-at-a-time varies only the cursor coordinate") {
    Optimizer opt({OptimizerKind::random_search, 4, 20, StrategyMode::one_at_a_time, 10}, 2,
                  Eigen::VectorXd::Constant(2, 0.25));
    for (int i = 0; i < 20; ++i) {
        const auto& obs = opt.observations();
        const Eigen::VectorXd incumbent = obs.empty() ? Eigen::VectorXd::Constant(2, 0.25)
                                                      : obs[*incumbent_index(obs)].u;
        const auto u = opt.suggest();
        const int frozen = i < 10 ? 1 : 0;
        CHECK(u[frozen] == incumbent[frozen]);
        opt.observe(u, quadratic(u));
    }
}

TEST_CASE("one-at-a-time BO solves a separable bowl") {
    Optimizer opt({OptimizerKind::bayesian, 11, 40, StrategyMode::one_at_a_time, 10}, 2,
                  Eigen::VectorXd::Constant(2, 0.5));
    for (int i = 0; i < 40; ++i) {
        auto u = opt.suggest();
        opt.observe(u, u.squaredNorm());
    }
    const auto& best = opt.observations()[*incumbent_index(opt.observations())];
    CHECK(best.u.norm() <= 0.05);
}

TEST_CASE("observe refuses non-finite objectives") {
    Optimizer opt({}, 1, Eigen::VectorXd());
    const auto u = opt.suggest();
    CHECK_THROWS(opt.observe(u, std::nan("")));
}

TEST_CASE("config JSON round trip and validation") {
    const OptimizerConfig c{OptimizerKind::bayesian, 17, 40, StrategyMode::one_at_a_time, 4};
    const auto back = optimizer_config_from_json(optimizer_config_to_json(c));
    CHECK(back.kind == c.kind);
    CHECK(back.seed == 17);
    CHECK(back.budget == 40);
    CHECK(back.strategy == c.strategy);
    CHECK(back.slice == 4);
    CHECK_THROWS_AS(optimizer_config_from_json({{"kind", "sa"}}), SpecError);
    CHECK_THROWS_AS(optimizer_config_from_json({{"slice", 0}}), SpecError);
}

TEST_CASE("synthetic objectives") {
    CHECK(bench::synthetic_objective(bench::SyntheticFn::quadratic, Eigen::VectorXd::Constant(3, 0.7)) == 0.0);
    CHECK(bench::synthetic_objective(bench::SyntheticFn::sphere, Eigen::VectorXd::Constant(2, 0.5)) == 0.5);
    CHECK(std::isfinite(bench::synthetic_objective(bench::SyntheticFn::jagged, Eigen::VectorXd::Constant(2, 0.3))));
}

}  // TEST_SUITE
