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

#include <autotune/gp.hpp>
#include <autotune/tunables.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace autotune {

/// Seeded generator shared by every optimizer. Uniform draws use the top 53 bits
/// of a 64-bit Mersenne twister so sequences are identical wherever mt19937_64 is.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double normal(double stddev) { return std::normal_distribution<double>(0.0, stddev)(engine_); }

private:
    std::mt19937_64 engine_;
};

/// One evaluated point. Objectives are always minimized; maximized metrics are
/// negated before they get here.
struct Observation {
    Eigen::VectorXd u;
    double y = 0.0;
};

enum class OptimizerKind { random_search, bayesian };
enum class StrategyMode { all_at_once, one_at_a_time };

const char* to_string(OptimizerKind kind);
const char* to_string(StrategyMode mode);
OptimizerKind optimizer_kind_from_string(const std::string& s);
StrategyMode strategy_mode_from_string(const std::string& s);

inline constexpr std::size_t kWarmupObservations = 5;
inline constexpr std::size_t kUniformCandidates = 512;
inline constexpr std::size_t kLocalCandidates = 64;
inline constexpr double kLocalCandidateStddev = 0.1;

/// Index of the best (lowest y) observation, earliest on ties.
std::optional<std::size_t> incumbent_index(const std::vector<Observation>& observations);

/// Uniform point in [0,1]^dim.
Eigen::VectorXd rs_suggest(std::size_t dim, Rng& rng);

struct BoDiagnostics {
    bool warmup = false;
    gp::Hypers<double> hypers;
    double best_ei = 0.0;
    std::uint64_t variance_floor_events = 0;
    std::vector<Eigen::VectorXd> candidates;  // only filled when keep_candidates is set
    std::vector<double> candidate_ei;
    bool keep_candidates = false;
};

/// Candidate-set EI maximization. With fewer than five observations this is a
/// random-search draw. Otherwise hyperparameters are picked by grid search, a GP
/// is fitted and EI is scored at 512 uniform points followed by 64 Gaussian
/// perturbations (std 0.1, clamped) of the incumbent; the first maximizer wins.
Eigen::VectorXd bo_suggest(std::size_t dim, const std::vector<Observation>& observations, Rng& rng,
                           BoDiagnostics* diagnostics = nullptr);

struct Strategy {
    StrategyMode mode = StrategyMode::all_at_once;
    std::size_t slice = 10;
    std::uint64_t issued = 0;

    /// Coordinate the next one-at-a-time suggestion varies.
    std::size_t cursor(std::size_t dim) const { return dim == 0 ? 0 : (issued / slice) % dim; }
};

/// Next point under `strategy`. In one_at_a_time mode only the cursor coordinate
/// is searched; the rest are copied from the incumbent (or from `anchor` before
/// any observation exists). Advances the strategy's suggestion counter.
Eigen::VectorXd strategy_next(Strategy& strategy, OptimizerKind kind, std::size_t dim,
                              const std::vector<Observation>& observations, Rng& rng,
                              const Eigen::VectorXd& anchor, BoDiagnostics* diagnostics = nullptr);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::random_search;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    StrategyMode strategy = StrategyMode::all_at_once;
    std::size_t slice = 10;
};

nlohmann::json optimizer_config_to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

/// Suggest/observe loop state for one episode. The suggestion sequence is a pure
/// function of the seed and the observations fed back.
class Optimizer {
public:
    Optimizer(OptimizerConfig config, std::size_t dim, Eigen::VectorXd anchor);

    Eigen::VectorXd suggest();
    void observe(Eigen::VectorXd u, double y);

    const std::vector<Observation>& observations() const noexcept { return observations_; }
    const OptimizerConfig& config() const noexcept { return config_; }
    std::uint64_t variance_floor_events() const noexcept { return floor_events_; }

private:
    OptimizerConfig config_;
    std::size_t dim_;
    Eigen::VectorXd anchor_;
    Rng rng_;
    Strategy strategy_;
    std::vector<Observation> observations_;
    std::uint64_t floor_events_ = 0;
};

}  // namespace autotune
