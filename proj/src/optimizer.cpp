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

#include <autotune/optimizer.hpp>

#include <algorithm>

namespace autotune {

namespace {

// Draws either a full uniform point or, when `active` is set, `base` with one
// coordinate redrawn. Both forms consume the generator identically in 1-D.
Eigen::VectorXd uniform_candidate(std::size_t dim, Rng& rng, std::optional<std::size_t> active,
                                  const Eigen::VectorXd& base) {
    if (!active) return rs_suggest(dim, rng);
    Eigen::VectorXd p = base;
    p[static_cast<Eigen::Index>(*active)] = rng.uniform01();
    return p;
}

Eigen::VectorXd perturbed_candidate(const Eigen::VectorXd& center, Rng& rng, std::optional<std::size_t> active) {
    Eigen::VectorXd p = center;
    auto jiggle = [&](Eigen::Index i) { p[i] = std::clamp(p[i] + rng.normal(kLocalCandidateStddev), 0.0, 1.0); };
    if (active)
        jiggle(static_cast<Eigen::Index>(*active));
    else
        for (Eigen::Index i = 0; i < p.size(); ++i) jiggle(i);
    return p;
}

Eigen::VectorXd suggest_impl(OptimizerKind kind, std::size_t dim, const std::vector<Observation>& observations,
                             Rng& rng, std::optional<std::size_t> active, const Eigen::VectorXd& base,
                             BoDiagnostics* diagnostics) {
    if (kind == OptimizerKind::random_search || observations.size() < kWarmupObservations) {
        if (diagnostics) diagnostics->warmup = kind == OptimizerKind::bayesian;
        return uniform_candidate(dim, rng, active, base);
    }

    const auto n = static_cast<Eigen::Index>(observations.size());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = observations[static_cast<std::size_t>(i)].u.transpose();
        y[i] = observations[static_cast<std::size_t>(i)].y;
    }
    const auto hypers = gp::select_hypers<double>(x, y);
    const auto model = gp::GpModel<double>::fit(x, y, hypers);
    const auto& incumbent = observations[*incumbent_index(observations)];
    const double f_best = incumbent.y;

    Eigen::VectorXd best_point;
    double best_ei = -1.0;
    std::uint64_t floors = 0;
    auto consider = [&](Eigen::VectorXd candidate) {
        const auto p = model.predict(candidate);
        if (p.floored) ++floors;
        const double ei =
            gp::expected_improvement(model.standardize(p.mean), std::sqrt(p.variance), model.standardize(f_best));
        if (diagnostics && diagnostics->keep_candidates) {
            diagnostics->candidates.push_back(candidate);
            diagnostics->candidate_ei.push_back(ei);
        }
        if (ei > best_ei) {
            best_ei = ei;
            best_point = std::move(candidate);
        }
    };
    for (std::size_t i = 0; i < kUniformCandidates; ++i) consider(uniform_candidate(dim, rng, active, base));
    for (std::size_t i = 0; i < kLocalCandidates; ++i) consider(perturbed_candidate(incumbent.u, rng, active));

    if (diagnostics) {
        diagnostics->warmup = false;
        diagnostics->hypers = hypers;
        diagnostics->best_ei = best_ei;
        diagnostics->variance_floor_events += floors;
    }
    return best_point;
}

}  // namespace

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::bayesian ? "bo" : "rs"; }

const char* to_string(StrategyMode mode) {
    return mode == StrategyMode::one_at_a_time ? "one_at_a_time" : "all_at_once";
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "rs" || s == "random") return OptimizerKind::random_search;
    if (s == "bo" || s == "bayesian") return OptimizerKind::bayesian;
    throw SpecError("unknown optimizer kind '" + s + "' (expected rs or bo)");
}

StrategyMode strategy_mode_from_string(const std::string& s) {
    if (s == "all_at_once") return StrategyMode::all_at_once;
    if (s == "one_at_a_time") return StrategyMode::one_at_a_time;
    throw SpecError("unknown strategy '" + s + "' (expected all_at_once or one_at_a_time)");
}

std::optional<std::size_t> incumbent_index(const std::vector<Observation>& observations) {
    if (observations.empty()) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < observations.size(); ++i)
        if (observations[i].y < observations[best].y) best = i;
    return best;
}

Eigen::VectorXd rs_suggest(std::size_t dim, Rng& rng) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.uniform01();
    return u;
}

Eigen::VectorXd bo_suggest(std::size_t dim, const std::vector<Observation>& observations, Rng& rng,
                           BoDiagnostics* diagnostics) {
    return suggest_impl(OptimizerKind::bayesian, dim, observations, rng, std::nullopt, Eigen::VectorXd(), diagnostics);
}

Eigen::VectorXd strategy_next(Strategy& strategy, OptimizerKind kind, std::size_t dim,
                              const std::vector<Observation>& observations, Rng& rng, const Eigen::VectorXd& anchor,
                              BoDiagnostics* diagnostics) {
    if (strategy.slice == 0) throw SpecError("strategy slice must be positive");
    std::optional<std::size_t> active;
    Eigen::VectorXd base;
    if (strategy.mode == StrategyMode::one_at_a_time && dim > 0) {
        active = strategy.cursor(dim);
        const auto best = incumbent_index(observations);
        base = best ? observations[*best].u : anchor;
    }
    auto u = suggest_impl(kind, dim, observations, rng, active, base, diagnostics);
    ++strategy.issued;
    return u;
}

nlohmann::json optimizer_config_to_json(const OptimizerConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"seed", c.seed},
            {"budget", c.budget},
            {"strategy", to_string(c.strategy)},
            {"slice", c.slice}};
}

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
    OptimizerConfig c;
    c.kind = optimizer_kind_from_string(j.value("kind", std::string("rs")));
    c.seed = j.value("seed", std::uint64_t{0});
    c.budget = j.value("budget", std::size_t{0});
    c.strategy = strategy_mode_from_string(j.value("strategy", std::string("all_at_once")));
    c.slice = j.value("slice", std::size_t{10});
    if (c.slice == 0) throw SpecError("optimizer.slice must be positive");
    return c;
}

Optimizer::Optimizer(OptimizerConfig config, std::size_t dim, Eigen::VectorXd anchor)
    : config_(config), dim_(dim), anchor_(std::move(anchor)), rng_(config.seed) {
    strategy_.mode = config.strategy;
    strategy_.slice = config.slice;
    if (static_cast<std::size_t>(anchor_.size()) != dim_) anchor_ = Eigen::VectorXd::Constant(dim_, 0.5);
}

Eigen::VectorXd Optimizer::suggest() {
    BoDiagnostics diag;
    auto u = strategy_next(strategy_, config_.kind, dim_, observations_, rng_, anchor_, &diag);
    floor_events_ += diag.variance_floor_events;
    return u;
}

void Optimizer::observe(Eigen::VectorXd u, double y) {
    if (!std::isfinite(y)) throw ModelError("objective value is not finite");
    observations_.push_back({std::move(u), y});
}

}  // namespace autotune
