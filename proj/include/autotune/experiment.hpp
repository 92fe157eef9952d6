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

#include <autotune/objective.hpp>
#include <autotune/optimizer.hpp>
#include <autotune/telemetry.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace autotune {

inline constexpr int kRunSchemaVersion = 1;

struct ObjectiveResult {
    std::string metric;
    Direction direction = Direction::minimize;
    AggregateField aggregate = AggregateField::mean;
    double value = 0.0;      ///< in the user's orientation
    double canonical = 0.0;  ///< minimized form (negated when maximizing)
};

struct NamedAggregate {
    std::string name;
    std::string unit;
    MetricAggregate aggregate;
};

/// One experiment run: what was tried, what was measured, and how it was chosen.
struct RunRecord {
    std::string run_id;
    std::string episode_id;
    std::uint64_t iteration = 0;
    std::string timestamp_utc;
    std::string component;
    std::string benchmark;
    std::string workload_name;
    nlohmann::json workload = nlohmann::json::object();
    nlohmann::json assignment = nlohmann::json::object();
    ObjectiveResult objective;
    std::vector<NamedAggregate> metrics;
    CounterDelta counters;
    std::string optimizer_kind;
    std::uint64_t seed = 0;
    std::string strategy;
    int schema_version = kRunSchemaVersion;

    const NamedAggregate* find_metric(const std::string& name) const;
};

nlohmann::json run_record_to_json(const RunRecord& r);
/// Throws StoreError on missing fields, wrong types or an unknown schema_version.
RunRecord run_record_from_json(const nlohmann::json& j);

/// 128 random bits as 32 lowercase hex digits.
std::string new_run_id();
std::string new_episode_id();
std::string utc_timestamp();

struct RunFilter {
    std::optional<std::string> episode;
    std::optional<std::string> benchmark;
};

struct LoadResult {
    std::vector<RunRecord> records;
    std::vector<std::string> warnings;
    std::size_t rejected_lines = 0;  ///< unparsable or unsupported complete lines
    bool truncated_tail = false;     ///< a final line without its newline was ignored
};

/// Append-only store of run records, one JSON object per line.
///
/// Appends write one complete line and flush before returning. A crash can leave
/// a partial last line; loading ignores it, and the next append first terminates
/// it so it is reported as a single rejected line instead of corrupting a record.
class RunStore {
public:
    explicit RunStore(std::filesystem::path path);

    void append(const RunRecord& record);
    LoadResult load(const RunFilter& filter = {}) const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Parses store text; exposed for callers holding the bytes already.
LoadResult parse_runs(const std::string& text, const RunFilter& filter = {});
LoadResult load_runs(const std::filesystem::path& path, const RunFilter& filter = {});

struct EpisodeReport {
    std::string episode_id;
    std::string component;
    std::string benchmark;
    std::string optimizer_kind;
    std::string strategy;
    std::uint64_t seed = 0;
    Direction direction = Direction::minimize;
    std::string metric;
    std::uint64_t best_iteration = 0;
    std::string best_run_id;
    double best_value = 0.0;      ///< user orientation
    double best_canonical = 0.0;
    nlohmann::json best_assignment;
    std::vector<std::uint64_t> iterations;
    std::vector<double> objective;        ///< canonical, per run in append order
    std::vector<double> trace_canonical;  ///< prefix minimum of `objective`
};

struct ComparisonRow {
    std::string optimizer_kind;
    std::string strategy;
    std::size_t episodes = 0;
    double median_best = 0.0;  ///< user orientation
    double mean_best = 0.0;
};

struct Report {
    std::vector<EpisodeReport> episodes;
    std::vector<ComparisonRow> comparison;
};

/// Best run per episode (lowest canonical objective, earliest iteration on ties),
/// the prefix-best convergence trace, and per (optimizer, strategy) summaries.
/// Throws Error on empty input.
Report make_report(const std::vector<RunRecord>& runs);

enum class ReportFormat { table, json, csv };
ReportFormat report_format_from_string(const std::string& s);
std::string format_report(const Report& report, ReportFormat format);

}  // namespace autotune
