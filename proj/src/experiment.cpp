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

#include <autotune/experiment.hpp>

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace autotune {

namespace {

std::string random_hex(int words32) {
    std::random_device rd;
    std::string out;
    char buf[9];
    for (int i = 0; i < words32; ++i) {
        std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
        out += buf;
    }
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

const char* to_string(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }

const char* to_string(AggregateField f) {
    switch (f) {
        case AggregateField::mean: return "mean";
        case AggregateField::p50: return "p50";
        case AggregateField::p95: return "p95";
        case AggregateField::p99: return "p99";
        case AggregateField::sum: return "sum";
        case AggregateField::count_rate: return "count-rate";
    }
    return "?";
}

Direction direction_from_string(const std::string& s) {
    if (s == "minimize" || s == "min") return Direction::minimize;
    if (s == "maximize" || s == "max") return Direction::maximize;
    throw SpecError("unknown objective direction '" + s + "'");
}

AggregateField aggregate_field_from_string(const std::string& s) {
    if (s == "mean") return AggregateField::mean;
    if (s == "p50") return AggregateField::p50;
    if (s == "p95") return AggregateField::p95;
    if (s == "p99") return AggregateField::p99;
    if (s == "sum") return AggregateField::sum;
    if (s == "count-rate" || s == "count_rate") return AggregateField::count_rate;
    throw SpecError("unknown aggregate field '" + s + "'");
}

double objective_value(AggregateField field, const MetricAggregate& agg, std::uint64_t wall_ns) {
    switch (field) {
        case AggregateField::mean: return agg.mean();
        case AggregateField::p50: return agg.p50;
        case AggregateField::p95: return agg.p95;
        case AggregateField::p99: return agg.p99;
        case AggregateField::sum: return agg.sum;
        case AggregateField::count_rate:
            if (wall_ns == 0) throw Error("count-rate objective needs a positive run wall time");
            return static_cast<double>(agg.count) / (static_cast<double>(wall_ns) * 1e-9);
    }
    return 0.0;
}

nlohmann::json objective_to_json(const Objective& o) {
    return {{"metric", o.metric}, {"direction", to_string(o.direction)}, {"aggregate", to_string(o.field)}};
}

Objective objective_from_json(const nlohmann::json& j) {
    Objective o;
    o.metric = j.at("metric").get<std::string>();
    o.direction = direction_from_string(j.value("direction", std::string("minimize")));
    o.field = aggregate_field_from_string(j.value("aggregate", std::string("mean")));
    return o;
}

const NamedAggregate* RunRecord::find_metric(const std::string& n) const {
    for (const auto& m : metrics)
        if (m.name == n) return &m;
    return nullptr;
}

nlohmann::json run_record_to_json(const RunRecord& r) {
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& m : r.metrics) {
        auto j = aggregate_to_json(m.aggregate, m.name);
        j["unit"] = m.unit;
        metrics.push_back(std::move(j));
    }
    return {
        {"schema_version", r.schema_version},
        {"run_id", r.run_id},
        {"episode_id", r.episode_id},
        {"iteration", r.iteration},
        {"timestamp_utc", r.timestamp_utc},
        {"component", r.component},
        {"benchmark", r.benchmark},
        {"workload_name", r.workload_name},
        {"workload", r.workload},
        {"assignment", r.assignment},
        {"objective",
         {{"metric", r.objective.metric},
          {"direction", to_string(r.objective.direction)},
          {"aggregate", to_string(r.objective.aggregate)},
          {"value", r.objective.value},
          {"canonical", r.objective.canonical}}},
        {"metrics", metrics},
        {"counters", counters_to_json(r.counters)},
        {"optimizer", {{"kind", r.optimizer_kind}, {"seed", r.seed}, {"strategy", r.strategy}}},
    };
}

RunRecord run_record_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw StoreError("run record is not a JSON object");
        const int version = j.at("schema_version").get<int>();
        if (version != kRunSchemaVersion)
            throw StoreError("unsupported schema_version " + std::to_string(version));
        RunRecord r;
        r.schema_version = version;
        r.run_id = j.at("run_id").get<std::string>();
        r.episode_id = j.at("episode_id").get<std::string>();
        r.iteration = j.at("iteration").get<std::uint64_t>();
        r.timestamp_utc = j.value("timestamp_utc", std::string());
        r.component = j.value("component", std::string());
        r.benchmark = j.at("benchmark").get<std::string>();
        r.workload_name = j.value("workload_name", r.benchmark);
        r.workload = j.value("workload", nlohmann::json::object());
        r.assignment = j.at("assignment");
        const auto& o = j.at("objective");
        r.objective.metric = o.at("metric").get<std::string>();
        r.objective.direction = direction_from_string(o.at("direction").get<std::string>());
        r.objective.aggregate = aggregate_field_from_string(o.at("aggregate").get<std::string>());
        r.objective.value = o.at("value").get<double>();
        r.objective.canonical = o.value("canonical", canonical_value(r.objective.direction, r.objective.value));
        for (const auto& m : j.value("metrics", nlohmann::json::array()))
            r.metrics.push_back({m.at("name").get<std::string>(), m.value("unit", std::string()), aggregate_from_json(m)});
        r.counters = counters_from_json(j.value("counters", nlohmann::json::object()));
        const auto& opt = j.at("optimizer");
        r.optimizer_kind = opt.value("kind", std::string());
        r.seed = opt.value("seed", std::uint64_t{0});
        r.strategy = opt.value("strategy", std::string());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(std::string("malformed run record: ") + e.what());
    } catch (const SpecError& e) {
        throw StoreError(std::string("malformed run record: ") + e.what());
    }
}

std::string new_run_id() { return random_hex(4); }
std::string new_episode_id() { return random_hex(2); }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

RunStore::RunStore(std::filesystem::path path) : path_(std::move(path)) {
    bool needs_newline = false;
    {
        std::ifstream in(path_, std::ios::binary | std::ios::ate);
        if (in && in.tellg() > 0) {
            in.seekg(-1, std::ios::end);
            char last = 0;
            in.get(last);
            needs_newline = last != '\n';
        }
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw StoreError("cannot open run store " + path_.string() + " for appending");
    if (needs_newline) {
        out_ << '\n';
        out_.flush();
    }
}

void RunStore::append(const RunRecord& record) {
    if (!std::isfinite(record.objective.value)) throw StoreError("run record objective is not finite");
    out_ << run_record_to_json(record).dump() << '\n';
    out_.flush();
    if (!out_) throw StoreError("write to run store " + path_.string() + " failed");
}

LoadResult RunStore::load(const RunFilter& filter) const { return load_runs(path_, filter); }

LoadResult parse_runs(const std::string& text, const RunFilter& filter) {
    LoadResult result;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        ++line_no;
        if (nl == std::string::npos) {
            result.truncated_tail = true;
            result.warnings.push_back("line " + std::to_string(line_no) + ": truncated final line ignored");
            break;
        }
        const std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            auto record = run_record_from_json(nlohmann::json::parse(line));
            if (filter.episode && record.episode_id != *filter.episode) continue;
            if (filter.benchmark && record.benchmark != *filter.benchmark) continue;
            result.records.push_back(std::move(record));
        } catch (const std::exception& e) {
            ++result.rejected_lines;
            result.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return result;
}

LoadResult load_runs(const std::filesystem::path& path, const RunFilter& filter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot read run store " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_runs(buf.str(), filter);
}

Report make_report(const std::vector<RunRecord>& runs) {
    if (runs.empty()) throw Error("report needs at least one run");
    Report report;
    std::map<std::string, std::size_t> index;
    for (const auto& r : runs) {
        auto [it, fresh] = index.try_emplace(r.episode_id, report.episodes.size());
        if (fresh) {
            EpisodeReport e;
            e.episode_id = r.episode_id;
            e.component = r.component;
            e.benchmark = r.benchmark;
            e.optimizer_kind = r.optimizer_kind;
            e.strategy = r.strategy;
            e.seed = r.seed;
            e.direction = r.objective.direction;
            e.metric = r.objective.metric;
            report.episodes.push_back(std::move(e));
        }
        auto& e = report.episodes[it->second];
        const double y = r.objective.canonical;
        const bool better = e.objective.empty() || y < e.best_canonical ||
                            (y == e.best_canonical && r.iteration < e.best_iteration);
        if (better) {
            e.best_canonical = y;
            e.best_value = r.objective.value;
            e.best_iteration = r.iteration;
            e.best_run_id = r.run_id;
            e.best_assignment = r.assignment;
        }
        e.iterations.push_back(r.iteration);
        e.objective.push_back(y);
        e.trace_canonical.push_back(e.trace_canonical.empty() ? y : std::min(e.trace_canonical.back(), y));
    }

    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& e : report.episodes) groups[{e.optimizer_kind, e.strategy}].push_back(e.best_value);
    for (const auto& [key, bests] : groups) {
        ComparisonRow row;
        row.optimizer_kind = key.first;
        row.strategy = key.second;
        row.episodes = bests.size();
        row.median_best = median(bests);
        double sum = 0.0;
        for (double b : bests) sum += b;
        row.mean_best = sum / static_cast<double>(bests.size());
        report.comparison.push_back(row);
    }
    return report;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "table") return ReportFormat::table;
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw SpecError("unknown report format '" + s + "'");
}

std::string format_report(const Report& report, ReportFormat format) {
    auto user = [](const EpisodeReport& e, double canonical) { return canonical_value(e.direction, canonical); };
    std::ostringstream os;
    switch (format) {
        case ReportFormat::json: {
            nlohmann::json episodes = nlohmann::json::array();
            for (const auto& e : report.episodes) {
                std::vector<double> trace;
                for (double t : e.trace_canonical) trace.push_back(user(e, t));
                episodes.push_back({{"episode_id", e.episode_id},
                                    {"component", e.component},
                                    {"benchmark", e.benchmark},
                                    {"optimizer", e.optimizer_kind},
                                    {"strategy", e.strategy},
                                    {"seed", e.seed},
                                    {"metric", e.metric},
                                    {"direction", to_string(e.direction)},
                                    {"runs", e.objective.size()},
                                    {"best",
                                     {{"iteration", e.best_iteration},
                                      {"run_id", e.best_run_id},
                                      {"value", e.best_value},
                                      {"assignment", e.best_assignment}}},
                                    {"trace", trace}});
            }
            nlohmann::json comparison = nlohmann::json::array();
            for (const auto& c : report.comparison)
                comparison.push_back({{"optimizer", c.optimizer_kind},
                                      {"strategy", c.strategy},
                                      {"episodes", c.episodes},
                                      {"median_best", c.median_best},
                                      {"mean_best", c.mean_best}});
            os << nlohmann::json{{"episodes", episodes}, {"comparison", comparison}}.dump(2) << '\n';
            break;
        }
        case ReportFormat::csv: {
            os << "episode_id,optimizer,strategy,seed,iteration,objective,best_so_far\n";
            for (const auto& e : report.episodes)
                for (std::size_t i = 0; i < e.objective.size(); ++i)
                    os << csv_escape(e.episode_id) << ',' << csv_escape(e.optimizer_kind) << ','
                       << csv_escape(e.strategy) << ',' << e.seed << ',' << e.iterations[i] << ','
                       << fmt(user(e, e.objective[i])) << ',' << fmt(user(e, e.trace_canonical[i])) << '\n';
            break;
        }
        case ReportFormat::table: {
            os << std::left << std::setw(18) << "episode" << std::setw(6) << "opt" << std::setw(15) << "strategy"
               << std::setw(8) << "runs" << std::setw(10) << "best_it" << "best " << "\n";
            for (const auto& e : report.episodes) {
                os << std::setw(18) << e.episode_id << std::setw(6) << e.optimizer_kind << std::setw(15)
                   << e.strategy << std::setw(8) << e.objective.size() << std::setw(10) << e.best_iteration
                   << fmt(e.best_value) << "  (" << to_string(e.direction) << ' ' << e.metric << ")\n";
                os << "  best assignment: " << e.best_assignment.dump() << '\n';
                os << "  trace:";
                for (double t : e.trace_canonical) os << ' ' << fmt(user(e, t));
                os << '\n';
            }
            os << "\ncomparison\n";
            for (const auto& c : report.comparison)
                os << "  " << std::setw(6) << c.optimizer_kind << std::setw(15) << c.strategy << " episodes=" << c.episodes
                   << " median_best=" << fmt(c.median_best) << " mean_best=" << fmt(c.mean_best) << '\n';
            break;
        }
    }
    return os.str();
}

}  // namespace autotune
