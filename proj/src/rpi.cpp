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

#include <autotune/rpi.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace autotune {

namespace {

struct CapField {
    const char* name;
    std::optional<double> RpiCaps::*cap;
    std::optional<double> RpiMeasurement::*measured;
    bool is_min;
};

constexpr CapField kFields[] = {
    {"cpu_ns_max", &RpiCaps::cpu_ns_max, &RpiMeasurement::cpu_ns, false},
    {"max_rss_bytes_max", &RpiCaps::max_rss_bytes_max, &RpiMeasurement::max_rss_bytes, false},
    {"latency_p99_ns_max", &RpiCaps::latency_p99_ns_max, &RpiMeasurement::latency_p99_ns, false},
    {"throughput_ops_s_min", &RpiCaps::throughput_ops_s_min, &RpiMeasurement::throughput_ops_s, true},
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

const char* to_string(RpiSource source) { return source == RpiSource::learned ? "learned" : "declared"; }

void validate_envelope(const RpiEnvelope& e) {
    if (e.component.empty()) throw SpecError("RPI envelope has no component");
    if (e.workload.empty()) throw SpecError("RPI envelope for " + e.component + " has no workload");
    if (e.caps.empty()) throw SpecError("RPI envelope " + e.component + "/" + e.workload + " declares no caps");
    for (const auto& f : kFields) {
        const auto& cap = e.caps.*f.cap;
        if (cap && !(std::isfinite(*cap) && *cap > 0.0))
            throw SpecError(std::string("RPI cap ") + f.name + " must be positive");
    }
}

RpiMeasurement measure(const RunRecord& run) {
    RpiMeasurement m;
    if (run.counters.cpu_ns) m.cpu_ns = static_cast<double>(*run.counters.cpu_ns);
    if (run.counters.max_rss_bytes) m.max_rss_bytes = static_cast<double>(*run.counters.max_rss_bytes);
    for (const auto& metric : run.metrics) {
        if (metric.aggregate.count == 0) continue;
        if (metric.unit == "ns")
            m.latency_p99_ns = std::max(m.latency_p99_ns.value_or(metric.aggregate.p99), metric.aggregate.p99);
        else if (metric.unit == "ops/s" && !m.throughput_ops_s)
            m.throughput_ops_s = metric.aggregate.mean();
    }
    return m;
}

RpiVerdict check_rpi(const RpiEnvelope& envelope, const RunRecord& run) {
    if (run.component != envelope.component || run.workload_name != envelope.workload)
        throw Error("run " + run.run_id + " (" + run.component + "/" + run.workload_name +
                    ") does not match envelope " + envelope.component + "/" + envelope.workload);
    const auto m = measure(run);
    RpiVerdict v;
    for (const auto& f : kFields) {
        const auto& cap = envelope.caps.*f.cap;
        if (!cap) continue;
        const auto& measured = m.*f.measured;
        const bool ok = measured && (f.is_min ? *measured >= *cap : *measured <= *cap);
        if (!ok) v.violations.push_back({f.name, *cap, measured});
    }
    v.pass = v.violations.empty();
    return v;
}

RpiEnvelope learn_envelope(const std::vector<RunRecord>& runs, double margin) {
    if (runs.empty()) throw Error("cannot learn an RPI envelope from zero runs");
    if (!(margin >= 0.0) || !std::isfinite(margin)) throw Error("RPI margin must be finite and >= 0");
    RpiEnvelope e;
    e.component = runs.front().component;
    e.workload = runs.front().workload_name;
    e.source = RpiSource::learned;
    for (const auto& r : runs)
        if (r.component != e.component || r.workload_name != e.workload)
            throw Error("runs mix component/workload pairs (" + e.component + "/" + e.workload + " and " +
                        r.component + "/" + r.workload_name + ")");

    std::vector<RpiMeasurement> ms;
    for (const auto& r : runs) ms.push_back(measure(r));
    for (const auto& f : kFields) {
        if (!std::all_of(ms.begin(), ms.end(), [&](const RpiMeasurement& m) { return (m.*f.measured).has_value(); }))
            continue;
        double extreme = *(ms.front().*f.measured);
        for (const auto& m : ms) extreme = f.is_min ? std::min(extreme, *(m.*f.measured)) : std::max(extreme, *(m.*f.measured));
        const double cap = f.is_min ? extreme * (1.0 - margin) : extreme * (1.0 + margin);
        if (cap > 0.0 && std::isfinite(cap)) e.caps.*f.cap = cap;
    }
    if (e.caps.empty()) throw Error("no quantity was measured in every run; cannot learn an envelope");
    return e;
}

GateResult rpi_gate(const std::vector<RpiEnvelope>& envelopes, const std::vector<RunRecord>& runs) {
    GateResult g;
    std::ostringstream os;
    for (const auto& run : runs) {
        bool matched = false;
        for (const auto& env : envelopes) {
            if (env.component != run.component || env.workload != run.workload_name) continue;
            matched = true;
            ++g.checks;
            const auto verdict = check_rpi(env, run);
            os << (verdict.pass ? "PASS" : "FAIL") << " run=" << run.run_id << " iteration=" << run.iteration
               << " envelope=" << env.component << '/' << env.workload;
            for (const auto& v : verdict.violations) {
                os << " [" << v.cap << " limit=" << fmt(v.limit)
                   << " measured=" << (v.measured ? fmt(*v.measured) : std::string("unmeasured")) << ']';
                g.failures.push_back({run.run_id, v.cap});
            }
            os << '\n';
        }
        if (!matched) {
            ++g.warnings;
            os << "WARN run=" << run.run_id << " no envelope for " << run.component << '/' << run.workload_name << '\n';
        }
    }
    g.exit_code = g.failures.empty() ? 0 : 2;
    nlohmann::json summary = {{"pass", g.failures.empty()},
                              {"runs", runs.size()},
                              {"envelopes", envelopes.size()},
                              {"checks", g.checks},
                              {"violations", g.failures.size()},
                              {"warnings", g.warnings}};
    os << "summary " << summary.dump() << '\n';
    g.report = os.str();
    return g;
}

nlohmann::json envelope_to_json(const RpiEnvelope& e) {
    nlohmann::json caps = nlohmann::json::object();
    for (const auto& f : kFields)
        if (const auto& c = e.caps.*f.cap) caps[f.name] = *c;
    return {{"component", e.component}, {"workload", e.workload}, {"caps", caps}, {"source", to_string(e.source)}};
}

RpiEnvelope envelope_from_json(const nlohmann::json& j) {
    RpiEnvelope e;
    try {
        e.component = j.at("component").get<std::string>();
        e.workload = j.at("workload").get<std::string>();
        const auto& caps = j.at("caps");
        for (auto it = caps.begin(); it != caps.end(); ++it) {
            const auto* f = std::find_if(std::begin(kFields), std::end(kFields),
                                         [&](const CapField& c) { return it.key() == c.name; });
            if (f == std::end(kFields)) throw SpecError("unknown RPI cap '" + it.key() + "'");
            e.caps.*(f->cap) = it.value().get<double>();
        }
        const auto source = j.value("source", std::string("declared"));
        if (source == "declared") e.source = RpiSource::declared;
        else if (source == "learned") e.source = RpiSource::learned;
        else throw SpecError("unknown RPI source '" + source + "'");
    } catch (const nlohmann::json::exception& ex) {
        throw SpecError(std::string("malformed RPI envelope: ") + ex.what());
    }
    validate_envelope(e);
    return e;
}

std::vector<RpiEnvelope> load_envelopes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot read RPI file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw StoreError("RPI file " + path.string() + " is not valid JSON: " + e.what());
    }
    std::vector<RpiEnvelope> out;
    if (doc.is_array())
        for (const auto& j : doc) out.push_back(envelope_from_json(j));
    else
        out.push_back(envelope_from_json(doc));
    return out;
}

void save_envelopes(const std::filesystem::path& path, const std::vector<RpiEnvelope>& envelopes) {
    nlohmann::json doc;
    if (envelopes.size() == 1) {
        doc = envelope_to_json(envelopes.front());
    } else {
        doc = nlohmann::json::array();
        for (const auto& e : envelopes) doc.push_back(envelope_to_json(e));
    }
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
    if (!out) throw StoreError("cannot write RPI file " + path.string());
}

}  // namespace autotune
