/* Copyright 2026 The Floworc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "floworc/scenario.hpp"

#include <fstream>
#include <sstream>

#include "floworc/errors.hpp"

namespace floworc {

using nlohmann::json;

json dist_spec_to_json(const DistSpec& d) {
    switch (d.kind) {
        case DistSpec::Kind::Constant: return {{"kind", "constant"}};
        case DistSpec::Kind::Uniform: return {{"kind", "uniform"}, {"lo", d.a}, {"hi", d.b}};
        case DistSpec::Kind::Lognormal: return {{"kind", "lognormal"}, {"mu", d.a}, {"sigma", d.b}};
    }
    return {{"kind", "constant"}};
}

DistSpec dist_spec_from_json(const json& doc, const char* context) {
    const std::string kind = doc.value("kind", std::string("constant"));
    if (kind == "constant") return DistSpec::constant();
    if (kind == "uniform") {
        if (!doc.contains("lo") || !doc.contains("hi"))
            throw ConfigError(std::string(context) + ": uniform distribution needs lo and hi");
        return DistSpec::uniform(doc["lo"].get<double>(), doc["hi"].get<double>());
    }
    if (kind == "lognormal")
        return DistSpec::lognormal(doc.value("mu", 0.0), doc.value("sigma", 0.25));
    throw ConfigError(std::string(context) + ": unknown distribution kind '" + kind + "'");
}

namespace {

DurationModel duration_model_from_json(const json& doc, const char* context) {
    DurationModel m;
    m.base_seconds = doc.value("base_seconds", 60.0);
    if (m.base_seconds <= 0) throw ConfigError(std::string(context) + ": base_seconds must be > 0");
    if (doc.contains("distribution"))
        m.distribution = dist_spec_from_json(doc["distribution"], context);
    if (doc.contains("amdahl_p")) {
        const double p = doc["amdahl_p"].get<double>();
        if (p < 0.0 || p > 1.0)
            throw ConfigError(std::string(context) + ": amdahl_p must be in [0,1]");
        m.amdahl_p = p;
    }
    m.reference_units = doc.value("reference_units", 1.0);
    if (m.reference_units <= 0)
        throw ConfigError(std::string(context) + ": reference_units must be > 0");
    return m;
}

json duration_model_to_json(const DurationModel& m) {
    json doc = {{"base_seconds", m.base_seconds},
                {"distribution", dist_spec_to_json(m.distribution)},
                {"reference_units", m.reference_units}};
    if (m.amdahl_p) doc["amdahl_p"] = *m.amdahl_p;
    return doc;
}

FaultSpec fault_spec_from_json(const json& doc) {
    FaultSpec f;
    const std::string mode = doc.value("mode", std::string("fail_at"));
    if (mode == "fail_at") f.mode = FaultSpec::Mode::FailAt;
    else if (mode == "hang") f.mode = FaultSpec::Mode::Hang;
    else throw ConfigError("faults: unknown mode '" + mode + "'");
    f.fraction = doc.value("fraction", 1.0);
    if (f.fraction <= 0.0 || f.fraction > 1.0)
        throw ConfigError("faults: fraction must be in (0,1]");
    return f;
}

}  // namespace

Scenario Scenario::from_json_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    Scenario s;
    s.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("default_duration"))
        s.default_model = duration_model_from_json(doc["default_duration"], "default_duration");
    if (doc.contains("duration_models"))
        for (const auto& [id, m] : doc["duration_models"].items())
            s.models[id] = duration_model_from_json(m, id.c_str());
    if (doc.contains("faults")) {
        for (const auto& f : doc["faults"]) {
            FaultSpec spec = fault_spec_from_json(f);
            if (f.contains("task_index"))
                s.faults_by_index[f["task_index"].get<std::uint64_t>()] = spec;
            else if (f.contains("fingerprint"))
                s.faults_by_fingerprint[f["fingerprint"].get<std::string>()] = spec;
            else
                throw ConfigError("faults: each entry needs task_index or fingerprint");
        }
    }
    if (doc.contains("stop_at") && !doc["stop_at"].is_null())
        s.stop_at = doc["stop_at"].get<double>();
    return s;
}

Scenario Scenario::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string Scenario::to_json_text() const {
    json models = json::object();
    for (const auto& [id, m] : this->models) models[id] = duration_model_to_json(m);
    json faults = json::array();
    for (const auto& [idx, f] : faults_by_index)
        faults.push_back({{"task_index", idx},
                          {"mode", f.mode == FaultSpec::Mode::Hang ? "hang" : "fail_at"},
                          {"fraction", f.fraction}});
    for (const auto& [fp, f] : faults_by_fingerprint)
        faults.push_back({{"fingerprint", fp},
                          {"mode", f.mode == FaultSpec::Mode::Hang ? "hang" : "fail_at"},
                          {"fraction", f.fraction}});
    json doc = {{"seed", seed},
                {"default_duration", duration_model_to_json(default_model)},
                {"duration_models", models},
                {"faults", faults}};
    if (stop_at) doc["stop_at"] = *stop_at;
    return doc.dump(2);
}

}  // namespace floworc
