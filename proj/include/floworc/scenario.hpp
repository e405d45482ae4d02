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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "floworc/rng.hpp"

namespace floworc {

nlohmann::json dist_spec_to_json(const DistSpec& d);
DistSpec dist_spec_from_json(const nlohmann::json& doc, const char* context);

/// How long one execution of a task type takes, before faults.
struct DurationModel {
    double base_seconds = 60.0;
    DistSpec distribution = DistSpec::constant();
    std::optional<double> amdahl_p;   // parallel fraction for the speedup law
    double reference_units = 1.0;     // units at which base_seconds holds

    /// Scale a sampled duration by Amdahl's law for `units` allocated units.
    double speedup_scale(double units) const {
        if (!amdahl_p || units <= 0.0 || reference_units <= 0.0) return 1.0;
        const double n = units / reference_units;
        return (1.0 - *amdahl_p) + *amdahl_p / n;
    }

    double sample(Rng& rng, double allocated_units) const {
        const double d = base_seconds * distribution.sample_factor(rng) * speedup_scale(allocated_units);
        return std::max(d, 1e-9);
    }
};

struct FaultSpec {
    enum class Mode { FailAt, Hang };

    Mode mode = Mode::FailAt;
    double fraction = 1.0;  // FailAt: fail after this fraction of the duration
};

/// Simulation scenario: duration models, injectable faults, seed, optional
/// stop signal. Deterministic given the seed.
struct Scenario {
    std::uint64_t seed = 0;
    DurationModel default_model;
    std::map<std::string, DurationModel> models;           // by duration_model_id
    std::map<std::uint64_t, FaultSpec> faults_by_index;    // by TaskId
    std::map<std::string, FaultSpec> faults_by_fingerprint;
    std::optional<double> stop_at;

    const DurationModel& model_for(const std::string& duration_model_id) const {
        auto it = models.find(duration_model_id);
        return it == models.end() ? default_model : it->second;
    }

    const FaultSpec* fault_for(std::uint64_t task_id, const std::string& fingerprint) const {
        if (auto it = faults_by_index.find(task_id); it != faults_by_index.end())
            return &it->second;
        if (auto it = faults_by_fingerprint.find(fingerprint); it != faults_by_fingerprint.end())
            return &it->second;
        return nullptr;
    }

    static Scenario from_json_text(std::string_view text);
    static Scenario from_file(const std::filesystem::path& path);
    std::string to_json_text() const;
};

}  // namespace floworc
