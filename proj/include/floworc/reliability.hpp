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
#include <vector>

#include "floworc/taskgraph.hpp"

namespace floworc {

// Exit codes of the run/resume entry points.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitCheckpointed = 3;

/// Stable 64-bit fingerprint of (type name, ordered token@version bindings,
/// resolved constraints), hex-encoded. Bound version numbers disambiguate
/// repeated invocations over the same tokens.
std::string task_fingerprint(const TaskType& type, const std::vector<Binding>& bindings,
                             const TaskConstraints& constraints);

struct RecordedOutput {
    std::string token;
    std::string path;        // relative to the run directory
    std::uint64_t size = 0;  // bytes at record time
    bool none_marker = false;
};

struct CheckpointRecord {
    std::string fingerprint;
    TaskId task_id = 0;
    std::string type;
    std::vector<RecordedOutput> outputs;
};

class CheckpointManifest {
public:
    void add(CheckpointRecord record);
    const CheckpointRecord* find(std::string_view fingerprint) const;
    std::size_t size() const { return records_.size(); }
    const std::map<std::string, CheckpointRecord, std::less<>>& records() const { return records_; }

    void save(const std::filesystem::path& path, std::string_view workflow_name) const;
    static CheckpointManifest load(const std::filesystem::path& path);

private:
    std::map<std::string, CheckpointRecord, std::less<>> records_;
};

enum class RestartDecision { Skip, Run };

/// Skip iff the task's fingerprint has a manifest record, every recorded
/// output file still exists with size > 0, and none of them is a none-marker.
/// Anything suspect (corrupt record, missing file, empty file) means Run.
RestartDecision restart_check(const TaskInstance& task, const CheckpointManifest& manifest,
                              const std::filesystem::path& run_dir);

enum class FailureResolution { IgnoreWithDefaults, Requeue, Fail };

/// Decide what a FAILED/TIMEOUT outcome turns into. Mutates the task's retry
/// budget when the policy is RETRY; an exhausted budget degrades to FAIL.
FailureResolution resolve_failure(TaskInstance& task);

}  // namespace floworc
