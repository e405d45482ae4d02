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

#include "floworc/reliability.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace floworc {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::string task_fingerprint(const TaskType& type, const std::vector<Binding>& bindings,
                             const TaskConstraints& constraints) {
    std::ostringstream canon;
    canon << type.name;
    for (const auto& b : bindings)
        canon << '|' << to_string(b.direction) << ':' << b.token << '@' << b.version;
    canon << '|' << constraints.canonical();
    std::ostringstream hex;
    hex << std::hex << fnv1a(canon.str());
    return hex.str();
}

void CheckpointManifest::add(CheckpointRecord record) {
    records_[record.fingerprint] = std::move(record);
}

const CheckpointRecord* CheckpointManifest::find(std::string_view fingerprint) const {
    auto it = records_.find(fingerprint);
    return it == records_.end() ? nullptr : &it->second;
}

void CheckpointManifest::save(const std::filesystem::path& path,
                              std::string_view workflow_name) const {
    json recs = json::array();
    for (const auto& [fp, r] : records_) {
        json outs = json::array();
        for (const auto& o : r.outputs)
            outs.push_back({{"token", o.token},
                            {"path", o.path},
                            {"size", o.size},
                            {"none_marker", o.none_marker}});
        recs.push_back({{"fingerprint", r.fingerprint},
                        {"task_id", r.task_id},
                        {"type", r.type},
                        {"outputs", outs}});
    }
    json doc = {{"manifest_version", 1}, {"workflow", std::string(workflow_name)}, {"records", recs}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint manifest: " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error("error writing checkpoint manifest: " + path.string());
}

CheckpointManifest CheckpointManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checkpoint manifest: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(std::string("checkpoint manifest is not valid JSON: ") + e.what());
    }
    CheckpointManifest manifest;
    for (const auto& r : doc.value("records", json::array())) {
        try {
            CheckpointRecord rec;
            rec.fingerprint = r.at("fingerprint").get<std::string>();
            rec.task_id = r.value("task_id", TaskId{0});
            rec.type = r.value("type", std::string{});
            for (const auto& o : r.value("outputs", json::array())) {
                RecordedOutput out;
                out.token = o.at("token").get<std::string>();
                out.path = o.at("path").get<std::string>();
                out.size = o.value("size", std::uint64_t{0});
                out.none_marker = o.value("none_marker", false);
                rec.outputs.push_back(std::move(out));
            }
            manifest.add(std::move(rec));
        } catch (const json::exception&) {
            // Corrupt record: drop it, the task will just re-run.
            continue;
        }
    }
    return manifest;
}

RestartDecision restart_check(const TaskInstance& task, const CheckpointManifest& manifest,
                              const std::filesystem::path& run_dir) {
    const CheckpointRecord* record = manifest.find(task.fingerprint);
    if (!record) return RestartDecision::Run;
    if (record->outputs.empty() && !task.output_bindings().empty()) return RestartDecision::Run;
    for (const auto& out : record->outputs) {
        if (out.none_marker) return RestartDecision::Run;
        std::error_code ec;
        const auto p = run_dir / out.path;
        if (!std::filesystem::is_regular_file(p, ec) || ec) return RestartDecision::Run;
        const auto size = std::filesystem::file_size(p, ec);
        if (ec || size == 0) return RestartDecision::Run;
    }
    return RestartDecision::Skip;
}

FailureResolution resolve_failure(TaskInstance& task) {
    switch (task.reliability.on_failure) {
        case FailureAction::Ignore:
            return FailureResolution::IgnoreWithDefaults;
        case FailureAction::Retry:
            if (task.retries_left > 0) {
                task.retries_left -= 1;
                return FailureResolution::Requeue;
            }
            return FailureResolution::Fail;
        case FailureAction::Fail:
            return FailureResolution::Fail;
    }
    return FailureResolution::Fail;
}

}  // namespace floworc
