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

#include "floworc/trace.hpp"

#include <json.hpp>

namespace floworc {

using nlohmann::json;

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::Register: return "REGISTER";
        case EventKind::Ready: return "READY";
        case EventKind::Schedule: return "SCHEDULE";
        case EventKind::Start: return "START";
        case EventKind::End: return "END";
        case EventKind::Fail: return "FAIL";
        case EventKind::Timeout: return "TIMEOUT";
        case EventKind::Cancel: return "CANCEL";
        case EventKind::Skip: return "SKIP";
        case EventKind::ScaleUpRequest: return "SCALE_UP_REQUEST";
        case EventKind::NodeUp: return "NODE_UP";
        case EventKind::ScaleDown: return "SCALE_DOWN";
        case EventKind::Checkpoint: return "CHECKPOINT";
    }
    return "REGISTER";
}

EventKind event_kind_from_string(std::string_view s) {
    static const std::map<std::string, EventKind, std::less<>> kinds = {
        {"REGISTER", EventKind::Register},
        {"READY", EventKind::Ready},
        {"SCHEDULE", EventKind::Schedule},
        {"START", EventKind::Start},
        {"END", EventKind::End},
        {"FAIL", EventKind::Fail},
        {"TIMEOUT", EventKind::Timeout},
        {"CANCEL", EventKind::Cancel},
        {"SKIP", EventKind::Skip},
        {"SCALE_UP_REQUEST", EventKind::ScaleUpRequest},
        {"NODE_UP", EventKind::NodeUp},
        {"SCALE_DOWN", EventKind::ScaleDown},
        {"CHECKPOINT", EventKind::Checkpoint},
    };
    auto it = kinds.find(s);
    if (it == kinds.end()) throw Error("unknown trace event kind '" + std::string(s) + "'");
    return it->second;
}

std::string event_to_json_line(const TraceEvent& event) {
    json doc = {{"t", event.t}, {"kind", to_string(event.kind)}};
    if (event.task) doc["task"] = *event.task;
    if (!event.node_ids.empty()) doc["nodes"] = event.node_ids;
    if (!event.detail.empty()) doc["detail"] = event.detail;
    return doc.dump();
}

void TraceLog::open(const std::filesystem::path& path) {
    out_.open(path);
    if (!out_) throw Error("cannot open trace file: " + path.string());
    opened_ = true;
    out_ << json{{"trace_version", kTraceVersion}}.dump() << '\n';
}

void TraceLog::append(TraceEvent event) {
    if (event.t + 1e-9 < last_t_)
        throw Error("trace time went backwards: " + std::to_string(event.t) + " after " +
                    std::to_string(last_t_));
    last_t_ = std::max(last_t_, event.t);
    if (opened_) out_ << event_to_json_line(event) << '\n';
    events_.push_back(std::move(event));
}

void TraceLog::flush() {
    if (opened_) out_.flush();
}

std::vector<TraceEvent> TraceLog::read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("trace file is empty: " + path.string());
    json header = json::parse(line);
    if (!header.contains("trace_version"))
        throw Error("trace file missing trace_version header: " + path.string());
    std::vector<TraceEvent> events;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json doc = json::parse(line);
        TraceEvent e;
        e.t = doc.at("t").get<double>();
        e.kind = event_kind_from_string(doc.at("kind").get<std::string>());
        if (doc.contains("task")) e.task = doc["task"].get<TaskId>();
        if (doc.contains("nodes")) e.node_ids = doc["nodes"].get<std::vector<std::string>>();
        if (doc.contains("detail"))
            e.detail = doc["detail"].get<std::map<std::string, std::string>>();
        events.push_back(std::move(e));
    }
    return events;
}

}  // namespace floworc
