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

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "floworc/taskgraph.hpp"

namespace floworc {

inline constexpr int kTraceVersion = 1;

enum class EventKind {
    Register,
    Ready,
    Schedule,
    Start,
    End,
    Fail,
    Timeout,
    Cancel,
    Skip,
    ScaleUpRequest,
    NodeUp,
    ScaleDown,
    Checkpoint,
};

std::string to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct TraceEvent {
    double t = 0.0;
    EventKind kind = EventKind::Register;
    std::optional<TaskId> task;
    std::vector<std::string> node_ids;
    std::map<std::string, std::string> detail;
};

/// Append-only event log. Streams JSON lines to disk as events arrive and
/// keeps an in-memory copy for reports and assertions.
class TraceLog {
public:
    TraceLog() = default;

    void open(const std::filesystem::path& path);
    void append(TraceEvent event);
    void flush();

    const std::vector<TraceEvent>& events() const { return events_; }
    double last_time() const { return last_t_; }

    static std::vector<TraceEvent> read_file(const std::filesystem::path& path);

private:
    std::vector<TraceEvent> events_;
    std::ofstream out_;
    double last_t_ = 0.0;
    bool opened_ = false;
};

std::string event_to_json_line(const TraceEvent& event);

}  // namespace floworc
