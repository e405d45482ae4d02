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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "floworc/resources.hpp"

namespace floworc {

using TaskId = std::uint64_t;

enum class ParamDirection { In, Out, InOut };

std::string to_string(ParamDirection d);
ParamDirection direction_from_string(std::string_view s);

struct ParamSpec {
    std::string name;
    ParamDirection direction = ParamDirection::In;
};

/// A task type declaration. Constraint and reliability templates are raw JSON
/// text whose `$NAME` placeholders resolve against the infrastructure env at
/// registration time, never against workflow data.
struct TaskType {
    std::string name;
    std::vector<ParamSpec> params;
    std::string constraint_template;   // "" means default: 1 node, no unit demands
    std::string reliability_template;  // "" means default: FAIL, no timeout
    std::string duration_model_id;
};

enum class TaskState {
    Created,
    Ready,
    Scheduled,
    Running,
    Done,
    Failed,
    IgnoredFailed,
    Cancelled,
    Skipped,
};

std::string to_string(TaskState s);
bool is_terminal(TaskState s);
/// Terminal states that release successors (DONE, IGNORED_FAILED, SKIPPED).
bool releases_successors(TaskState s);

enum class Outcome { Done, Failed, IgnoredFailed, Cancelled };

/// One data binding of a task parameter: which version of which item the task
/// reads (IN) or produced (OUT/INOUT writes bind the new version).
struct Binding {
    std::string token;
    std::uint32_t version = 0;
    ParamDirection direction = ParamDirection::In;
};

struct TaskInstance {
    TaskId id = 0;
    std::string type;
    std::vector<Binding> bindings;  // same order as the type's param schema
    TaskState state = TaskState::Created;
    std::set<TaskId> predecessors;
    std::set<TaskId> successors;
    TaskConstraints constraints;
    ReliabilityPolicy reliability;
    int attempt = 1;       // incremented on retry
    int retries_left = 0;  // from reliability.max_retries
    std::string fingerprint;

    /// Tokens this task writes (OUT/INOUT bindings), in schema order.
    std::vector<Binding> output_bindings() const;
};

/// Versioned lineage of one named data artifact.
struct DataVersionInfo {
    std::uint32_t seq = 0;
    std::optional<TaskId> producer;  // nullopt == WORKFLOW_INPUT (iff seq == 0)
    std::vector<TaskId> readers;     // tasks that bound this version as IN/INOUT
};

struct DataItem {
    std::string token;
    std::vector<DataVersionInfo> versions;

    const DataVersionInfo& latest() const { return versions.back(); }
};

struct CompletionResult {
    std::vector<TaskId> newly_ready;
    std::vector<TaskId> cancelled;  // transitive cancellations after a failure
};

struct GraphStats {
    std::size_t tasks = 0;
    std::size_t edges = 0;
    std::size_t max_antichain_width = 0;
};

/// The task dependency DAG, built incrementally from directional parameters.
/// All mutation goes through the orchestrator thread; queries see a snapshot.
class TaskGraph {
public:
    void add_type(TaskType type);
    bool has_type(std::string_view name) const;
    const TaskType& type(std::string_view name) const;
    const std::map<std::string, TaskType, std::less<>>& types() const { return types_; }

    TaskId register_task(const std::string& type_name, const std::vector<std::string>& args,
                         const InfraConfig& env);

    std::vector<TaskId> ready_tasks() const;

    CompletionResult complete_task(TaskId id, Outcome outcome);

    // Lifecycle transitions driven by the scheduler and reliability machinery.
    void mark_scheduled(TaskId id);
    void mark_running(TaskId id);
    /// RUNNING -> READY for a retry attempt; bumps the attempt counter.
    void requeue_for_retry(TaskId id);
    /// SCHEDULED -> READY after an executor rejection; attempt is unchanged.
    void unschedule(TaskId id);
    /// CREATED -> SKIPPED during restart; releases successors like DONE.
    std::vector<TaskId> skip_task(TaskId id);
    /// Cancel one non-terminal task (safe stop path).
    void cancel_task(TaskId id);

    const TaskInstance& task(TaskId id) const;
    TaskInstance& task_mut(TaskId id);
    const std::map<TaskId, TaskInstance>& tasks() const { return tasks_; }
    const std::map<std::string, DataItem, std::less<>>& data() const { return data_; }

    std::size_t edge_count() const;
    bool all_terminal() const;
    std::size_t count_state(TaskState s) const;

    std::string export_dot() const;
    GraphStats stats() const;
    /// Maximum antichain width among `subset` (mutually unreachable tasks),
    /// using reachability through the whole graph.
    std::size_t max_antichain_width(const std::vector<TaskId>& subset) const;

private:
    void add_edge(TaskId from, TaskId to);
    void refresh_readiness(TaskId id);
    DataItem& item_for_read(const std::string& token);

    std::map<std::string, TaskType, std::less<>> types_;
    std::map<TaskId, TaskInstance> tasks_;
    std::map<std::string, DataItem, std::less<>> data_;
    std::set<TaskId> ready_;
    TaskId next_id_ = 1;
};

}  // namespace floworc
