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
#include <map>
#include <optional>

#include "floworc/backend.hpp"
#include "floworc/elasticity.hpp"
#include "floworc/reliability.hpp"
#include "floworc/resources.hpp"
#include "floworc/taskgraph.hpp"
#include "floworc/trace.hpp"

namespace floworc {

struct OrchestratorConfig {
    std::filesystem::path run_dir;
    std::string workflow_name;
    bool materialize_outputs = true;
    double stop_at = -1.0;                 // model seconds; < 0 disables
    std::uint64_t stop_after_events = 0;   // stop once the trace holds N events; 0 disables
    std::optional<CheckpointManifest> resume_manifest;
};

struct RunSummary {
    int exit_code = kExitSuccess;
    bool checkpointed = false;
    bool stalled = false;
    double makespan = 0.0;
    std::size_t total_tasks = 0;
    std::size_t executed = 0;  // tasks that reached START at least once this run
    std::size_t skipped = 0;
    std::size_t ignored_failures = 0;
    std::map<std::string, std::size_t> state_counts;
};

/// Single-threaded event loop over graph, pool, and backend. The only mutator
/// of graph and resource state; executors and providers only ever talk to it
/// through backend messages.
class Orchestrator {
public:
    Orchestrator(TaskGraph& graph, ResourcePool& pool, ExecutionBackend& backend,
                 NodeProvider& provider, const InfraConfig& infra, TraceLog& trace,
                 OrchestratorConfig config);

    RunSummary run();

    const std::vector<ElasticitySample>& elasticity_series() const { return samples_; }
    const CheckpointManifest& manifest() const { return manifest_; }
    const ProfileStore& profiles() const { return profiles_; }

private:
    struct InFlight {
        Lease lease;
        int attempt = 1;
        double start_t = 0.0;
        bool started = false;
    };

    void emit(EventKind kind, std::optional<TaskId> task = std::nullopt,
              std::vector<std::string> nodes = {},
              std::map<std::string, std::string> detail = {});
    void schedule_and_dispatch();
    void handle_message(const Message& msg);
    void on_started(const MsgStarted& msg);
    void on_finished(const MsgFinished& msg);
    void on_timeout(const MsgTimeout& msg);
    void on_node_up(const MsgNodeUp& msg);
    void on_tick();
    void apply_decision(const ScalingDecision& decision);
    void handle_task_failure(TaskId id, bool timed_out, double observed);
    void release_lease_of(TaskId id);
    void drain_check(const std::vector<std::string>& node_ids);
    void finish_drain(const std::string& node_id);
    void materialize_done_outputs(const TaskInstance& task);
    void materialize_default_outputs(const TaskInstance& task);
    void record_done(const TaskInstance& task);
    void apply_resume_skips();
    void safe_stop_sweep();
    void terminal_cleanup();
    void append_sample();
    std::map<std::string, double> running_load_by_node() const;
    bool stop_budget_reached() const;

    TaskGraph& graph_;
    ResourcePool& pool_;
    ExecutionBackend& backend_;
    NodeProvider& provider_;
    const InfraConfig& infra_;
    TraceLog& trace_;
    OrchestratorConfig config_;
    ProfileStore profiles_;
    CheckpointManifest manifest_;

    std::map<TaskId, InFlight> inflight_;
    std::set<TaskId> started_ever_;
    std::vector<ElasticitySample> samples_;
    double last_scale_up_t_ = -1.0;
    double last_task_event_t_ = 0.0;
    bool stop_requested_ = false;
};

}  // namespace floworc
