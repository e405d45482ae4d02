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

// Test-only oracles, kept independent of the implementation paths they check.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "floworc/resources.hpp"
#include "floworc/taskgraph.hpp"

namespace floworc::testing {

/// Kahn topological sort; nullopt if the edge set has a cycle.
inline std::optional<std::vector<TaskId>> topo_sort(const TaskGraph& g) {
    std::map<TaskId, std::size_t> in_degree;
    for (const auto& [id, t] : g.tasks()) in_degree[id] = t.predecessors.size();
    std::deque<TaskId> queue;
    for (const auto& [id, d] : in_degree)
        if (d == 0) queue.push_back(id);
    std::vector<TaskId> order;
    while (!queue.empty()) {
        const TaskId id = queue.front();
        queue.pop_front();
        order.push_back(id);
        for (TaskId s : g.task(id).successors)
            if (--in_degree[s] == 0) queue.push_back(s);
    }
    if (order.size() != g.tasks().size()) return std::nullopt;
    return order;
}

/// BFS descendant set (excluding the start task).
inline std::set<TaskId> descendants(const TaskGraph& g, TaskId start) {
    std::set<TaskId> seen;
    std::deque<TaskId> queue(g.task(start).successors.begin(), g.task(start).successors.end());
    while (!queue.empty()) {
        const TaskId id = queue.front();
        queue.pop_front();
        if (!seen.insert(id).second) continue;
        for (TaskId s : g.task(id).successors) queue.push_back(s);
    }
    return seen;
}

inline bool reaches(const TaskGraph& g, TaskId a, TaskId b) {
    return descendants(g, a).count(b) > 0;
}

/// Exhaustive maximum antichain over a small subset (<= ~20 tasks).
inline std::size_t brute_force_antichain(const TaskGraph& g, const std::vector<TaskId>& subset) {
    std::vector<std::set<TaskId>> desc;
    desc.reserve(subset.size());
    for (TaskId id : subset) desc.push_back(descendants(g, id));
    const std::size_t n = subset.size();
    std::size_t best = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1)) continue;
            for (std::size_t j = 0; j < n && ok; ++j) {
                if (i == j || !(mask >> j & 1)) continue;
                if (desc[i].count(subset[j])) ok = false;
            }
        }
        if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcountll(mask)));
    }
    return best;
}

/// Independent replay of the direction rules over a registration sequence:
/// last-writer versioning, write-after-write serialization, write-after-read
/// edges for INOUT. Returns the expected edge set.
struct ReplayStep {
    std::vector<std::pair<std::string, ParamDirection>> args;  // token, direction
};

inline std::set<std::pair<TaskId, TaskId>> replay_edges(const std::vector<ReplayStep>& steps) {
    struct VersionState {
        std::optional<TaskId> producer;
        std::vector<TaskId> readers;
    };
    std::map<std::string, VersionState> latest;
    std::set<std::pair<TaskId, TaskId>> edges;
    TaskId id = 1;
    for (const auto& step : steps) {
        std::set<TaskId> preds;
        for (const auto& [token, dir] : step.args) {
            auto& v = latest[token];  // default: workflow input, no producer
            switch (dir) {
                case ParamDirection::In:
                    if (v.producer && *v.producer != id) preds.insert(*v.producer);
                    v.readers.push_back(id);
                    break;
                case ParamDirection::InOut:
                    if (v.producer && *v.producer != id) preds.insert(*v.producer);
                    for (TaskId r : v.readers)
                        if (r != id) preds.insert(r);
                    v = VersionState{id, {}};
                    break;
                case ParamDirection::Out:
                    if (v.producer && *v.producer != id) preds.insert(*v.producer);
                    v = VersionState{id, {}};
                    break;
            }
        }
        for (TaskId p : preds) edges.insert({p, id});
        ++id;
    }
    return edges;
}

inline std::set<std::pair<TaskId, TaskId>> graph_edges(const TaskGraph& g) {
    std::set<std::pair<TaskId, TaskId>> edges;
    for (const auto& [id, t] : g.tasks())
        for (TaskId s : t.successors) edges.insert({id, s});
    return edges;
}

/// Minimal infra: one pool of `n` identical CPU nodes and the env variables
/// the built-in generators expect.
inline InfraConfig test_infra(int n_nodes = 1, int cpu_units = 4, int gpu_units = 0) {
    InfraConfig infra;
    for (int i = 0; i < n_nodes; ++i)
        infra.static_nodes.push_back({"static-" + std::to_string(i),
                                      NodeShape{cpu_units, gpu_units}});
    infra.elastic_shape = NodeShape{cpu_units, gpu_units};
    infra.env = {{"TASK_NUM_NODES", "1"},
                 {"TASK_NUM_CPUS", std::to_string(cpu_units)},
                 {"TASK_NUM_GPUS", std::to_string(std::max(gpu_units, 1))},
                 {"TASK_TIMEOUT", "3600"},
                 {"SETUP_NUM_CPUS", "1"}};
    return infra;
}

/// Single-IN/single-OUT task type with defaults, for graph-shape tests.
inline TaskType io_type(const std::string& name) {
    TaskType t;
    t.name = name;
    t.params = {{"src", ParamDirection::In}, {"dst", ParamDirection::Out}};
    t.duration_model_id = name;
    return t;
}

inline std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("floworc-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace floworc::testing

#include "floworc/orchestrator.hpp"
#include "floworc/sim_backend.hpp"

namespace floworc::testing {

struct SimResult {
    RunSummary summary;
    std::vector<TraceEvent> events;
    std::vector<ElasticitySample> samples;
};

/// Drive one simulated run over an already-registered graph. Pool and backend
/// are fresh; the graph keeps its final states for inspection.
inline SimResult run_sim(TaskGraph& graph, const InfraConfig& infra, const Scenario& scenario,
                         OrchestratorConfig cfg = {}) {
    ResourcePool pool(infra);
    SimBackend backend(pool, infra, scenario);
    TraceLog trace;
    cfg.materialize_outputs = !cfg.run_dir.empty();
    Orchestrator orchestrator(graph, pool, backend, backend, infra, trace, cfg);
    SimResult r;
    r.summary = orchestrator.run();
    r.events = trace.events();
    r.samples = orchestrator.elasticity_series();
    return r;
}

inline std::vector<TraceEvent> events_of_kind(const std::vector<TraceEvent>& events,
                                              EventKind kind) {
    std::vector<TraceEvent> out;
    for (const auto& e : events)
        if (e.kind == kind) out.push_back(e);
    return out;
}

inline std::optional<TraceEvent> first_event(const std::vector<TraceEvent>& events,
                                             EventKind kind, TaskId task) {
    for (const auto& e : events)
        if (e.kind == kind && e.task && *e.task == task) return e;
    return std::nullopt;
}

}  // namespace floworc::testing
