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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "floworc/taskgraph.hpp"

namespace floworc {

/// The environment contract handed to executors: how many units on which
/// nodes, which GPU devices, and the policy timeout. Pinning mechanics live
/// behind this struct, not in the engine.
struct LaunchEnv {
    int cpu_units_per_node = 0;
    std::vector<std::vector<int>> gpu_device_indices;  // one list per node
    std::vector<std::string> node_ids;
    std::optional<double> timeout;

    double total_cpu_units() const {
        return static_cast<double>(cpu_units_per_node) * static_cast<double>(node_ids.size());
    }
};

struct ExecRequest {
    TaskId task = 0;
    int attempt = 1;
    std::string type_name;
    std::string duration_model_id;
    std::string fingerprint;
    LaunchEnv env;
    std::vector<Binding> outputs;  // tokens the executor materializes (local mode)
};

// Messages the backend feeds into the orchestrator loop. Completion handling
// is serialized: executors never touch graph or resource state directly.
struct MsgStarted {
    TaskId task = 0;
    int attempt = 1;
};

struct MsgFinished {
    TaskId task = 0;
    int attempt = 1;
    bool failed = false;
    double observed_seconds = 0.0;
};

struct MsgNodeUp {
    std::string node_id;
    double provision_seconds = 0.0;
};

struct MsgTick {};

struct MsgTimeout {
    TaskId task = 0;
    int attempt = 1;
};

struct MsgStop {};

using Message = std::variant<MsgStarted, MsgFinished, MsgNodeUp, MsgTick, MsgTimeout, MsgStop>;

class ExecutionBackend {
public:
    virtual ~ExecutionBackend() = default;

    /// Current time in model seconds (simulated clock, or scaled wall clock).
    virtual double now() = 0;

    /// Begin executing a task. Returns false on executor rejection.
    virtual bool submit(const ExecRequest& request) = 0;

    /// Abandon an in-flight execution; a stale completion may still surface
    /// and is identified by (task, attempt).
    virtual void cancel_execution(TaskId task, int attempt) = 0;

    virtual void schedule_tick(double at) = 0;
    virtual void schedule_timeout(double at, TaskId task, int attempt) = 0;
    virtual void schedule_stop(double at) = 0;

    /// Deliver the next message, advancing the clock (sim) or blocking (local).
    /// nullopt means no message can ever arrive again.
    virtual std::optional<Message> next_message() = 0;

    /// True when the executor materializes mock outputs itself.
    virtual bool writes_outputs() const = 0;
};

class NodeProvider {
public:
    virtual ~NodeProvider() = default;

    /// Ask for one more node. Returns the id now PROVISIONING in the pool, or
    /// nullopt when the request was rejected (budget, manager refusal).
    virtual std::optional<std::string> request_node() = 0;

    /// Give a drained node back. Throws ProviderRejection on unknown nodes.
    virtual void release_node(const std::string& node_id) = 0;
};

}  // namespace floworc
