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
#include <string_view>
#include <vector>

#include "floworc/errors.hpp"
#include "floworc/rng.hpp"

namespace floworc {

enum class ProcessorType { Cpu, Gpu };

std::string to_string(ProcessorType t);
ProcessorType processor_type_from_string(std::string_view s);

struct ProcessorSpec {
    ProcessorType processor_type = ProcessorType::Cpu;
    int computing_units = 1;  // >= 1

    bool operator==(const ProcessorSpec&) const = default;
};

/// Per-task resource demand: how many nodes, and how many units per node.
struct TaskConstraints {
    int computing_nodes = 1;
    std::vector<ProcessorSpec> processors;  // at most one spec per processor type

    int cpu_units_per_node() const;
    int gpu_units_per_node() const;

    /// Canonical JSON text; identical constraints always serialize identically.
    std::string canonical() const;

    bool operator==(const TaskConstraints&) const = default;
};

enum class FailureAction { Ignore, Retry, Fail };
enum class DefaultValueKind { EmptyFile, NoneMarker };

std::string to_string(FailureAction a);
std::string to_string(DefaultValueKind k);

struct ReliabilityPolicy {
    FailureAction on_failure = FailureAction::Fail;
    int max_retries = 0;                        // >= 1 when on_failure == Retry
    std::optional<double> time_out;             // seconds, > 0 when present
    std::map<std::string, DefaultValueKind> default_outputs;  // param name -> default

    std::string canonical() const;

    bool operator==(const ReliabilityPolicy&) const = default;
};

enum class NodePool { Static, Elastic };
enum class NodeState { Provisioning, Up, Draining, Released };

std::string to_string(NodeState s);

struct NodeShape {
    int cpu_units = 1;
    int gpu_units = 0;

    bool operator==(const NodeShape&) const = default;
};

struct NodeResource {
    std::string node_id;
    std::uint64_t ordinal = 0;  // creation sequence; larger = newer
    NodeShape shape;
    NodePool pool = NodePool::Static;
    NodeState state = NodeState::Up;
    int free_cpu = 0;
    int free_gpu = 0;
    std::vector<char> gpu_in_use;  // per device index

    bool is_up() const { return state == NodeState::Up; }
};

enum class WorkloadMode { Integer, Fractional };

struct StaticNodeSpec {
    std::string id;
    NodeShape shape;
};

/// The infrastructure half of the "two configuration scripts" split: everything
/// a run needs to know about the machine, nothing about the science.
struct InfraConfig {
    std::map<std::string, std::string> env;
    std::vector<StaticNodeSpec> static_nodes;
    NodeShape elastic_shape;
    int elastic_max = 0;
    DistSpec provision_delay = DistSpec::constant();
    double provision_delay_base = 120.0;  // seconds; scaled by provision_delay factor
    double elasticity_period = 30.0;      // seconds between scaling evaluations
    double rt_prior = 120.0;              // provision-time prior before any sample
    double default_mean_et = 60.0;        // execution-time prior for unseen task types
    WorkloadMode workload_mode = WorkloadMode::Integer;
    bool count_provisioning_in_capacity = true;
    double dispatch_latency = 0.0;        // serialized per-START overhead (sim backend)
    double local_time_scale = 1.0;        // wall seconds per simulated second (local backend)
    std::string stop_signal = "SIGTERM";  // queue-manager pre-kill signal (local backend)

    const NodeShape& reference_shape() const;

    static InfraConfig from_json_text(std::string_view text);
    static InfraConfig from_file(const std::filesystem::path& path);
    std::string to_json_text() const;
};

/// Substitute every `$NAME` placeholder from env. Unknown names are an error.
std::string substitute_placeholders(std::string_view text,
                                    const std::map<std::string, std::string>& env);

TaskConstraints resolve_constraints(std::string_view template_text, const InfraConfig& env);
ReliabilityPolicy resolve_reliability(std::string_view template_text, const InfraConfig& env);

struct ResolvedPolicies {
    TaskConstraints constraints;
    ReliabilityPolicy reliability;
};

/// Resolve both template halves of a task type against the infrastructure.
ResolvedPolicies resolve_template(std::string_view constraint_template,
                                  std::string_view reliability_template,
                                  const InfraConfig& env);

struct Assignment {
    std::vector<std::string> node_ids;  // exactly constraints.computing_nodes entries
};

struct Lease {
    std::uint64_t lease_id = 0;
    std::vector<std::string> node_ids;
    int cpu_per_node = 0;
    int gpu_per_node = 0;
    std::vector<std::vector<int>> gpu_indices;  // one list per node
    bool released = false;
};

/// Tracks every node ever part of the run (released elastic nodes stay, for
/// reporting) and the availability counters behind all placement decisions.
class ResourcePool {
public:
    ResourcePool() = default;
    explicit ResourcePool(const InfraConfig& config);

    const std::vector<NodeResource>& nodes() const { return nodes_; }
    const NodeResource* find(std::string_view node_id) const;

    /// First-fit walk in node creation order over UP nodes only.
    std::optional<Assignment> fits(const TaskConstraints& c) const;

    Lease allocate(const Assignment& assignment, const TaskConstraints& c);
    void release(Lease& lease);

    /// Add an elastic node in PROVISIONING state; returns its id.
    std::string add_elastic_node(const NodeShape& shape);
    void mark_up(std::string_view node_id);
    void mark_draining(std::string_view node_id);
    void mark_released(std::string_view node_id);

    bool node_idle(std::string_view node_id) const;

    int n_up() const;
    int n_provisioning() const;
    int n_draining() const;
    /// Elastic nodes not yet released (provisioning + up + draining).
    int n_live_elastic() const;
    int n_static() const;

private:
    NodeResource& find_mut(std::string_view node_id);

    std::vector<NodeResource> nodes_;
    std::uint64_t next_ordinal_ = 0;
    std::uint64_t next_lease_ = 1;
    std::uint64_t next_elastic_ = 0;
};

}  // namespace floworc
