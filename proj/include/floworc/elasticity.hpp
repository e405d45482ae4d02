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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "floworc/resources.hpp"

namespace floworc {

/// Per-task-type execution statistics plus the mean resource-provision time.
/// Means are plain arithmetic means of observed samples; configured priors
/// stand in until the first sample arrives.
class ProfileStore {
public:
    ProfileStore() = default;
    ProfileStore(double default_mean_et, double rt_prior)
        : default_mean_et_(default_mean_et), rt_prior_(rt_prior) {}

    void record_execution(const std::string& type, double seconds);
    void record_provision(double seconds);

    double mean_execution(const std::string& type) const;
    /// Mean provision time, clamped to >= 1 s (the capacity formula divides
    /// meaning out of RT -> 0).
    double mean_provision() const;

    std::size_t execution_count(const std::string& type) const;
    std::size_t provision_count() const { return provision_count_; }
    std::optional<double> execution_variance(const std::string& type) const;

private:
    struct Stats {
        std::size_t count = 0;
        double mean = 0.0;
        double m2 = 0.0;  // Welford accumulator
    };

    std::map<std::string, Stats> executions_;
    std::size_t provision_count_ = 0;
    double provision_mean_ = 0.0;
    double default_mean_et_ = 60.0;
    double rt_prior_ = 120.0;
};

/// One dependency-free task as seen by the workload estimator.
struct WorkloadItem {
    std::string type_name;
    TaskConstraints constraints;
};

/// Resource requirement of one task in node-equivalents against the
/// reference node shape. Integer mode counts whole nodes (a task never
/// contributes less than its computing_nodes); fractional mode keeps the
/// per-node unit fraction.
double node_equivalents(const TaskConstraints& c, const NodeShape& reference, WorkloadMode mode);

/// Node capacity in node-equivalents: 1 for a reference-shaped node,
/// scaled by cpu-unit ratio for heterogeneous shapes.
double node_capacity_equivalents(const NodeShape& shape, const NodeShape& reference);

/// PW: sum over dependency-free tasks of requirement x mean execution time.
double estimate_parallel_workload(const std::vector<WorkloadItem>& ready,
                                  const ProfileStore& profiles, const NodeShape& reference,
                                  WorkloadMode mode);

/// IC: sum over live nodes (UP, plus PROVISIONING when configured) of
/// capacity x mean provision time.
double estimate_infrastructure_capacity(const std::vector<NodeResource>& nodes,
                                        const ProfileStore& profiles, const NodeShape& reference,
                                        bool count_provisioning);

struct ScalingDecision {
    enum class Action { ScaleUp, ScaleDown, Hold };

    Action action = Action::Hold;
    int n_nodes = 0;         // ScaleUp
    std::string node_id;     // ScaleDown victim
    double pw = 0.0;
    double ic = 0.0;
    double t = 0.0;
};

struct ElasticityInputs {
    double pw = 0.0;
    double ic = 0.0;
    double now = 0.0;
    double last_scale_up_t = -1.0;  // < 0: never scaled up
    /// Estimated remaining running time per node id (sum over its running tasks).
    std::map<std::string, double> running_load;
};

/// The two-branch scaling rule: grow when the pending parallel workload
/// exceeds what the current pool can absorb while a new node provisions,
/// shrink when it falls below. One action per evaluation, strict
/// inequalities, and a one-RT hysteresis window after a scale-up.
ScalingDecision decide(const ElasticityInputs& in, const ResourcePool& pool,
                       const ProfileStore& profiles, const InfraConfig& config);

/// Pick the elastic node to remove: among elastic UP nodes whose capacity fits
/// inside the underused amount (all of them, if none qualifies, judged by the
/// smallest), the one with minimum running load; ties go to the newest node.
std::string select_victim(const std::vector<NodeResource>& nodes, double pw, double ic,
                          const ProfileStore& profiles, const NodeShape& reference,
                          const std::map<std::string, double>& running_load);

/// One `t,pw,ic,n_up,n_provisioning,n_running_tasks` evaluation row.
struct ElasticitySample {
    double t = 0.0;
    double pw = 0.0;
    double ic = 0.0;
    int n_up = 0;
    int n_provisioning = 0;
    int n_running_tasks = 0;
};

inline constexpr const char* kElasticityCsvHeader = "t,pw,ic,n_up,n_provisioning,n_running_tasks";

std::string elasticity_csv(const std::vector<ElasticitySample>& samples);
std::vector<ElasticitySample> parse_elasticity_csv(const std::string& text);

}  // namespace floworc
