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
#include <string>
#include <vector>

#include "floworc/taskgraph.hpp"

namespace floworc {

struct WorkflowStep {
    std::string type;
    std::vector<std::string> args;
};

/// Declarative workflow: task type declarations plus an ordered registration
/// sequence. Generator invocations in the file expand to this same form, so a
/// saved definition always rebuilds the identical graph.
struct WorkflowDefinition {
    std::string name;
    std::vector<TaskType> task_types;
    std::vector<WorkflowStep> steps;
    std::map<std::string, std::string> params;         // generator provenance
    std::map<std::string, std::string> phase_of_type;  // type name -> phase label

    static WorkflowDefinition from_json_text(std::string_view text);
    static WorkflowDefinition from_file(const std::filesystem::path& path);
    std::string to_json_text() const;

    /// Structural validation: declared types, directions, arities, duplicate
    /// plain-OUT tokens across steps. Errors carry step/field context.
    void validate() const;
};

/// Fan-out workflow: a two-task preparation prefix, then n independent
/// mutation chains, each ending in the one multinode-constrained MD task.
WorkflowDefinition generate_md_setup(int n_mutations, bool use_gpu = false);

/// Two extraction chains (forward/reverse), 2n independent per-structure
/// branches, and a sequential three-task aggregation tail.
WorkflowDefinition generate_binding_affinity(int n_structures_per_ensemble);

/// Register every step into the graph, in order.
void build_graph(const WorkflowDefinition& def, TaskGraph& graph, const InfraConfig& env);

/// Tasks whose type carries the given phase label, ascending id.
std::vector<TaskId> tasks_in_phase(const WorkflowDefinition& def, const TaskGraph& graph,
                                   const std::string& phase);

}  // namespace floworc
