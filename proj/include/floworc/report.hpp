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
#include <string>
#include <vector>

#include "floworc/trace.hpp"

namespace floworc {

struct GanttRow {
    std::string node_id;
    int n_tasks = 0;
    double busy_seconds = 0.0;
    // "type#task@start:end" entries in start order.
    std::vector<std::string> intervals;
};

/// One row per node that was ever UP during the run.
std::vector<GanttRow> gantt_rows(const std::vector<TraceEvent>& events,
                                 const std::vector<std::string>& static_node_ids);

struct ScalingRow {
    std::string run;
    int nodes = 0;
    double makespan = 0.0;
    double speedup = 1.0;
    double efficiency = 1.0;
};

/// Speedup/efficiency table over a batch of run directories (smallest node
/// count is the baseline).
std::vector<ScalingRow> scaling_rows(const std::vector<std::filesystem::path>& run_dirs);

/// Render one report kind into the run directory (or `out_dir` when given).
/// Kinds: "graph", "elasticity", "gantt", "scaling". For "scaling", run_dir
/// is a directory whose subdirectories are runs.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir,
                                                const std::string& kind,
                                                const std::filesystem::path& out_dir = {});

}  // namespace floworc
