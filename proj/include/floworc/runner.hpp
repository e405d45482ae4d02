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

#include <csignal>
#include <filesystem>
#include <optional>
#include <string>

#include "floworc/orchestrator.hpp"
#include "floworc/scenario.hpp"
#include "floworc/workflows.hpp"

namespace floworc {

enum class BackendKind { Sim, Local };

struct ExecuteOptions {
    std::filesystem::path run_dir;  // must exist and belong to this run
    BackendKind backend = BackendKind::Sim;
    std::string provider = "sim";  // "sim" | "slurm"
    double stop_at = -1.0;
    std::uint64_t stop_after_events = 0;
    bool resume = false;
    /// Local backend: signal-handler flag polled for a safe stop.
    volatile std::sig_atomic_t* stop_signal_flag = nullptr;
};

struct RunResult {
    int exit_code = kExitFailure;
    std::filesystem::path run_dir;
    RunSummary summary;
};

/// Run one workflow end to end inside an existing run directory. This is the
/// whole engine behind the CLI; the CLI adds nothing but flag parsing.
RunResult execute(const WorkflowDefinition& workflow, const InfraConfig& infra,
                  const Scenario& scenario, const ExecuteOptions& options);

struct RunOptions {
    std::filesystem::path workflow_file;
    volatile std::sig_atomic_t* stop_signal_flag = nullptr;
    std::filesystem::path infra_file;
    std::filesystem::path scenario_file;  // optional
    std::filesystem::path faults_file;    // optional; merged over the scenario
    std::filesystem::path out_dir = "runs";
    BackendKind backend = BackendKind::Sim;
    std::string provider = "sim";
    std::optional<std::uint64_t> seed;
    std::optional<double> stop_at;
    std::uint64_t stop_after_events = 0;
};

/// Load configs, allocate a fresh numbered run directory under out_dir
/// (existing run directories are never overwritten), copy the expanded
/// configs in, and execute.
RunResult run_workflow(const RunOptions& options);

/// Continue a stopped (or finished) run inside its original directory.
/// Prior trace/summary/csv files move into history/ before the new attempt.
RunResult resume_run(const std::filesystem::path& run_dir);

/// Merge fault entries (and stop_at) of `extra` into `base`.
Scenario merge_faults(Scenario base, const Scenario& extra);

std::filesystem::path allocate_run_dir(const std::filesystem::path& out_dir,
                                       const std::string& name);

void write_summary_json(const std::filesystem::path& run_dir, const RunSummary& summary,
                        const WorkflowDefinition& workflow, const InfraConfig& infra,
                        const Scenario& scenario, BackendKind backend);

}  // namespace floworc
