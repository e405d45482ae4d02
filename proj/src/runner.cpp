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

#include "floworc/runner.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

#include "floworc/artifacts.hpp"
#include "floworc/local_backend.hpp"
#include "floworc/sim_backend.hpp"
#include "floworc/slurm_provider.hpp"

namespace floworc {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void archive_previous_outputs(const std::filesystem::path& run_dir) {
    const auto history = run_dir / "history";
    std::filesystem::create_directories(history);
    int index = 0;
    while (std::filesystem::exists(history / ("trace." + std::to_string(index) + ".jsonl")))
        ++index;
    const std::string suffix = "." + std::to_string(index);
    for (const char* name : {"trace.jsonl", "summary.json", "elasticity.csv"}) {
        const auto src = run_dir / name;
        if (!std::filesystem::exists(src)) continue;
        const auto stem = std::filesystem::path(name).stem().string();
        const auto ext = std::filesystem::path(name).extension().string();
        std::filesystem::rename(src, history / (stem + suffix + ext));
    }
}

}  // namespace

Scenario merge_faults(Scenario base, const Scenario& extra) {
    for (const auto& [idx, f] : extra.faults_by_index) base.faults_by_index[idx] = f;
    for (const auto& [fp, f] : extra.faults_by_fingerprint) base.faults_by_fingerprint[fp] = f;
    if (extra.stop_at) base.stop_at = extra.stop_at;
    return base;
}

std::filesystem::path allocate_run_dir(const std::filesystem::path& out_dir,
                                       const std::string& name) {
    std::filesystem::create_directories(out_dir);
    for (int i = 0;; ++i) {
        char num[16];
        std::snprintf(num, sizeof num, "%04d", i);
        const auto candidate = out_dir / (name + "-" + num);
        if (!std::filesystem::exists(candidate)) {
            std::filesystem::create_directories(candidate);
            return candidate;
        }
    }
}

void write_summary_json(const std::filesystem::path& run_dir, const RunSummary& summary,
                        const WorkflowDefinition& workflow, const InfraConfig& infra,
                        const Scenario& scenario, BackendKind backend) {
    json counts = json::object();
    for (const auto& [state, n] : summary.state_counts) counts[state] = n;
    json doc = {{"summary_version", 1},
                {"workflow", workflow.name},
                {"backend", backend == BackendKind::Sim ? "sim" : "local"},
                {"exit_code", summary.exit_code},
                {"checkpointed", summary.checkpointed},
                {"stalled", summary.stalled},
                {"makespan", summary.makespan},
                {"total_tasks", summary.total_tasks},
                {"executed", summary.executed},
                {"skipped", summary.skipped},
                {"ignored_failures", summary.ignored_failures},
                {"task_counts", counts},
                {"seed", scenario.seed},
                {"n_static_nodes", infra.static_nodes.size()},
                {"elastic_max", infra.elastic_max}};
    write_text(run_dir / "summary.json", doc.dump(2) + "\n");
}

RunResult execute(const WorkflowDefinition& workflow, const InfraConfig& infra,
                  const Scenario& scenario, const ExecuteOptions& options) {
    const auto& run_dir = options.run_dir;
    if (run_dir.empty()) throw Error("execute: run_dir must be set");
    std::filesystem::create_directories(run_dir / "data");

    TaskGraph graph;
    build_graph(workflow, graph, infra);

    // Materialize workflow inputs (version-0 items).
    for (const auto& [token, item] : graph.data())
        if (!item.versions.empty() && item.versions.front().seq == 0)
            write_workflow_input(run_dir, token);

    ResourcePool pool(infra);
    TraceLog trace;
    trace.open(run_dir / "trace.jsonl");

    OrchestratorConfig orch_config;
    orch_config.run_dir = run_dir;
    orch_config.workflow_name = workflow.name;
    orch_config.stop_at = options.stop_at >= 0 ? options.stop_at
                          : scenario.stop_at ? *scenario.stop_at
                                             : -1.0;
    orch_config.stop_after_events = options.stop_after_events;
    if (options.resume) {
        const auto manifest_path = run_dir / "manifest.json";
        if (std::filesystem::exists(manifest_path)) {
            orch_config.resume_manifest = CheckpointManifest::load(manifest_path);
        } else {
            std::cerr << "warning: no checkpoint manifest in " << run_dir.string()
                      << ", re-running every task\n";
        }
    }

    RunResult result;
    result.run_dir = run_dir;

    if (options.backend == BackendKind::Sim) {
        SimBackend backend(pool, infra, scenario);
        Orchestrator orchestrator(graph, pool, backend, backend, infra, trace, orch_config);
        result.summary = orchestrator.run();
        write_text(run_dir / "elasticity.csv", elasticity_csv(orchestrator.elasticity_series()));
    } else {
        LocalBackend backend(infra, scenario, run_dir);
        if (options.stop_signal_flag) backend.watch_stop_flag(options.stop_signal_flag);
        std::unique_ptr<NodeProvider> provider;
        std::unique_ptr<SlurmAdapter> adapter;
        std::unique_ptr<CommandRunner> cmd_runner;
        if (options.provider == "slurm") {
            cmd_runner = std::make_unique<SubprocessRunner>();
            const char* main_job = std::getenv("SLURM_JOB_ID");
            const char* qos = std::getenv("SLURM_JOB_QOS");
            const char* launcher = std::getenv("FLOWORC_WORKER_LAUNCHER");
            adapter = std::make_unique<SlurmAdapter>(
                *cmd_runner, SlurmTemplates{}, main_job ? main_job : "0",
                qos ? qos : "normal", launcher ? launcher : "floworc-worker.sh",
                static_cast<int>(infra.static_nodes.size()));
            provider = std::make_unique<SlurmNodeProvider>(pool, infra, backend, *adapter);
        } else {
            provider = std::make_unique<LocalProvider>(pool, infra, backend);
        }
        Orchestrator orchestrator(graph, pool, backend, *provider, infra, trace, orch_config);
        result.summary = orchestrator.run();
        write_text(run_dir / "elasticity.csv", elasticity_csv(orchestrator.elasticity_series()));
    }

    write_text(run_dir / "graph.dot", graph.export_dot());
    write_summary_json(run_dir, result.summary, workflow, infra, scenario,
                       options.backend);
    result.exit_code = result.summary.exit_code;
    return result;
}

RunResult run_workflow(const RunOptions& options) {
    WorkflowDefinition workflow = WorkflowDefinition::from_file(options.workflow_file);
    InfraConfig infra = InfraConfig::from_file(options.infra_file);
    Scenario scenario;
    if (!options.scenario_file.empty()) scenario = Scenario::from_file(options.scenario_file);
    if (!options.faults_file.empty())
        scenario = merge_faults(std::move(scenario), Scenario::from_file(options.faults_file));
    if (options.seed) scenario.seed = *options.seed;

    const auto run_dir = allocate_run_dir(options.out_dir, workflow.name);
    // The expanded copies are what resume executes against.
    write_text(run_dir / "workflow.json", workflow.to_json_text() + "\n");
    write_text(run_dir / "infra.json", infra.to_json_text() + "\n");
    write_text(run_dir / "scenario.json", scenario.to_json_text() + "\n");
    write_text(run_dir / "run_meta.json",
               json{{"backend", options.backend == BackendKind::Sim ? "sim" : "local"},
                    {"provider", options.provider},
                    {"workflow", workflow.name}}
                       .dump(2) +
                   "\n");

    ExecuteOptions exec;
    exec.run_dir = run_dir;
    exec.backend = options.backend;
    exec.provider = options.provider;
    exec.stop_at = options.stop_at ? *options.stop_at : -1.0;
    exec.stop_after_events = options.stop_after_events;
    exec.stop_signal_flag = options.stop_signal_flag;
    return execute(workflow, infra, scenario, exec);
}

RunResult resume_run(const std::filesystem::path& run_dir) {
    if (!std::filesystem::exists(run_dir / "workflow.json"))
        throw Error("not a run directory (missing workflow.json): " + run_dir.string());
    WorkflowDefinition workflow =
        WorkflowDefinition::from_json_text(read_text(run_dir / "workflow.json"));
    InfraConfig infra = InfraConfig::from_json_text(read_text(run_dir / "infra.json"));
    Scenario scenario = Scenario::from_json_text(read_text(run_dir / "scenario.json"));
    scenario.stop_at.reset();  // the stop that checkpointed the run must not refire

    json meta = json::parse(read_text(run_dir / "run_meta.json"));
    ExecuteOptions exec;
    exec.run_dir = run_dir;
    exec.backend = meta.value("backend", std::string("sim")) == "local" ? BackendKind::Local
                                                                        : BackendKind::Sim;
    exec.provider = meta.value("provider", std::string("sim"));
    exec.resume = true;

    archive_previous_outputs(run_dir);
    return execute(workflow, infra, scenario, exec);
}

}  // namespace floworc
