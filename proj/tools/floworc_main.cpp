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

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "floworc/report.hpp"
#include "floworc/runner.hpp"

namespace {

volatile std::sig_atomic_t g_stop_signal = 0;

void on_stop_signal(int) { g_stop_signal = 1; }

struct CommonFlags {
    std::string workflow;
    std::string infra;
    std::string scenario;
    std::string faults;
    std::string out_dir = "runs";
    std::string provider = "sim";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double stop_at = -1.0;
    bool stop_at_set = false;
    std::uint64_t stop_after_events = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("workflow", workflow, "workflow definition file")->required();
        cmd->add_option("infra", infra, "infrastructure config file")->required();
        cmd->add_option("--scenario", scenario, "scenario file (durations, faults, seed)");
        cmd->add_option("--faults", faults, "extra fault plan merged over the scenario");
        cmd->add_option("--out-dir", out_dir, "parent directory for run directories");
        cmd->add_option("--provider", provider, "node provider: sim or slurm")
            ->check(CLI::IsMember({"sim", "slurm"}));
        cmd->add_option("--seed", seed, "override the scenario seed")
            ->each([this](const std::string&) { seed_set = true; });
        cmd->add_option("--stop-at", stop_at, "deliver a STOP signal at this model time")
            ->each([this](const std::string&) { stop_at_set = true; });
        cmd->add_option("--stop-after-events", stop_after_events,
                        "stop once the trace holds this many events (testing hook)");
    }

    floworc::RunOptions to_options(floworc::BackendKind backend) const {
        floworc::RunOptions opts;
        opts.stop_signal_flag = &g_stop_signal;
        opts.workflow_file = workflow;
        opts.infra_file = infra;
        opts.scenario_file = scenario;
        opts.faults_file = faults;
        opts.out_dir = out_dir;
        opts.backend = backend;
        opts.provider = provider;
        if (seed_set) opts.seed = seed;
        if (stop_at_set) opts.stop_at = stop_at;
        opts.stop_after_events = stop_after_events;
        return opts;
    }
};

int do_run(const CommonFlags& flags, floworc::BackendKind backend) {
    const auto result = floworc::run_workflow(flags.to_options(backend));
    std::cout << "run dir: " << result.run_dir.string() << "\n"
              << "exit code: " << result.exit_code << " (0 ok, 3 checkpointed, 1 failed)\n"
              << "makespan: " << result.summary.makespan << " s, executed "
              << result.summary.executed << "/" << result.summary.total_tasks << " tasks, "
              << result.summary.skipped << " skipped, " << result.summary.ignored_failures
              << " ignored failures\n";
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"task-based workflow orchestrator with a simulated elastic cluster"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "execute a workflow on the local backend");
    run_flags.attach(run_cmd);

    CommonFlags sim_flags;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "execute a workflow on the discrete-event simulator");
    sim_flags.attach(sim_cmd);

    std::string resume_dir;
    CLI::App* resume_cmd = app.add_subcommand("resume", "continue a checkpointed run");
    resume_cmd->add_option("run_dir", resume_dir, "run directory to resume")->required();

    std::string report_dir, report_kind = "graph", report_out;
    CLI::App* report_cmd = app.add_subcommand("report", "derive reports from a finished run");
    report_cmd->add_option("run_dir", report_dir, "run directory (for scaling: directory of runs)")
        ->required();
    report_cmd->add_option("--kind", report_kind, "graph | elasticity | gantt | scaling")
        ->check(CLI::IsMember({"graph", "elasticity", "gantt", "scaling"}));
    report_cmd->add_option("--out", report_out, "output directory (default: the run directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            // The queue manager's pre-kill signal triggers a safe stop.
            std::signal(SIGTERM, on_stop_signal);
            std::signal(SIGINT, on_stop_signal);
            return do_run(run_flags, floworc::BackendKind::Local);
        }
        if (sim_cmd->parsed()) return do_run(sim_flags, floworc::BackendKind::Sim);
        if (resume_cmd->parsed()) {
            const auto result = floworc::resume_run(resume_dir);
            std::cout << "resumed " << result.run_dir.string() << ": exit "
                      << result.exit_code << ", executed " << result.summary.executed
                      << ", skipped " << result.summary.skipped << "\n";
            return result.exit_code;
        }
        if (report_cmd->parsed()) {
            const auto files = floworc::write_report(report_dir, report_kind,
                                                     report_out.empty()
                                                         ? std::filesystem::path{}
                                                         : std::filesystem::path(report_out));
            for (const auto& f : files) std::cout << f.string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
