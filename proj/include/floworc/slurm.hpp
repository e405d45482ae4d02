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

#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "floworc/errors.hpp"

namespace floworc {

struct CommandResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

/// The only seam between the adapter and a cluster: the adapter never inspects
/// anything but runner outputs.
class CommandRunner {
public:
    virtual ~CommandRunner() = default;
    virtual CommandResult run(const std::vector<std::string>& argv) = 0;
};

/// Fork/exec runner for real clusters.
class SubprocessRunner : public CommandRunner {
public:
    CommandResult run(const std::vector<std::string>& argv) override;
};

/// Scripted runner for golden-sequence testing: responses are consumed in
/// order, every argv is recorded.
class MockCommandRunner : public CommandRunner {
public:
    void enqueue(CommandResult result) { responses_.push_back(std::move(result)); }
    CommandResult run(const std::vector<std::string>& argv) override;
    const std::vector<std::vector<std::string>>& history() const { return history_; }

private:
    std::deque<CommandResult> responses_;
    std::vector<std::vector<std::string>> history_;
};

/// Exact command templates, one place to edit per cluster dialect.
/// `{name}` fields substitute verbatim; tokens are argv entries.
struct SlurmTemplates {
    std::vector<std::string> expand = {"sbatch", "--dependency=expand:{main_job_id}",
                                       "--qos={qos}", "-N", "{n_nodes}", "{worker_launcher}"};
    std::vector<std::string> poll = {"squeue", "-j", "{job_id}", "-h", "-o", "%T %N"};
    std::vector<std::string> update = {"scontrol", "update", "job", "{main_job_id}",
                                       "NumNodes={num_nodes}"};
    std::vector<std::string> cancel = {"scancel", "{expand_job_id}"};

    static SlurmTemplates from_file(const std::filesystem::path& path);
    std::string to_json_text() const;
};

std::vector<std::string> render_template(const std::vector<std::string>& tmpl,
                                         const std::map<std::string, std::string>& fields);

/// Expand SLURM's compressed node list notation: "mn[1-3,7],gpu2" ->
/// mn1 mn2 mn3 mn7 gpu2.
std::vector<std::string> expand_nodelist(std::string_view nodelist);

enum class SlurmJobKind { Main, Expand };
enum class SlurmJobState { Pending, Running, Cancelled, Completed };

std::string to_string(SlurmJobState s);

struct SlurmJobRef {
    std::string job_id;
    SlurmJobKind kind = SlurmJobKind::Expand;
    std::vector<std::string> node_ids;
    SlurmJobState state = SlurmJobState::Pending;
    std::string depends_on;  // main job id for EXPAND jobs
    int n_nodes = 0;
};

/// The expand/poll/attach/shrink protocol against a SLURM-managed cluster.
/// Pure function of runner outputs; replaying recorded outputs reproduces
/// identical adapter state.
class SlurmAdapter {
public:
    SlurmAdapter(CommandRunner& runner, SlurmTemplates templates, std::string main_job_id,
                 std::string qos, std::string worker_launcher, int main_n_nodes);

    /// sbatch a new job that expands the main allocation; inherits the QoS.
    SlurmJobRef expand(int n_nodes);

    /// squeue one job; a vanished job reads as CANCELLED.
    std::pair<SlurmJobState, std::vector<std::string>> poll(SlurmJobRef& job);

    /// scontrol-grow the main job by an expand job that polled RUNNING.
    /// Retries once, then surfaces the error. Idempotent per expand job.
    void attach(SlurmJobRef& expand_job);

    /// scancel the expand job, then scontrol-shrink the main job.
    void shrink(SlurmJobRef& expand_job);

    int main_node_count() const { return main_nodes_; }

private:
    CommandRunner& runner_;
    SlurmTemplates templates_;
    std::string main_job_id_;
    std::string qos_;
    std::string worker_launcher_;
    int main_nodes_;
    std::map<std::string, int> attached_;  // expand job id -> node contribution
};

}  // namespace floworc
