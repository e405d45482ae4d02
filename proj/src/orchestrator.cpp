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

#include "floworc/orchestrator.hpp"

#include <algorithm>

#include "floworc/artifacts.hpp"

namespace floworc {

namespace {

std::string fmt_seconds(double v) {
    std::string s = std::to_string(v);
    return s;
}

}  // namespace

Orchestrator::Orchestrator(TaskGraph& graph, ResourcePool& pool, ExecutionBackend& backend,
                           NodeProvider& provider, const InfraConfig& infra, TraceLog& trace,
                           OrchestratorConfig config)
    : graph_(graph),
      pool_(pool),
      backend_(backend),
      provider_(provider),
      infra_(infra),
      trace_(trace),
      config_(std::move(config)),
      profiles_(infra.default_mean_et, infra.rt_prior) {}

void Orchestrator::emit(EventKind kind, std::optional<TaskId> task,
                        std::vector<std::string> nodes,
                        std::map<std::string, std::string> detail) {
    TraceEvent e;
    e.t = backend_.now();
    e.kind = kind;
    e.task = task;
    e.node_ids = std::move(nodes);
    e.detail = std::move(detail);
    if (task && kind != EventKind::Register && kind != EventKind::Ready &&
        kind != EventKind::Schedule)
        last_task_event_t_ = std::max(last_task_event_t_, e.t);
    trace_.append(std::move(e));
}

bool Orchestrator::stop_budget_reached() const {
    return config_.stop_after_events > 0 &&
           trace_.events().size() >= config_.stop_after_events;
}

RunSummary Orchestrator::run() {
    for (const auto& [id, t] : graph_.tasks())
        emit(EventKind::Register, id, {}, {{"type", t.type}});

    if (config_.resume_manifest) apply_resume_skips();

    for (const auto& [id, t] : graph_.tasks())
        if (t.state == TaskState::Ready) emit(EventKind::Ready, id);

    if (config_.stop_at >= 0.0) backend_.schedule_stop(config_.stop_at);
    if (!graph_.all_terminal())
        backend_.schedule_tick(backend_.now() + infra_.elasticity_period);

    while (!stop_requested_ && !stop_budget_reached()) {
        schedule_and_dispatch();
        if (graph_.all_terminal()) break;
        auto msg = backend_.next_message();
        if (!msg) break;
        handle_message(*msg);
    }

    RunSummary summary;
    summary.total_tasks = graph_.tasks().size();
    if (stop_requested_ || stop_budget_reached()) {
        stop_requested_ = true;
        safe_stop_sweep();
        summary.checkpointed = true;
    }
    terminal_cleanup();
    append_sample();

    for (const auto& [id, t] : graph_.tasks()) {
        if (t.state == TaskState::Done) record_done(t);
        if (t.state == TaskState::Skipped && config_.resume_manifest) {
            if (const CheckpointRecord* rec = config_.resume_manifest->find(t.fingerprint))
                manifest_.add(*rec);
        }
    }

    bool manifest_ok = true;
    if (!config_.run_dir.empty()) {
        try {
            manifest_.save(config_.run_dir / "manifest.json", config_.workflow_name);
            emit(EventKind::Checkpoint, std::nullopt, {},
                 {{"records", std::to_string(manifest_.size())},
                  {"reason", summary.checkpointed ? "stop" : "completion"}});
        } catch (const Error&) {
            manifest_ok = false;
        }
    }

    summary.stalled = !summary.checkpointed && !graph_.all_terminal();
    summary.makespan = last_task_event_t_;
    summary.executed = started_ever_.size();
    summary.skipped = graph_.count_state(TaskState::Skipped);
    summary.ignored_failures = graph_.count_state(TaskState::IgnoredFailed);
    for (int s = 0; s <= static_cast<int>(TaskState::Skipped); ++s) {
        const auto state = static_cast<TaskState>(s);
        summary.state_counts[to_string(state)] = graph_.count_state(state);
    }

    const bool any_failed = graph_.count_state(TaskState::Failed) > 0 ||
                            graph_.count_state(TaskState::Cancelled) > 0;
    if (summary.checkpointed)
        summary.exit_code = manifest_ok ? kExitCheckpointed : kExitFailure;
    else if (summary.stalled || any_failed || !manifest_ok)
        summary.exit_code = kExitFailure;
    else
        summary.exit_code = kExitSuccess;
    trace_.flush();
    return summary;
}

void Orchestrator::apply_resume_skips() {
    const CheckpointManifest& manifest = *config_.resume_manifest;
    for (const auto& [id, t] : graph_.tasks()) {
        if (t.state != TaskState::Created && t.state != TaskState::Ready) continue;
        if (restart_check(t, manifest, config_.run_dir) == RestartDecision::Skip) {
            graph_.skip_task(id);
            emit(EventKind::Skip, id);
        }
    }
}

void Orchestrator::schedule_and_dispatch() {
    for (TaskId id : graph_.ready_tasks()) {
        if (stop_requested_ || stop_budget_reached()) return;
        const TaskInstance& t = graph_.task(id);
        auto assignment = pool_.fits(t.constraints);
        if (!assignment) continue;  // stays READY; smaller tasks may still fit
        Lease lease = pool_.allocate(*assignment, t.constraints);
        graph_.mark_scheduled(id);
        emit(EventKind::Schedule, id, lease.node_ids,
             {{"attempt", std::to_string(t.attempt)}});

        ExecRequest req;
        req.task = id;
        req.attempt = t.attempt;
        req.type_name = t.type;
        req.duration_model_id = graph_.type(t.type).duration_model_id;
        req.fingerprint = t.fingerprint;
        req.env.cpu_units_per_node = lease.cpu_per_node;
        req.env.gpu_device_indices = lease.gpu_indices;
        req.env.node_ids = lease.node_ids;
        req.env.timeout = t.reliability.time_out;
        req.outputs = t.output_bindings();

        if (!backend_.submit(req)) {
            // Executor rejection: task returns to READY, lease comes back.
            pool_.release(lease);
            graph_.unschedule(id);
            continue;
        }
        inflight_[id] = InFlight{std::move(lease), t.attempt, backend_.now(), false};
    }
}

void Orchestrator::handle_message(const Message& msg) {
    std::visit(
        [this](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MsgStarted>) on_started(m);
            else if constexpr (std::is_same_v<T, MsgFinished>) on_finished(m);
            else if constexpr (std::is_same_v<T, MsgNodeUp>) on_node_up(m);
            else if constexpr (std::is_same_v<T, MsgTick>) on_tick();
            else if constexpr (std::is_same_v<T, MsgTimeout>) on_timeout(m);
            else if constexpr (std::is_same_v<T, MsgStop>) stop_requested_ = true;
        },
        msg);
}

void Orchestrator::on_started(const MsgStarted& msg) {
    auto it = inflight_.find(msg.task);
    if (it == inflight_.end() || it->second.attempt != msg.attempt) return;
    const TaskInstance& t = graph_.task(msg.task);
    if (t.state != TaskState::Scheduled) return;
    graph_.mark_running(msg.task);
    it->second.started = true;
    it->second.start_t = backend_.now();
    started_ever_.insert(msg.task);
    emit(EventKind::Start, msg.task, it->second.lease.node_ids,
         {{"attempt", std::to_string(msg.attempt)}});
    if (t.reliability.time_out)
        backend_.schedule_timeout(backend_.now() + *t.reliability.time_out, msg.task,
                                  msg.attempt);
}

void Orchestrator::release_lease_of(TaskId id) {
    auto it = inflight_.find(id);
    if (it == inflight_.end()) return;
    std::vector<std::string> nodes = it->second.lease.node_ids;
    pool_.release(it->second.lease);
    inflight_.erase(it);
    drain_check(nodes);
}

void Orchestrator::on_finished(const MsgFinished& msg) {
    auto it = inflight_.find(msg.task);
    if (it == inflight_.end() || it->second.attempt != msg.attempt) return;
    const TaskInstance& t = graph_.task(msg.task);
    if (t.state != TaskState::Running) return;

    const std::vector<std::string> nodes = it->second.lease.node_ids;
    if (!msg.failed) {
        profiles_.record_execution(t.type, msg.observed_seconds);
        if (config_.materialize_outputs && !backend_.writes_outputs())
            materialize_done_outputs(t);
        release_lease_of(msg.task);
        emit(EventKind::End, msg.task, nodes,
             {{"attempt", std::to_string(msg.attempt)},
              {"duration", fmt_seconds(msg.observed_seconds)}});
        CompletionResult result = graph_.complete_task(msg.task, Outcome::Done);
        for (TaskId r : result.newly_ready) emit(EventKind::Ready, r);
        return;
    }
    release_lease_of(msg.task);
    emit(EventKind::Fail, msg.task, nodes,
         {{"attempt", std::to_string(msg.attempt)},
          {"duration", fmt_seconds(msg.observed_seconds)}});
    handle_task_failure(msg.task, false, msg.observed_seconds);
}

void Orchestrator::on_timeout(const MsgTimeout& msg) {
    auto it = inflight_.find(msg.task);
    if (it == inflight_.end() || it->second.attempt != msg.attempt) return;
    const TaskInstance& t = graph_.task(msg.task);
    if (t.state != TaskState::Running || !t.reliability.time_out) return;
    backend_.cancel_execution(msg.task, msg.attempt);
    const std::vector<std::string> nodes = it->second.lease.node_ids;
    release_lease_of(msg.task);
    emit(EventKind::Timeout, msg.task, nodes,
         {{"attempt", std::to_string(msg.attempt)},
          {"time_out", fmt_seconds(*t.reliability.time_out)}});
    handle_task_failure(msg.task, true, *t.reliability.time_out);
}

void Orchestrator::handle_task_failure(TaskId id, bool timed_out, double observed) {
    (void)timed_out;
    (void)observed;
    TaskInstance& t = graph_.task_mut(id);
    switch (resolve_failure(t)) {
        case FailureResolution::IgnoreWithDefaults: {
            if (config_.materialize_outputs) materialize_default_outputs(t);
            CompletionResult result = graph_.complete_task(id, Outcome::IgnoredFailed);
            for (TaskId r : result.newly_ready) emit(EventKind::Ready, r);
            break;
        }
        case FailureResolution::Requeue: {
            graph_.requeue_for_retry(id);
            emit(EventKind::Ready, id,
                 {}, {{"attempt", std::to_string(graph_.task(id).attempt)}});
            break;
        }
        case FailureResolution::Fail: {
            CompletionResult result = graph_.complete_task(id, Outcome::Failed);
            for (TaskId c : result.cancelled) emit(EventKind::Cancel, c);
            break;
        }
    }
}

void Orchestrator::on_node_up(const MsgNodeUp& msg) {
    const NodeResource* node = pool_.find(msg.node_id);
    if (!node || node->state != NodeState::Provisioning) return;
    pool_.mark_up(msg.node_id);
    profiles_.record_provision(msg.provision_seconds);
    emit(EventKind::NodeUp, std::nullopt, {msg.node_id},
         {{"provision_seconds", fmt_seconds(msg.provision_seconds)}});
}

std::map<std::string, double> Orchestrator::running_load_by_node() const {
    std::map<std::string, double> load;
    const double now = backend_.now();
    for (const auto& [id, fl] : inflight_) {
        const TaskInstance& t = graph_.task(id);
        if (t.state != TaskState::Running) continue;
        const double elapsed = now - fl.start_t;
        const double remaining = std::max(profiles_.mean_execution(t.type) - elapsed, 0.0);
        for (const auto& n : fl.lease.node_ids) load[n] += remaining;
    }
    return load;
}

void Orchestrator::append_sample() {
    ElasticitySample s;
    s.t = backend_.now();
    std::vector<WorkloadItem> items;
    for (TaskId id : graph_.ready_tasks())
        items.push_back(WorkloadItem{graph_.task(id).type, graph_.task(id).constraints});
    s.pw = estimate_parallel_workload(items, profiles_, infra_.reference_shape(),
                                      infra_.workload_mode);
    s.ic = estimate_infrastructure_capacity(pool_.nodes(), profiles_, infra_.reference_shape(),
                                            infra_.count_provisioning_in_capacity);
    s.n_up = pool_.n_up();
    s.n_provisioning = pool_.n_provisioning();
    s.n_running_tasks = static_cast<int>(graph_.count_state(TaskState::Running));
    samples_.push_back(s);
}

void Orchestrator::on_tick() {
    append_sample();
    const ElasticitySample& s = samples_.back();
    if (infra_.elastic_max > 0) {
        ElasticityInputs in;
        in.pw = s.pw;
        in.ic = s.ic;
        in.now = backend_.now();
        in.last_scale_up_t = last_scale_up_t_;
        in.running_load = running_load_by_node();
        apply_decision(decide(in, pool_, profiles_, infra_));
    }
    if (graph_.all_terminal() || stop_requested_) return;
    // Stall check: the dispatch pass before this tick placed every task that
    // fits. With nothing running and nothing provisioning, the scaling inputs
    // can never change again, so further ticks are pointless.
    if (inflight_.empty() && pool_.n_provisioning() == 0) return;
    backend_.schedule_tick(backend_.now() + infra_.elasticity_period);
}

void Orchestrator::apply_decision(const ScalingDecision& decision) {
    switch (decision.action) {
        case ScalingDecision::Action::Hold:
            return;
        case ScalingDecision::Action::ScaleUp: {
            auto id = provider_.request_node();
            std::map<std::string, std::string> detail = {
                {"pw", fmt_seconds(decision.pw)}, {"ic", fmt_seconds(decision.ic)}};
            if (id) {
                detail["node"] = *id;
                last_scale_up_t_ = backend_.now();
                emit(EventKind::ScaleUpRequest, std::nullopt, {*id}, std::move(detail));
            } else {
                // Rejections drop the decision; the next period re-evaluates.
                detail["rejected"] = "true";
                emit(EventKind::ScaleUpRequest, std::nullopt, {}, std::move(detail));
            }
            return;
        }
        case ScalingDecision::Action::ScaleDown: {
            pool_.mark_draining(decision.node_id);
            emit(EventKind::ScaleDown, std::nullopt, {decision.node_id},
                 {{"phase", "drain"},
                  {"pw", fmt_seconds(decision.pw)},
                  {"ic", fmt_seconds(decision.ic)}});
            if (pool_.node_idle(decision.node_id)) finish_drain(decision.node_id);
            return;
        }
    }
}

void Orchestrator::drain_check(const std::vector<std::string>& node_ids) {
    for (const auto& id : node_ids) {
        const NodeResource* n = pool_.find(id);
        if (n && n->state == NodeState::Draining && pool_.node_idle(id)) finish_drain(id);
    }
}

void Orchestrator::finish_drain(const std::string& node_id) {
    pool_.mark_released(node_id);
    provider_.release_node(node_id);
    emit(EventKind::ScaleDown, std::nullopt, {node_id}, {{"phase", "release"}});
}

void Orchestrator::materialize_done_outputs(const TaskInstance& task) {
    for (const auto& out : task.output_bindings())
        write_mock_output(config_.run_dir, out.token, out.version, task.fingerprint);
}

void Orchestrator::materialize_default_outputs(const TaskInstance& task) {
    // Params without an explicit default fall back to the empty file.
    const TaskType& tt = graph_.type(task.type);
    for (std::size_t i = 0; i < tt.params.size(); ++i) {
        const ParamSpec& p = tt.params[i];
        if (p.direction == ParamDirection::In) continue;
        auto kind = DefaultValueKind::EmptyFile;
        if (auto it = task.reliability.default_outputs.find(p.name);
            it != task.reliability.default_outputs.end())
            kind = it->second;
        const std::string& token = task.bindings[i].token;
        if (kind == DefaultValueKind::EmptyFile)
            write_empty_output(config_.run_dir, token);
        else
            write_none_marker(config_.run_dir, token);
    }
}

void Orchestrator::record_done(const TaskInstance& task) {
    CheckpointRecord rec;
    rec.fingerprint = task.fingerprint;
    rec.task_id = task.id;
    rec.type = task.type;
    for (const auto& out : task.output_bindings()) {
        RecordedOutput ro;
        ro.token = out.token;
        ro.path = (std::filesystem::path("data") / out.token).generic_string();
        std::error_code ec;
        const auto size =
            std::filesystem::file_size(token_path(config_.run_dir, out.token), ec);
        ro.size = ec ? 0 : size;
        ro.none_marker = false;
        rec.outputs.push_back(std::move(ro));
    }
    manifest_.add(std::move(rec));
}

void Orchestrator::safe_stop_sweep() {
    // Cancel running and pending work; completed outputs are already in their
    // final location under the run directory.
    for (const auto& [id, t] : graph_.tasks()) {
        if (is_terminal(t.state)) continue;
        std::vector<std::string> nodes;
        if (t.state == TaskState::Running || t.state == TaskState::Scheduled) {
            backend_.cancel_execution(id, t.attempt);
            auto it = inflight_.find(id);
            if (it != inflight_.end()) nodes = it->second.lease.node_ids;
            release_lease_of(id);
        }
        graph_.cancel_task(id);
        emit(EventKind::Cancel, id, std::move(nodes), {{"reason", "stop"}});
    }
}

void Orchestrator::terminal_cleanup() {
    for (const auto& node : pool_.nodes()) {
        if (node.pool != NodePool::Elastic) continue;
        if (node.state == NodeState::Up) {
            pool_.mark_draining(node.node_id);
            emit(EventKind::ScaleDown, std::nullopt, {node.node_id},
                 {{"phase", "drain"}, {"reason", "run-end"}});
            if (pool_.node_idle(node.node_id)) finish_drain(node.node_id);
        } else if (node.state == NodeState::Provisioning) {
            pool_.mark_released(node.node_id);
            provider_.release_node(node.node_id);
            emit(EventKind::ScaleDown, std::nullopt, {node.node_id},
                 {{"phase", "release"}, {"reason", "provisioning-abandoned"}});
        }
    }
}

}  // namespace floworc
