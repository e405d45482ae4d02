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

#include "floworc/sim_backend.hpp"

namespace floworc {

SimBackend::SimBackend(ResourcePool& pool, const InfraConfig& infra, const Scenario& scenario)
    : pool_(pool), infra_(infra), scenario_(scenario), rng_(scenario.seed) {}

void SimBackend::push(double t, Message msg) {
    queue_.push(Event{t, next_seq_++, std::move(msg)});
}

bool SimBackend::submit(const ExecRequest& request) {
    // The dispatcher is a serialized resource: starts are spaced by the
    // configured latency, which is the modelled scheduling overhead.
    double start = clock_;
    if (infra_.dispatch_latency > 0.0) {
        start = std::max(clock_, next_dispatch_slot_) + infra_.dispatch_latency;
        next_dispatch_slot_ = start;
    }
    const DurationModel& model = scenario_.model_for(request.duration_model_id);
    double duration = model.sample(rng_, request.env.total_cpu_units());

    const FaultSpec* fault = scenario_.fault_for(request.task, request.fingerprint);
    push(start, MsgStarted{request.task, request.attempt});
    if (fault && fault->mode == FaultSpec::Mode::Hang) {
        // Hung task: no completion ever arrives; only a timeout can reap it.
        return true;
    }
    bool failed = false;
    if (fault && fault->mode == FaultSpec::Mode::FailAt) {
        duration *= fault->fraction;
        failed = true;
    }
    push(start + duration, MsgFinished{request.task, request.attempt, failed, duration});
    return true;
}

void SimBackend::cancel_execution(TaskId task, int attempt) {
    cancelled_.insert({task, attempt});
}

void SimBackend::schedule_tick(double at) {
    push(at, MsgTick{});
}

void SimBackend::schedule_timeout(double at, TaskId task, int attempt) {
    push(at, MsgTimeout{task, attempt});
}

void SimBackend::schedule_stop(double at) {
    push(at, MsgStop{});
}

std::optional<Message> SimBackend::next_message() {
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        clock_ = std::max(clock_, ev.t);
        if (const auto* fin = std::get_if<MsgFinished>(&ev.msg)) {
            if (cancelled_.count({fin->task, fin->attempt})) continue;
        }
        if (const auto* started = std::get_if<MsgStarted>(&ev.msg)) {
            if (cancelled_.count({started->task, started->attempt})) continue;
        }
        return ev.msg;
    }
    return std::nullopt;
}

std::optional<std::string> SimBackend::request_node() {
    if (pool_.n_live_elastic() >= infra_.elastic_max) return std::nullopt;
    const std::string id = pool_.add_elastic_node(infra_.elastic_shape);
    const double delay =
        std::max(infra_.provision_delay_base * infra_.provision_delay.sample_factor(rng_), 0.0);
    push(clock_ + delay, MsgNodeUp{id, delay});
    return id;
}

void SimBackend::release_node(const std::string& node_id) {
    const NodeResource* node = pool_.find(node_id);
    if (!node || node->pool != NodePool::Elastic)
        throw ProviderRejection("cannot release unknown elastic node '" + node_id + "'");
    if (!released_nodes_.insert(node_id).second)
        throw ProviderRejection("node '" + node_id + "' was already released");
}

}  // namespace floworc
