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

#include <queue>
#include <set>

#include "floworc/backend.hpp"
#include "floworc/resources.hpp"
#include "floworc/scenario.hpp"

namespace floworc {

/// Deterministic discrete-event cluster. Strictly single-threaded: one event
/// queue, ties broken by insertion order, clock only moves forward. Also acts
/// as the node provider for the simulated infrastructure manager.
class SimBackend : public ExecutionBackend, public NodeProvider {
public:
    SimBackend(ResourcePool& pool, const InfraConfig& infra, const Scenario& scenario);

    // ExecutionBackend
    double now() override { return clock_; }
    bool submit(const ExecRequest& request) override;
    void cancel_execution(TaskId task, int attempt) override;
    void schedule_tick(double at) override;
    void schedule_timeout(double at, TaskId task, int attempt) override;
    void schedule_stop(double at) override;
    std::optional<Message> next_message() override;
    bool writes_outputs() const override { return false; }

    // NodeProvider
    std::optional<std::string> request_node() override;
    void release_node(const std::string& node_id) override;

    std::size_t pending_events() const { return queue_.size(); }

private:
    struct Event {
        double t = 0.0;
        std::uint64_t seq = 0;
        Message msg;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.t != b.t) return a.t > b.t;
            return a.seq > b.seq;  // equal times resolve in insertion order
        }
    };

    void push(double t, Message msg);

    ResourcePool& pool_;
    const InfraConfig& infra_;
    const Scenario& scenario_;
    Rng rng_;
    double clock_ = 0.0;
    double next_dispatch_slot_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::set<std::pair<TaskId, int>> cancelled_;
    std::set<std::string> released_nodes_;
};

}  // namespace floworc
