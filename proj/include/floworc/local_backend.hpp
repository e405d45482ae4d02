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

#include <atomic>
#include <chrono>
#include <csignal>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <thread>

#include "floworc/backend.hpp"
#include "floworc/resources.hpp"
#include "floworc/scenario.hpp"

namespace floworc {

/// Wall-clock executor: runs each task's mock payload (sleep scaled model
/// time, then write the output files) on its own thread. Time is reported in
/// model seconds (wall seconds / time_scale) so traces stay comparable with
/// the simulated backend.
class LocalBackend : public ExecutionBackend {
public:
    LocalBackend(const InfraConfig& infra, const Scenario& scenario,
                 std::filesystem::path run_dir);
    ~LocalBackend() override;

    double now() override;
    bool submit(const ExecRequest& request) override;
    void cancel_execution(TaskId task, int attempt) override;
    void schedule_tick(double at) override;
    void schedule_timeout(double at, TaskId task, int attempt) override;
    void schedule_stop(double at) override;
    std::optional<Message> next_message() override;
    bool writes_outputs() const override { return true; }

    /// Thread-safe message ingress for executor threads and providers.
    void post(Message msg);
    /// Queue a stop request from a signal handler context.
    void post_stop() { stop_flag_.store(true); }
    /// Poll an async-signal-safe flag (set by a signal handler) for STOP.
    void watch_stop_flag(volatile std::sig_atomic_t* flag) { watched_flag_ = flag; }

    bool any_running() const;

private:
    struct Alarm {
        double t = 0.0;
        std::uint64_t seq = 0;
        Message msg;
    };
    struct Handle {
        std::shared_ptr<std::atomic<bool>> cancel;
        std::thread thread;
    };

    void reap_finished();

    const InfraConfig& infra_;
    const Scenario& scenario_;
    std::filesystem::path run_dir_;
    Rng rng_;
    std::chrono::steady_clock::time_point origin_;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Message> inbox_;
    std::vector<Alarm> alarms_;
    std::uint64_t next_seq_ = 0;
    std::map<std::pair<TaskId, int>, Handle> running_;
    std::vector<std::thread> done_threads_;
    std::atomic<bool> stop_flag_{false};
    volatile std::sig_atomic_t* watched_flag_ = nullptr;
    bool stop_delivered_ = false;
};

/// Local elastic-node provider: "provisions" a node after a scaled delay.
class LocalProvider : public NodeProvider {
public:
    LocalProvider(ResourcePool& pool, const InfraConfig& infra, LocalBackend& backend);
    ~LocalProvider() override;

    std::optional<std::string> request_node() override;
    void release_node(const std::string& node_id) override;

private:
    ResourcePool& pool_;
    const InfraConfig& infra_;
    LocalBackend& backend_;
    Rng rng_;
    std::mutex mutex_;
    std::vector<std::thread> timers_;
    std::set<std::string> released_;
};

}  // namespace floworc
