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

#include "floworc/local_backend.hpp"

#include <algorithm>

#include "floworc/artifacts.hpp"

namespace floworc {

using Clock = std::chrono::steady_clock;

LocalBackend::LocalBackend(const InfraConfig& infra, const Scenario& scenario,
                           std::filesystem::path run_dir)
    : infra_(infra),
      scenario_(scenario),
      run_dir_(std::move(run_dir)),
      rng_(scenario.seed),
      origin_(Clock::now()) {}

LocalBackend::~LocalBackend() {
    std::vector<std::thread> to_join;
    {
        std::lock_guard lock(mutex_);
        for (auto& [key, h] : running_) {
            h.cancel->store(true);
            to_join.push_back(std::move(h.thread));
        }
        running_.clear();
        for (auto& t : done_threads_) to_join.push_back(std::move(t));
        done_threads_.clear();
    }
    // Join outside the lock: workers post() into the queue while winding down.
    for (auto& t : to_join)
        if (t.joinable()) t.join();
}

double LocalBackend::now() {
    const double wall = std::chrono::duration<double>(Clock::now() - origin_).count();
    const double scale = infra_.local_time_scale > 0 ? infra_.local_time_scale : 1.0;
    return wall / scale;
}

bool LocalBackend::submit(const ExecRequest& request) {
    double duration = 0.0;
    {
        std::lock_guard lock(mutex_);
        const DurationModel& model = scenario_.model_for(request.duration_model_id);
        duration = model.sample(rng_, request.env.total_cpu_units());
    }
    const FaultSpec* fault = scenario_.fault_for(request.task, request.fingerprint);
    bool fail = false;
    bool hang = false;
    if (fault) {
        if (fault->mode == FaultSpec::Mode::Hang) hang = true;
        else {
            fail = true;
            duration *= fault->fraction;
        }
    }
    const double scale = infra_.local_time_scale > 0 ? infra_.local_time_scale : 1.0;
    const double wall_seconds = duration * scale;

    auto cancel = std::make_shared<std::atomic<bool>>(false);
    ExecRequest req = request;
    std::thread worker([this, req, cancel, wall_seconds, fail, hang, duration]() {
        const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                                 std::chrono::duration<double>(wall_seconds));
        // Sleep in slices so cancellation lands promptly and a cancelled
        // payload never writes its outputs.
        for (;;) {
            if (cancel->load()) return;
            if (hang) {
                std::this_thread::sleep_for(std::chrono::milliseconds(5));
                continue;
            }
            const auto remaining = deadline - Clock::now();
            if (remaining <= Clock::duration::zero()) break;
            std::this_thread::sleep_for(
                std::min(remaining, Clock::duration(std::chrono::milliseconds(5))));
        }
        if (cancel->load()) return;
        if (!fail) {
            for (const auto& out : req.outputs)
                write_mock_output(run_dir_, out.token, out.version, req.fingerprint);
        }
        post(MsgFinished{req.task, req.attempt, fail, duration});
    });

    {
        std::lock_guard lock(mutex_);
        running_[{request.task, request.attempt}] = Handle{cancel, std::move(worker)};
    }
    post(MsgStarted{request.task, request.attempt});
    return true;
}

void LocalBackend::cancel_execution(TaskId task, int attempt) {
    std::lock_guard lock(mutex_);
    auto it = running_.find({task, attempt});
    if (it == running_.end()) return;
    it->second.cancel->store(true);
    done_threads_.push_back(std::move(it->second.thread));
    running_.erase(it);
}

void LocalBackend::schedule_tick(double at) {
    std::lock_guard lock(mutex_);
    alarms_.push_back(Alarm{at, next_seq_++, MsgTick{}});
    cv_.notify_all();
}

void LocalBackend::schedule_timeout(double at, TaskId task, int attempt) {
    std::lock_guard lock(mutex_);
    alarms_.push_back(Alarm{at, next_seq_++, MsgTimeout{task, attempt}});
    cv_.notify_all();
}

void LocalBackend::schedule_stop(double at) {
    std::lock_guard lock(mutex_);
    alarms_.push_back(Alarm{at, next_seq_++, MsgStop{}});
    cv_.notify_all();
}

void LocalBackend::post(Message msg) {
    {
        std::lock_guard lock(mutex_);
        if (const auto* fin = std::get_if<MsgFinished>(&msg)) {
            auto it = running_.find({fin->task, fin->attempt});
            if (it != running_.end()) {
                done_threads_.push_back(std::move(it->second.thread));
                running_.erase(it);
            }
        }
        inbox_.push_back(std::move(msg));
    }
    cv_.notify_all();
}

void LocalBackend::reap_finished() {
    std::vector<std::thread> to_join;
    {
        std::lock_guard lock(mutex_);
        to_join.swap(done_threads_);
    }
    for (auto& t : to_join)
        if (t.joinable()) t.join();
}

bool LocalBackend::any_running() const {
    std::lock_guard lock(mutex_);
    return !running_.empty();
}

std::optional<Message> LocalBackend::next_message() {
    std::unique_lock lock(mutex_);
    const double scale = infra_.local_time_scale > 0 ? infra_.local_time_scale : 1.0;
    for (;;) {
        if (watched_flag_ && *watched_flag_ != 0) stop_flag_.store(true);
        if (stop_flag_.load() && !stop_delivered_) {
            stop_delivered_ = true;
            return MsgStop{};
        }
        if (!inbox_.empty()) {
            Message msg = std::move(inbox_.front());
            inbox_.pop_front();
            lock.unlock();
            reap_finished();
            return msg;
        }
        // Earliest due alarm fires once the wall clock passes it.
        auto next_alarm = std::min_element(
            alarms_.begin(), alarms_.end(), [](const Alarm& a, const Alarm& b) {
                return a.t != b.t ? a.t < b.t : a.seq < b.seq;
            });
        const double t_now =
            std::chrono::duration<double>(Clock::now() - origin_).count() / scale;
        if (next_alarm != alarms_.end() && next_alarm->t <= t_now) {
            Message msg = std::move(next_alarm->msg);
            alarms_.erase(next_alarm);
            return msg;
        }
        if (next_alarm == alarms_.end() && running_.empty() && inbox_.empty()) {
            // Nothing running, no alarms pending: no message can ever arrive.
            return std::nullopt;
        }
        if (next_alarm != alarms_.end()) {
            const double wait_model = next_alarm->t - t_now;
            cv_.wait_for(lock, std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(
                                       std::max(wait_model * scale, 0.001))));
        } else {
            cv_.wait_for(lock, std::chrono::milliseconds(20));
        }
    }
}

LocalProvider::LocalProvider(ResourcePool& pool, const InfraConfig& infra, LocalBackend& backend)
    : pool_(pool), infra_(infra), backend_(backend), rng_(0x10ca1) {}

LocalProvider::~LocalProvider() {
    std::lock_guard lock(mutex_);
    for (auto& t : timers_)
        if (t.joinable()) t.join();
}

std::optional<std::string> LocalProvider::request_node() {
    if (pool_.n_live_elastic() >= infra_.elastic_max) return std::nullopt;
    const std::string id = pool_.add_elastic_node(infra_.elastic_shape);
    double delay = 0.0;
    {
        std::lock_guard lock(mutex_);
        delay = std::max(infra_.provision_delay_base * infra_.provision_delay.sample_factor(rng_),
                         0.0);
    }
    const double scale = infra_.local_time_scale > 0 ? infra_.local_time_scale : 1.0;
    std::thread timer([this, id, delay, scale]() {
        std::this_thread::sleep_for(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(delay * scale)));
        backend_.post(MsgNodeUp{id, delay});
    });
    {
        std::lock_guard lock(mutex_);
        timers_.push_back(std::move(timer));
    }
    return id;
}

void LocalProvider::release_node(const std::string& node_id) {
    const NodeResource* node = pool_.find(node_id);
    if (!node || node->pool != NodePool::Elastic)
        throw ProviderRejection("cannot release unknown elastic node '" + node_id + "'");
    std::lock_guard lock(mutex_);
    if (!released_.insert(node_id).second)
        throw ProviderRejection("node '" + node_id + "' was already released");
}

}  // namespace floworc
