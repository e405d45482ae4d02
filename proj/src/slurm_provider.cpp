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

#include "floworc/slurm_provider.hpp"

#include <chrono>

namespace floworc {

SlurmNodeProvider::SlurmNodeProvider(ResourcePool& pool, const InfraConfig& infra,
                                     LocalBackend& backend, SlurmAdapter& adapter,
                                     double poll_interval_seconds)
    : pool_(pool),
      infra_(infra),
      backend_(backend),
      adapter_(adapter),
      poll_interval_(poll_interval_seconds) {}

SlurmNodeProvider::~SlurmNodeProvider() {
    std::vector<std::thread> pollers;
    {
        std::lock_guard lock(mutex_);
        pollers.swap(pollers_);
    }
    for (auto& t : pollers)
        if (t.joinable()) t.join();
}

std::optional<std::string> SlurmNodeProvider::request_node() {
    if (pool_.n_live_elastic() >= infra_.elastic_max) return std::nullopt;
    SlurmJobRef job;
    try {
        job = adapter_.expand(1);
    } catch (const ProviderRejection&) {
        return std::nullopt;
    }
    const std::string node_id = pool_.add_elastic_node(infra_.elastic_shape);
    {
        std::lock_guard lock(mutex_);
        jobs_[node_id] = job;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::thread poller([this, node_id, job, t0]() mutable {
        for (;;) {
            auto [state, nodes] = adapter_.poll(job);
            if (state == SlurmJobState::Running) {
                adapter_.attach(job);
                {
                    std::lock_guard lock(mutex_);
                    jobs_[node_id] = job;
                }
                const double waited =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                backend_.post(MsgNodeUp{node_id, waited / std::max(infra_.local_time_scale, 1e-9)});
                return;
            }
            if (state != SlurmJobState::Pending) return;  // cancelled or completed underneath us
            std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(poll_interval_)));
        }
    });
    {
        std::lock_guard lock(mutex_);
        pollers_.push_back(std::move(poller));
    }
    return node_id;
}

void SlurmNodeProvider::release_node(const std::string& node_id) {
    SlurmJobRef job;
    {
        std::lock_guard lock(mutex_);
        auto it = jobs_.find(node_id);
        if (it == jobs_.end())
            throw ProviderRejection("no SLURM expand job for node '" + node_id + "'");
        job = it->second;
        jobs_.erase(it);
    }
    adapter_.shrink(job);
}

}  // namespace floworc
