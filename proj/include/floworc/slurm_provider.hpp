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

#include <map>
#include <mutex>
#include <thread>

#include "floworc/local_backend.hpp"
#include "floworc/slurm.hpp"

namespace floworc {

/// Elastic nodes via SLURM expand jobs. sbatch runs synchronously; the
/// squeue/scontrol leg runs on a polling thread that reports NODE_UP through
/// the backend queue. One in-flight command sequence per job.
class SlurmNodeProvider : public NodeProvider {
public:
    SlurmNodeProvider(ResourcePool& pool, const InfraConfig& infra, LocalBackend& backend,
                      SlurmAdapter& adapter, double poll_interval_seconds = 2.0);
    ~SlurmNodeProvider() override;

    std::optional<std::string> request_node() override;
    void release_node(const std::string& node_id) override;

private:
    ResourcePool& pool_;
    const InfraConfig& infra_;
    LocalBackend& backend_;
    SlurmAdapter& adapter_;
    double poll_interval_;
    std::mutex mutex_;
    std::map<std::string, SlurmJobRef> jobs_;  // pool node id -> expand job
    std::vector<std::thread> pollers_;
};

}  // namespace floworc
