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

#include "floworc/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace floworc {

void ProfileStore::record_execution(const std::string& type, double seconds) {
    Stats& s = executions_[type];
    s.count += 1;
    const double delta = seconds - s.mean;
    s.mean += delta / static_cast<double>(s.count);
    s.m2 += delta * (seconds - s.mean);
}

void ProfileStore::record_provision(double seconds) {
    provision_count_ += 1;
    provision_mean_ += (seconds - provision_mean_) / static_cast<double>(provision_count_);
}

double ProfileStore::mean_execution(const std::string& type) const {
    auto it = executions_.find(type);
    if (it == executions_.end() || it->second.count == 0) return default_mean_et_;
    return it->second.mean;
}

double ProfileStore::mean_provision() const {
    const double rt = provision_count_ == 0 ? rt_prior_ : provision_mean_;
    return std::max(rt, 1.0);
}

std::size_t ProfileStore::execution_count(const std::string& type) const {
    auto it = executions_.find(type);
    return it == executions_.end() ? 0 : it->second.count;
}

std::optional<double> ProfileStore::execution_variance(const std::string& type) const {
    auto it = executions_.find(type);
    if (it == executions_.end() || it->second.count < 2) return std::nullopt;
    return it->second.m2 / static_cast<double>(it->second.count - 1);
}

double node_equivalents(const TaskConstraints& c, const NodeShape& reference, WorkloadMode mode) {
    double fraction = 0.0;
    for (const auto& spec : c.processors) {
        const int capacity = spec.processor_type == ProcessorType::Cpu ? reference.cpu_units
                                                                       : reference.gpu_units;
        // A demand the reference node cannot express counts as a full node.
        const double f = capacity > 0
                             ? static_cast<double>(spec.computing_units) / capacity
                             : 1.0;
        fraction = std::max(fraction, f);
    }
    if (c.processors.empty()) fraction = 1.0;
    const double nodes = static_cast<double>(c.computing_nodes);
    if (mode == WorkloadMode::Fractional) return nodes * fraction;
    return std::max(nodes, std::ceil(nodes * fraction));
}

double node_capacity_equivalents(const NodeShape& shape, const NodeShape& reference) {
    if (reference.cpu_units <= 0) return 1.0;
    return static_cast<double>(shape.cpu_units) / static_cast<double>(reference.cpu_units);
}

double estimate_parallel_workload(const std::vector<WorkloadItem>& ready,
                                  const ProfileStore& profiles, const NodeShape& reference,
                                  WorkloadMode mode) {
    double pw = 0.0;
    for (const auto& item : ready)
        pw += node_equivalents(item.constraints, reference, mode) *
              profiles.mean_execution(item.type_name);
    return pw;
}

double estimate_infrastructure_capacity(const std::vector<NodeResource>& nodes,
                                        const ProfileStore& profiles, const NodeShape& reference,
                                        bool count_provisioning) {
    const double rt = profiles.mean_provision();
    double ic = 0.0;
    for (const auto& n : nodes) {
        if (n.state == NodeState::Up ||
            (count_provisioning && n.state == NodeState::Provisioning))
            ic += node_capacity_equivalents(n.shape, reference) * rt;
    }
    return ic;
}

ScalingDecision decide(const ElasticityInputs& in, const ResourcePool& pool,
                       const ProfileStore& profiles, const InfraConfig& config) {
    ScalingDecision d;
    d.pw = in.pw;
    d.ic = in.ic;
    d.t = in.now;

    if (in.pw > in.ic) {
        if (pool.n_live_elastic() < config.elastic_max) {
            d.action = ScalingDecision::Action::ScaleUp;
            d.n_nodes = 1;
        }
        return d;
    }
    if (in.pw < in.ic) {
        // Hysteresis: a node requested less than one mean provision time ago
        // may still be coming up; removing capacity now would thrash.
        if (in.last_scale_up_t >= 0.0 &&
            in.now - in.last_scale_up_t < profiles.mean_provision())
            return d;
        std::vector<NodeResource> candidates;
        for (const auto& n : pool.nodes())
            if (n.pool == NodePool::Elastic && n.state == NodeState::Up) candidates.push_back(n);
        if (candidates.empty()) return d;
        d.action = ScalingDecision::Action::ScaleDown;
        d.node_id = select_victim(candidates, in.pw, in.ic, profiles,
                                  config.reference_shape(), in.running_load);
    }
    return d;
}

std::string select_victim(const std::vector<NodeResource>& nodes, double pw, double ic,
                          const ProfileStore& profiles, const NodeShape& reference,
                          const std::map<std::string, double>& running_load) {
    std::vector<const NodeResource*> elastic_up;
    for (const auto& n : nodes)
        if (n.pool == NodePool::Elastic && n.state == NodeState::Up) elastic_up.push_back(&n);
    if (elastic_up.empty()) throw Error("select_victim called without an elastic UP node");

    // Underused amount in node-equivalents: (IC - PW) rescaled by RT.
    const double underused = (ic - pw) / profiles.mean_provision();
    std::vector<const NodeResource*> qualifying;
    for (const auto* n : elastic_up)
        if (node_capacity_equivalents(n->shape, reference) <= underused) qualifying.push_back(n);
    if (qualifying.empty()) {
        // Nothing fits inside the slack: fall back to the smallest elastic node.
        const NodeResource* smallest = elastic_up.front();
        for (const auto* n : elastic_up)
            if (node_capacity_equivalents(n->shape, reference) <
                node_capacity_equivalents(smallest->shape, reference))
                smallest = n;
        qualifying.assign(1, smallest);
        for (const auto* n : elastic_up)
            if (n != smallest && n->shape == smallest->shape) qualifying.push_back(n);
    }

    auto load_of = [&](const NodeResource* n) {
        auto it = running_load.find(n->node_id);
        return it == running_load.end() ? 0.0 : it->second;
    };
    const NodeResource* best = qualifying.front();
    for (const auto* n : qualifying) {
        const double ln = load_of(n);
        const double lb = load_of(best);
        if (ln < lb || (ln == lb && n->ordinal > best->ordinal)) best = n;
    }
    return best->node_id;
}

std::string elasticity_csv(const std::vector<ElasticitySample>& samples) {
    std::ostringstream out;
    out << kElasticityCsvHeader << '\n';
    for (const auto& s : samples) {
        out << s.t << ',' << s.pw << ',' << s.ic << ',' << s.n_up << ',' << s.n_provisioning
            << ',' << s.n_running_tasks << '\n';
    }
    return out.str();
}

std::vector<ElasticitySample> parse_elasticity_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kElasticityCsvHeader)
        throw Error("elasticity CSV has an unexpected header: " + line);
    std::vector<ElasticitySample> samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        ElasticitySample s;
        char comma = 0;
        row >> s.t >> comma >> s.pw >> comma >> s.ic >> comma >> s.n_up >> comma >>
            s.n_provisioning >> comma >> s.n_running_tasks;
        if (row.fail()) throw Error("malformed elasticity CSV row: " + line);
        samples.push_back(s);
    }
    return samples;
}

}  // namespace floworc
