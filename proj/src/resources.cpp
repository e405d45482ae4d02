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

#include "floworc/resources.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "floworc/scenario.hpp"

namespace floworc {

using nlohmann::json;

std::string to_string(ProcessorType t) {
    return t == ProcessorType::Cpu ? "CPU" : "GPU";
}

ProcessorType processor_type_from_string(std::string_view s) {
    if (s == "CPU") return ProcessorType::Cpu;
    if (s == "GPU") return ProcessorType::Gpu;
    throw ConfigError("unknown processor_type '" + std::string(s) + "' (expected CPU or GPU)");
}

std::string to_string(FailureAction a) {
    switch (a) {
        case FailureAction::Ignore: return "IGNORE";
        case FailureAction::Retry: return "RETRY";
        case FailureAction::Fail: return "FAIL";
    }
    return "FAIL";
}

std::string to_string(DefaultValueKind k) {
    return k == DefaultValueKind::EmptyFile ? "EMPTY_FILE" : "NONE_MARKER";
}

std::string to_string(NodeState s) {
    switch (s) {
        case NodeState::Provisioning: return "PROVISIONING";
        case NodeState::Up: return "UP";
        case NodeState::Draining: return "DRAINING";
        case NodeState::Released: return "RELEASED";
    }
    return "UP";
}

int TaskConstraints::cpu_units_per_node() const {
    for (const auto& p : processors)
        if (p.processor_type == ProcessorType::Cpu) return p.computing_units;
    return 0;
}

int TaskConstraints::gpu_units_per_node() const {
    for (const auto& p : processors)
        if (p.processor_type == ProcessorType::Gpu) return p.computing_units;
    return 0;
}

std::string TaskConstraints::canonical() const {
    json specs = json::array();
    for (const auto& p : processors) {
        specs.push_back({{"computing_units", p.computing_units},
                         {"processor_type", to_string(p.processor_type)}});
    }
    json doc = {{"computing_nodes", computing_nodes}, {"processors", specs}};
    return doc.dump();
}

std::string ReliabilityPolicy::canonical() const {
    json defaults = json::object();
    for (const auto& [name, kind] : default_outputs) defaults[name] = to_string(kind);
    json doc = {{"on_failure", to_string(on_failure)},
                {"max_retries", max_retries},
                {"default_outputs", defaults}};
    if (time_out) doc["time_out"] = *time_out;
    return doc.dump();
}

std::string substitute_placeholders(std::string_view text,
                                    const std::map<std::string, std::string>& env) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] != '$') {
            out += text[i++];
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
            ++j;
        if (j == i + 1) throw ConfigError("dangling '$' in template: " + std::string(text));
        std::string name(text.substr(i + 1, j - i - 1));
        auto it = env.find(name);
        if (it == env.end())
            throw ConfigError("placeholder $" + name + " has no value in the infrastructure env");
        out += it->second;
        i = j;
    }
    return out;
}

namespace {

int parse_positive_int(const json& value, const std::string& field) {
    long long n = 0;
    if (value.is_number_integer()) {
        n = value.get<long long>();
    } else if (value.is_string()) {
        const std::string s = value.get<std::string>();
        std::size_t pos = 0;
        try {
            n = std::stoll(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError(field + ": '" + s + "' is not numeric");
        }
        if (pos != s.size()) throw ConfigError(field + ": '" + s + "' is not numeric");
    } else {
        throw ConfigError(field + ": expected an integer or string");
    }
    if (n < 1) throw ConfigError(field + ": units must be >= 1, got " + std::to_string(n));
    return static_cast<int>(n);
}

double parse_positive_seconds(const json& value, const std::string& field) {
    double v = 0;
    if (value.is_number()) {
        v = value.get<double>();
    } else if (value.is_string()) {
        const std::string s = value.get<std::string>();
        std::size_t pos = 0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError(field + ": '" + s + "' is not numeric");
        }
        if (pos != s.size()) throw ConfigError(field + ": '" + s + "' is not numeric");
    } else {
        throw ConfigError(field + ": expected a number or string");
    }
    if (v <= 0) throw ConfigError(field + ": must be > 0, got " + std::to_string(v));
    return v;
}

json parse_template_json(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + " template is not valid JSON: " + e.what());
    }
}

json substituted(const json& value, const std::map<std::string, std::string>& env) {
    if (value.is_string()) return json(substitute_placeholders(value.get<std::string>(), env));
    return value;
}

}  // namespace

TaskConstraints resolve_constraints(std::string_view template_text, const InfraConfig& env) {
    TaskConstraints c;
    if (template_text.empty()) return c;
    json doc = parse_template_json(template_text, "constraint");
    if (!doc.is_object()) throw ConfigError("constraint template must be a JSON object");
    if (doc.contains("computing_nodes"))
        c.computing_nodes = parse_positive_int(substituted(doc["computing_nodes"], env.env),
                                               "computing_nodes");
    if (doc.contains("processors")) {
        if (!doc["processors"].is_array())
            throw ConfigError("constraint template: processors must be an array");
        for (const auto& spec : doc["processors"]) {
            ProcessorSpec p;
            p.processor_type = processor_type_from_string(
                spec.value("processor_type", std::string("CPU")));
            for (const auto& existing : c.processors)
                if (existing.processor_type == p.processor_type)
                    throw ConfigError("constraint template: duplicate processor spec for " +
                                      to_string(p.processor_type));
            if (!spec.contains("computing_units"))
                throw ConfigError("constraint template: processor spec missing computing_units");
            p.computing_units =
                parse_positive_int(substituted(spec["computing_units"], env.env), "computing_units");
            c.processors.push_back(p);
        }
    }
    return c;
}

ReliabilityPolicy resolve_reliability(std::string_view template_text, const InfraConfig& env) {
    ReliabilityPolicy policy;
    if (template_text.empty()) return policy;
    json doc = parse_template_json(template_text, "reliability");
    if (!doc.is_object()) throw ConfigError("reliability template must be a JSON object");
    if (doc.contains("on_failure")) {
        const std::string action =
            substituted(doc["on_failure"], env.env).get<std::string>();
        if (action == "IGNORE") policy.on_failure = FailureAction::Ignore;
        else if (action == "RETRY") policy.on_failure = FailureAction::Retry;
        else if (action == "FAIL") policy.on_failure = FailureAction::Fail;
        else throw ConfigError("reliability template: unknown on_failure '" + action + "'");
    }
    if (doc.contains("max_retries"))
        policy.max_retries =
            parse_positive_int(substituted(doc["max_retries"], env.env), "max_retries");
    if (doc.contains("time_out") && !doc["time_out"].is_null())
        policy.time_out =
            parse_positive_seconds(substituted(doc["time_out"], env.env), "time_out");
    if (doc.contains("default_outputs")) {
        for (const auto& [param, kind] : doc["default_outputs"].items()) {
            const std::string k = kind.get<std::string>();
            if (k == "EMPTY_FILE") policy.default_outputs[param] = DefaultValueKind::EmptyFile;
            else if (k == "NONE_MARKER") policy.default_outputs[param] = DefaultValueKind::NoneMarker;
            else throw ConfigError("reliability template: unknown default kind '" + k + "'");
        }
    }
    if (policy.on_failure == FailureAction::Retry && policy.max_retries < 1)
        throw ConfigError("reliability template: RETRY requires max_retries >= 1");
    return policy;
}

ResolvedPolicies resolve_template(std::string_view constraint_template,
                                  std::string_view reliability_template,
                                  const InfraConfig& env) {
    return ResolvedPolicies{resolve_constraints(constraint_template, env),
                            resolve_reliability(reliability_template, env)};
}

const NodeShape& InfraConfig::reference_shape() const {
    if (static_nodes.empty())
        throw ConfigError("infrastructure has no static nodes to define the reference shape");
    return static_nodes.front().shape;
}

InfraConfig InfraConfig::from_json_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("infrastructure config is not valid JSON: ") + e.what());
    }
    InfraConfig cfg;
    if (doc.contains("env")) {
        for (const auto& [k, v] : doc["env"].items()) {
            cfg.env[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    if (doc.contains("static_nodes")) {
        int next_index = 0;
        for (const auto& n : doc["static_nodes"]) {
            NodeShape shape{n.value("cpu_units", 1), n.value("gpu_units", 0)};
            if (shape.cpu_units < 1)
                throw ConfigError("static_nodes: cpu_units must be >= 1");
            if (shape.gpu_units < 0)
                throw ConfigError("static_nodes: gpu_units must be >= 0");
            const int count = n.value("count", 1);
            for (int i = 0; i < count; ++i) {
                std::string id = n.contains("id") && count == 1
                                     ? n["id"].get<std::string>()
                                     : "static-" + std::to_string(next_index);
                cfg.static_nodes.push_back({std::move(id), shape});
                ++next_index;
            }
        }
    }
    if (doc.contains("elasticity")) {
        const json& e = doc["elasticity"];
        cfg.elastic_max = e.value("elastic_max", 0);
        if (cfg.elastic_max < 0) throw ConfigError("elasticity: elastic_max must be >= 0");
        if (e.contains("elastic_node")) {
            cfg.elastic_shape = NodeShape{e["elastic_node"].value("cpu_units", 1),
                                          e["elastic_node"].value("gpu_units", 0)};
        } else if (!cfg.static_nodes.empty()) {
            cfg.elastic_shape = cfg.static_nodes.front().shape;
        }
        if (e.contains("provision_delay")) {
            const json& p = e["provision_delay"];
            cfg.provision_delay_base = p.value("seconds", 120.0);
            cfg.provision_delay = p.contains("distribution")
                                      ? dist_spec_from_json(p["distribution"], "provision_delay")
                                      : DistSpec::constant();
        }
        cfg.elasticity_period = e.value("period_seconds", 30.0);
        cfg.rt_prior = e.value("rt_prior_seconds", 120.0);
        cfg.default_mean_et = e.value("default_mean_et", 60.0);
        const std::string mode = e.value("workload_mode", std::string("integer"));
        if (mode == "integer") cfg.workload_mode = WorkloadMode::Integer;
        else if (mode == "fractional") cfg.workload_mode = WorkloadMode::Fractional;
        else throw ConfigError("elasticity: unknown workload_mode '" + mode + "'");
        cfg.count_provisioning_in_capacity = e.value("count_provisioning_in_capacity", true);
    }
    if (doc.contains("scheduler")) {
        cfg.dispatch_latency = doc["scheduler"].value("dispatch_latency", 0.0);
        if (cfg.dispatch_latency < 0) throw ConfigError("scheduler: dispatch_latency must be >= 0");
    }
    if (doc.contains("local")) {
        cfg.local_time_scale = doc["local"].value("time_scale", 1.0);
        cfg.stop_signal = doc["local"].value("stop_signal", std::string("SIGTERM"));
    }
    if (cfg.static_nodes.empty())
        throw ConfigError("infrastructure config needs at least one static node");
    return cfg;
}

InfraConfig InfraConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open infrastructure config: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string InfraConfig::to_json_text() const {
    json nodes = json::array();
    for (const auto& n : static_nodes)
        nodes.push_back({{"id", n.id}, {"cpu_units", n.shape.cpu_units}, {"gpu_units", n.shape.gpu_units}});
    json doc = {
        {"env", env},
        {"static_nodes", nodes},
        {"elasticity",
         {{"elastic_max", elastic_max},
          {"elastic_node", {{"cpu_units", elastic_shape.cpu_units}, {"gpu_units", elastic_shape.gpu_units}}},
          {"provision_delay", {{"seconds", provision_delay_base}, {"distribution", dist_spec_to_json(provision_delay)}}},
          {"period_seconds", elasticity_period},
          {"rt_prior_seconds", rt_prior},
          {"default_mean_et", default_mean_et},
          {"workload_mode", workload_mode == WorkloadMode::Integer ? "integer" : "fractional"},
          {"count_provisioning_in_capacity", count_provisioning_in_capacity}}},
        {"scheduler", {{"dispatch_latency", dispatch_latency}}},
        {"local", {{"time_scale", local_time_scale}, {"stop_signal", stop_signal}}},
    };
    return doc.dump(2);
}

ResourcePool::ResourcePool(const InfraConfig& config) {
    for (const auto& spec : config.static_nodes) {
        NodeResource node;
        node.node_id = spec.id;
        node.ordinal = next_ordinal_++;
        node.shape = spec.shape;
        node.pool = NodePool::Static;
        node.state = NodeState::Up;
        node.free_cpu = spec.shape.cpu_units;
        node.free_gpu = spec.shape.gpu_units;
        node.gpu_in_use.assign(static_cast<std::size_t>(spec.shape.gpu_units), 0);
        nodes_.push_back(std::move(node));
    }
}

const NodeResource* ResourcePool::find(std::string_view node_id) const {
    for (const auto& n : nodes_)
        if (n.node_id == node_id) return &n;
    return nullptr;
}

NodeResource& ResourcePool::find_mut(std::string_view node_id) {
    for (auto& n : nodes_)
        if (n.node_id == node_id) return n;
    throw ResourceError("unknown node '" + std::string(node_id) + "'");
}

std::optional<Assignment> ResourcePool::fits(const TaskConstraints& c) const {
    const int need_cpu = c.cpu_units_per_node();
    const int need_gpu = c.gpu_units_per_node();
    Assignment a;
    for (const auto& n : nodes_) {
        if (!n.is_up()) continue;
        if (n.free_cpu < need_cpu || n.free_gpu < need_gpu) continue;
        a.node_ids.push_back(n.node_id);
        if (static_cast<int>(a.node_ids.size()) == c.computing_nodes) return a;
    }
    return std::nullopt;
}

Lease ResourcePool::allocate(const Assignment& assignment, const TaskConstraints& c) {
    if (static_cast<int>(assignment.node_ids.size()) != c.computing_nodes)
        throw ResourceError("assignment width does not match computing_nodes");
    const int need_cpu = c.cpu_units_per_node();
    const int need_gpu = c.gpu_units_per_node();
    for (const auto& id : assignment.node_ids) {
        const NodeResource& n = find_mut(id);
        if (!n.is_up()) throw ResourceError("node '" + id + "' is not UP");
        if (n.free_cpu < need_cpu || n.free_gpu < need_gpu)
            throw ResourceError("allocation exceeds availability on node '" + id + "'");
    }
    Lease lease;
    lease.lease_id = next_lease_++;
    lease.node_ids = assignment.node_ids;
    lease.cpu_per_node = need_cpu;
    lease.gpu_per_node = need_gpu;
    for (const auto& id : assignment.node_ids) {
        NodeResource& n = find_mut(id);
        n.free_cpu -= need_cpu;
        n.free_gpu -= need_gpu;
        std::vector<int> indices;
        for (int g = 0; g < static_cast<int>(n.gpu_in_use.size()) &&
                        static_cast<int>(indices.size()) < need_gpu; ++g) {
            if (!n.gpu_in_use[static_cast<std::size_t>(g)]) {
                n.gpu_in_use[static_cast<std::size_t>(g)] = 1;
                indices.push_back(g);
            }
        }
        lease.gpu_indices.push_back(std::move(indices));
    }
    return lease;
}

void ResourcePool::release(Lease& lease) {
    if (lease.released) throw ResourceError("double release of lease " + std::to_string(lease.lease_id));
    for (std::size_t i = 0; i < lease.node_ids.size(); ++i) {
        NodeResource& n = find_mut(lease.node_ids[i]);
        n.free_cpu += lease.cpu_per_node;
        n.free_gpu += lease.gpu_per_node;
        if (n.free_cpu > n.shape.cpu_units || n.free_gpu > n.shape.gpu_units)
            throw ResourceError("release overflows capacity on node '" + n.node_id + "'");
        for (int g : lease.gpu_indices[i]) n.gpu_in_use[static_cast<std::size_t>(g)] = 0;
    }
    lease.released = true;
}

std::string ResourcePool::add_elastic_node(const NodeShape& shape) {
    NodeResource node;
    node.node_id = "elastic-" + std::to_string(next_elastic_++);
    node.ordinal = next_ordinal_++;
    node.shape = shape;
    node.pool = NodePool::Elastic;
    node.state = NodeState::Provisioning;
    node.free_cpu = shape.cpu_units;
    node.free_gpu = shape.gpu_units;
    node.gpu_in_use.assign(static_cast<std::size_t>(shape.gpu_units), 0);
    nodes_.push_back(node);
    return node.node_id;
}

void ResourcePool::mark_up(std::string_view node_id) {
    NodeResource& n = find_mut(node_id);
    if (n.state != NodeState::Provisioning)
        throw ResourceError("node '" + n.node_id + "' cannot go UP from " + to_string(n.state));
    n.state = NodeState::Up;
}

void ResourcePool::mark_draining(std::string_view node_id) {
    NodeResource& n = find_mut(node_id);
    if (n.state != NodeState::Up)
        throw ResourceError("node '" + n.node_id + "' cannot drain from " + to_string(n.state));
    n.state = NodeState::Draining;
}

void ResourcePool::mark_released(std::string_view node_id) {
    NodeResource& n = find_mut(node_id);
    if (n.state != NodeState::Draining && n.state != NodeState::Provisioning)
        throw ResourceError("node '" + n.node_id + "' cannot release from " + to_string(n.state));
    n.state = NodeState::Released;
}

bool ResourcePool::node_idle(std::string_view node_id) const {
    const NodeResource* n = find(node_id);
    if (!n) throw ResourceError("unknown node '" + std::string(node_id) + "'");
    return n->free_cpu == n->shape.cpu_units && n->free_gpu == n->shape.gpu_units;
}

int ResourcePool::n_up() const {
    int c = 0;
    for (const auto& n : nodes_) c += n.state == NodeState::Up;
    return c;
}

int ResourcePool::n_provisioning() const {
    int c = 0;
    for (const auto& n : nodes_) c += n.state == NodeState::Provisioning;
    return c;
}

int ResourcePool::n_draining() const {
    int c = 0;
    for (const auto& n : nodes_) c += n.state == NodeState::Draining;
    return c;
}

int ResourcePool::n_live_elastic() const {
    int c = 0;
    for (const auto& n : nodes_)
        c += n.pool == NodePool::Elastic && n.state != NodeState::Released;
    return c;
}

int ResourcePool::n_static() const {
    int c = 0;
    for (const auto& n : nodes_) c += n.pool == NodePool::Static;
    return c;
}

}  // namespace floworc
