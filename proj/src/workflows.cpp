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

#include "floworc/workflows.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace floworc {

using nlohmann::json;

namespace {

constexpr int kMaxGeneratorSize = 100000;

json task_type_to_json(const TaskType& t) {
    json params = json::array();
    for (const auto& p : t.params)
        params.push_back({{"name", p.name}, {"direction", to_string(p.direction)}});
    json doc = {{"name", t.name}, {"params", params}};
    if (!t.constraint_template.empty()) doc["constraints"] = json::parse(t.constraint_template);
    if (!t.reliability_template.empty()) doc["reliability"] = json::parse(t.reliability_template);
    if (!t.duration_model_id.empty()) doc["duration_model"] = t.duration_model_id;
    return doc;
}

TaskType task_type_from_json(const json& doc, const std::string& context) {
    TaskType t;
    if (!doc.contains("name")) throw ConfigError(context + ": task type missing 'name'");
    t.name = doc["name"].get<std::string>();
    if (!doc.contains("params") || !doc["params"].is_array() || doc["params"].empty())
        throw ConfigError(context + ": task type '" + t.name + "' needs a non-empty params array");
    for (std::size_t i = 0; i < doc["params"].size(); ++i) {
        const json& p = doc["params"][i];
        ParamSpec spec;
        if (!p.contains("name"))
            throw ConfigError(context + ".params[" + std::to_string(i) + "]: missing 'name'");
        spec.name = p["name"].get<std::string>();
        if (!p.contains("direction"))
            throw ConfigError(context + ".params[" + std::to_string(i) +
                              "]: missing 'direction' (IN, OUT or INOUT)");
        spec.direction = direction_from_string(p["direction"].get<std::string>());
        t.params.push_back(std::move(spec));
    }
    if (doc.contains("constraints")) t.constraint_template = doc["constraints"].dump();
    if (doc.contains("reliability")) t.reliability_template = doc["reliability"].dump();
    t.duration_model_id = doc.value("duration_model", t.name);
    return t;
}

long param_as_long(const std::map<std::string, std::string>& params, const std::string& key,
                   long fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
        return std::stol(it->second);
    } catch (const std::exception&) {
        throw ConfigError("generator parameter '" + key + "' is not an integer: " + it->second);
    }
}

}  // namespace

WorkflowDefinition WorkflowDefinition::from_json_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("workflow file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("workflow file must be a JSON object");

    if (doc.contains("generator")) {
        const json& g = doc["generator"];
        const std::string kind = g.value("kind", std::string{});
        std::map<std::string, std::string> params;
        for (const auto& [k, v] : g.value("params", json::object()).items())
            params[k] = v.is_string() ? v.get<std::string>() : v.dump();
        WorkflowDefinition def;
        if (kind == "md_setup") {
            def = generate_md_setup(
                static_cast<int>(param_as_long(params, "n_mutations", 1)),
                params.count("use_gpu") && params.at("use_gpu") == "true");
        } else if (kind == "binding_affinity") {
            def = generate_binding_affinity(
                static_cast<int>(param_as_long(params, "n_structures_per_ensemble", 1)));
        } else {
            throw ConfigError("unknown generator '" + kind + "'");
        }
        if (doc.contains("name")) def.name = doc["name"].get<std::string>();
        def.validate();
        return def;
    }

    WorkflowDefinition def;
    def.name = doc.value("name", std::string("workflow"));
    if (doc.contains("task_types")) {
        const json& types = doc["task_types"];
        for (std::size_t i = 0; i < types.size(); ++i)
            def.task_types.push_back(
                task_type_from_json(types[i], "task_types[" + std::to_string(i) + "]"));
    }
    if (doc.contains("steps")) {
        const json& steps = doc["steps"];
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const json& s = steps[i];
            WorkflowStep step;
            if (!s.contains("type"))
                throw ConfigError("steps[" + std::to_string(i) + "]: missing 'type'");
            step.type = s["type"].get<std::string>();
            for (const auto& a : s.value("args", json::array()))
                step.args.push_back(a.get<std::string>());
            def.steps.push_back(std::move(step));
        }
    }
    if (doc.contains("phases"))
        for (const auto& [k, v] : doc["phases"].items())
            def.phase_of_type[k] = v.get<std::string>();
    def.validate();
    return def;
}

WorkflowDefinition WorkflowDefinition::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open workflow file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string WorkflowDefinition::to_json_text() const {
    json types = json::array();
    for (const auto& t : task_types) types.push_back(task_type_to_json(t));
    json steps_doc = json::array();
    for (const auto& s : steps) steps_doc.push_back({{"type", s.type}, {"args", s.args}});
    json doc = {{"name", name},
                {"task_types", types},
                {"steps", steps_doc},
                {"params", params},
                {"phases", phase_of_type}};
    return doc.dump(2);
}

void WorkflowDefinition::validate() const {
    std::map<std::string, const TaskType*> types;
    for (const auto& t : task_types) {
        if (types.count(t.name)) throw ConfigError("duplicate task type '" + t.name + "'");
        std::set<std::string> names;
        for (const auto& p : t.params)
            if (!names.insert(p.name).second)
                throw ConfigError("task type '" + t.name + "': duplicate parameter '" + p.name + "'");
        types[t.name] = &t;
    }
    std::set<std::string> out_tokens;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const WorkflowStep& s = steps[i];
        auto it = types.find(s.type);
        if (it == types.end())
            throw ConfigError("steps[" + std::to_string(i) + "]: unknown task type '" + s.type + "'");
        const TaskType& tt = *it->second;
        if (s.args.size() != tt.params.size())
            throw ConfigError("steps[" + std::to_string(i) + "]: type '" + s.type + "' expects " +
                              std::to_string(tt.params.size()) + " args, got " +
                              std::to_string(s.args.size()));
        for (std::size_t a = 0; a < s.args.size(); ++a) {
            if (tt.params[a].direction == ParamDirection::Out &&
                !out_tokens.insert(s.args[a]).second)
                throw ConfigError("steps[" + std::to_string(i) + "]: duplicate output token '" +
                                  s.args[a] + "'");
        }
    }
}

void build_graph(const WorkflowDefinition& def, TaskGraph& graph, const InfraConfig& env) {
    for (const auto& t : def.task_types) graph.add_type(t);
    for (const auto& s : def.steps) graph.register_task(s.type, s.args, env);
}

std::vector<TaskId> tasks_in_phase(const WorkflowDefinition& def, const TaskGraph& graph,
                                   const std::string& phase) {
    std::vector<TaskId> ids;
    for (const auto& [id, t] : graph.tasks()) {
        auto it = def.phase_of_type.find(t.type);
        if (it != def.phase_of_type.end() && it->second == phase) ids.push_back(id);
    }
    return ids;
}

namespace {

TaskType simple_type(std::string name, std::vector<ParamSpec> params, std::string duration_id,
                     std::string constraints = R"({"computing_nodes":1,"processors":[{"processor_type":"CPU","computing_units":"$SETUP_NUM_CPUS"}]})",
                     std::string reliability = "") {
    TaskType t;
    t.name = std::move(name);
    t.params = std::move(params);
    t.constraint_template = std::move(constraints);
    t.reliability_template = std::move(reliability);
    t.duration_model_id = std::move(duration_id);
    return t;
}

}  // namespace

WorkflowDefinition generate_md_setup(int n_mutations, bool use_gpu) {
    if (n_mutations < 1 || n_mutations > kMaxGeneratorSize)
        throw ConfigError("md_setup: n_mutations must be in [1, " +
                          std::to_string(kMaxGeneratorSize) + "]");
    WorkflowDefinition def;
    def.name = "md_setup";
    def.params["n_mutations"] = std::to_string(n_mutations);
    def.params["use_gpu"] = use_gpu ? "true" : "false";

    def.task_types.push_back(simple_type(
        "extract_model", {{"pdb", ParamDirection::In}, {"model", ParamDirection::Out}}, "setup"));
    def.task_types.push_back(simple_type(
        "fix_side_chains", {{"model", ParamDirection::In}, {"fixed", ParamDirection::Out}}, "setup"));
    def.task_types.push_back(simple_type(
        "mutate", {{"fixed", ParamDirection::In}, {"mutated", ParamDirection::Out}}, "setup"));
    def.task_types.push_back(simple_type(
        "prepare_topology",
        {{"mutated", ParamDirection::In}, {"topology", ParamDirection::Out}}, "setup"));
    def.task_types.push_back(simple_type(
        "solvate", {{"topology", ParamDirection::In}, {"solvated", ParamDirection::Out}}, "setup"));
    def.task_types.push_back(simple_type(
        "add_ions", {{"solvated", ParamDirection::In}, {"ionized", ParamDirection::Out}}, "setup"));
    def.task_types.push_back(simple_type(
        "energy_min", {{"ionized", ParamDirection::In}, {"minimized", ParamDirection::Out}},
        "setup"));

    std::string md_constraints =
        R"({"computing_nodes":"$TASK_NUM_NODES","processors":[{"processor_type":"CPU","computing_units":"$TASK_NUM_CPUS"})";
    if (use_gpu)
        md_constraints += R"(,{"processor_type":"GPU","computing_units":"$TASK_NUM_GPUS"})";
    md_constraints += "]}";
    def.task_types.push_back(simple_type(
        "mdrun", {{"minimized", ParamDirection::In}, {"trajectory", ParamDirection::Out}}, "md",
        md_constraints,
        R"({"on_failure":"FAIL","time_out":"$TASK_TIMEOUT"})"));

    def.phase_of_type = {{"extract_model", "prefix"}, {"fix_side_chains", "prefix"},
                         {"mutate", "chain"},         {"prepare_topology", "chain"},
                         {"solvate", "chain"},        {"add_ions", "chain"},
                         {"energy_min", "chain"},     {"mdrun", "chain"}};

    def.steps.push_back({"extract_model", {"input.pdb", "model.pdb"}});
    def.steps.push_back({"fix_side_chains", {"model.pdb", "fixed.pdb"}});
    for (int i = 0; i < n_mutations; ++i) {
        const std::string d = "mut" + std::to_string(i) + "/";
        def.steps.push_back({"mutate", {"fixed.pdb", d + "mutated.pdb"}});
        def.steps.push_back({"prepare_topology", {d + "mutated.pdb", d + "topology.zip"}});
        def.steps.push_back({"solvate", {d + "topology.zip", d + "solvated.gro"}});
        def.steps.push_back({"add_ions", {d + "solvated.gro", d + "ionized.gro"}});
        def.steps.push_back({"energy_min", {d + "ionized.gro", d + "minimized.gro"}});
        def.steps.push_back({"mdrun", {d + "minimized.gro", d + "trajectory.trr"}});
    }
    return def;
}

WorkflowDefinition generate_binding_affinity(int n_structures_per_ensemble) {
    const int n = n_structures_per_ensemble;
    if (n < 1 || n > kMaxGeneratorSize)
        throw ConfigError("binding_affinity: n_structures_per_ensemble must be in [1, " +
                          std::to_string(kMaxGeneratorSize) + "]");
    WorkflowDefinition def;
    def.name = "binding_affinity";
    def.params["n_structures_per_ensemble"] = std::to_string(n);

    def.task_types.push_back(simple_type(
        "extract_ensemble", {{"trajectory", ParamDirection::In}, {"frames", ParamDirection::Out}},
        "extract"));
    def.task_types.push_back(simple_type(
        "gen_structures", {{"frames", ParamDirection::In}, {"structures", ParamDirection::Out}},
        "extract"));
    def.task_types.push_back(simple_type(
        "pmx_prepare", {{"structures", ParamDirection::In}, {"prepared", ParamDirection::Out}},
        "setup"));
    def.task_types.push_back(simple_type(
        "grompp_ti", {{"prepared", ParamDirection::In}, {"tpr", ParamDirection::Out}}, "setup"));
    def.task_types.push_back(simple_type(
        "mdrun_ti", {{"tpr", ParamDirection::In}, {"dhdl", ParamDirection::Out}}, "md",
        R"({"computing_nodes":"$TASK_NUM_NODES","processors":[{"processor_type":"CPU","computing_units":"$TASK_NUM_CPUS"}]})",
        R"({"on_failure":"IGNORE","time_out":"$TASK_TIMEOUT","default_outputs":{"dhdl":"EMPTY_FILE"}})"));

    // The reducers chain through one INOUT analysis document, which is what
    // serializes the tail.
    for (const char* ens : {"fwd", "rev"}) {
        TaskType hist;
        hist.name = std::string("histogram_") + ens;
        for (int i = 0; i < n; ++i)
            hist.params.push_back({"dhdl_" + std::to_string(i), ParamDirection::In});
        hist.params.push_back({"analysis", ParamDirection::InOut});
        hist.constraint_template =
            R"({"computing_nodes":1,"processors":[{"processor_type":"CPU","computing_units":"$SETUP_NUM_CPUS"}]})";
        hist.duration_model_id = "analysis";
        def.task_types.push_back(std::move(hist));
    }
    def.task_types.push_back(simple_type(
        "free_energy", {{"analysis", ParamDirection::In}, {"dg", ParamDirection::Out}},
        "analysis"));

    def.phase_of_type = {{"extract_ensemble", "initial"}, {"gen_structures", "initial"},
                         {"pmx_prepare", "branch"},       {"grompp_ti", "branch"},
                         {"mdrun_ti", "branch"},          {"histogram_fwd", "tail"},
                         {"histogram_rev", "tail"},       {"free_energy", "tail"}};

    def.steps.push_back({"extract_ensemble", {"wt.xtc", "fwd/frames.zip"}});
    def.steps.push_back({"gen_structures", {"fwd/frames.zip", "fwd/structures.zip"}});
    def.steps.push_back({"extract_ensemble", {"mut.xtc", "rev/frames.zip"}});
    def.steps.push_back({"gen_structures", {"rev/frames.zip", "rev/structures.zip"}});

    for (const char* ens : {"fwd", "rev"}) {
        for (int i = 0; i < n; ++i) {
            const std::string d = std::string(ens) + "/s" + std::to_string(i) + "/";
            def.steps.push_back(
                {"pmx_prepare", {std::string(ens) + "/structures.zip", d + "prepared.gro"}});
            def.steps.push_back({"grompp_ti", {d + "prepared.gro", d + "ti.tpr"}});
            def.steps.push_back({"mdrun_ti", {d + "ti.tpr", d + "dhdl.xvg"}});
        }
    }

    for (const char* ens : {"fwd", "rev"}) {
        WorkflowStep step;
        step.type = std::string("histogram_") + ens;
        for (int i = 0; i < n; ++i)
            step.args.push_back(std::string(ens) + "/s" + std::to_string(i) + "/dhdl.xvg");
        step.args.push_back("analysis.json");
        def.steps.push_back(std::move(step));
    }
    def.steps.push_back({"free_energy", {"analysis.json", "dg.txt"}});
    return def;
}

}  // namespace floworc
