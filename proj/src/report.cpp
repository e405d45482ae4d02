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

#include "floworc/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "floworc/elasticity.hpp"
#include "floworc/resources.hpp"
#include "floworc/workflows.hpp"

namespace floworc {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

}  // namespace

std::vector<GanttRow> gantt_rows(const std::vector<TraceEvent>& events,
                                 const std::vector<std::string>& static_node_ids) {
    std::map<std::string, GanttRow> rows;
    std::vector<std::string> order;
    auto row_for = [&](const std::string& node) -> GanttRow& {
        auto it = rows.find(node);
        if (it == rows.end()) {
            order.push_back(node);
            it = rows.emplace(node, GanttRow{node, 0, 0.0, {}}).first;
        }
        return it->second;
    };
    for (const auto& id : static_node_ids) row_for(id);
    for (const auto& e : events)
        if (e.kind == EventKind::NodeUp)
            for (const auto& id : e.node_ids) row_for(id);

    struct Open {
        double start = 0.0;
        std::vector<std::string> nodes;
        std::string label;
    };
    std::map<TaskId, Open> open;
    for (const auto& e : events) {
        if (!e.task) continue;
        if (e.kind == EventKind::Start) {
            std::string type;
            if (auto it = e.detail.find("type"); it != e.detail.end()) type = it->second;
            open[*e.task] = Open{e.t, e.node_ids, type};
        } else if (e.kind == EventKind::End || e.kind == EventKind::Fail ||
                   e.kind == EventKind::Timeout || e.kind == EventKind::Cancel) {
            auto it = open.find(*e.task);
            if (it == open.end()) continue;
            for (const auto& node : it->second.nodes) {
                GanttRow& row = row_for(node);
                row.n_tasks += 1;
                row.busy_seconds += e.t - it->second.start;
                std::ostringstream label;
                label << "t" << *e.task << "@" << it->second.start << ":" << e.t;
                row.intervals.push_back(label.str());
            }
            open.erase(it);
        }
    }
    std::vector<GanttRow> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(rows.at(id));
    return out;
}

std::vector<ScalingRow> scaling_rows(const std::vector<std::filesystem::path>& run_dirs) {
    std::vector<ScalingRow> rows;
    for (const auto& dir : run_dirs) {
        const json summary = json::parse(read_text(dir / "summary.json"));
        ScalingRow row;
        row.run = dir.filename().string();
        row.nodes = summary.value("n_static_nodes", 0);
        row.makespan = summary.value("makespan", 0.0);
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(),
              [](const ScalingRow& a, const ScalingRow& b) { return a.nodes < b.nodes; });
    if (rows.empty()) throw Error("scaling report: no run directories given");
    const double base_time = rows.front().makespan;
    const int base_nodes = std::max(rows.front().nodes, 1);
    for (auto& row : rows) {
        row.speedup = row.makespan > 0 ? base_time / row.makespan : 0.0;
        row.efficiency = row.speedup / (static_cast<double>(row.nodes) / base_nodes);
    }
    return rows;
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir,
                                                const std::string& kind,
                                                const std::filesystem::path& out_dir) {
    const auto dest = out_dir.empty() ? run_dir : out_dir;
    std::filesystem::create_directories(dest);
    std::vector<std::filesystem::path> written;

    if (kind == "graph") {
        WorkflowDefinition workflow =
            WorkflowDefinition::from_json_text(read_text(run_dir / "workflow.json"));
        InfraConfig infra = InfraConfig::from_json_text(read_text(run_dir / "infra.json"));
        TaskGraph graph;
        build_graph(workflow, graph, infra);
        write_text(dest / "graph.dot", graph.export_dot());
        const GraphStats stats = graph.stats();
        write_text(dest / "graph_stats.json",
                   json{{"tasks", stats.tasks},
                        {"edges", stats.edges},
                        {"max_antichain_width", stats.max_antichain_width}}
                           .dump(2) +
                       "\n");
        written = {dest / "graph.dot", dest / "graph_stats.json"};
    } else if (kind == "elasticity") {
        // Validate before re-emitting: a malformed series should fail loudly here.
        const std::string csv = read_text(run_dir / "elasticity.csv");
        parse_elasticity_csv(csv);
        write_text(dest / "elasticity_report.csv", csv);
        written = {dest / "elasticity_report.csv"};
    } else if (kind == "gantt") {
        InfraConfig infra = InfraConfig::from_json_text(read_text(run_dir / "infra.json"));
        std::vector<std::string> static_ids;
        for (const auto& n : infra.static_nodes) static_ids.push_back(n.id);
        const auto rows = gantt_rows(TraceLog::read_file(run_dir / "trace.jsonl"), static_ids);
        std::ostringstream csv;
        csv << "node_id,n_tasks,busy_seconds,timeline\n";
        for (const auto& row : rows) {
            csv << row.node_id << ',' << row.n_tasks << ',' << row.busy_seconds << ',';
            for (std::size_t i = 0; i < row.intervals.size(); ++i)
                csv << (i ? " " : "") << row.intervals[i];
            csv << '\n';
        }
        write_text(dest / "gantt.csv", csv.str());
        written = {dest / "gantt.csv"};
    } else if (kind == "scaling") {
        std::vector<std::filesystem::path> runs;
        for (const auto& entry : std::filesystem::directory_iterator(run_dir))
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "summary.json"))
                runs.push_back(entry.path());
        std::sort(runs.begin(), runs.end());
        const auto rows = scaling_rows(runs);
        std::ostringstream csv;
        csv << "run,nodes,makespan,speedup,efficiency\n";
        for (const auto& row : rows)
            csv << row.run << ',' << row.nodes << ',' << row.makespan << ',' << row.speedup
                << ',' << row.efficiency << '\n';
        write_text(dest / "scaling.csv", csv.str());
        written = {dest / "scaling.csv"};
    } else {
        throw Error("unknown report kind '" + kind + "' (graph|elasticity|gantt|scaling)");
    }
    return written;
}

}  // namespace floworc
