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

#include <doctest.h>

#include "floworc/taskgraph.hpp"
#include "floworc/workflows.hpp"
#include "test_support.hpp"

using namespace floworc;
using namespace floworc::testing;

namespace {

TaskType in_only(const std::string& name) {
    TaskType t;
    t.name = name;
    t.params = {{"src", ParamDirection::In}};
    return t;
}

TaskType out_only(const std::string& name) {
    TaskType t;
    t.name = name;
    t.params = {{"dst", ParamDirection::Out}};
    return t;
}

TaskType inout_only(const std::string& name) {
    TaskType t;
    t.name = name;
    t.params = {{"data", ParamDirection::InOut}};
    return t;
}

void run_to_done(TaskGraph& g, TaskId id) {
    g.mark_scheduled(id);
    g.mark_running(id);
    g.complete_task(id, Outcome::Done);
}

}  // namespace

TEST_CASE("producer-consumer edge and readiness") {
    TaskGraph g;
    g.add_type(out_only("A"));
    g.add_type(in_only("B"));
    const InfraConfig infra = test_infra();

    const TaskId a = g.register_task("A", {"f1"}, infra);
    const TaskId b = g.register_task("B", {"f1"}, infra);

    CHECK(g.task(a).successors == std::set<TaskId>{b});
    CHECK(g.task(b).predecessors == std::set<TaskId>{a});
    CHECK(g.task(a).state == TaskState::Ready);
    CHECK(g.task(b).state == TaskState::Created);

    g.mark_scheduled(a);
    g.mark_running(a);
    const auto result = g.complete_task(a, Outcome::Done);
    CHECK(result.newly_ready == std::vector<TaskId>{b});
    CHECK(g.task(b).state == TaskState::Ready);
}

TEST_CASE("inout produces a new version that consumers read") {
    TaskGraph g;
    g.add_type(out_only("A"));
    g.add_type(inout_only("B"));
    g.add_type(in_only("C"));
    const InfraConfig infra = test_infra();

    const TaskId a = g.register_task("A", {"f1"}, infra);
    const TaskId b = g.register_task("B", {"f1"}, infra);
    const TaskId c = g.register_task("C", {"f1"}, infra);

    // Oracle: independent replay of the version history.
    const auto expected = replay_edges({
        ReplayStep{{{"f1", ParamDirection::Out}}},
        ReplayStep{{{"f1", ParamDirection::InOut}}},
        ReplayStep{{{"f1", ParamDirection::In}}},
    });
    CHECK(graph_edges(g) == expected);
    CHECK(expected == std::set<std::pair<TaskId, TaskId>>{{a, b}, {b, c}});

    // C binds the post-B version: A wrote seq 1, B wrote seq 2.
    CHECK(g.task(c).bindings.at(0).version == 2);
    CHECK(g.data().at("f1").versions.back().seq == 2);
}

TEST_CASE("write-after-read: inout waits for earlier readers") {
    TaskGraph g;
    g.add_type(out_only("W"));
    g.add_type(in_only("R"));
    g.add_type(inout_only("M"));
    const InfraConfig infra = test_infra();

    const TaskId w = g.register_task("W", {"f"}, infra);
    const TaskId r1 = g.register_task("R", {"f"}, infra);
    const TaskId r2 = g.register_task("R", {"f"}, infra);
    const TaskId m = g.register_task("M", {"f"}, infra);

    const auto expected = replay_edges({
        ReplayStep{{{"f", ParamDirection::Out}}},
        ReplayStep{{{"f", ParamDirection::In}}},
        ReplayStep{{{"f", ParamDirection::In}}},
        ReplayStep{{{"f", ParamDirection::InOut}}},
    });
    CHECK(graph_edges(g) == expected);
    CHECK(g.task(m).predecessors == std::set<TaskId>{w, r1, r2});
    // No reader-reader ordering is imposed.
    CHECK(g.task(r1).successors == std::set<TaskId>{m});
    CHECK(g.task(r2).successors == std::set<TaskId>{m});
}

TEST_CASE("workflow inputs appear as version 0") {
    TaskGraph g;
    g.add_type(in_only("R"));
    const TaskId r = g.register_task("R", {"input.pdb"}, test_infra());
    CHECK(g.task(r).state == TaskState::Ready);
    const DataItem& item = g.data().at("input.pdb");
    REQUIRE(item.versions.size() == 1);
    CHECK(item.versions.front().seq == 0);
    CHECK_FALSE(item.versions.front().producer.has_value());
}

TEST_CASE("registration errors") {
    TaskGraph g;
    g.add_type(out_only("A"));
    const InfraConfig infra = test_infra();

    SUBCASE("unknown type") {
        CHECK_THROWS_AS(g.register_task("nope", {"x"}, infra), GraphError);
    }
    SUBCASE("arity mismatch") {
        CHECK_THROWS_AS(g.register_task("A", {"x", "y"}, infra), GraphError);
    }
    SUBCASE("unresolved placeholder fails at registration") {
        TaskType t = io_type("constrained");
        t.constraint_template = R"({"computing_nodes":"$NOT_SET"})";
        g.add_type(t);
        CHECK_THROWS_AS(g.register_task("constrained", {"a", "b"}, infra), ConfigError);
        // A failed registration must not leave partial state behind.
        CHECK(g.tasks().empty());
        CHECK(g.data().empty());
    }
    SUBCASE("OUT before IN on the same token is rejected") {
        TaskType t;
        t.name = "self";
        t.params = {{"dst", ParamDirection::Out}, {"src", ParamDirection::In}};
        g.add_type(t);
        CHECK_THROWS_AS(g.register_task("self", {"same", "same"}, infra), GraphError);
        CHECK(g.tasks().empty());
    }
}

TEST_CASE("ready_tasks") {
    TaskGraph g;
    const InfraConfig infra = test_infra();

    SUBCASE("empty graph") { CHECK(g.ready_tasks().empty()); }

    SUBCASE("8 independent pipelines expose 8 roots") {
        g.add_type(out_only("prep"));
        g.add_type(io_type("md"));
        std::vector<TaskId> roots;
        for (int i = 0; i < 8; ++i) {
            const std::string base = "pipe" + std::to_string(i);
            roots.push_back(g.register_task("prep", {base + "/in"}, infra));
            g.register_task("md", {base + "/in", base + "/out"}, infra);
        }
        CHECK(g.ready_tasks() == roots);
    }

    SUBCASE("diamond fan-out") {
        g.add_type(out_only("A"));
        TaskType mid;
        mid.name = "mid";
        mid.params = {{"src", ParamDirection::In}, {"dst", ParamDirection::Out}};
        g.add_type(mid);
        TaskType join;
        join.name = "join";
        join.params = {{"l", ParamDirection::In}, {"r", ParamDirection::In}};
        g.add_type(join);

        const TaskId a = g.register_task("A", {"root"}, infra);
        const TaskId b = g.register_task("mid", {"root", "left"}, infra);
        const TaskId c = g.register_task("mid", {"root", "right"}, infra);
        const TaskId d = g.register_task("join", {"left", "right"}, infra);
        run_to_done(g, a);
        CHECK(g.ready_tasks() == std::vector<TaskId>{b, c});
        CHECK(g.task(d).state == TaskState::Created);
    }
}

TEST_CASE("complete_task outcomes") {
    const InfraConfig infra = test_infra();

    SUBCASE("ignored failure releases successors") {
        TaskGraph g;
        g.add_type(out_only("A"));
        g.add_type(in_only("B"));
        const TaskId a = g.register_task("A", {"f"}, infra);
        const TaskId b = g.register_task("B", {"f"}, infra);
        g.mark_scheduled(a);
        g.mark_running(a);
        const auto result = g.complete_task(a, Outcome::IgnoredFailed);
        CHECK(result.newly_ready == std::vector<TaskId>{b});
        CHECK(g.task(a).state == TaskState::IgnoredFailed);
    }

    SUBCASE("failure cancels the downstream chain transitively") {
        TaskGraph g;
        g.add_type(out_only("A"));
        g.add_type(io_type("mid"));
        const TaskId a = g.register_task("A", {"f0"}, infra);
        const TaskId b = g.register_task("mid", {"f0", "f1"}, infra);
        const TaskId c = g.register_task("mid", {"f1", "f2"}, infra);
        g.mark_scheduled(a);
        g.mark_running(a);
        // Oracle: transitive closure over successor sets, taken before completion.
        const std::set<TaskId> expected = descendants(g, a);
        const auto result = g.complete_task(a, Outcome::Failed);
        CHECK(result.newly_ready.empty());
        CHECK(std::set<TaskId>(result.cancelled.begin(), result.cancelled.end()) == expected);
        CHECK(g.task(b).state == TaskState::Cancelled);
        CHECK(g.task(c).state == TaskState::Cancelled);
    }

    SUBCASE("illegal transitions throw") {
        TaskGraph g;
        g.add_type(out_only("A"));
        const TaskId a = g.register_task("A", {"f"}, infra);
        CHECK_THROWS_AS(g.complete_task(a, Outcome::Done), GraphError);  // READY, not RUNNING
        g.mark_scheduled(a);
        CHECK_THROWS_AS(g.complete_task(a, Outcome::Done), GraphError);
        // CANCELLED is legal from SCHEDULED.
        CHECK_NOTHROW(g.complete_task(a, Outcome::Cancelled));
    }
}

TEST_CASE("retry and skip transitions") {
    TaskGraph g;
    g.add_type(out_only("A"));
    g.add_type(in_only("B"));
    const InfraConfig infra = test_infra();
    const TaskId a = g.register_task("A", {"f"}, infra);
    const TaskId b = g.register_task("B", {"f"}, infra);

    SUBCASE("requeue bumps attempt") {
        g.mark_scheduled(a);
        g.mark_running(a);
        g.requeue_for_retry(a);
        CHECK(g.task(a).state == TaskState::Ready);
        CHECK(g.task(a).attempt == 2);
    }

    SUBCASE("skip releases successors") {
        const auto newly = g.skip_task(a);
        CHECK(newly == std::vector<TaskId>{b});
        CHECK(g.task(a).state == TaskState::Skipped);
        CHECK(g.task(b).state == TaskState::Ready);
    }

    SUBCASE("skip is only legal before scheduling") {
        g.mark_scheduled(a);
        CHECK_THROWS_AS(g.skip_task(a), GraphError);
    }
}

TEST_CASE("export_dot") {
    TaskGraph g;
    const InfraConfig infra = test_infra();

    SUBCASE("single task, no edges") {
        g.add_type(out_only("A"));
        g.register_task("A", {"f"}, infra);
        const std::string dot = g.export_dot();
        CHECK(dot.find("t1 [label=\"A#1\"]") != std::string::npos);
        CHECK(dot.find("->") == std::string::npos);
    }

    SUBCASE("one edge") {
        g.add_type(out_only("A"));
        g.add_type(in_only("B"));
        g.register_task("A", {"f"}, infra);
        g.register_task("B", {"f"}, infra);
        const std::string dot = g.export_dot();
        CHECK(dot.find("t1 -> t2;") != std::string::npos);
    }
}

TEST_CASE("binding-affinity generator shape for 2 structures per ensemble") {
    const WorkflowDefinition def = generate_binding_affinity(2);
    TaskGraph g;
    const InfraConfig infra = test_infra();
    build_graph(def, g, infra);

    // Two disjoint initial chains.
    const auto initial = tasks_in_phase(def, g, "initial");
    CHECK(initial.size() == 4);
    CHECK(g.max_antichain_width(initial) == 2);
    CHECK(brute_force_antichain(g, initial) == 2);

    // The tail is one sequential chain reachable from every branch.
    const auto tail = tasks_in_phase(def, g, "tail");
    CHECK(tail.size() == 3);
    CHECK(g.max_antichain_width(tail) == 1);
    const auto branch = tasks_in_phase(def, g, "branch");
    const TaskId last = tail.back();
    for (TaskId id : branch) CHECK(reaches(g, id, last));
}

TEST_CASE("registration is deterministic") {
    const WorkflowDefinition def = generate_binding_affinity(3);
    const InfraConfig infra = test_infra();
    TaskGraph g1, g2;
    build_graph(def, g1, infra);
    build_graph(def, g2, infra);
    CHECK(graph_edges(g1) == graph_edges(g2));
    CHECK(g1.export_dot() == g2.export_dot());
    for (const auto& [id, t] : g1.tasks()) CHECK(t.fingerprint == g2.task(id).fingerprint);
}

TEST_CASE("graph stats") {
    TaskGraph g;
    const InfraConfig infra = test_infra();
    g.add_type(out_only("A"));
    g.add_type(in_only("B"));
    g.register_task("A", {"f"}, infra);
    g.register_task("B", {"f"}, infra);
    g.register_task("B", {"f"}, infra);
    const GraphStats stats = g.stats();
    CHECK(stats.tasks == 3);
    CHECK(stats.edges == 2);
    CHECK(stats.max_antichain_width == 2);  // the two readers
}
