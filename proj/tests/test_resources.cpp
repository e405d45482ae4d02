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

#include "floworc/resources.hpp"
#include "test_support.hpp"

using namespace floworc;
using namespace floworc::testing;

TEST_CASE("resolve_template substitutes from the infrastructure env") {
    InfraConfig infra = test_infra();
    infra.env = {{"TASK_NUM_NODES", "2"}, {"TASK_NUM_CPUS", "48"}, {"TASK_NUM_GPUS", "4"},
                 {"TASK_TIMEOUT", "3600"}};

    SUBCASE("placeholders resolve to numbers") {
        const auto c = resolve_constraints(
            R"({"computing_nodes":"$TASK_NUM_NODES","processors":[)"
            R"({"processor_type":"CPU","computing_units":"$TASK_NUM_CPUS"},)"
            R"({"processor_type":"GPU","computing_units":"$TASK_NUM_GPUS"}]})",
            infra);
        CHECK(c.computing_nodes == 2);
        CHECK(c.cpu_units_per_node() == 48);
        CHECK(c.gpu_units_per_node() == 4);
    }

    SUBCASE("literals need no env") {
        InfraConfig empty_env = infra;
        empty_env.env.clear();
        const auto c = resolve_constraints(R"({"computing_nodes":"1"})", empty_env);
        CHECK(c.computing_nodes == 1);
    }

    SUBCASE("zero units are rejected") {
        infra.env["TASK_NUM_CPUS"] = "0";
        CHECK_THROWS_AS(
            resolve_constraints(
                R"({"processors":[{"processor_type":"CPU","computing_units":"$TASK_NUM_CPUS"}]})",
                infra),
            ConfigError);
    }

    SUBCASE("missing variable is an error") {
        CHECK_THROWS_AS(resolve_constraints(R"({"computing_nodes":"$NOPE"})", infra),
                        ConfigError);
    }

    SUBCASE("non-numeric value is an error") {
        infra.env["TASK_NUM_NODES"] = "many";
        CHECK_THROWS_AS(
            resolve_constraints(R"({"computing_nodes":"$TASK_NUM_NODES"})", infra),
            ConfigError);
    }

    SUBCASE("reliability half resolves the paper placeholder set") {
        const auto both = resolve_template(
            "", R"({"on_failure":"IGNORE","time_out":"$TASK_TIMEOUT"})", infra);
        CHECK(both.reliability.on_failure == FailureAction::Ignore);
        CHECK(both.reliability.time_out == doctest::Approx(3600.0));
    }

    SUBCASE("RETRY requires a budget") {
        CHECK_THROWS_AS(resolve_reliability(R"({"on_failure":"RETRY"})", infra), ConfigError);
        const auto p = resolve_reliability(R"({"on_failure":"RETRY","max_retries":2})", infra);
        CHECK(p.max_retries == 2);
    }
}

TEST_CASE("fits is first-fit over UP nodes in creation order") {
    InfraConfig infra = test_infra(1, 48);
    ResourcePool pool(infra);

    SUBCASE("full-node task fits") {
        TaskConstraints c;
        c.computing_nodes = 1;
        c.processors = {{ProcessorType::Cpu, 48}};
        const auto a = pool.fits(c);
        REQUIRE(a.has_value());
        CHECK(a->node_ids == std::vector<std::string>{"static-0"});
    }

    SUBCASE("two nodes cannot come out of one") {
        TaskConstraints c;
        c.computing_nodes = 2;
        CHECK_FALSE(pool.fits(c).has_value());
    }

    SUBCASE("GPU demand on a CPU-only node") {
        TaskConstraints c;
        c.processors = {{ProcessorType::Gpu, 1}};
        CHECK_FALSE(pool.fits(c).has_value());
    }
}

TEST_CASE("allocate and release are exact inverses") {
    InfraConfig infra = test_infra(3, 48, 4);
    ResourcePool pool(infra);

    TaskConstraints c;
    c.computing_nodes = 2;
    c.processors = {{ProcessorType::Cpu, 24}, {ProcessorType::Gpu, 2}};

    const auto before = pool.nodes();
    auto assignment = pool.fits(c);
    REQUIRE(assignment.has_value());
    Lease lease = pool.allocate(*assignment, c);
    CHECK(lease.node_ids.size() == 2);
    // Total decrement equals computing_nodes x per-node units.
    int cpu_used = 0;
    for (std::size_t i = 0; i < before.size(); ++i)
        cpu_used += before[i].free_cpu - pool.nodes()[i].free_cpu;
    CHECK(cpu_used == 2 * 24);
    // GPU indices come from the node's free set.
    for (const auto& per_node : lease.gpu_indices) {
        CHECK(per_node.size() == 2);
        for (int g : per_node) CHECK(g < 4);
    }

    pool.release(lease);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(pool.nodes()[i].free_cpu == before[i].free_cpu);
        CHECK(pool.nodes()[i].free_gpu == before[i].free_gpu);
    }
    CHECK_THROWS_AS(pool.release(lease), ResourceError);
}

TEST_CASE("capacity arithmetic: two halves fit, a third does not") {
    InfraConfig infra = test_infra(1, 48);
    ResourcePool pool(infra);
    TaskConstraints c;
    c.processors = {{ProcessorType::Cpu, 24}};
    auto a1 = pool.fits(c);
    REQUIRE(a1);
    Lease l1 = pool.allocate(*a1, c);
    auto a2 = pool.fits(c);
    REQUIRE(a2);
    Lease l2 = pool.allocate(*a2, c);
    CHECK_FALSE(pool.fits(c).has_value());
    pool.release(l2);
    pool.release(l1);
}

TEST_CASE("node lifecycle guards") {
    InfraConfig infra = test_infra(1, 8);
    infra.elastic_max = 2;
    ResourcePool pool(infra);

    const std::string id = pool.add_elastic_node(infra.elastic_shape);
    CHECK(pool.n_provisioning() == 1);
    CHECK(pool.n_live_elastic() == 1);

    // Provisioning nodes never accept work.
    TaskConstraints c;
    c.computing_nodes = 2;
    CHECK_FALSE(pool.fits(c).has_value());

    pool.mark_up(id);
    CHECK(pool.n_up() == 2);
    CHECK(pool.fits(c).has_value());

    pool.mark_draining(id);
    // Draining nodes leave the placement set immediately.
    CHECK_FALSE(pool.fits(c).has_value());
    pool.mark_released(id);
    CHECK(pool.n_live_elastic() == 0);
    CHECK_THROWS_AS(pool.mark_draining(id), ResourceError);
}

TEST_CASE("infra config file round-trip") {
    const std::string text = R"({
      "env": {"TASK_NUM_NODES": "1", "TASK_NUM_CPUS": "16"},
      "static_nodes": [{"count": 2, "cpu_units": 16}, {"id": "gpu-0", "cpu_units": 16, "gpu_units": 2}],
      "elasticity": {
        "elastic_max": 3,
        "elastic_node": {"cpu_units": 16},
        "provision_delay": {"seconds": 90},
        "period_seconds": 15,
        "workload_mode": "fractional"
      },
      "scheduler": {"dispatch_latency": 0.5}
    })";
    const InfraConfig cfg = InfraConfig::from_json_text(text);
    CHECK(cfg.static_nodes.size() == 3);
    CHECK(cfg.static_nodes[0].id == "static-0");
    CHECK(cfg.static_nodes[2].id == "gpu-0");
    CHECK(cfg.static_nodes[2].shape.gpu_units == 2);
    CHECK(cfg.elastic_max == 3);
    CHECK(cfg.provision_delay_base == doctest::Approx(90.0));
    CHECK(cfg.elasticity_period == doctest::Approx(15.0));
    CHECK(cfg.workload_mode == WorkloadMode::Fractional);
    CHECK(cfg.dispatch_latency == doctest::Approx(0.5));

    const InfraConfig again = InfraConfig::from_json_text(cfg.to_json_text());
    CHECK(again.static_nodes.size() == cfg.static_nodes.size());
    CHECK(again.elastic_max == cfg.elastic_max);
    CHECK(again.workload_mode == cfg.workload_mode);

    CHECK_THROWS_AS(InfraConfig::from_json_text(R"({"static_nodes": []})"), ConfigError);
}
