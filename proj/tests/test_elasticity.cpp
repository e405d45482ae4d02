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

#include <cmath>

#include "floworc/elasticity.hpp"
#include "test_support.hpp"

using namespace floworc;
using namespace floworc::testing;

namespace {

ProfileStore profiles_with(std::initializer_list<std::pair<std::string, double>> means,
                           double rt) {
    ProfileStore p(60.0, rt);
    for (const auto& [type, mean] : means) p.record_execution(type, mean);
    return p;
}

NodeResource up_node(const std::string& id, std::uint64_t ordinal, int cpus,
                     NodeState state = NodeState::Up, NodePool pool = NodePool::Static) {
    NodeResource n;
    n.node_id = id;
    n.ordinal = ordinal;
    n.shape = NodeShape{cpus, 0};
    n.pool = pool;
    n.state = state;
    n.free_cpu = cpus;
    return n;
}

}  // namespace

TEST_CASE("parallel workload: direct substitutions") {
    const NodeShape ref{48, 0};
    ProfileStore profiles = profiles_with({{"t1", 100.0}, {"t2", 50.0}}, 60.0);

    WorkloadItem one_node{"t1", TaskConstraints{1, {{ProcessorType::Cpu, 48}}}};
    WorkloadItem two_node{"t2", TaskConstraints{2, {{ProcessorType::Cpu, 48}}}};

    SUBCASE("1-node 100s plus 2-node 50s gives 200 node-seconds") {
        const double pw = estimate_parallel_workload({one_node, two_node}, profiles, ref,
                                                     WorkloadMode::Integer);
        CHECK(pw == doctest::Approx(200.0));
    }
    SUBCASE("empty ready set gives zero") {
        CHECK(estimate_parallel_workload({}, profiles, ref, WorkloadMode::Integer) == 0.0);
    }
    SUBCASE("ten identical 30s tasks give 300") {
        ProfileStore p = profiles_with({{"t", 30.0}}, 60.0);
        std::vector<WorkloadItem> ready(10, WorkloadItem{"t", one_node.constraints});
        CHECK(estimate_parallel_workload(ready, p, ref, WorkloadMode::Integer) ==
              doctest::Approx(300.0));
    }
    SUBCASE("unknown type uses the configured prior") {
        ProfileStore p(42.0, 60.0);
        CHECK(estimate_parallel_workload({one_node}, p, ref, WorkloadMode::Integer) ==
              doctest::Approx(42.0));
    }
    SUBCASE("fractional mode keeps per-node unit fractions") {
        WorkloadItem half{"t1", TaskConstraints{1, {{ProcessorType::Cpu, 24}}}};
        CHECK(estimate_parallel_workload({half}, profiles, ref, WorkloadMode::Fractional) ==
              doctest::Approx(50.0));
        // Integer mode rounds the same task up to a whole node.
        CHECK(estimate_parallel_workload({half}, profiles, ref, WorkloadMode::Integer) ==
              doctest::Approx(100.0));
    }
}

TEST_CASE("infrastructure capacity: direct substitutions") {
    const NodeShape ref{48, 0};

    SUBCASE("3 nodes at mean RT 60 give 180") {
        ProfileStore p(60.0, 120.0);
        p.record_provision(60.0);
        std::vector<NodeResource> nodes = {up_node("a", 0, 48), up_node("b", 1, 48),
                                           up_node("c", 2, 48)};
        CHECK(estimate_infrastructure_capacity(nodes, p, ref, true) == doctest::Approx(180.0));
    }
    SUBCASE("no nodes give zero") {
        ProfileStore p(60.0, 120.0);
        CHECK(estimate_infrastructure_capacity({}, p, ref, true) == 0.0);
    }
    SUBCASE("provisioning nodes count when configured") {
        ProfileStore p(60.0, 120.0);
        std::vector<NodeResource> nodes;
        for (int i = 0; i < 6; ++i) nodes.push_back(up_node("s" + std::to_string(i), i, 48));
        nodes.push_back(up_node("e0", 6, 48, NodeState::Provisioning, NodePool::Elastic));
        // Oracle: per-node sum including PROVISIONING = 7 x 120.
        CHECK(estimate_infrastructure_capacity(nodes, p, ref, true) == doctest::Approx(840.0));
        CHECK(estimate_infrastructure_capacity(nodes, p, ref, false) == doctest::Approx(720.0));
    }
    SUBCASE("released and draining nodes never count") {
        ProfileStore p(60.0, 100.0);
        std::vector<NodeResource> nodes = {
            up_node("a", 0, 48), up_node("b", 1, 48, NodeState::Draining, NodePool::Elastic),
            up_node("c", 2, 48, NodeState::Released, NodePool::Elastic)};
        CHECK(estimate_infrastructure_capacity(nodes, p, ref, true) == doctest::Approx(100.0));
    }
    SUBCASE("RT clamps at one second") {
        ProfileStore p(60.0, 120.0);
        p.record_provision(0.001);
        std::vector<NodeResource> nodes = {up_node("a", 0, 48)};
        CHECK(estimate_infrastructure_capacity(nodes, p, ref, true) == doctest::Approx(1.0));
    }
}

TEST_CASE("profile store means") {
    ProfileStore p(60.0, 120.0);
    CHECK(p.mean_execution("x") == doctest::Approx(60.0));
    p.record_execution("x", 10.0);
    p.record_execution("x", 30.0);
    CHECK(p.mean_execution("x") == doctest::Approx(20.0));
    CHECK(p.execution_count("x") == 2);
    CHECK(p.execution_variance("x") == doctest::Approx(200.0));
    CHECK(p.mean_provision() == doctest::Approx(120.0));  // prior until a sample
    p.record_provision(80.0);
    p.record_provision(100.0);
    CHECK(p.mean_provision() == doctest::Approx(90.0));
}

TEST_CASE("scaling decision two-branch rule") {
    InfraConfig infra = test_infra(2, 48);
    infra.elastic_max = 2;
    ResourcePool pool(infra);
    ProfileStore profiles(60.0, 120.0);

    ElasticityInputs in;
    in.now = 300.0;

    SUBCASE("pw above ic scales up while budget remains") {
        in.pw = 200.0;
        in.ic = 180.0;
        const auto d = decide(in, pool, profiles, infra);
        CHECK(d.action == ScalingDecision::Action::ScaleUp);
        CHECK(d.n_nodes == 1);
    }
    SUBCASE("budget exhausted holds") {
        in.pw = 200.0;
        in.ic = 180.0;
        pool.add_elastic_node(infra.elastic_shape);
        pool.add_elastic_node(infra.elastic_shape);
        CHECK(decide(in, pool, profiles, infra).action == ScalingDecision::Action::Hold);
    }
    SUBCASE("pw below ic with an elastic node scales down") {
        in.pw = 100.0;
        in.ic = 180.0;
        const std::string id = pool.add_elastic_node(infra.elastic_shape);
        pool.mark_up(id);
        const auto d = decide(in, pool, profiles, infra);
        CHECK(d.action == ScalingDecision::Action::ScaleDown);
        CHECK(d.node_id == id);
    }
    SUBCASE("pw below ic with static nodes only holds") {
        in.pw = 100.0;
        in.ic = 180.0;
        CHECK(decide(in, pool, profiles, infra).action == ScalingDecision::Action::Hold);
    }
    SUBCASE("boundary pw == ic holds (strict inequalities)") {
        in.pw = 180.0;
        in.ic = 180.0;
        const std::string id = pool.add_elastic_node(infra.elastic_shape);
        pool.mark_up(id);
        CHECK(decide(in, pool, profiles, infra).action == ScalingDecision::Action::Hold);
    }
    SUBCASE("hysteresis: no scale-down within one RT of a scale-up") {
        in.pw = 100.0;
        in.ic = 180.0;
        const std::string id = pool.add_elastic_node(infra.elastic_shape);
        pool.mark_up(id);
        in.last_scale_up_t = 250.0;  // 50 s ago, RT is 120 s
        CHECK(decide(in, pool, profiles, infra).action == ScalingDecision::Action::Hold);
        in.last_scale_up_t = 100.0;  // 200 s ago
        CHECK(decide(in, pool, profiles, infra).action == ScalingDecision::Action::ScaleDown);
    }
}

TEST_CASE("victim selection") {
    const NodeShape ref{48, 0};
    ProfileStore profiles(60.0, 120.0);
    std::vector<NodeResource> nodes = {
        up_node("static-0", 0, 48),
        up_node("elastic-0", 1, 48, NodeState::Up, NodePool::Elastic),
        up_node("elastic-1", 2, 48, NodeState::Up, NodePool::Elastic),
    };

    SUBCASE("idle beats busy") {
        // elastic-0 idle, elastic-1 carries one running task.
        std::map<std::string, double> load = {{"elastic-1", 30.0}};
        CHECK(select_victim(nodes, 100.0, 400.0, profiles, ref, load) == "elastic-0");
    }
    SUBCASE("equal zero loads pick the newest node") {
        CHECK(select_victim(nodes, 100.0, 400.0, profiles, ref, {}) == "elastic-1");
    }
    SUBCASE("minimum remaining time wins") {
        std::map<std::string, double> load = {{"elastic-0", 30.0}, {"elastic-1", 10.0}};
        CHECK(select_victim(nodes, 100.0, 400.0, profiles, ref, load) == "elastic-1");
    }
    SUBCASE("tiny slack falls back to the smallest elastic node") {
        // underused = (ic - pw) / rt = 0.25 node-equivalents: nothing qualifies.
        std::map<std::string, double> load = {{"elastic-0", 5.0}, {"elastic-1", 30.0}};
        CHECK(select_victim(nodes, 370.0, 400.0, profiles, ref, load) == "elastic-0");
    }
}

TEST_CASE("elasticity csv round-trip") {
    std::vector<ElasticitySample> samples = {{0.0, 0.0, 720.0, 6, 0, 0},
                                             {30.0, 1500.5, 720.0, 6, 1, 12}};
    const std::string csv = elasticity_csv(samples);
    CHECK(csv.rfind(kElasticityCsvHeader, 0) == 0);
    const auto parsed = parse_elasticity_csv(csv);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[1].pw == doctest::Approx(1500.5));
    CHECK(parsed[1].n_provisioning == 1);
    CHECK(parsed[1].n_running_tasks == 12);
}
