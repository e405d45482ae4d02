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

#include <fstream>

#include "floworc/artifacts.hpp"
#include "floworc/reliability.hpp"
#include "test_support.hpp"

using namespace floworc;
using namespace floworc::testing;

namespace {

TaskInstance make_task(const TaskType& type, const InfraConfig& infra,
                       std::vector<Binding> bindings) {
    TaskGraph g;
    g.add_type(type);
    std::vector<std::string> args;
    for (const auto& b : bindings) args.push_back(b.token);
    const TaskId id = g.register_task(type.name, args, infra);
    return g.task(id);
}

}  // namespace

TEST_CASE("fingerprints react to every constituent") {
    const TaskType type = io_type("step");
    TaskConstraints c1;
    c1.computing_nodes = 1;
    c1.processors = {{ProcessorType::Cpu, 4}};
    const std::vector<Binding> bindings = {{"a", 0, ParamDirection::In},
                                           {"b", 1, ParamDirection::Out}};
    const std::string base = task_fingerprint(type, bindings, c1);

    SUBCASE("stable across calls") {
        CHECK(task_fingerprint(type, bindings, c1) == base);
    }
    SUBCASE("different constraints change it") {
        // Oracle for the restart criterion: changing TASK_NUM_CPUS re-runs.
        TaskConstraints c2 = c1;
        c2.processors = {{ProcessorType::Cpu, 8}};
        CHECK(task_fingerprint(type, bindings, c2) != base);
    }
    SUBCASE("different tokens change it") {
        CHECK(task_fingerprint(type, {{"a", 0, ParamDirection::In},
                                      {"c", 1, ParamDirection::Out}},
                               c1) != base);
    }
    SUBCASE("different bound versions change it") {
        CHECK(task_fingerprint(type, {{"a", 2, ParamDirection::In},
                                      {"b", 3, ParamDirection::Out}},
                               c1) != base);
    }
    SUBCASE("different type name changes it") {
        CHECK(task_fingerprint(io_type("other"), bindings, c1) != base);
    }
}

TEST_CASE("manifest round-trip and counting") {
    const auto dir = fresh_dir("manifest");
    CheckpointManifest m;
    for (int i = 0; i < 5; ++i) {
        CheckpointRecord rec;
        rec.fingerprint = "fp" + std::to_string(i);
        rec.task_id = static_cast<TaskId>(i + 1);
        rec.type = "step";
        rec.outputs = {{"tok" + std::to_string(i), "data/tok" + std::to_string(i), 12, false}};
        m.add(rec);
    }
    m.save(dir / "manifest.json", "wf");
    const CheckpointManifest loaded = CheckpointManifest::load(dir / "manifest.json");
    CHECK(loaded.size() == 5);
    REQUIRE(loaded.find("fp3") != nullptr);
    CHECK(loaded.find("fp3")->outputs.at(0).token == "tok3");
    CHECK(loaded.find("missing") == nullptr);
    std::filesystem::remove_all(dir);
}

TEST_CASE("restart_check") {
    const auto dir = fresh_dir("restart");
    const InfraConfig infra = test_infra();
    TaskInstance task = make_task(io_type("step"), infra,
                                  {{"in.dat", 0, ParamDirection::In},
                                   {"out.dat", 1, ParamDirection::Out}});

    CheckpointManifest manifest;
    CheckpointRecord rec;
    rec.fingerprint = task.fingerprint;
    rec.task_id = task.id;
    rec.type = "step";
    rec.outputs = {{"out.dat", "data/out.dat", 10, false}};
    manifest.add(rec);

    SUBCASE("matching record with non-empty output skips") {
        write_mock_output(dir, "out.dat", 1, task.fingerprint);
        CHECK(restart_check(task, manifest, dir) == RestartDecision::Skip);
    }
    SUBCASE("zero-byte output re-runs") {
        write_empty_output(dir, "out.dat");
        CHECK(restart_check(task, manifest, dir) == RestartDecision::Run);
    }
    SUBCASE("missing output re-runs") {
        CHECK(restart_check(task, manifest, dir) == RestartDecision::Run);
    }
    SUBCASE("none-marker outputs never skip") {
        write_mock_output(dir, "out.dat", 1, task.fingerprint);
        CheckpointManifest m2;
        rec.outputs[0].none_marker = true;
        m2.add(rec);
        CHECK(restart_check(task, m2, dir) == RestartDecision::Run);
    }
    SUBCASE("unknown fingerprint re-runs") {
        CheckpointManifest empty;
        write_mock_output(dir, "out.dat", 1, task.fingerprint);
        CHECK(restart_check(task, empty, dir) == RestartDecision::Run);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("failure policy resolution") {
    const InfraConfig infra = test_infra();

    SUBCASE("IGNORE materializes defaults") {
        TaskType t = io_type("soft");
        t.reliability_template = R"({"on_failure":"IGNORE"})";
        TaskInstance task = make_task(t, infra, {{"a", 0, ParamDirection::In},
                                                 {"b", 1, ParamDirection::Out}});
        CHECK(resolve_failure(task) == FailureResolution::IgnoreWithDefaults);
    }

    SUBCASE("RETRY consumes its budget then degrades to FAIL") {
        TaskType t = io_type("flaky");
        t.reliability_template = R"({"on_failure":"RETRY","max_retries":2})";
        TaskInstance task = make_task(t, infra, {{"a", 0, ParamDirection::In},
                                                 {"b", 1, ParamDirection::Out}});
        CHECK(resolve_failure(task) == FailureResolution::Requeue);
        CHECK(resolve_failure(task) == FailureResolution::Requeue);
        CHECK(resolve_failure(task) == FailureResolution::Fail);
    }

    SUBCASE("default policy is FAIL") {
        TaskInstance task = make_task(io_type("plain"), infra,
                                      {{"a", 0, ParamDirection::In},
                                       {"b", 1, ParamDirection::Out}});
        CHECK(resolve_failure(task) == FailureResolution::Fail);
    }
}

TEST_CASE("mock artifacts") {
    const auto dir = fresh_dir("artifacts");

    SUBCASE("content is a pure function of its inputs") {
        CHECK(mock_output_content("a/b.dat", 2, "fp") == mock_output_content("a/b.dat", 2, "fp"));
        CHECK(mock_output_content("a/b.dat", 2, "fp") != mock_output_content("a/b.dat", 3, "fp"));
        write_mock_output(dir, "a/b.dat", 2, "fp");
        CHECK(std::filesystem::file_size(token_path(dir, "a/b.dat")) > 0);
    }

    SUBCASE("empty output is zero bytes") {
        write_empty_output(dir, "x.dat");
        CHECK(std::filesystem::file_size(token_path(dir, "x.dat")) == 0);
    }

    SUBCASE("none marker replaces the data file with a sidecar") {
        write_mock_output(dir, "y.dat", 1, "fp");
        write_none_marker(dir, "y.dat");
        CHECK_FALSE(std::filesystem::exists(token_path(dir, "y.dat")));
        CHECK(std::filesystem::exists(token_path(dir, "y.dat.none")));
    }

    SUBCASE("tokens cannot escape the data directory") {
        CHECK_THROWS_AS(token_path(dir, "../oops"), Error);
        CHECK_THROWS_AS(token_path(dir, "/abs"), Error);
    }
    std::filesystem::remove_all(dir);
}
