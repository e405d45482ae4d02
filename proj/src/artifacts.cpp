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

#include "floworc/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "floworc/errors.hpp"

namespace floworc {

std::filesystem::path token_path(const std::filesystem::path& run_dir, const std::string& token) {
    if (token.empty()) throw Error("empty data token");
    const std::filesystem::path rel(token);
    if (rel.is_absolute()) throw Error("data token must be relative: " + token);
    for (const auto& part : rel)
        if (part == "..") throw Error("data token may not contain '..': " + token);
    return run_dir / "data" / rel;
}

std::string mock_output_content(const std::string& token, std::uint32_t version,
                                const std::string& fingerprint) {
    std::ostringstream out;
    out << "token=" << token << "\nversion=" << version << "\nproducer=" << fingerprint << "\n";
    return out.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write data file: " + p.string());
    out << content;
}

}  // namespace

void write_mock_output(const std::filesystem::path& run_dir, const std::string& token,
                       std::uint32_t version, const std::string& fingerprint) {
    write_file(token_path(run_dir, token), mock_output_content(token, version, fingerprint));
}

void write_empty_output(const std::filesystem::path& run_dir, const std::string& token) {
    write_file(token_path(run_dir, token), "");
}

void write_none_marker(const std::filesystem::path& run_dir, const std::string& token) {
    const auto p = token_path(run_dir, token);
    std::error_code ec;
    std::filesystem::remove(p, ec);
    write_file(p.parent_path() / (p.filename().string() + ".none"), "");
}

void write_workflow_input(const std::filesystem::path& run_dir, const std::string& token) {
    write_file(token_path(run_dir, token), "workflow-input:" + token + "\n");
}

}  // namespace floworc
