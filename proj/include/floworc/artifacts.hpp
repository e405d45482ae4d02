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

#include <filesystem>
#include <string>

namespace floworc {

// Mock data artifacts live under <run_dir>/data/<token>. Content is a pure
// function of (token, version, producer fingerprint) so that interrupted and
// resumed runs converge on byte-identical trees.

std::filesystem::path token_path(const std::filesystem::path& run_dir, const std::string& token);

std::string mock_output_content(const std::string& token, std::uint32_t version,
                                const std::string& fingerprint);

void write_mock_output(const std::filesystem::path& run_dir, const std::string& token,
                       std::uint32_t version, const std::string& fingerprint);
void write_empty_output(const std::filesystem::path& run_dir, const std::string& token);
/// A none-marker leaves no data file; it drops a zero-byte `<token>.none` sidecar.
void write_none_marker(const std::filesystem::path& run_dir, const std::string& token);
void write_workflow_input(const std::filesystem::path& run_dir, const std::string& token);

}  // namespace floworc
