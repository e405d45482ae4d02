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

#include <stdexcept>
#include <string>

namespace floworc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (workflow file, infra file, scenario).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Illegal graph operation: unknown type, arity mismatch, bad state transition.
class GraphError : public Error {
public:
    using Error::Error;
};

/// Resource accounting violation: over-allocation, double release, non-UP lease.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// The infrastructure provider refused a request (budget exceeded, command failed).
class ProviderRejection : public Error {
public:
    using Error::Error;
};

}  // namespace floworc
