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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "floworc/errors.hpp"

namespace floworc {

// Samplers are written out by hand instead of using std::*_distribution so that
// a given seed produces the same byte stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

private:
    std::mt19937_64 engine_;
};

struct DistSpec {
    enum class Kind { Constant, Uniform, Lognormal };

    Kind kind = Kind::Constant;
    double a = 0.0;  // Uniform: lo, Lognormal: mu
    double b = 0.0;  // Uniform: hi, Lognormal: sigma

    /// Multiplicative factor applied to a base value. Constant yields 1.
    double sample_factor(Rng& rng) const {
        switch (kind) {
            case Kind::Constant: return 1.0;
            case Kind::Uniform: return rng.uniform(a, b);
            case Kind::Lognormal: return std::exp(a + b * rng.normal());
        }
        return 1.0;
    }

    static DistSpec constant() { return DistSpec{}; }
    static DistSpec uniform(double lo, double hi) { return DistSpec{Kind::Uniform, lo, hi}; }
    static DistSpec lognormal(double mu, double sigma) { return DistSpec{Kind::Lognormal, mu, sigma}; }
};

}  // namespace floworc
