/*
 Copyright 2026 gbsde contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <cstdint>

#include <boost/math/special_functions/erf.hpp>

namespace gbsde {

/// Stateless counter-based generator: each (seed, stream, counter) triple maps to an
/// independent 64-bit word through two rounds of the SplitMix64 finalizer.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Sub-key for one stream (a path, a control draw, ...).
    std::uint64_t key(std::uint64_t stream) const noexcept {
        return mix(seed_ + 0x9e3779b97f4a7c15ull * (stream + 1));
    }

    static std::uint64_t bits(std::uint64_t key, std::uint64_t counter) noexcept {
        return mix(key ^ mix(0xd1b54a32d192ed03ull * (counter + 1)));
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    static double uniform(std::uint64_t key, std::uint64_t counter) noexcept {
        return (static_cast<double>(bits(key, counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by inverse CDF of the uniform above.
    static double normal(std::uint64_t key, std::uint64_t counter) {
        const double u = uniform(key, counter);
        return -1.4142135623730951 * boost::math::erfc_inv(2.0 * u);
    }

    std::uint64_t seed() const noexcept { return seed_; }

  private:
    std::uint64_t seed_;
};

}  // namespace gbsde
