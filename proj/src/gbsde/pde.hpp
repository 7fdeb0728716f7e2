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

#include <functional>
#include <span>
#include <vector>

#include "gbsde/core.hpp"

namespace gbsde {

/// Grid function on (time node k, space node j), row-major in k.
class ValueSurface {
  public:
    ValueSurface(Grids grids, std::vector<double> values);

    const Grids& grids() const noexcept { return grids_; }
    double operator()(int k, int j) const noexcept { return values_[static_cast<std::size_t>(k) * grids_.nx() + j]; }
    std::span<const double> slice(int k) const noexcept {
        return {values_.data() + static_cast<std::size_t>(k) * grids_.nx(), static_cast<std::size_t>(grids_.nx())};
    }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Linear interpolation in x at time node k; x outside the domain is clamped.
    double interpolate(int k, double x) const noexcept;
    double at_origin(int k = 0) const noexcept { return interpolate(k, 0.0); }

  private:
    Grids grids_;
    std::vector<double> values_;
};

/// Position of x on the space grid: clamped cell index and weight of the right node.
struct GridLocation {
    int cell;
    double weight;
    bool clamped;
};
GridLocation locate(const Grids& grids, double x) noexcept;

/// Driver terms (f, g) of the scheme at time t, node j, from u and its central difference.
struct DriverTerms {
    double f = 0.0;
    double g = 0.0;
};
using Driver = std::function<DriverTerms(double t, int k, int j, double u, double ux)>;

/// Explicit monotone scheme for u_t + G(u_xx + 2g) + f = 0, u(T) = phi:
///   u^k_j = u^{k+1}_j + dt [ G(D2 u^{k+1}_j + 2 g) + f ],
/// with f, g evaluated at (t_{k+1}, u^{k+1}_j, D1 u^{k+1}_j). Boundary nodes use a
/// linearly extrapolated ghost node, so D2 = 0 there and D1 is one-sided.
ValueSurface solve_gheat(const Payoff& payoff, const Generator& gen, const VolatilityBand& band, const Grids& grids);

/// Same scheme from arbitrary terminal values; k passed to the driver is the known level k+1.
ValueSurface solve_gheat(std::span<const double> terminal, const Driver& driver, const VolatilityBand& band,
                         const Grids& grids);

/// Driver-free G-heat flow; returns only the t_start slice.
std::vector<double> gheat_initial_slice(std::span<const double> terminal, const VolatilityBand& band,
                                        const Grids& grids);

/// u together with its first and second space differences; enough to realize the
/// solution triple along any path.
struct MarkovSurfaces {
    ValueSurface u, ux, uxx;
};

/// Central differences inside, one-sided at the two boundary nodes.
ValueSurface first_derivative(const ValueSurface& surface);
/// Central second differences inside, zero at the boundary nodes.
ValueSurface second_derivative(const ValueSurface& surface);

}  // namespace gbsde
