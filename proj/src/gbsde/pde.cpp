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
#include "gbsde/pde.hpp"

#include <cmath>

namespace gbsde {

ValueSurface::ValueSurface(Grids grids, std::vector<double> values) : grids_(grids), values_(std::move(values)) {
    const auto expected = static_cast<std::size_t>(grids_.nt() + 1) * grids_.nx();
    require(values_.size() == expected, ErrorCode::InvalidArgument, "surface size does not match its grid");
}

GridLocation locate(const Grids& grids, double x) noexcept {
    const int last = grids.nx() - 1;
    if (!(x > grids.x_lo())) return {0, 0.0, x < grids.x_lo()};
    if (!(x < grids.x_hi())) return {last - 1, 1.0, x > grids.x_hi()};
    const double pos = (x - grids.x_lo()) / grids.dx();
    int cell = static_cast<int>(pos);
    if (cell > last - 1) cell = last - 1;
    // x(j) is a convex combination, so recompute the weight against the actual nodes.
    const double left = grids.x(cell);
    const double w = (x - left) / (grids.x(cell + 1) - left);
    return {cell, w < 0.0 ? 0.0 : (w > 1.0 ? 1.0 : w), false};
}

double ValueSurface::interpolate(int k, double x) const noexcept {
    const GridLocation loc = locate(grids_, x);
    const double* row = values_.data() + static_cast<std::size_t>(k) * grids_.nx();
    if (loc.weight == 0.0) return row[loc.cell];
    if (loc.weight == 1.0) return row[loc.cell + 1];
    return row[loc.cell] + loc.weight * (row[loc.cell + 1] - row[loc.cell]);
}

namespace {

[[noreturn]] void non_finite(const Grids& grids, int k, int j) {
    fail(ErrorCode::Numerical, "non-finite value in the scheme at time node " + std::to_string(k) + " (t = " +
                                   std::to_string(grids.t(k)) + "), space node " + std::to_string(j) +
                                   " (x = " + std::to_string(grids.x(j)) + ")");
}

// One backward step from `next` (level k+1) into `cur` (level k).
template <class Terms>
void step(const double* next, double* cur, int k, const Grids& grids, const VolatilityBand& band, Terms&& terms) {
    const int n = grids.nx();
    const double dt = grids.dt(), dx = grids.dx();
    const double inv_dx2 = 1.0 / (dx * dx), inv_2dx = 0.5 / dx, inv_dx = 1.0 / dx;
    const double t_next = grids.t(k + 1);
    for (int j = 0; j < n; ++j) {
        double d2, d1;
        if (j == 0) {
            d2 = 0.0;
            d1 = (next[1] - next[0]) * inv_dx;
        } else if (j == n - 1) {
            d2 = 0.0;
            d1 = (next[n - 1] - next[n - 2]) * inv_dx;
        } else {
            d2 = (next[j + 1] - 2.0 * next[j] + next[j - 1]) * inv_dx2;
            d1 = (next[j + 1] - next[j - 1]) * inv_2dx;
        }
        const DriverTerms dr = terms(t_next, k + 1, j, next[j], d1);
        const double v = next[j] + dt * (g_function(d2 + 2.0 * dr.g, band) + dr.f);
        if (!std::isfinite(v)) non_finite(grids, k, j);
        cur[j] = v;
    }
}

template <class Terms>
ValueSurface march(std::span<const double> terminal, const VolatilityBand& band, const Grids& grids, Terms&& terms) {
    grids.check_cfl(band);
    const int n = grids.nx(), nt = grids.nt();
    require(static_cast<int>(terminal.size()) == n, ErrorCode::InvalidArgument,
            "terminal slice length does not match the space grid");
    std::vector<double> values(static_cast<std::size_t>(nt + 1) * n);
    double* last = values.data() + static_cast<std::size_t>(nt) * n;
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(terminal[j])) non_finite(grids, nt, j);
        last[j] = terminal[j];
    }
    for (int k = nt - 1; k >= 0; --k) {
        const double* next = values.data() + static_cast<std::size_t>(k + 1) * n;
        double* cur = values.data() + static_cast<std::size_t>(k) * n;
        step(next, cur, k, grids, band, terms);
    }
    return ValueSurface(grids, std::move(values));
}

}  // namespace

ValueSurface solve_gheat(std::span<const double> terminal, const Driver& driver, const VolatilityBand& band,
                         const Grids& grids) {
    if (!driver) return march(terminal, band, grids, [](double, int, int, double, double) { return DriverTerms{}; });
    return march(terminal, band, grids, driver);
}

ValueSurface solve_gheat(const Payoff& payoff, const Generator& gen, const VolatilityBand& band, const Grids& grids) {
    std::vector<double> terminal(grids.nx());
    for (int j = 0; j < grids.nx(); ++j) terminal[j] = payoff(grids.x(j));
    if (!gen.has_f() && !gen.has_g())
        return march(terminal, band, grids, [](double, int, int, double, double) { return DriverTerms{}; });
    return march(terminal, band, grids, [&gen](double t, int, int, double u, double ux) {
        return DriverTerms{gen.f(t, u, ux), gen.g(t, u, ux)};
    });
}

std::vector<double> gheat_initial_slice(std::span<const double> terminal, const VolatilityBand& band,
                                        const Grids& grids) {
    grids.check_cfl(band);
    const int n = grids.nx();
    require(static_cast<int>(terminal.size()) == n, ErrorCode::InvalidArgument,
            "terminal slice length does not match the space grid");
    std::vector<double> a(terminal.begin(), terminal.end()), b(n);
    for (int j = 0; j < n; ++j)
        if (!std::isfinite(a[j])) non_finite(grids, grids.nt(), j);
    auto none = [](double, int, int, double, double) { return DriverTerms{}; };
    for (int k = grids.nt() - 1; k >= 0; --k) {
        step(a.data(), b.data(), k, grids, band, none);
        a.swap(b);
    }
    return a;
}

ValueSurface first_derivative(const ValueSurface& surface) {
    const Grids& g = surface.grids();
    const int n = g.nx();
    const double inv_dx = 1.0 / g.dx(), inv_2dx = 0.5 / g.dx();
    std::vector<double> out(surface.values().size());
    for (int k = 0; k <= g.nt(); ++k) {
        const auto u = surface.slice(k);
        double* d = out.data() + static_cast<std::size_t>(k) * n;
        d[0] = (u[1] - u[0]) * inv_dx;
        d[n - 1] = (u[n - 1] - u[n - 2]) * inv_dx;
        for (int j = 1; j < n - 1; ++j) d[j] = (u[j + 1] - u[j - 1]) * inv_2dx;
    }
    return ValueSurface(g, std::move(out));
}

ValueSurface second_derivative(const ValueSurface& surface) {
    const Grids& g = surface.grids();
    const int n = g.nx();
    const double inv_dx2 = 1.0 / (g.dx() * g.dx());
    std::vector<double> out(surface.values().size(), 0.0);
    for (int k = 0; k <= g.nt(); ++k) {
        const auto u = surface.slice(k);
        double* d = out.data() + static_cast<std::size_t>(k) * n;
        for (int j = 1; j < n - 1; ++j) d[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_dx2;
    }
    return ValueSurface(g, std::move(out));
}

}  // namespace gbsde
