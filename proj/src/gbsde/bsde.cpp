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
#include "gbsde/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbsde/parallel.hpp"

namespace gbsde {

MarkovSurfaces solve_markovian(const Payoff& payoff, const Generator& gen, const VolatilityBand& band,
                               const Grids& grids) {
    ValueSurface u = solve_gheat(payoff, gen, band, grids);
    ValueSurface ux = first_derivative(u);
    ValueSurface uxx = second_derivative(u);
    return {std::move(u), std::move(ux), std::move(uxx)};
}

double clamp_to_domain(double b, const Grids& grids) noexcept { return std::clamp(b, grids.x_lo(), grids.x_hi()); }

namespace {

double at(const ValueSurface& s, int k, const GridLocation& loc) noexcept {
    const double l = s(k, loc.cell), r = s(k, loc.cell + 1);
    if (loc.weight == 0.0) return l;
    if (loc.weight == 1.0) return r;
    return l + loc.weight * (r - l);
}

// Fills Y, Z on nodes [k_begin, k_end] and K increments on steps [k_begin, k_end) from one
// set of surfaces whose level for path node k is k - offset, evaluated at B_k - shift.
void fill(const MarkovSurfaces& s, const Path& path, const Grids& path_grids, const Generator& gen,
          const VolatilityBand& band, int k_begin, int k_end, int offset, double shift, PathTriple& out) {
    const Grids& g = s.u.grids();
    const double dt = path_grids.dt();
    for (int k = k_begin; k <= k_end; ++k) {
        const int level = k - offset;
        const GridLocation loc = locate(g, path.b[k] - shift);
        if (loc.clamped) ++out.clamped;
        out.y[k] = at(s.u, level, loc);
        out.z[k] = at(s.ux, level, loc);
        if (k == k_end) break;
        double a = at(s.uxx, level, loc);
        if (gen.has_g()) a += 2.0 * gen.g(path_grids.t(k), out.y[k], out.z[k]);
        const double r = std::clamp(path.rate[k], band.lo2(), band.hi2());
        // 0.5 a r <= G(a) holds exactly in floating point, so dk <= 0 with no tolerance.
        const double dk = dt * (0.5 * (a * r) - g_function(a, band));
        out.a[k] = a;
        out.dk[k] = dk;
        out.k[k + 1] = out.k[k] + dk;
    }
}

void reset(PathTriple& out, int nt) {
    out.y.assign(nt + 1, 0.0);
    out.z.assign(nt + 1, 0.0);
    out.k.assign(nt + 1, 0.0);
    out.dk.assign(nt, 0.0);
    out.a.assign(nt, 0.0);
    out.clamped = 0;
}

void check_path(const Path& path, const Grids& grids) {
    require(static_cast<int>(path.b.size()) == grids.nt() + 1 && static_cast<int>(path.rate.size()) == grids.nt(),
            ErrorCode::Mismatch, "path length does not match the surface time grid");
}

}  // namespace

void extract_triple(const MarkovSurfaces& surfaces, const Path& path, const Generator& gen,
                    const VolatilityBand& band, PathTriple& out) {
    const Grids& g = surfaces.u.grids();
    check_path(path, g);
    reset(out, g.nt());
    fill(surfaces, path, g, gen, band, 0, g.nt(), 0, 0.0, out);
}

std::vector<PathTriple> extract_triples(const MarkovSurfaces& surfaces, const PathBundle& bundle,
                                        const Generator& gen) {
    require(bundle.grids() == surfaces.u.grids(), ErrorCode::Mismatch, "bundle and surfaces use different grids");
    std::vector<PathTriple> out(bundle.size());
    parallel_for(out.size(), [&](std::size_t p) {
        const Path path = bundle.path(static_cast<int>(p));
        extract_triple(surfaces, path, gen, bundle.band(), out[p]);
    });
    return out;
}

double terminal_value(const Payoff& payoff, const Path& path, const Grids& grids) {
    return payoff(clamp_to_domain(path.b.back(), grids));
}

double bsde_residual(const PathTriple& triple, const Path& path, const Grids& grids, const Generator& gen,
                     double xi) {
    const int nt = grids.nt();
    require(static_cast<int>(triple.y.size()) == nt + 1, ErrorCode::Mismatch, "triple does not match the grid");
    check_path(path, grids);
    const double dt = grids.dt();
    double acc = xi;  // xi + sum_{j>=k} (f dt + g dqv - Z dB)
    double worst = std::abs(triple.y[nt] - xi);
    for (int k = nt - 1; k >= 0; --k) {
        const double t = grids.t(k);
        if (gen.has_f()) acc += gen.f(t, triple.y[k], triple.z[k]) * dt;
        if (gen.has_g()) acc += gen.g(t, triple.y[k], triple.z[k]) * (path.qv[k + 1] - path.qv[k]);
        acc -= triple.z[k] * (path.b[k + 1] - path.b[k]);
        const double r = std::abs(triple.y[k] - (acc - (triple.k[nt] - triple.k[k])));
        worst = std::max(worst, r);
    }
    return worst;
}

//---------------------------------------------------------------------------//
// Two epochs
//---------------------------------------------------------------------------//

Grids align_time_node(const Grids& grids, double t1) {
    const double span = grids.horizon() - grids.t_start();
    require(t1 > grids.t_start() && t1 < grids.horizon(), ErrorCode::InvalidArgument,
            "t1 must lie strictly inside the time horizon");
    for (int nt = grids.nt(); nt <= grids.nt() * 64; ++nt) {
        const double pos = (t1 - grids.t_start()) * nt / span;
        if (std::abs(pos - std::round(pos)) < 1e-9 * nt) return grids.with_nt(nt);
    }
    fail(ErrorCode::InvalidArgument, "t1 cannot be placed on a time node near the requested resolution");
}

namespace {

Driver make_driver(const Generator& gen) {
    if (!gen.has_f() && !gen.has_g()) return {};
    return [gen](double t, int, int, double u, double ux) { return DriverTerms{gen.f(t, u, ux), gen.g(t, u, ux)}; };
}

MarkovSurfaces surfaces_from(ValueSurface u) {
    ValueSurface ux = first_derivative(u);
    ValueSurface uxx = second_derivative(u);
    return {std::move(u), std::move(ux), std::move(uxx)};
}

constexpr std::size_t kMemberCache = 8;

}  // namespace

TwoEpochSolution::TwoEpochSolution(TwoEpochProblem problem, Grids grids, int k1, std::vector<double> y_t1,
                                   MarkovSurfaces early)
    : problem_(std::move(problem)), grids_(grids), k1_(k1), y_t1_(std::move(y_t1)), early_(std::move(early)) {}

Grids TwoEpochSolution::late_grids() const {
    return Grids(grids_.horizon(), grids_.nt() - k1_, grids_.x_lo(), grids_.x_hi(), grids_.nx(), grids_.t(k1_));
}

int TwoEpochSolution::member_index(double x) const noexcept {
    const GridLocation loc = locate(grids_, x);
    return loc.weight < 0.5 ? loc.cell : loc.cell + 1;
}

std::shared_ptr<const MarkovSurfaces> TwoEpochSolution::member(int i) const {
    require(i >= 0 && i < grids_.nx(), ErrorCode::InvalidArgument, "family member index out of range");
    {
        std::lock_guard lock(mutex_);
        for (const auto& [idx, s] : cache_)
            if (idx == i) return s;
    }
    const Grids late = late_grids();
    std::vector<double> terminal(late.nx());
    const double xi = grids_.x(i);
    for (int j = 0; j < late.nx(); ++j) terminal[j] = problem_.psi(xi, late.x(j));
    auto s = std::make_shared<const MarkovSurfaces>(
        surfaces_from(solve_gheat(terminal, make_driver(problem_.gen), problem_.band, late)));
    std::lock_guard lock(mutex_);
    if (cache_.size() >= kMemberCache) cache_.erase(cache_.begin());
    cache_.emplace_back(i, s);
    return s;
}

TwoEpochSolution solve_two_epoch(const TwoEpochProblem& problem) {
    require(static_cast<bool>(problem.psi), ErrorCode::InvalidArgument, "two-epoch problem needs psi");
    const Grids grids = align_time_node(problem.grids, problem.t1);
    const int k1 = grids.time_index(problem.t1);
    require(k1 > 0 && k1 < grids.nt(), ErrorCode::InvalidArgument, "t1 must lie strictly inside the time grid");
    const int nx = grids.nx();
    const Grids late(grids.horizon(), grids.nt() - k1, grids.x_lo(), grids.x_hi(), nx, grids.t(k1));
    const double work = static_cast<double>(nx) * nx * late.nt();
    require(work <= kDefaultLatticeBudget, ErrorCode::Budget,
            "two-epoch family needs about " + std::to_string(work) + " node updates; reduce nx");
    late.check_cfl(problem.band);

    const Driver driver = make_driver(problem.gen);
    const GridLocation origin = locate(late, 0.0);
    std::vector<double> y_t1(nx);
    parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
        std::vector<double> terminal(nx);
        const double xi = grids.x(static_cast<int>(i));
        for (int j = 0; j < nx; ++j) terminal[j] = problem.psi(xi, late.x(j));
        std::vector<double> first;
        if (driver) {
            const ValueSurface s = solve_gheat(terminal, driver, problem.band, late);
            first.assign(s.slice(0).begin(), s.slice(0).end());
        } else {
            first = gheat_initial_slice(terminal, problem.band, late);
        }
        y_t1[i] = first[origin.cell] + origin.weight * (first[origin.cell + 1] - first[origin.cell]);
    });

    const Grids early_grids(grids.t(k1), k1, grids.x_lo(), grids.x_hi(), nx, grids.t_start());
    MarkovSurfaces early = surfaces_from(solve_gheat(y_t1, driver, problem.band, early_grids));
    return TwoEpochSolution(problem, grids, k1, std::move(y_t1), std::move(early));
}

void extract_two_epoch_triple(const TwoEpochSolution& solution, const Path& path, PathTriple& out) {
    const Grids& g = solution.grids();
    check_path(path, g);
    const auto& pb = solution.problem();
    const int k1 = solution.k1();
    reset(out, g.nt());
    // The early pass also writes node k1; the pasted member overwrites it below.
    fill(solution.early(), path, g, pb.gen, pb.band, 0, k1, 0, 0.0, out);
    const auto member = solution.member(solution.member_index(path.b[k1]));
    fill(*member, path, g, pb.gen, pb.band, k1, g.nt(), k1, path.b[k1], out);
}

double two_epoch_terminal(const TwoEpochSolution& solution, const Path& path) {
    const Grids& g = solution.grids();
    const int k1 = solution.k1();
    const double x = g.x(solution.member_index(path.b[k1]));
    return solution.problem().psi(x, clamp_to_domain(path.b.back() - path.b[k1], g));
}

//---------------------------------------------------------------------------//
// Refinement study
//---------------------------------------------------------------------------//

std::vector<ConvergenceRow> convergence_table(const Payoff& payoff, const Generator& gen,
                                              const VolatilityBand& band, const Grids& grids, int levels,
                                              const ControlFactory& control, int n_paths, std::uint64_t seed) {
    require(levels >= 2, ErrorCode::InvalidArgument, "convergence table needs at least 2 levels");
    require(n_paths >= 1, ErrorCode::InvalidArgument, "convergence table needs at least one path");
    std::vector<ConvergenceRow> rows;
    Grids g = grids;
    for (int level = 0; level < levels; ++level, g = g.refined()) {
        const double cells = static_cast<double>(g.nx()) * (g.nt() + 1) * 3.0 * sizeof(double);
        require(cells <= 2.5e9, ErrorCode::Budget,
                "level " + std::to_string(level) + " surfaces need " + std::to_string(cells / 1e9) +
                    " GB; use fewer levels or a coarser base grid");
        auto surfaces = std::make_shared<const MarkovSurfaces>(solve_markovian(payoff, gen, band, g));
        const PathBundle bundle(control(g, surfaces), n_paths, seed, g, band);
        std::vector<double> residual(n_paths);
        parallel_for(residual.size(), [&](std::size_t p) {
            const Path path = bundle.path(static_cast<int>(p));
            PathTriple triple;
            extract_triple(*surfaces, path, gen, band, triple);
            residual[p] = bsde_residual(triple, path, g, gen, terminal_value(payoff, path, g));
        });
        ConvergenceRow row;
        row.level = level;
        row.nx = g.nx();
        row.nt = g.nt();
        row.y0 = surfaces->u.at_origin(0);
        row.max_residual = *std::max_element(residual.begin(), residual.end());
        rows.push_back(row);
    }
    const double finest = rows.back().y0;
    for (auto& r : rows) r.abs_err = std::abs(r.y0 - finest);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t l = 0; l < rows.size(); ++l) {
        const bool defined = l + 2 < rows.size() && rows[l].abs_err > 0.0 && rows[l + 1].abs_err > 0.0;
        rows[l].order = defined ? std::log2(rows[l].abs_err / rows[l + 1].abs_err) : nan;
    }
    return rows;
}

}  // namespace gbsde
