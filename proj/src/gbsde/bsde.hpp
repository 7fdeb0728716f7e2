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
#include <memory>
#include <mutex>
#include <vector>

#include "gbsde/core.hpp"
#include "gbsde/expectation.hpp"
#include "gbsde/pde.hpp"

namespace gbsde {

/// (Y, Z, K) along one path, plus the raw K increments.
struct PathTriple {
    std::vector<double> y, z, k;
    std::vector<double> dk;  // dk[j] = K[j+1] - K[j]
    std::vector<double> a;   // uxx + 2g at each step, the argument of G
    int clamped = 0;         // nodes where B left the space domain
};

MarkovSurfaces solve_markovian(const Payoff& payoff, const Generator& gen, const VolatilityBand& band,
                               const Grids& grids);

/// Y = u(t_k, B_k), Z = ux(t_k, B_k) and
///   K[k+1] - K[k] = dt * (a r_k / 2 - G(a)),  a = uxx + 2 g(t_k, Y_k, Z_k),
/// with r_k the path's variance rate clamped into the band, so every increment is <= 0.
void extract_triple(const MarkovSurfaces& surfaces, const Path& path, const Generator& gen,
                    const VolatilityBand& band, PathTriple& out);
std::vector<PathTriple> extract_triples(const MarkovSurfaces& surfaces, const PathBundle& bundle,
                                        const Generator& gen);

/// B clamped to the space domain, as used for Y.
double clamp_to_domain(double b, const Grids& grids) noexcept;
double terminal_value(const Payoff& payoff, const Path& path, const Grids& grids);

/// max_k |Y_k - [xi + sum_{j>=k} (f_j dt + g_j dqv_j - Z_j dB_j) - (K_nt - K_k)]|.
double bsde_residual(const PathTriple& triple, const Path& path, const Grids& grids, const Generator& gen,
                     double xi);

//---------------------------------------------------------------------------//
// Two epochs: xi = psi(B_{t1}, B_T - B_{t1})
//---------------------------------------------------------------------------//

struct TwoEpochProblem {
    double t1 = 0.5;
    std::function<double(double x, double y)> psi;
    Generator gen;
    VolatilityBand band{1.0, 1.0};
    Grids grids{1.0, 1, -1.0, 1.0, 3};
};

/// Frozen-first-increment family on [t1, T] pasted at t1, then one solve on [0, t1].
class TwoEpochSolution {
  public:
    TwoEpochSolution(TwoEpochProblem problem, Grids grids, int k1, std::vector<double> y_t1, MarkovSurfaces early);

    const TwoEpochProblem& problem() const noexcept { return problem_; }
    /// Full time grid with t1 on node k1.
    const Grids& grids() const noexcept { return grids_; }
    int k1() const noexcept { return k1_; }
    /// Space grid over the second increment on [t1, T].
    Grids late_grids() const;
    const std::vector<double>& y_t1() const noexcept { return y_t1_; }
    const MarkovSurfaces& early() const noexcept { return early_; }
    double y0() const { return early_.u.at_origin(0); }

    /// Family member frozen at x_i, solved on demand. A few recent members are cached, so
    /// callers should visit paths grouped by member_index.
    std::shared_ptr<const MarkovSurfaces> member(int i) const;
    /// Nearest frozen node to x: the indicator partition with pitch dx.
    int member_index(double x) const noexcept;

  private:
    TwoEpochProblem problem_;
    Grids grids_;
    int k1_;
    std::vector<double> y_t1_;
    MarkovSurfaces early_;
    mutable std::mutex mutex_;
    mutable std::vector<std::pair<int, std::shared_ptr<const MarkovSurfaces>>> cache_;
};

/// Smallest nt' >= nt for which t1 is a time node.
Grids align_time_node(const Grids& grids, double t1);

TwoEpochSolution solve_two_epoch(const TwoEpochProblem& problem);

void extract_two_epoch_triple(const TwoEpochSolution& solution, const Path& path, PathTriple& out);
double two_epoch_terminal(const TwoEpochSolution& solution, const Path& path);

//---------------------------------------------------------------------------//
// Refinement study
//---------------------------------------------------------------------------//

struct ConvergenceRow {
    int level = 0;
    int nx = 0, nt = 0;
    double y0 = 0.0;
    double abs_err = 0.0;       // against the finest level
    double max_residual = 0.0;  // over the sampled paths
    double order = 0.0;         // NaN where undefined
};

using ControlFactory = std::function<Control(const Grids&, std::shared_ptr<const MarkovSurfaces>)>;

/// Levels 0..levels-1 of uniform refinement from `grids`; residuals over n_paths paths of the
/// control the factory builds for each level.
std::vector<ConvergenceRow> convergence_table(const Payoff& payoff, const Generator& gen,
                                              const VolatilityBand& band, const Grids& grids, int levels,
                                              const ControlFactory& control, int n_paths, std::uint64_t seed);

}  // namespace gbsde
