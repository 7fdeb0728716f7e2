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

// Sublinear expectation of functionals of finitely many increments: the lattice route
// (nested G-heat solves) and the dual Monte Carlo route over volatility controls.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbsde/core.hpp"
#include "gbsde/pde.hpp"

namespace gbsde {

/// phi(B_{t1} - B_{t0}, ..., B_{tm} - B_{t(m-1)}) with 0 = t0 < t1 < ... < tm.
class IncrementPayoff {
  public:
    using Fn = std::function<double(std::span<const double> increments)>;

    /// `times` lists t1..tm; t0 = 0 is implicit.
    IncrementPayoff(std::vector<double> times, Fn phi, std::string description = {});
    static IncrementPayoff terminal(const Payoff& payoff, double horizon);

    int increments() const noexcept { return static_cast<int>(times_.size()) - 1; }
    /// t0..tm including the leading zero.
    const std::vector<double>& times() const noexcept { return times_; }
    double operator()(std::span<const double> increments) const { return phi_(increments); }
    const std::string& description() const noexcept { return description_; }

  private:
    std::vector<double> times_;
    Fn phi_;
    std::string description_;
};

/// Values on the tensor product of the space grid with itself, `dims` times.
class TensorTable {
  public:
    TensorTable(Grids axis, int dims, std::vector<double> values);

    int dims() const noexcept { return dims_; }
    const Grids& axis() const noexcept { return axis_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double scalar() const;
    double at(std::span<const int> index) const;
    /// Multilinear interpolation; coordinates outside the domain are clamped.
    double interpolate(std::span<const double> x) const;

  private:
    Grids axis_;
    int dims_;
    std::vector<double> values_;
};

/// Largest number of scheme node updates a lattice evaluation may spend.
inline constexpr double kDefaultLatticeBudget = 4.0e9;

/// Conditional expectation given the first i increments, tabulated on the space grid.
TensorTable conditional_g_expectation(const IncrementPayoff& payoff, int i, const VolatilityBand& band,
                                      const Grids& grids, double budget = kDefaultLatticeBudget);
double g_expectation(const IncrementPayoff& payoff, const VolatilityBand& band, const Grids& grids,
                     double budget = kDefaultLatticeBudget);

//---------------------------------------------------------------------------//
// Volatility controls
//---------------------------------------------------------------------------//

/// Open-loop volatility per time step, h_k applied on [t_k, t_{k+1}).
class VolControl {
  public:
    VolControl(std::vector<double> vols, const VolatilityBand& band);
    static VolControl constant(double vol, int nt, const VolatilityBand& band);
    /// Piecewise constant in time: vols[i] on [breaks[i], breaks[i+1]); breaks[0] = t_start.
    static VolControl piecewise(std::span<const double> breaks, std::span<const double> vols, const Grids& grids,
                                const VolatilityBand& band);

    const std::vector<double>& vols() const noexcept { return vols_; }
    std::size_t size() const noexcept { return vols_.size(); }
    friend bool operator==(const VolControl&, const VolControl&) = default;

  private:
    std::vector<double> vols_;
};

/// A representing measure: open-loop volatilities or a Markov feedback rule giving the
/// variance rate h^2 from (k, t_k, B_k).
class Control {
  public:
    using Feedback = std::function<double(int k, double t, double b)>;

    static Control open_loop(VolControl vols, std::string label = "open_loop");
    static Control feedback(Feedback rate, std::string label);

    bool is_open_loop() const noexcept { return open_.has_value(); }
    const VolControl& vols() const;
    const std::string& label() const noexcept { return label_; }

    /// Variance rate h^2 on step k given the current state, clamped to the band.
    double rate(int k, double t, double b, const VolatilityBand& band) const;

    friend bool operator==(const Control& a, const Control& b);

  private:
    std::optional<VolControl> open_;
    Feedback rate_;
    std::string label_;
};

/// Count open-loop controls, piecewise constant in time with 1..max_pieces pieces. Half of
/// them take only the band endpoints, the rest uniform values in the band.
std::vector<Control> random_controls(int count, std::uint64_t seed, const VolatilityBand& band, const Grids& grids,
                                     int max_pieces = 8);

/// Curvature-adapted bang-bang control: h^2 = gamma_argmax(uxx + 2 g) at (t_k, B_k).
Control bang_bang(std::shared_ptr<const MarkovSurfaces> surfaces, const Generator& gen, const VolatilityBand& band);

//---------------------------------------------------------------------------//
// Paths
//---------------------------------------------------------------------------//

struct Path {
    std::vector<double> b;     // B at nodes 0..nt
    std::vector<double> qv;    // <B> at nodes 0..nt
    std::vector<double> rate;  // variance rate h_k^2 on each step
};

/// Simulated paths under one control. Paths are generated on demand from keyed normals
/// N(seed, path, step), so any single path is reproducible in isolation.
class PathBundle {
  public:
    PathBundle(Control control, int n_paths, std::uint64_t seed, Grids grids, VolatilityBand band);

    int size() const noexcept { return n_paths_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const Grids& grids() const noexcept { return grids_; }
    const VolatilityBand& band() const noexcept { return band_; }
    const Control& control() const noexcept { return control_; }

    Path path(int p) const;
    void path(int p, Path& out) const;

  private:
    Control control_;
    int n_paths_;
    std::uint64_t seed_;
    Grids grids_;
    VolatilityBand band_;
};

PathBundle simulate_paths(Control control, int n_paths, std::uint64_t seed, const Grids& grids,
                          const VolatilityBand& band);

/// Standard normal panel entry for (seed, path, step).
double panel_normal(std::uint64_t seed, int path, int step);

/// Builds the path of `control` from precomputed normals; qv is accumulated from the
/// start of each constant-rate run so a constant control gives qv = h^2 t exactly.
void build_path(const Control& control, std::span<const double> normals, const Grids& grids,
                const VolatilityBand& band, Path& out);

/// Visits every (path, control) pair with common random numbers: the normal panel of a
/// path is generated once and re-scaled by each control.
/// `visit` may run concurrently for different paths and must write to per-path slots.
void for_each_path(std::span<const Control> controls, int n_paths, std::uint64_t seed, const Grids& grids,
                   const VolatilityBand& band, const std::function<void(int path, int control, const Path&)>& visit);

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int n = 0;
};
McEstimate summarize(std::span<const double> samples);

/// Evaluates an increment payoff on one path; the payoff times must be time nodes.
double evaluate_on_path(const IncrementPayoff& payoff, const Path& path, const Grids& grids);

/// Sample mean and standard error of the payoff under the bundle's measure.
McEstimate mc_bound(const IncrementPayoff& payoff, const Control& control, const PathBundle& bundle);

struct SupResult {
    int best = 0;
    McEstimate best_estimate;
    std::vector<McEstimate> estimates;
};

/// Best mc_bound over the candidates, all driven by the same normal panel.
SupResult sup_over_controls(const IncrementPayoff& payoff, std::span<const Control> candidates, int n_paths,
                            std::uint64_t seed, const Grids& grids, const VolatilityBand& band);

}  // namespace gbsde
