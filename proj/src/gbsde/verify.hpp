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

// Numerical checks on the solution triple. Every report passes iff its measured value is
// finite and at most bound + tolerance.

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbsde/bsde.hpp"

namespace gbsde {

struct VerifyReport {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    int nx = 0, nt = 0;
    double horizon = 0.0, dx = 0.0, dt = 0.0;
    std::vector<std::pair<std::string, double>> details;

    void finalize();
    double detail(const std::string& key) const;
};

struct VerifyProblem {
    Payoff payoff;
    Generator gen;
    VolatilityBand band;
    Grids grids;
};

struct VerifyConfig {
    double alpha = 1.5;
    double eps = 0.0;
    std::optional<double> lw;  // defaults to the generator's Lipschitz constant
    int kappa_steps = 4;
    int n_controls = 32;
    int n_paths = 2000;
    std::uint64_t seed = 1;
    double grid_tolerance = 5e-3;
    double lipschitz_tolerance = 0.05;
    int lipschitz_random_pairs = 200000;
    /// Generator perturbation f1 - f2 for the stability check, scaled by 1, 1/2, 1/4.
    Generator::Fn perturbation;
    /// Optional terminal perturbation, scaled the same way.
    std::function<double(double)> payoff_perturbation;
};

/// Solution surfaces shared by several checks.
class VerifyContext {
  public:
    VerifyContext(VerifyProblem problem, VerifyConfig config);

    const VerifyProblem& problem() const noexcept { return problem_; }
    const VerifyConfig& config() const noexcept { return config_; }
    std::shared_ptr<const MarkovSurfaces> surfaces() const;
    /// Random family plus the two constant endpoint controls.
    std::vector<Control> control_family() const;
    Control bang_bang_control() const;

  private:
    VerifyProblem problem_;
    VerifyConfig config_;
    mutable std::mutex mutex_;
    mutable std::shared_ptr<const MarkovSurfaces> surfaces_;
};

VerifyReport check_decreasing(const VerifyContext& ctx);
VerifyReport check_martingale_K(const VerifyContext& ctx);

/// max |u(t,x) - u(s,y)| / (sqrt|t-s| + |x-y|) over adjacent, time-lag and random node pairs
/// against L1 = max(Lh, Lh sigma_hi + Lt sqrt(T)), Lh = L_phi exp(L_h T).
VerifyReport check_lipschitz(const ValueSurface& u, double l_phi, double l_h, double sup_h,
                             const VolatilityBand& band, double relative_tolerance = 0.05,
                             int random_pairs = 200000, std::uint64_t seed = 1);
VerifyReport check_lipschitz(const VerifyContext& ctx);

VerifyReport check_estimate_Y(const VerifyContext& ctx);
VerifyReport check_estimate_ZK(const VerifyContext& ctx);
VerifyReport check_stability(const VerifyContext& ctx);
VerifyReport check_lemma34(const VerifyContext& ctx);

/// Check names accepted by run_checks, in report order.
const std::vector<std::string>& check_names();
/// Runs the named checks ("all" expands to every check); reports sorted by name.
std::vector<VerifyReport> run_checks(const std::vector<std::string>& names, const VerifyContext& ctx);

}  // namespace gbsde
