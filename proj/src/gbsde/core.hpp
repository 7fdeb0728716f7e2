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
#include <optional>
#include <string>
#include <vector>

#include "gbsde/error.hpp"

namespace gbsde {

/// Volatility uncertainty interval [sigma_lo, sigma_hi] defining the G function.
class VolatilityBand {
  public:
    VolatilityBand(double sigma_lo, double sigma_hi);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double lo2() const noexcept { return lo2_; }
    double hi2() const noexcept { return hi2_; }
    bool degenerate() const noexcept { return lo_ == hi_; }

    friend bool operator==(const VolatilityBand&, const VolatilityBand&) = default;

  private:
    double lo_, hi_, lo2_, hi2_;
};

/// G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-) / 2.
inline double g_function(double a, const VolatilityBand& band) noexcept {
    const double pos = a > 0.0 ? a : 0.0;
    const double neg = a < 0.0 ? -a : 0.0;
    return 0.5 * (band.hi2() * pos - band.lo2() * neg);
}

/// Squared volatility attaining sup over [lo^2, hi^2] of gamma*a/2. Ties (a = 0) go to hi^2.
inline double gamma_argmax(double a, const VolatilityBand& band) noexcept {
    return a < 0.0 ? band.lo2() : band.hi2();
}

/// The explicit constant 2 inf_gamma gamma/(gamma-1) (1 + 14 sum_i i^{-beta/gamma}),
/// beta = (alpha + delta)/alpha, over 1 < gamma < beta, gamma <= 2.
///
/// The series is truncated at i = 10^6 and closed with the integral tail bound, so
/// every evaluated term is an upper bound of the exact one. The infimum is located on
/// a 0.01-spaced gamma grid and then refined by golden-section search inside the best
/// bracket.
double song_constant(double alpha, double delta);

/// Uniform space-time grid on [t_start, horizon] x [x_lo, x_hi].
class Grids {
  public:
    Grids(double horizon, int nt, double x_lo, double x_hi, int nx, double t_start = 0.0);

    /// Symmetric domain +-width_mult * sigma_hi * sqrt(T); nt is the smallest count with
    /// sigma_hi^2 dt / dx^2 <= 1/2.
    static Grids reference(const VolatilityBand& band, double horizon, int nx, double width_mult = 6.0);

    /// Same domain, space step halved, time step quartered.
    Grids refined() const;
    /// Same space grid over [a, b] with the smallest node count keeping dt <= this->dt().
    Grids epoch(double a, double b) const;
    Grids with_nt(int nt) const;

    double t_start() const noexcept { return t0_; }
    double horizon() const noexcept { return horizon_; }
    int nt() const noexcept { return nt_; }
    int nx() const noexcept { return nx_; }
    double x_lo() const noexcept { return x_lo_; }
    double x_hi() const noexcept { return x_hi_; }
    double dt() const noexcept { return dt_; }
    double dx() const noexcept { return dx_; }
    double t(int k) const noexcept;
    double x(int j) const noexcept;
    /// Index of the time node equal to t, or -1 when t is not a node.
    int time_index(double t) const noexcept;

    double cfl_ratio(const VolatilityBand& band) const noexcept { return band.hi2() * dt_ / (dx_ * dx_); }
    void check_cfl(const VolatilityBand& band) const;

    friend bool operator==(const Grids& a, const Grids& b) {
        return a.t0_ == b.t0_ && a.horizon_ == b.horizon_ && a.nt_ == b.nt_ && a.x_lo_ == b.x_lo_ &&
               a.x_hi_ == b.x_hi_ && a.nx_ == b.nx_;
    }

  private:
    double t0_, horizon_;
    int nt_;
    double x_lo_, x_hi_;
    int nx_;
    double dt_, dx_;
};

enum class PayoffKind { Linear, Square, Call, Put, Butterfly, Tabulated, Expression };

const char* to_string(PayoffKind kind) noexcept;

/// Terminal function phi of one variable with its Lipschitz metadata.
class Payoff {
  public:
    Payoff(PayoffKind kind, std::function<double(double)> fn, double lipschitz,
           std::optional<double> bound = std::nullopt, std::string description = {});

    static Payoff linear(double a, double b);
    static Payoff square(double s);
    static Payoff call(double strike);
    static Payoff put(double strike);
    /// (x - c + w)^+ - 2 (x - c)^+ + (x - c - w)^+
    static Payoff butterfly(double center, double half_width);
    /// Piecewise linear through (xs, ys), flat outside [xs.front(), xs.back()].
    static Payoff tabulated(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const { return fn_(x); }

    PayoffKind kind() const noexcept { return kind_; }
    /// Declared global constant; infinite for unbounded-slope kinds such as square.
    double lipschitz() const noexcept { return lipschitz_; }
    /// Lipschitz constant on [x_lo, x_hi]; sampled when the declared one is infinite.
    double realized_lipschitz(double x_lo, double x_hi) const;
    const std::optional<double>& bound() const noexcept { return bound_; }
    const std::string& description() const noexcept { return description_; }

  private:
    PayoffKind kind_;
    std::function<double(double)> fn_;
    double lipschitz_;
    std::optional<double> bound_;
    std::string description_;
    double square_coeff_ = 0.0;
};

/// Driver (f, g) of the backward equation, both Lipschitz in (y, z).
class Generator {
  public:
    using Fn = std::function<double(double t, double y, double z)>;

    Generator() = default;
    Generator(Fn f, Fn g, double lipschitz, std::optional<double> sup_abs = std::nullopt,
              std::string description = {});

    static Generator zero();
    static Generator constant(double c);

    double f(double t, double y, double z) const { return f_ ? f_(t, y, z) : 0.0; }
    double g(double t, double y, double z) const { return g_ ? g_(t, y, z) : 0.0; }
    bool has_f() const noexcept { return static_cast<bool>(f_); }
    bool has_g() const noexcept { return static_cast<bool>(g_); }

    double lipschitz() const noexcept { return lipschitz_; }
    /// sup |f| over (t, y, z) when known; used for the time-regularity constant.
    const std::optional<double>& sup_abs() const noexcept { return sup_abs_; }
    double f0_bound(double t) const;
    const std::string& description() const noexcept { return description_; }

    /// f_self + s * (f_other - f_self), same for g.
    Generator blend(const Generator& other, double s) const;

  private:
    Fn f_, g_;
    double lipschitz_ = 0.0;
    std::optional<double> sup_abs_;
    std::string description_;
};

/// Largest |phi(x_i) - phi(x_j)| / |x_i - x_j| over adjacent grid nodes.
double observed_lipschitz(const Payoff& payoff, const Grids& grids);

/// Largest difference quotient of f (and g) in y and z over a sample box.
double observed_lipschitz(const Generator& gen, const Grids& grids, double y_range, double z_range);

}  // namespace gbsde
