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
#include "gbsde/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gbsde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

//---------------------------------------------------------------------------//
VolatilityBand::VolatilityBand(double sigma_lo, double sigma_hi)
    : lo_(sigma_lo), hi_(sigma_hi), lo2_(sigma_lo * sigma_lo), hi2_(sigma_hi * sigma_hi) {
    require(std::isfinite(sigma_lo) && std::isfinite(sigma_hi), ErrorCode::InvalidArgument,
            "volatility band must be finite");
    require(sigma_lo > 0.0 && sigma_lo <= sigma_hi, ErrorCode::InvalidArgument,
            "volatility band requires 0 < sigma_lo <= sigma_hi, got (" + fmt(sigma_lo) + ", " + fmt(sigma_hi) + ")");
}

//---------------------------------------------------------------------------//
// Explicit constant of the G-evaluation estimate
//---------------------------------------------------------------------------//
namespace {

constexpr int kSeriesTerms = 1'000'000;

const std::vector<double>& log_table() {
    static const std::vector<double> table = [] {
        std::vector<double> v(kSeriesTerms + 1);
        for (int i = 1; i <= kSeriesTerms; ++i) v[i] = std::log(static_cast<double>(i));
        return v;
    }();
    return table;
}

// sum_{i>=1} i^{-s} for s > 1, truncated at N with the integral tail N^{1-s}/(s-1).
double zeta_upper(double s) {
    const auto& logs = log_table();
    double sum = 0.0;
    for (int i = kSeriesTerms; i >= 1; --i) sum += std::exp(-s * logs[i]);
    return sum + std::exp((1.0 - s) * logs[kSeriesTerms]) / (s - 1.0);
}

double song_objective(double gamma, double beta) {
    return 2.0 * gamma / (gamma - 1.0) * (1.0 + 14.0 * zeta_upper(beta / gamma));
}

}  // namespace

double song_constant(double alpha, double delta) {
    require(std::isfinite(alpha) && alpha >= 1.0, ErrorCode::Domain, "song_constant requires alpha >= 1");
    require(std::isfinite(delta) && delta > 0.0, ErrorCode::Domain, "song_constant requires delta > 0");
    const double beta = (alpha + delta) / alpha;
    // gamma ranges over (1, beta) capped at 2; the cap is attainable, beta is not.
    const bool capped = beta > 2.0;
    const double upper = capped ? 2.0 : beta;
    const double width = upper - 1.0;

    const int cells = 20;
    const double step = width / cells;
    std::vector<double> gammas;
    for (int i = 1; i < cells; ++i) gammas.push_back(1.0 + step * i);
    if (capped) gammas.push_back(2.0);

    std::size_t best = 0;
    std::vector<double> values(gammas.size());
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        values[i] = song_objective(gammas[i], beta);
        if (values[i] < values[best]) best = i;
    }

    // Golden-section refinement on the bracket around the best grid point.
    double a = best == 0 ? 1.0 + 1e-3 * step : gammas[best - 1];
    double b = best + 1 < gammas.size() ? gammas[best + 1] : (capped ? 2.0 : upper - 1e-3 * step);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = song_objective(c, beta), fd = song_objective(d, beta);
    for (int it = 0; it < 30; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = song_objective(c, beta);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = song_objective(d, beta);
        }
    }
    return std::min({values[best], fc, fd});
}

//---------------------------------------------------------------------------//
// Grids
//---------------------------------------------------------------------------//
Grids::Grids(double horizon, int nt, double x_lo, double x_hi, int nx, double t_start)
    : t0_(t_start), horizon_(horizon), nt_(nt), x_lo_(x_lo), x_hi_(x_hi), nx_(nx) {
    require(std::isfinite(horizon) && std::isfinite(t_start) && horizon > t_start, ErrorCode::InvalidArgument,
            "grid horizon must exceed its start time");
    require(nt >= 1, ErrorCode::InvalidArgument, "grid needs nt >= 1");
    require(nx >= 3, ErrorCode::InvalidArgument, "grid needs nx >= 3");
    require(std::isfinite(x_lo) && std::isfinite(x_hi) && x_lo < 0.0 && 0.0 < x_hi, ErrorCode::InvalidArgument,
            "grid needs x_lo < 0 < x_hi");
    dt_ = (horizon_ - t0_) / nt_;
    dx_ = (x_hi_ - x_lo_) / (nx_ - 1);
}

Grids Grids::reference(const VolatilityBand& band, double horizon, int nx, double width_mult) {
    require(width_mult > 0.0 && std::isfinite(width_mult), ErrorCode::InvalidArgument, "width_mult must be positive");
    require(horizon > 0.0 && std::isfinite(horizon), ErrorCode::InvalidArgument, "horizon must be positive");
    const double half = width_mult * band.hi() * std::sqrt(horizon);
    Grids probe(horizon, 1, -half, half, nx);
    const double dx = probe.dx();
    int nt = static_cast<int>(std::ceil(2.0 * band.hi2() * horizon / (dx * dx) - 1e-9));
    nt = std::max(nt, 1);
    Grids g(horizon, nt, -half, half, nx);
    while (g.cfl_ratio(band) > 0.5) g = g.with_nt(g.nt() + 1);
    return g;
}

Grids Grids::refined() const { return Grids(horizon_, nt_ * 4, x_lo_, x_hi_, 2 * (nx_ - 1) + 1, t0_); }

Grids Grids::epoch(double a, double b) const {
    require(b > a, ErrorCode::InvalidArgument, "epoch end must exceed its start");
    int n = static_cast<int>(std::ceil((b - a) / dt_ - 1e-9));
    return Grids(b, std::max(n, 1), x_lo_, x_hi_, nx_, a);
}

Grids Grids::with_nt(int nt) const { return Grids(horizon_, nt, x_lo_, x_hi_, nx_, t0_); }

double Grids::t(int k) const noexcept {
    if (k == nt_) return horizon_;
    return t0_ + (horizon_ - t0_) * static_cast<double>(k) / nt_;
}

// Convex combination so that symmetric domains with odd nx hit 0 exactly at the centre.
double Grids::x(int j) const noexcept {
    const double n = nx_ - 1;
    return (x_lo_ * (n - j) + x_hi_ * j) / n;
}

int Grids::time_index(double t) const noexcept {
    const double pos = (t - t0_) / dt_;
    const long k = std::lround(pos);
    if (k < 0 || k > nt_) return -1;
    if (std::abs(this->t(static_cast<int>(k)) - t) > 1e-9 * std::max(1.0, std::abs(horizon_))) return -1;
    return static_cast<int>(k);
}

void Grids::check_cfl(const VolatilityBand& band) const {
    const double ratio = cfl_ratio(band);
    require(ratio <= 0.5 * (1.0 + 1e-12), ErrorCode::Cfl,
            "CFL violation: sigma_hi^2 dt / dx^2 = " + fmt(ratio) + " exceeds 1/2 (nt = " + std::to_string(nt_) +
                ", nx = " + std::to_string(nx_) + ")");
}

//---------------------------------------------------------------------------//
// Payoff
//---------------------------------------------------------------------------//
const char* to_string(PayoffKind kind) noexcept {
    switch (kind) {
        case PayoffKind::Linear: return "linear";
        case PayoffKind::Square: return "square";
        case PayoffKind::Call: return "call";
        case PayoffKind::Put: return "put";
        case PayoffKind::Butterfly: return "butterfly";
        case PayoffKind::Tabulated: return "tabulated";
        case PayoffKind::Expression: return "expression";
    }
    return "unknown";
}

Payoff::Payoff(PayoffKind kind, std::function<double(double)> fn, double lipschitz, std::optional<double> bound,
               std::string description)
    : kind_(kind), fn_(std::move(fn)), lipschitz_(lipschitz), bound_(bound), description_(std::move(description)) {
    require(static_cast<bool>(fn_), ErrorCode::InvalidArgument, "payoff needs a function");
    require(lipschitz >= 0.0 && !std::isnan(lipschitz), ErrorCode::InvalidArgument,
            "payoff Lipschitz constant must be >= 0");
}

Payoff Payoff::linear(double a, double b) {
    return Payoff(PayoffKind::Linear, [a, b](double x) { return a * x + b; }, std::abs(a),
                  a == 0.0 ? std::optional<double>(std::abs(b)) : std::nullopt,
                  "linear(" + fmt(a) + ", " + fmt(b) + ")");
}

Payoff Payoff::square(double s) {
    Payoff p(PayoffKind::Square, [s](double x) { return s * x * x; }, s == 0.0 ? 0.0 : kInf,
             s == 0.0 ? std::optional<double>(0.0) : std::nullopt, "square(" + fmt(s) + ")");
    p.square_coeff_ = s;
    return p;
}

Payoff Payoff::call(double strike) {
    return Payoff(PayoffKind::Call, [strike](double x) { return x > strike ? x - strike : 0.0; }, 1.0, std::nullopt,
                  "call(" + fmt(strike) + ")");
}

Payoff Payoff::put(double strike) {
    return Payoff(PayoffKind::Put, [strike](double x) { return x < strike ? strike - x : 0.0; }, 1.0, std::nullopt,
                  "put(" + fmt(strike) + ")");
}

Payoff Payoff::butterfly(double center, double half_width) {
    require(half_width > 0.0, ErrorCode::InvalidArgument, "butterfly half width must be positive");
    auto pos = [](double v) { return v > 0.0 ? v : 0.0; };
    return Payoff(
        PayoffKind::Butterfly,
        [=](double x) { return pos(x - center + half_width) - 2.0 * pos(x - center) + pos(x - center - half_width); },
        1.0, half_width, "butterfly(" + fmt(center) + ", " + fmt(half_width) + ")");
}

Payoff Payoff::tabulated(std::vector<double> xs, std::vector<double> ys) {
    require(xs.size() >= 2 && xs.size() == ys.size(), ErrorCode::InvalidArgument,
            "tabulated payoff needs at least two (x, y) pairs");
    double lip = 0.0, bound = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(std::isfinite(xs[i]) && std::isfinite(ys[i]), ErrorCode::InvalidArgument,
                "tabulated payoff values must be finite");
        bound = std::max(bound, std::abs(ys[i]));
        if (i > 0) {
            require(xs[i] > xs[i - 1], ErrorCode::InvalidArgument, "tabulated payoff abscissae must increase");
            lip = std::max(lip, std::abs(ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
        }
    }
    auto fn = [xs = std::move(xs), ys = std::move(ys)](double x) {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
        const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] + w * (ys[i + 1] - ys[i]);
    };
    return Payoff(PayoffKind::Tabulated, std::move(fn), lip, bound, "tabulated");
}

double Payoff::realized_lipschitz(double x_lo, double x_hi) const {
    if (kind_ == PayoffKind::Square) return 2.0 * std::abs(square_coeff_) * std::max(std::abs(x_lo), std::abs(x_hi));
    if (std::isfinite(lipschitz_)) return lipschitz_;
    // Undeclared: largest chord slope on a fine sample of the interval.
    const int n = 8192;
    const double h = (x_hi - x_lo) / n;
    double worst = 0.0, prev = fn_(x_lo);
    for (int j = 1; j <= n; ++j) {
        const double cur = fn_(x_lo + j * h);
        worst = std::max(worst, std::abs(cur - prev) / h);
        prev = cur;
    }
    return worst;
}

//---------------------------------------------------------------------------//
// Generator
//---------------------------------------------------------------------------//
Generator::Generator(Fn f, Fn g, double lipschitz, std::optional<double> sup_abs, std::string description)
    : f_(std::move(f)), g_(std::move(g)), lipschitz_(lipschitz), sup_abs_(sup_abs),
      description_(std::move(description)) {
    require(lipschitz >= 0.0 && std::isfinite(lipschitz), ErrorCode::InvalidArgument,
            "generator Lipschitz constant must be finite and >= 0");
}

Generator Generator::zero() { return Generator({}, {}, 0.0, 0.0, "zero"); }

Generator Generator::constant(double c) {
    return Generator([c](double, double, double) { return c; }, {}, 0.0, std::abs(c), "constant(" + fmt(c) + ")");
}

double Generator::f0_bound(double t) const { return std::abs(f(t, 0.0, 0.0)); }

Generator Generator::blend(const Generator& other, double s) const {
    auto mix = [s](const Fn& a, const Fn& b) -> Fn {
        if (!a && !b) return {};
        return [s, a, b](double t, double y, double z) {
            const double va = a ? a(t, y, z) : 0.0;
            const double vb = b ? b(t, y, z) : 0.0;
            return va + s * (vb - va);
        };
    };
    std::optional<double> sup;
    if (sup_abs_ && other.sup_abs_) sup = std::abs(1.0 - s) * *sup_abs_ + std::abs(s) * *other.sup_abs_;
    const double lip = std::abs(1.0 - s) * lipschitz_ + std::abs(s) * other.lipschitz_;
    return Generator(mix(f_, other.f_), mix(g_, other.g_), lip, sup, "blend(" + fmt(s) + ")");
}

//---------------------------------------------------------------------------//
double observed_lipschitz(const Payoff& payoff, const Grids& grids) {
    double worst = 0.0;
    double prev = payoff(grids.x(0));
    for (int j = 1; j < grids.nx(); ++j) {
        const double cur = payoff(grids.x(j));
        worst = std::max(worst, std::abs(cur - prev) / grids.dx());
        prev = cur;
    }
    return worst;
}

double observed_lipschitz(const Generator& gen, const Grids& grids, double y_range, double z_range) {
    const int n = 41;
    double worst = 0.0;
    const double hy = 2.0 * y_range / (n - 1), hz = 2.0 * z_range / (n - 1);
    for (int k = 0; k <= 4; ++k) {
        const double t = grids.t(k * grids.nt() / 4);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                const double y = -y_range + a * hy, z = -z_range + b * hz;
                for (auto fn : {&Generator::f, &Generator::g}) {
                    const double base = (gen.*fn)(t, y, z);
                    if (a + 1 < n) worst = std::max(worst, std::abs((gen.*fn)(t, y + hy, z) - base) / hy);
                    if (b + 1 < n) worst = std::max(worst, std::abs((gen.*fn)(t, y, z + hz) - base) / hz);
                }
            }
        }
    }
    return worst;
}

}  // namespace gbsde
