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
#include "gbsde/expectation.hpp"

#include <algorithm>
#include <cmath>

#include "gbsde/parallel.hpp"
#include "gbsde/rng.hpp"

namespace gbsde {

IncrementPayoff::IncrementPayoff(std::vector<double> times, Fn phi, std::string description)
    : phi_(std::move(phi)), description_(std::move(description)) {
    require(!times.empty() && times.size() <= 3, ErrorCode::InvalidArgument,
            "increment payoff needs between 1 and 3 observation times");
    require(static_cast<bool>(phi_), ErrorCode::InvalidArgument, "increment payoff needs a function");
    times_.reserve(times.size() + 1);
    times_.push_back(0.0);
    for (double t : times) {
        require(std::isfinite(t) && t > times_.back(), ErrorCode::InvalidArgument,
                "observation times must be positive and strictly increasing");
        times_.push_back(t);
    }
}

IncrementPayoff IncrementPayoff::terminal(const Payoff& payoff, double horizon) {
    return IncrementPayoff({horizon}, [payoff](std::span<const double> d) { return payoff(d[0]); },
                           payoff.description());
}

//---------------------------------------------------------------------------//
// Tensor tables
//---------------------------------------------------------------------------//

namespace {

std::size_t ipow(std::size_t base, int e) {
    std::size_t r = 1;
    while (e-- > 0) r *= base;
    return r;
}

double value_at_origin(std::span<const double> slice, const Grids& grids) {
    const GridLocation loc = locate(grids, 0.0);
    if (loc.weight == 0.0) return slice[loc.cell];
    if (loc.weight == 1.0) return slice[loc.cell + 1];
    return slice[loc.cell] + loc.weight * (slice[loc.cell + 1] - slice[loc.cell]);
}

}  // namespace

TensorTable::TensorTable(Grids axis, int dims, std::vector<double> values)
    : axis_(axis), dims_(dims), values_(std::move(values)) {
    require(dims >= 0 && dims <= 3, ErrorCode::InvalidArgument, "tensor table supports 0 to 3 dimensions");
    require(values_.size() == ipow(axis_.nx(), dims), ErrorCode::InvalidArgument,
            "tensor table size does not match its axis");
}

double TensorTable::scalar() const {
    require(dims_ == 0, ErrorCode::InvalidArgument, "table is not a scalar");
    return values_[0];
}

double TensorTable::at(std::span<const int> index) const {
    require(static_cast<int>(index.size()) == dims_, ErrorCode::InvalidArgument, "index rank mismatch");
    std::size_t flat = 0;
    for (int i : index) {
        require(i >= 0 && i < axis_.nx(), ErrorCode::InvalidArgument, "table index out of range");
        flat = flat * axis_.nx() + i;
    }
    return values_[flat];
}

double TensorTable::interpolate(std::span<const double> x) const {
    require(static_cast<int>(x.size()) == dims_, ErrorCode::InvalidArgument, "coordinate rank mismatch");
    if (dims_ == 0) return values_[0];
    std::array<GridLocation, 3> loc{};
    for (int d = 0; d < dims_; ++d) loc[d] = locate(axis_, x[d]);
    const std::size_t n = axis_.nx();
    double sum = 0.0;
    for (int corner = 0; corner < (1 << dims_); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int d = 0; d < dims_; ++d) {
            const bool right = (corner >> (dims_ - 1 - d)) & 1;
            w *= right ? loc[d].weight : 1.0 - loc[d].weight;
            flat = flat * n + loc[d].cell + (right ? 1 : 0);
        }
        if (w != 0.0) sum += w * values_[flat];
    }
    return sum;
}

//---------------------------------------------------------------------------//
// Lattice expectation
//---------------------------------------------------------------------------//

TensorTable conditional_g_expectation(const IncrementPayoff& payoff, int i, const VolatilityBand& band,
                                      const Grids& grids, double budget) {
    const int m = payoff.increments();
    require(i >= 0 && i <= m, ErrorCode::InvalidArgument, "conditioning index must lie in [0, m]");
    const auto& times = payoff.times();
    const int nx = grids.nx();

    std::vector<Grids> epochs;
    double work = 0.0;
    for (int l = 1; l <= m; ++l) {
        epochs.push_back(grids.epoch(times[l - 1], times[l]));
        if (l > i) work += std::pow(static_cast<double>(nx), l) * epochs.back().nt();
    }
    const double cells = std::pow(static_cast<double>(nx), std::max(i, m - 1));
    require(work <= budget && cells <= 5.0e7, ErrorCode::Budget,
            "lattice expectation needs about " + std::to_string(work) + " node updates and " + std::to_string(cells) +
                " stored cells; reduce nx or the number of increments");

    // phi on the tensor grid, generated row by row.
    auto phi_row = [&](std::size_t q, int dims_before, std::span<double> out) {
        std::array<double, 3> inc{};
        std::size_t rest = q;
        for (int d = dims_before - 1; d >= 0; --d) {
            inc[d] = grids.x(static_cast<int>(rest % nx));
            rest /= nx;
        }
        for (int j = 0; j < nx; ++j) {
            inc[dims_before] = grids.x(j);
            out[j] = payoff(std::span<const double>(inc.data(), m));
        }
    };

    if (i == m) {
        std::vector<double> values(ipow(nx, m));
        const std::size_t rows = ipow(nx, m - 1);
        parallel_for(rows, [&](std::size_t q) { phi_row(q, m - 1, {values.data() + q * nx, std::size_t(nx)}); });
        return TensorTable(grids, m, std::move(values));
    }

    std::vector<double> table;
    for (int l = m; l > i; --l) {
        const Grids& epoch = epochs[l - 1];
        const std::size_t rows = ipow(nx, l - 1);
        std::vector<double> next(rows);
        parallel_for(rows, [&](std::size_t q) {
            std::vector<double> row(nx);
            if (l == m)
                phi_row(q, m - 1, row);
            else
                std::copy_n(table.begin() + q * nx, nx, row.begin());
            const auto initial = gheat_initial_slice(row, band, epoch);
            next[q] = value_at_origin(initial, epoch);
        });
        table = std::move(next);
    }
    return TensorTable(grids, i, std::move(table));
}

double g_expectation(const IncrementPayoff& payoff, const VolatilityBand& band, const Grids& grids, double budget) {
    return conditional_g_expectation(payoff, 0, band, grids, budget).scalar();
}

//---------------------------------------------------------------------------//
// Controls
//---------------------------------------------------------------------------//

namespace {

void check_in_band(double h, const VolatilityBand& band) {
    const double tol = 1e-12 * band.hi();
    if (!(std::isfinite(h) && h >= band.lo() - tol && h <= band.hi() + tol))
        fail(ErrorCode::Domain, "volatility " + std::to_string(h) + " lies outside the band [" + std::to_string(band.lo()) + ", " +
                std::to_string(band.hi()) + "]");
}

}  // namespace

VolControl::VolControl(std::vector<double> vols, const VolatilityBand& band) : vols_(std::move(vols)) {
    require(!vols_.empty(), ErrorCode::InvalidArgument, "control needs at least one step");
    for (double& h : vols_) {
        check_in_band(h, band);
        h = std::clamp(h, band.lo(), band.hi());
    }
}

VolControl VolControl::constant(double vol, int nt, const VolatilityBand& band) {
    return VolControl(std::vector<double>(nt, vol), band);
}

VolControl VolControl::piecewise(std::span<const double> breaks, std::span<const double> vols, const Grids& grids,
                                 const VolatilityBand& band) {
    require(!vols.empty() && breaks.size() == vols.size(), ErrorCode::InvalidArgument,
            "piecewise control needs one break per value");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        require(breaks[i] > breaks[i - 1], ErrorCode::InvalidArgument, "control breaks must increase");
    std::vector<double> out(grids.nt());
    std::size_t piece = 0;
    for (int k = 0; k < grids.nt(); ++k) {
        const double t = grids.t(k);
        while (piece + 1 < breaks.size() && t >= breaks[piece + 1]) ++piece;
        out[k] = vols[piece];
    }
    return VolControl(std::move(out), band);
}

Control Control::open_loop(VolControl vols, std::string label) {
    Control c;
    c.open_ = std::move(vols);
    c.label_ = std::move(label);
    return c;
}

Control Control::feedback(Feedback rate, std::string label) {
    require(static_cast<bool>(rate), ErrorCode::InvalidArgument, "feedback control needs a rule");
    Control c;
    c.rate_ = std::move(rate);
    c.label_ = std::move(label);
    return c;
}

const VolControl& Control::vols() const {
    if (!open_) fail(ErrorCode::InvalidArgument, "control '" + label_ + "' is a feedback rule");
    return *open_;
}

double Control::rate(int k, double t, double b, const VolatilityBand& band) const {
    if (open_) {
        const double h = open_->vols()[k];
        return h * h;
    }
    const double r = rate_(k, t, b);
    if (!std::isfinite(r)) fail(ErrorCode::Numerical, "feedback control '" + label_ + "' returned a non-finite rate");
    return std::clamp(r, band.lo2(), band.hi2());
}

bool operator==(const Control& a, const Control& b) {
    if (a.label_ != b.label_ || a.open_.has_value() != b.open_.has_value()) return false;
    return !a.open_ || *a.open_ == *b.open_;
}

std::vector<Control> random_controls(int count, std::uint64_t seed, const VolatilityBand& band, const Grids& grids,
                                     int max_pieces) {
    require(count >= 0 && max_pieces >= 1, ErrorCode::InvalidArgument, "invalid random control request");
    const CounterRng rng(seed ^ 0x5bd1e9955bd1e995ull);
    std::vector<Control> out;
    out.reserve(count);
    for (int c = 0; c < count; ++c) {
        const auto key = rng.key(static_cast<std::uint64_t>(c));
        std::uint64_t ctr = 0;
        const int pieces = 1 + static_cast<int>(CounterRng::uniform(key, ctr++) * max_pieces);
        const bool endpoints = CounterRng::uniform(key, ctr++) < 0.5;
        std::vector<double> breaks{grids.t_start()};
        for (int p = 1; p < pieces; ++p)
            breaks.push_back(grids.t_start() + CounterRng::uniform(key, ctr++) * (grids.horizon() - grids.t_start()));
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        std::vector<double> vols;
        for (std::size_t p = 0; p < breaks.size(); ++p) {
            const double u = CounterRng::uniform(key, ctr++);
            vols.push_back(endpoints ? (u < 0.5 ? band.lo() : band.hi()) : band.lo() + u * (band.hi() - band.lo()));
        }
        out.push_back(Control::open_loop(VolControl::piecewise(breaks, vols, grids, band),
                                         "random:" + std::to_string(c)));
    }
    return out;
}

Control bang_bang(std::shared_ptr<const MarkovSurfaces> surfaces, const Generator& gen, const VolatilityBand& band) {
    require(surfaces != nullptr, ErrorCode::InvalidArgument, "bang-bang control needs solution surfaces");
    return Control::feedback(
        [surfaces, gen, band](int k, double t, double b) {
            double a = surfaces->uxx.interpolate(k, b);
            if (gen.has_g()) a += 2.0 * gen.g(t, surfaces->u.interpolate(k, b), surfaces->ux.interpolate(k, b));
            return gamma_argmax(a, band);
        },
        "bang_bang");
}

//---------------------------------------------------------------------------//
// Paths
//---------------------------------------------------------------------------//

double panel_normal(std::uint64_t seed, int path, int step) {
    return CounterRng::normal(CounterRng(seed).key(static_cast<std::uint64_t>(path)), static_cast<std::uint64_t>(step));
}

namespace {

std::vector<double> normal_panel(std::uint64_t seed, int path, int nt) {
    const auto key = CounterRng(seed).key(static_cast<std::uint64_t>(path));
    std::vector<double> z(nt);
    for (int k = 0; k < nt; ++k) z[k] = CounterRng::normal(key, static_cast<std::uint64_t>(k));
    return z;
}

void check_control_length(const Control& control, const Grids& grids) {
    if (control.is_open_loop())
        require(static_cast<int>(control.vols().size()) == grids.nt(), ErrorCode::Mismatch,
                "control '" + control.label() + "' has " + std::to_string(control.vols().size()) +
                    " steps but the grid has " + std::to_string(grids.nt()));
}

}  // namespace

namespace {

std::vector<double> node_times(const Grids& grids) {
    std::vector<double> t(grids.nt() + 1);
    for (int k = 0; k <= grids.nt(); ++k) t[k] = grids.t(k);
    return t;
}

void build(const Control& control, std::span<const double> normals, std::span<const double> times,
           double sqrt_dt, const VolatilityBand& band, Path& out) {
    const int nt = static_cast<int>(times.size()) - 1;
    out.b.assign(nt + 1, 0.0);
    out.qv.assign(nt + 1, 0.0);
    out.rate.assign(nt, 0.0);
    const double* vols = control.is_open_loop() ? control.vols().vols().data() : nullptr;
    double anchor_t = times[0], anchor_qv = 0.0, last_rate = -1.0;
    for (int k = 0; k < nt; ++k) {
        double h, r;
        if (vols) {
            h = vols[k];
            r = h * h;
        } else {
            r = control.rate(k, times[k], out.b[k], band);
            h = std::sqrt(r);
        }
        if (r != last_rate) {
            anchor_t = times[k];
            anchor_qv = out.qv[k];
            last_rate = r;
        }
        out.rate[k] = r;
        out.b[k + 1] = out.b[k] + h * sqrt_dt * normals[k];
        out.qv[k + 1] = anchor_qv + r * (times[k + 1] - anchor_t);
    }
}

}  // namespace

void build_path(const Control& control, std::span<const double> normals, const Grids& grids,
                const VolatilityBand& band, Path& out) {
    require(static_cast<int>(normals.size()) >= grids.nt(), ErrorCode::InvalidArgument, "normal panel is too short");
    check_control_length(control, grids);
    const auto times = node_times(grids);
    build(control, normals, times, std::sqrt(grids.dt()), band, out);
}

PathBundle::PathBundle(Control control, int n_paths, std::uint64_t seed, Grids grids, VolatilityBand band)
    : control_(std::move(control)), n_paths_(n_paths), seed_(seed), grids_(grids), band_(band) {
    require(n_paths >= 1, ErrorCode::InvalidArgument, "need at least one path");
    check_control_length(control_, grids_);
}

void PathBundle::path(int p, Path& out) const {
    require(p >= 0 && p < n_paths_, ErrorCode::InvalidArgument, "path index out of range");
    const auto z = normal_panel(seed_, p, grids_.nt());
    build_path(control_, z, grids_, band_, out);
}

Path PathBundle::path(int p) const {
    Path out;
    path(p, out);
    return out;
}

PathBundle simulate_paths(Control control, int n_paths, std::uint64_t seed, const Grids& grids,
                          const VolatilityBand& band) {
    return PathBundle(std::move(control), n_paths, seed, grids, band);
}

void for_each_path(std::span<const Control> controls, int n_paths, std::uint64_t seed, const Grids& grids,
                   const VolatilityBand& band, const std::function<void(int, int, const Path&)>& visit) {
    for (const auto& c : controls) check_control_length(c, grids);
    const auto times = node_times(grids);
    const double sqrt_dt = std::sqrt(grids.dt());
    parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
        const auto z = normal_panel(seed, static_cast<int>(p), grids.nt());
        Path path;
        for (std::size_t c = 0; c < controls.size(); ++c) {
            build(controls[c], z, times, sqrt_dt, band, path);
            visit(static_cast<int>(p), static_cast<int>(c), path);
        }
    });
}

McEstimate summarize(std::span<const double> samples) {
    McEstimate e;
    e.n = static_cast<int>(samples.size());
    if (e.n == 0) return e;
    double sum = 0.0;
    for (double v : samples) sum += v;
    e.mean = sum / e.n;
    if (e.n > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - e.mean) * (v - e.mean);
        e.stderr_ = std::sqrt(ss / (e.n - 1) / e.n);
    }
    return e;
}

namespace {

std::vector<int> payoff_nodes(const IncrementPayoff& payoff, const Grids& grids) {
    std::vector<int> nodes;
    for (double t : payoff.times()) {
        const int k = grids.time_index(t);
        require(k >= 0, ErrorCode::Mismatch,
                "observation time " + std::to_string(t) + " is not a node of the time grid");
        nodes.push_back(k);
    }
    return nodes;
}

double evaluate_at(const IncrementPayoff& payoff, const std::vector<int>& nodes, const Path& path) {
    std::array<double, 3> inc{};
    for (std::size_t l = 1; l < nodes.size(); ++l) inc[l - 1] = path.b[nodes[l]] - path.b[nodes[l - 1]];
    const double v = payoff(std::span<const double>(inc.data(), nodes.size() - 1));
    if (!std::isfinite(v)) fail(ErrorCode::Numerical, "payoff is not finite on a simulated path");
    return v;
}

}  // namespace

double evaluate_on_path(const IncrementPayoff& payoff, const Path& path, const Grids& grids) {
    return evaluate_at(payoff, payoff_nodes(payoff, grids), path);
}

McEstimate mc_bound(const IncrementPayoff& payoff, const Control& control, const PathBundle& bundle) {
    require(control == bundle.control(), ErrorCode::Mismatch,
            "path bundle was simulated under '" + bundle.control().label() + "', not '" + control.label() + "'");
    const auto nodes = payoff_nodes(payoff, bundle.grids());
    std::vector<double> samples(bundle.size());
    parallel_for(samples.size(), [&](std::size_t p) {
        Path path;
        bundle.path(static_cast<int>(p), path);
        samples[p] = evaluate_at(payoff, nodes, path);
    });
    return summarize(samples);
}

SupResult sup_over_controls(const IncrementPayoff& payoff, std::span<const Control> candidates, int n_paths,
                            std::uint64_t seed, const Grids& grids, const VolatilityBand& band) {
    require(!candidates.empty(), ErrorCode::InvalidArgument, "need at least one candidate control");
    require(n_paths >= 1, ErrorCode::InvalidArgument, "need at least one path");
    const auto nodes = payoff_nodes(payoff, grids);
    const std::size_t nc = candidates.size();
    std::vector<double> samples(nc * n_paths);
    for_each_path(candidates, n_paths, seed, grids, band, [&](int p, int c, const Path& path) {
        samples[static_cast<std::size_t>(c) * n_paths + p] = evaluate_at(payoff, nodes, path);
    });
    SupResult out;
    for (std::size_t c = 0; c < nc; ++c) {
        out.estimates.push_back(summarize({samples.data() + c * n_paths, static_cast<std::size_t>(n_paths)}));
        if (c == 0 || out.estimates[c].mean > out.estimates[out.best].mean) out.best = static_cast<int>(c);
    }
    out.best_estimate = out.estimates[out.best];
    return out;
}

}  // namespace gbsde
