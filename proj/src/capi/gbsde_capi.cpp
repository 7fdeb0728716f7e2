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
#include "gbsde/gbsde.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbsde/bsde.hpp"
#include "gbsde/expr.hpp"
#include "gbsde/verify.hpp"

using namespace gbsde;

struct gbsde_expression {
    expr::Expression e;
};

struct gbsde_problem {
    VolatilityBand band;
    Grids grids;
    std::optional<Payoff> payoff;
    Generator gen;
};

struct gbsde_solution {
    std::shared_ptr<const MarkovSurfaces> surfaces;
    Payoff payoff;
    Generator gen;
    VolatilityBand band;
};

struct gbsde_paths {
    PathBundle bundle;
};

struct gbsde_two_epoch {
    std::unique_ptr<TwoEpochSolution> solution;
};

struct gbsde_reports {
    std::vector<VerifyReport> reports;
};

namespace {

thread_local std::string last_error;

template <class Fn>
gbsde_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return GBSDE_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return static_cast<gbsde_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return GBSDE_BUDGET;
    } catch (const std::exception& e) {
        last_error = e.what();
        return GBSDE_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return GBSDE_INTERNAL;
    }
}

void need(const void* ptr, const char* what) {
    if (!ptr) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

using ExprPtr = std::shared_ptr<const expr::Expression>;

ExprPtr parse_limited(const char* src, std::initializer_list<expr::Var> allowed, const char* role) {
    need(src, role);
    auto e = std::make_shared<const expr::Expression>(expr::Expression::parse(src));
    static constexpr const char* names[] = {"t", "x", "y", "z"};
    for (auto v : {expr::Var::T, expr::Var::X, expr::Var::Y, expr::Var::Z}) {
        if (!e->uses(v)) continue;
        bool ok = false;
        for (auto a : allowed) ok = ok || a == v;
        if (!ok)
            fail(ErrorCode::InvalidArgument,
                 std::string(role) + " '" + src + "' may not use variable " + names[static_cast<int>(v)]);
    }
    return e;
}

bool blank(const char* s) { return !s || std::string_view(s).find_first_not_of(" \t") == std::string_view::npos; }

gbsde_status copy_out(const std::string& text, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = text.size() + 1;
    if (buf && cap > 0) {
        const size_t n = std::min(cap - 1, text.size());
        std::memcpy(buf, text.data(), n);
        buf[n] = '\0';
    }
    if (buf && cap < text.size() + 1) {
        last_error = "buffer too small";
        return GBSDE_INVALID_ARGUMENT;
    }
    return GBSDE_OK;
}

const Payoff& payoff_of(const gbsde_problem* p) {
    if (!p->payoff) fail(ErrorCode::InvalidArgument, "problem has no payoff");
    return *p->payoff;
}

IncrementPayoff increment_payoff(int m, const double* times, const char* phi) {
    require(m >= 1 && m <= 3, ErrorCode::InvalidArgument, "m must lie in [1, 3]");
    need(times, "times");
    auto e = parse_limited(phi, {expr::Var::X, expr::Var::Y, expr::Var::Z}, "increment payoff");
    return IncrementPayoff(std::vector<double>(times, times + m),
                           [e](std::span<const double> d) {
                               return e->eval(0.0, d[0], d.size() > 1 ? d[1] : 0.0, d.size() > 2 ? d[2] : 0.0);
                           },
                           phi);
}

double number(std::string_view s, const std::string& spec) {
    const std::string text(s);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
        fail(ErrorCode::InvalidArgument, "bad number '" + text + "' in control '" + spec + "'");
    return v;
}

Control make_control(const std::string& spec, const Grids& grids, const VolatilityBand& band, std::uint64_t seed,
                     std::shared_ptr<const MarkovSurfaces> surfaces, const Generator& gen) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "constant")
        return Control::open_loop(VolControl::constant(number(arg, spec), grids.nt(), band), spec);
    if (kind == "random") {
        const int i = static_cast<int>(number(arg, spec));
        require(i >= 0 && i == number(arg, spec), ErrorCode::InvalidArgument, "random control index must be >= 0");
        return random_controls(i + 1, seed, band, grids)[i];
    }
    if (kind == "piecewise") {
        std::vector<double> breaks, vols;
        std::string_view rest(arg);
        while (!rest.empty()) {
            const auto semi = rest.find(';');
            const auto item = rest.substr(0, semi);
            const auto eq = item.find('=');
            require(eq != std::string_view::npos, ErrorCode::InvalidArgument,
                    "piecewise control items look like t=h: '" + spec + "'");
            breaks.push_back(number(item.substr(0, eq), spec));
            vols.push_back(number(item.substr(eq + 1), spec));
            rest = semi == std::string_view::npos ? std::string_view() : rest.substr(semi + 1);
        }
        return Control::open_loop(VolControl::piecewise(breaks, vols, grids, band), spec);
    }
    if (kind == "bang_bang") {
        require(surfaces != nullptr, ErrorCode::InvalidArgument, "bang_bang control needs a solution");
        require(surfaces->u.grids() == grids, ErrorCode::Mismatch, "solution and problem grids differ");
        return bang_bang(std::move(surfaces), gen, band);
    }
    fail(ErrorCode::InvalidArgument,
         "unknown control '" + spec + "' (expected constant:h, random:i, piecewise:t=h;..., bang_bang)");
}

void fill_triple(const PathTriple& tr, double residual, double* y, double* z, double* k, double* res,
                 int* clamped) {
    if (y) std::copy(tr.y.begin(), tr.y.end(), y);
    if (z) std::copy(tr.z.begin(), tr.z.end(), z);
    if (k) std::copy(tr.k.begin(), tr.k.end(), k);
    if (res) *res = residual;
    if (clamped) *clamped = tr.clamped;
}

void copy_slice(std::span<const double> src, double* dst, size_t cap) {
    need(dst, "values");
    require(cap >= src.size(), ErrorCode::InvalidArgument, "output buffer too small");
    std::copy(src.begin(), src.end(), dst);
}

}  // namespace

extern "C" {

const char* gbsde_version(void) { return "0.1.0"; }

const char* gbsde_last_error(void) { return last_error.c_str(); }

const char* gbsde_status_name(gbsde_status status) {
    switch (status) {
        case GBSDE_OK: return "ok";
        case GBSDE_INVALID_ARGUMENT: return "invalid_argument";
        case GBSDE_DOMAIN: return "domain";
        case GBSDE_CFL: return "cfl";
        case GBSDE_NUMERICAL: return "numerical";
        case GBSDE_PARSE: return "parse";
        case GBSDE_BUDGET: return "budget";
        case GBSDE_IO: return "io";
        case GBSDE_MISMATCH: return "mismatch";
        case GBSDE_INTERNAL: return "internal";
    }
    return "unknown";
}

gbsde_status gbsde_g_function(double a, double sigma_lo, double sigma_hi, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = g_function(a, VolatilityBand(sigma_lo, sigma_hi));
    });
}

gbsde_status gbsde_song_constant(double alpha, double delta, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = song_constant(alpha, delta);
    });
}

gbsde_status gbsde_expression_parse(const char* source, gbsde_expression** out) {
    return guarded([&] {
        need(source, "source");
        need(out, "out");
        *out = new gbsde_expression{expr::Expression::parse(source)};
    });
}

gbsde_status gbsde_expression_eval(const gbsde_expression* e, double t, double x, double y, double z, double* out) {
    return guarded([&] {
        need(e, "expression");
        need(out, "out");
        *out = e->e.eval(t, x, y, z);
    });
}

gbsde_status gbsde_expression_print(const gbsde_expression* e, char* buf, size_t cap, size_t* needed) {
    std::string text;
    const gbsde_status st = guarded([&] {
        need(e, "expression");
        text = e->e.print();
    });
    return st == GBSDE_OK ? copy_out(text, buf, cap, needed) : st;
}

gbsde_status gbsde_expression_dump(const gbsde_expression* e, char* buf, size_t cap, size_t* needed) {
    std::string text;
    const gbsde_status st = guarded([&] {
        need(e, "expression");
        text = e->e.dump();
    });
    return st == GBSDE_OK ? copy_out(text, buf, cap, needed) : st;
}

void gbsde_expression_free(gbsde_expression* e) { delete e; }

gbsde_status gbsde_problem_create(double sigma_lo, double sigma_hi, double horizon, int nx, int nt,
                                  double width_mult, gbsde_problem** out) {
    return guarded([&] {
        need(out, "out");
        const VolatilityBand band(sigma_lo, sigma_hi);
        require(nt >= 0, ErrorCode::InvalidArgument, "nt must be >= 0");
        Grids g = Grids::reference(band, horizon, nx, width_mult);
        if (nt > 0) g = g.with_nt(nt);
        *out = new gbsde_problem{band, g, std::nullopt, Generator::zero()};
    });
}

void gbsde_problem_free(gbsde_problem* p) { delete p; }

gbsde_status gbsde_problem_set_payoff(gbsde_problem* p, const char* kind, double p1, double p2) {
    return guarded([&] {
        need(p, "problem");
        need(kind, "kind");
        const std::string k(kind);
        if (k == "linear") p->payoff = Payoff::linear(p1, p2);
        else if (k == "square") p->payoff = Payoff::square(p1);
        else if (k == "call") p->payoff = Payoff::call(p1);
        else if (k == "put") p->payoff = Payoff::put(p1);
        else if (k == "butterfly") p->payoff = Payoff::butterfly(p1, p2);
        else fail(ErrorCode::InvalidArgument, "unknown payoff kind '" + k + "'");
    });
}

gbsde_status gbsde_problem_set_payoff_expr(gbsde_problem* p, const char* expr_text, double lipschitz) {
    return guarded([&] {
        need(p, "problem");
        auto e = parse_limited(expr_text, {expr::Var::X}, "payoff");
        p->payoff = Payoff(PayoffKind::Expression, [e](double x) { return e->eval(0.0, x, 0.0, 0.0); }, lipschitz,
                           std::nullopt, expr_text);
    });
}

gbsde_status gbsde_problem_set_generator(gbsde_problem* p, const char* f_expr, const char* g_expr, double lipschitz,
                                         double sup_abs) {
    return guarded([&] {
        need(p, "problem");
        Generator::Fn f, g;
        std::string desc;
        const auto vars = {expr::Var::T, expr::Var::Y, expr::Var::Z};
        if (!blank(f_expr)) {
            auto e = parse_limited(f_expr, vars, "generator f");
            if (!(e->is_constant() && e->eval(0, 0, 0, 0) == 0.0))
                f = [e](double t, double y, double z) { return e->eval(t, 0.0, y, z); };
            desc += std::string("f=") + f_expr;
        }
        if (!blank(g_expr)) {
            auto e = parse_limited(g_expr, vars, "generator g");
            if (!(e->is_constant() && e->eval(0, 0, 0, 0) == 0.0))
                g = [e](double t, double y, double z) { return e->eval(t, 0.0, y, z); };
            desc += std::string(desc.empty() ? "" : " ") + "g=" + g_expr;
        }
        std::optional<double> sup;
        if (sup_abs >= 0.0) sup = sup_abs;
        p->gen = Generator(f, g, lipschitz, sup, desc);
    });
}

gbsde_status gbsde_problem_align_time(gbsde_problem* p, double t) {
    return guarded([&] {
        need(p, "problem");
        p->grids = align_time_node(p->grids, t);
    });
}

gbsde_status gbsde_problem_grid(const gbsde_problem* p, int* nx, int* nt, double* x_lo, double* x_hi,
                                double* horizon) {
    return guarded([&] {
        need(p, "problem");
        if (nx) *nx = p->grids.nx();
        if (nt) *nt = p->grids.nt();
        if (x_lo) *x_lo = p->grids.x_lo();
        if (x_hi) *x_hi = p->grids.x_hi();
        if (horizon) *horizon = p->grids.horizon();
    });
}

gbsde_status gbsde_problem_refine(gbsde_problem* p) {
    return guarded([&] {
        need(p, "problem");
        p->grids = p->grids.refined();
    });
}

gbsde_status gbsde_problem_payoff(const gbsde_problem* p, double x, double* out) {
    return guarded([&] {
        need(p, "problem");
        need(out, "out");
        *out = payoff_of(p)(x);
    });
}

gbsde_status gbsde_problem_observed_lipschitz(const gbsde_problem* p, double* payoff_slope,
                                              double* generator_slope) {
    return guarded([&] {
        need(p, "problem");
        if (payoff_slope) *payoff_slope = observed_lipschitz(payoff_of(p), p->grids);
        if (generator_slope) *generator_slope = observed_lipschitz(p->gen, p->grids, 10.0, 10.0);
    });
}

gbsde_status gbsde_solve(const gbsde_problem* p, gbsde_solution** out) {
    return guarded([&] {
        need(p, "problem");
        need(out, "out");
        auto s = std::make_shared<const MarkovSurfaces>(solve_markovian(payoff_of(p), p->gen, p->band, p->grids));
        *out = new gbsde_solution{std::move(s), payoff_of(p), p->gen, p->band};
    });
}

void gbsde_solution_free(gbsde_solution* s) { delete s; }

gbsde_status gbsde_solution_y0(const gbsde_solution* s, double* out) {
    return guarded([&] {
        need(s, "solution");
        need(out, "out");
        *out = s->surfaces->u.at_origin(0);
    });
}

gbsde_status gbsde_solution_node(const gbsde_solution* s, int k, int j, double* u, double* ux, double* uxx) {
    return guarded([&] {
        need(s, "solution");
        const Grids& g = s->surfaces->u.grids();
        require(k >= 0 && k <= g.nt() && j >= 0 && j < g.nx(), ErrorCode::InvalidArgument, "node out of range");
        if (u) *u = s->surfaces->u(k, j);
        if (ux) *ux = s->surfaces->ux(k, j);
        if (uxx) *uxx = s->surfaces->uxx(k, j);
    });
}

gbsde_status gbsde_solution_interpolate(const gbsde_solution* s, int k, double x, double* u) {
    return guarded([&] {
        need(s, "solution");
        need(u, "u");
        require(k >= 0 && k <= s->surfaces->u.grids().nt(), ErrorCode::InvalidArgument, "time node out of range");
        *u = s->surfaces->u.interpolate(k, x);
    });
}

gbsde_status gbsde_g_expectation(const gbsde_problem* p, int m, const double* times, const char* phi, double* out) {
    return guarded([&] {
        need(p, "problem");
        need(out, "out");
        *out = g_expectation(increment_payoff(m, times, phi), p->band, p->grids);
    });
}

gbsde_status gbsde_conditional_g_expectation(const gbsde_problem* p, int m, const double* times, const char* phi,
                                             int i, double* values, size_t cap, size_t* count) {
    return guarded([&] {
        need(p, "problem");
        const TensorTable t = conditional_g_expectation(increment_payoff(m, times, phi), i, p->band, p->grids);
        if (count) *count = t.values().size();
        copy_slice(t.values(), values, cap);
    });
}

gbsde_status gbsde_paths_simulate(const gbsde_problem* p, const gbsde_solution* s, const char* control, int n_paths,
                                  uint64_t seed, gbsde_paths** out) {
    return guarded([&] {
        need(p, "problem");
        need(control, "control");
        need(out, "out");
        Control c = make_control(control, p->grids, p->band, seed, s ? s->surfaces : nullptr, p->gen);
        *out = new gbsde_paths{simulate_paths(std::move(c), n_paths, seed, p->grids, p->band)};
    });
}

void gbsde_paths_free(gbsde_paths* paths) { delete paths; }

gbsde_status gbsde_paths_info(const gbsde_paths* paths, int* n_paths, int* nt) {
    return guarded([&] {
        need(paths, "paths");
        if (n_paths) *n_paths = paths->bundle.size();
        if (nt) *nt = paths->bundle.grids().nt();
    });
}

gbsde_status gbsde_paths_get(const gbsde_paths* paths, int path, double* b, double* qv, double* rate) {
    return guarded([&] {
        need(paths, "paths");
        const Path pth = paths->bundle.path(path);
        if (b) std::copy(pth.b.begin(), pth.b.end(), b);
        if (qv) std::copy(pth.qv.begin(), pth.qv.end(), qv);
        if (rate) std::copy(pth.rate.begin(), pth.rate.end(), rate);
    });
}

gbsde_status gbsde_mc_bound(const gbsde_problem* p, const gbsde_paths* paths, double* mean, double* stderr_out) {
    return guarded([&] {
        need(p, "problem");
        need(paths, "paths");
        const auto& b = paths->bundle;
        const McEstimate e =
            mc_bound(IncrementPayoff::terminal(payoff_of(p), b.grids().horizon()), b.control(), b);
        if (mean) *mean = e.mean;
        if (stderr_out) *stderr_out = e.stderr_;
    });
}

gbsde_status gbsde_triple(const gbsde_solution* s, const gbsde_paths* paths, int path, double* y, double* z,
                          double* k, double* residual, int* clamped) {
    return guarded([&] {
        need(s, "solution");
        need(paths, "paths");
        const Grids& g = s->surfaces->u.grids();
        require(paths->bundle.grids() == g, ErrorCode::Mismatch, "paths and solution use different grids");
        const Path pth = paths->bundle.path(path);
        PathTriple tr;
        extract_triple(*s->surfaces, pth, s->gen, s->band, tr);
        const double r = bsde_residual(tr, pth, g, s->gen, terminal_value(s->payoff, pth, g));
        fill_triple(tr, r, y, z, k, residual, clamped);
    });
}

gbsde_status gbsde_two_epoch_solve(const gbsde_problem* p, double t1, const char* psi, gbsde_two_epoch** out) {
    return guarded([&] {
        need(p, "problem");
        need(out, "out");
        auto e = parse_limited(psi, {expr::Var::X, expr::Var::Y}, "psi");
        TwoEpochProblem pb{t1, [e](double x, double y) { return e->eval(0.0, x, y, 0.0); }, p->gen, p->band,
                           p->grids};
        std::unique_ptr<TwoEpochSolution> sol(new TwoEpochSolution(solve_two_epoch(pb)));
        *out = new gbsde_two_epoch{std::move(sol)};
    });
}

void gbsde_two_epoch_free(gbsde_two_epoch* te) { delete te; }

gbsde_status gbsde_two_epoch_info(const gbsde_two_epoch* te, double* y0, int* nt, int* k1) {
    return guarded([&] {
        need(te, "two-epoch solution");
        if (y0) *y0 = te->solution->y0();
        if (nt) *nt = te->solution->grids().nt();
        if (k1) *k1 = te->solution->k1();
    });
}

gbsde_status gbsde_two_epoch_y_t1(const gbsde_two_epoch* te, double* values, size_t cap) {
    return guarded([&] {
        need(te, "two-epoch solution");
        copy_slice(te->solution->y_t1(), values, cap);
    });
}

gbsde_status gbsde_two_epoch_member_slice(const gbsde_two_epoch* te, int i, int k, double* values, size_t cap) {
    return guarded([&] {
        need(te, "two-epoch solution");
        const auto m = te->solution->member(i);
        require(k >= 0 && k <= m->u.grids().nt(), ErrorCode::InvalidArgument, "time level out of range");
        copy_slice(m->u.slice(k), values, cap);
    });
}

gbsde_status gbsde_two_epoch_early_slice(const gbsde_two_epoch* te, int k, double* values, size_t cap) {
    return guarded([&] {
        need(te, "two-epoch solution");
        const auto& u = te->solution->early().u;
        require(k >= 0 && k <= u.grids().nt(), ErrorCode::InvalidArgument, "time level out of range");
        copy_slice(u.slice(k), values, cap);
    });
}

gbsde_status gbsde_two_epoch_triple(const gbsde_two_epoch* te, const gbsde_paths* paths, int path, double* y,
                                    double* z, double* k, double* residual, int* clamped) {
    return guarded([&] {
        need(te, "two-epoch solution");
        need(paths, "paths");
        const auto& sol = *te->solution;
        require(paths->bundle.grids() == sol.grids(), ErrorCode::Mismatch,
                "paths were not simulated on the two-epoch grid; align the problem at t1 first");
        const Path pth = paths->bundle.path(path);
        PathTriple tr;
        extract_two_epoch_triple(sol, pth, tr);
        const double r = bsde_residual(tr, pth, sol.grids(), sol.problem().gen, two_epoch_terminal(sol, pth));
        fill_triple(tr, r, y, z, k, residual, clamped);
    });
}

void gbsde_verify_options_init(gbsde_verify_options* o) {
    if (!o) return;
    const VerifyConfig d;
    o->alpha = d.alpha;
    o->eps = d.eps;
    o->lw = std::nan("");
    o->kappa_steps = d.kappa_steps;
    o->n_controls = d.n_controls;
    o->n_paths = d.n_paths;
    o->seed = d.seed;
    o->grid_tolerance = d.grid_tolerance;
    o->perturbation = nullptr;
    o->payoff_perturbation = nullptr;
}

gbsde_status gbsde_verify(const gbsde_problem* p, const gbsde_verify_options* o, const char* names,
                          gbsde_reports** out) {
    return guarded([&] {
        need(p, "problem");
        need(names, "names");
        need(out, "out");
        gbsde_verify_options opts;
        gbsde_verify_options_init(&opts);
        if (o) opts = *o;
        VerifyConfig cfg;
        cfg.alpha = opts.alpha;
        cfg.eps = opts.eps;
        if (!std::isnan(opts.lw)) cfg.lw = opts.lw;
        cfg.kappa_steps = opts.kappa_steps;
        cfg.n_controls = opts.n_controls;
        cfg.n_paths = opts.n_paths;
        cfg.seed = opts.seed;
        cfg.grid_tolerance = opts.grid_tolerance;
        if (!blank(opts.perturbation)) {
            auto e = parse_limited(opts.perturbation, {expr::Var::T, expr::Var::Y, expr::Var::Z}, "perturbation");
            cfg.perturbation = [e](double t, double y, double z) { return e->eval(t, 0.0, y, z); };
        }
        if (!blank(opts.payoff_perturbation)) {
            auto e = parse_limited(opts.payoff_perturbation, {expr::Var::X}, "payoff perturbation");
            cfg.payoff_perturbation = [e](double x) { return e->eval(0.0, x, 0.0, 0.0); };
        }
        std::vector<std::string> list;
        std::string_view rest(names);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            std::string item(rest.substr(0, comma));
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) list.push_back(item);
            rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
        }
        require(!list.empty(), ErrorCode::InvalidArgument, "no checks requested");
        const VerifyContext ctx(VerifyProblem{payoff_of(p), p->gen, p->band, p->grids}, cfg);
        *out = new gbsde_reports{run_checks(list, ctx)};
    });
}

void gbsde_reports_free(gbsde_reports* r) { delete r; }

size_t gbsde_reports_count(const gbsde_reports* r) { return r ? r->reports.size() : 0; }

gbsde_status gbsde_reports_get(const gbsde_reports* r, size_t i, const char** name, int* pass, double* measured,
                               double* bound, double* tolerance) {
    return guarded([&] {
        need(r, "reports");
        require(i < r->reports.size(), ErrorCode::InvalidArgument, "report index out of range");
        const auto& rep = r->reports[i];
        if (name) *name = rep.name.c_str();
        if (pass) *pass = rep.pass ? 1 : 0;
        if (measured) *measured = rep.measured;
        if (bound) *bound = rep.bound;
        if (tolerance) *tolerance = rep.tolerance;
    });
}

gbsde_status gbsde_reports_grid(const gbsde_reports* r, size_t i, int* nx, int* nt, double* horizon, double* dx,
                                double* dt) {
    return guarded([&] {
        need(r, "reports");
        require(i < r->reports.size(), ErrorCode::InvalidArgument, "report index out of range");
        const auto& rep = r->reports[i];
        if (nx) *nx = rep.nx;
        if (nt) *nt = rep.nt;
        if (horizon) *horizon = rep.horizon;
        if (dx) *dx = rep.dx;
        if (dt) *dt = rep.dt;
    });
}

size_t gbsde_reports_detail_count(const gbsde_reports* r, size_t i) {
    return r && i < r->reports.size() ? r->reports[i].details.size() : 0;
}

gbsde_status gbsde_reports_detail(const gbsde_reports* r, size_t i, size_t j, const char** key, double* value) {
    return guarded([&] {
        need(r, "reports");
        require(i < r->reports.size() && j < r->reports[i].details.size(), ErrorCode::InvalidArgument,
                "detail index out of range");
        const auto& d = r->reports[i].details[j];
        if (key) *key = d.first.c_str();
        if (value) *value = d.second;
    });
}

gbsde_status gbsde_convergence(const gbsde_problem* p, int levels, const char* control, int n_paths, uint64_t seed,
                               gbsde_convergence_row* rows, size_t cap, size_t* count) {
    return guarded([&] {
        need(p, "problem");
        need(control, "control");
        const std::string spec(control);
        const auto& gen = p->gen;
        const auto& band = p->band;
        const auto table = convergence_table(
            payoff_of(p), gen, band, p->grids, levels,
            [&](const Grids& g, std::shared_ptr<const MarkovSurfaces> s) {
                return make_control(spec, g, band, seed, std::move(s), gen);
            },
            n_paths, seed);
        if (count) *count = table.size();
        need(rows, "rows");
        require(cap >= table.size(), ErrorCode::InvalidArgument, "row buffer too small");
        for (size_t i = 0; i < table.size(); ++i) {
            const auto& t = table[i];
            rows[i] = gbsde_convergence_row{t.level, t.nx, t.nt, t.y0, t.abs_err, t.max_residual, t.order};
        }
    });
}

}  // extern "C"
