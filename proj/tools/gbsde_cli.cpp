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

// gbsde command-line front end. Talks to the solver only through the C API.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "gbsde/gbsde.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kNumerical = 3 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
    gbsde_status status;
    ApiError(gbsde_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(gbsde_status s, const char* what) {
    if (s != GBSDE_OK)
        throw ApiError(s, std::string(what) + ": " + gbsde_status_name(s) + ": " + gbsde_last_error());
}

int exit_code_for(gbsde_status s) {
    switch (s) {
        case GBSDE_INVALID_ARGUMENT:
        case GBSDE_PARSE:
        case GBSDE_CFL: return kConfig;
        default: return kNumerical;
    }
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// ---- configuration --------------------------------------------------------

enum class Type { Real, Int, Seed, Text };

struct KeySpec {
    const char* key;
    Type type;
    const char* fallback;
};

// Every accepted key with its default; anything else in a config file is rejected.
const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys = {
        {"band.sigma_lo", Type::Real, "0.5"},
        {"band.sigma_hi", Type::Real, "1.0"},
        {"grid.horizon", Type::Real, "1.0"},
        {"grid.nx", Type::Int, "401"},
        {"grid.nt", Type::Int, "0"},
        {"grid.width_mult", Type::Real, "6"},
        {"payoff.kind", Type::Text, "expr"},
        {"payoff.expr", Type::Text, "x^2"},
        {"payoff.lipschitz", Type::Real, "inf"},
        {"payoff.strike", Type::Real, "0"},
        {"payoff.center", Type::Real, "0"},
        {"payoff.half_width", Type::Real, "1"},
        {"payoff.a", Type::Real, "1"},
        {"payoff.b", Type::Real, "0"},
        {"payoff.scale", Type::Real, "1"},
        {"generator.f", Type::Text, "0"},
        {"generator.g", Type::Text, "0"},
        {"generator.lipschitz", Type::Real, "0"},
        {"generator.sup_abs", Type::Real, "-1"},
        {"two_epoch.t1", Type::Real, "0.5"},
        {"two_epoch.psi", Type::Text, "x^2+y^2"},
        {"two_epoch.control", Type::Text, "random:0"},
        {"two_epoch.member_stride", Type::Int, "0"},
        {"expect.times", Type::Text, "1"},
        {"expect.phi", Type::Text, "x^2"},
        {"expect.conditional", Type::Int, "0"},
        {"mc.n_paths", Type::Int, "1000"},
        {"mc.seed", Type::Seed, "1"},
        {"mc.control", Type::Text, "bang_bang"},
        {"mc.export_paths", Type::Int, "8"},
        {"verify.checks", Type::Text, "all"},
        {"verify.alpha", Type::Real, "1.5"},
        {"verify.eps", Type::Real, "0"},
        {"verify.lw", Type::Real, "nan"},
        {"verify.kappa_steps", Type::Int, "4"},
        {"verify.n_controls", Type::Int, "32"},
        {"verify.n_paths", Type::Int, "1000"},
        {"verify.grid_tolerance", Type::Real, "5e-3"},
        {"verify.perturbation", Type::Text, ""},
        {"verify.payoff_perturbation", Type::Text, ""},
        {"convergence.levels", Type::Int, "3"},
        {"convergence.control", Type::Text, "bang_bang"},
        {"convergence.n_paths", Type::Int, "200"},
        {"output.dir", Type::Text, "out"},
        {"output.time_stride", Type::Int, "0"},
    };
    return keys;
}

// Named generators accepted in generator.f / generator.g.
const std::map<std::string, std::string>& generator_catalog() {
    static const std::map<std::string, std::string> c = {
        {"zero", "0"},
        {"tanh_mix", "0.2*tanh(y)+0.1*tanh(z)"},
        {"linear_y", "0.5*y"},
    };
    return c;
}

const KeySpec* find_key(const std::string& key) {
    for (const auto& k : schema())
        if (key == k.key) return &k;
    return nullptr;
}

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r\n"));
    s.erase(s.find_last_not_of(" \t\r\n") + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

class Config {
  public:
    void load_file(const std::string& path) {
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(path, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(std::string("cannot read config: ") + e.what());
        }
        for (const auto& [section, body] : tree) {
            if (body.empty() && !body.data().empty())
                throw ConfigError("key '" + section + "' must live inside a [section]");
            for (const auto& [key, value] : body) set(section + "." + key, value.data());
        }
    }

    void set_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
        set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
    }

    void set(const std::string& key, const std::string& value) {
        const KeySpec* spec = find_key(key);
        if (!spec) throw ConfigError("unknown config key '" + key + "'");
        const std::string v = trim(value);
        validate(*spec, v);
        values_[key] = v;
    }

    std::string text(const std::string& key) const {
        const auto it = values_.find(key);
        if (it != values_.end()) return it->second;
        const KeySpec* spec = find_key(key);
        if (!spec) throw std::logic_error("unregistered key " + key);
        return spec->fallback;
    }
    double real(const std::string& key) const { return std::stod(text(key)); }
    int integer(const std::string& key) const { return std::stoi(text(key)); }
    std::uint64_t seed(const std::string& key) const { return std::stoull(text(key)); }

    json resolved() const {
        json out = json::object();
        for (const auto& k : schema()) {
            const std::string key = k.key;
            const auto dot = key.find('.');
            const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
            switch (k.type) {
                case Type::Real: {
                    const double v = real(key);
                    out[section][name] = std::isfinite(v) ? json(v) : json(fmt(v));
                    break;
                }
                case Type::Int: out[section][name] = integer(key); break;
                case Type::Seed: out[section][name] = seed(key); break;
                case Type::Text: out[section][name] = text(key); break;
            }
        }
        return out;
    }

  private:
    static void validate(const KeySpec& spec, const std::string& v) {
        const auto bad = [&](const char* what) {
            throw ConfigError(std::string("config key '") + spec.key + "' expects " + what + ", got '" + v + "'");
        };
        try {
            std::size_t used = 0;
            switch (spec.type) {
                case Type::Real: std::stod(v, &used); break;
                case Type::Int: std::stoi(v, &used); break;
                case Type::Seed:
                    if (!v.empty() && v[0] == '-') bad("a non-negative integer");
                    std::stoull(v, &used);
                    break;
                case Type::Text: return;
            }
            if (used != v.size()) bad(spec.type == Type::Real ? "a number" : "an integer");
        } catch (const std::invalid_argument&) {
            bad(spec.type == Type::Real ? "a number" : "an integer");
        } catch (const std::out_of_range&) {
            bad("a value in range");
        }
    }

    std::map<std::string, std::string> values_;
};

// ---- C API handles ----------------------------------------------------------

template <class T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(ptr); }
    T** out() { return &ptr; }
    T* get() const { return ptr; }
};
using Problem = Handle<gbsde_problem, gbsde_problem_free>;
using Solution = Handle<gbsde_solution, gbsde_solution_free>;
using Paths = Handle<gbsde_paths, gbsde_paths_free>;
using TwoEpoch = Handle<gbsde_two_epoch, gbsde_two_epoch_free>;
using Reports = Handle<gbsde_reports, gbsde_reports_free>;

struct GridInfo {
    int nx = 0, nt = 0;
    double x_lo = 0, x_hi = 0, horizon = 0;
    double dx() const { return (x_hi - x_lo) / (nx - 1); }
    double dt() const { return horizon / nt; }
    double x(int j) const { return x_lo + j * dx(); }
};

GridInfo grid_of(const gbsde_problem* p) {
    GridInfo g;
    check(gbsde_problem_grid(p, &g.nx, &g.nt, &g.x_lo, &g.x_hi, &g.horizon), "grid");
    return g;
}

std::string generator_expr(const std::string& v) {
    const auto it = generator_catalog().find(v);
    return it == generator_catalog().end() ? v : it->second;
}

void build_problem(const Config& cfg, Problem& p, std::vector<std::string>& warnings) {
    check(gbsde_problem_create(cfg.real("band.sigma_lo"), cfg.real("band.sigma_hi"), cfg.real("grid.horizon"),
                               cfg.integer("grid.nx"), cfg.integer("grid.nt"), cfg.real("grid.width_mult"), p.out()),
          "problem");
    const std::string kind = cfg.text("payoff.kind");
    if (kind == "expr") {
        check(gbsde_problem_set_payoff_expr(p.get(), cfg.text("payoff.expr").c_str(), cfg.real("payoff.lipschitz")),
              "payoff");
    } else {
        double p1 = 0, p2 = 0;
        if (kind == "linear") p1 = cfg.real("payoff.a"), p2 = cfg.real("payoff.b");
        else if (kind == "square") p1 = cfg.real("payoff.scale");
        else if (kind == "call" || kind == "put") p1 = cfg.real("payoff.strike");
        else if (kind == "butterfly") p1 = cfg.real("payoff.center"), p2 = cfg.real("payoff.half_width");
        check(gbsde_problem_set_payoff(p.get(), kind.c_str(), p1, p2), "payoff");
    }
    const std::string f = generator_expr(cfg.text("generator.f"));
    const std::string g = generator_expr(cfg.text("generator.g"));
    check(gbsde_problem_set_generator(p.get(), f.c_str(), g.c_str(), cfg.real("generator.lipschitz"),
                                      cfg.real("generator.sup_abs")),
          "generator");

    double payoff_slope = 0, gen_slope = 0;
    check(gbsde_problem_observed_lipschitz(p.get(), &payoff_slope, &gen_slope), "lipschitz spot-check");
    const double lp = cfg.real("payoff.lipschitz");
    if (kind == "expr" && std::isfinite(lp) && payoff_slope > lp * (1 + 1e-9))
        warnings.push_back("payoff slope " + fmt(payoff_slope) + " on the grid exceeds declared Lipschitz " +
                           fmt(lp));
    const double lg = cfg.real("generator.lipschitz");
    if (gen_slope > lg * (1 + 1e-9))
        warnings.push_back("generator slope " + fmt(gen_slope) + " on the grid exceeds declared Lipschitz " +
                           fmt(lg));
}

// ---- output -----------------------------------------------------------------

class Output {
  public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
    const fs::path& dir() const { return dir_; }

    std::ofstream open(const fs::path& rel) const {
        const fs::path full = dir_ / rel;
        fs::create_directories(full.parent_path());
        std::ofstream out(full, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + full.string());
        return out;
    }

  private:
    fs::path dir_;
};

int time_stride(const Config& cfg, int nt) {
    const int s = cfg.integer("output.time_stride");
    if (s < 0) throw ConfigError("output.time_stride must be >= 0");
    return s > 0 ? s : std::max(1, (nt + 99) / 100);
}

std::vector<int> exported_levels(int nt, int stride) {
    std::vector<int> ks;
    for (int k = 0; k < nt; k += stride) ks.push_back(k);
    ks.push_back(nt);
    return ks;
}

template <class SliceFn>
void write_surface(const Output& out, const fs::path& rel, const GridInfo& g, double t0, int nt, int stride,
                   SliceFn slice) {
    auto f = out.open(rel);
    f << "t,x,u\n";
    std::vector<double> values(g.nx);
    for (int k : exported_levels(nt, stride)) {
        slice(k, values);
        const std::string t = fmt(t0 + k * g.dt());
        for (int j = 0; j < g.nx; ++j) f << t << ',' << fmt(g.x(j)) << ',' << fmt(values[j]) << '\n';
    }
}

struct TripleStats {
    double max_residual = 0.0;
    long clamped = 0;
};

template <class TripleFn>
TripleStats write_triples(const Output& out, const GridInfo& g, int n_export, TripleFn triple) {
    auto f = out.open("triple.csv");
    f << "path,k,t,Y,Z,K\n";
    TripleStats stats;
    std::vector<double> y(g.nt + 1), z(g.nt + 1), k(g.nt + 1);
    for (int p = 0; p < n_export; ++p) {
        double res = 0;
        int clamped = 0;
        triple(p, y.data(), z.data(), k.data(), &res, &clamped);
        stats.max_residual = std::max(stats.max_residual, res);
        stats.clamped += clamped;
        for (int i = 0; i <= g.nt; ++i)
            f << p << ',' << i << ',' << fmt(i * g.dt()) << ',' << fmt(y[i]) << ',' << fmt(z[i]) << ',' << fmt(k[i])
              << '\n';
    }
    return stats;
}

int export_count(const Config& cfg, int n_paths) {
    const int n = cfg.integer("mc.export_paths");
    if (n < 0) throw ConfigError("mc.export_paths must be >= 0");
    return std::min(n, n_paths);
}

bool needs_solution(const std::string& control) { return control.rfind("bang_bang", 0) == 0; }

// ---- subcommands --------------------------------------------------------------

struct Run {
    Run(const Config& c, const Output& o) : cfg(c), out(o) {}
    const Config& cfg;
    const Output& out;
    json results = json::object();
    std::vector<std::string> warnings;
    int exit = kOk;
};

void cmd_solve(Run& run, Problem& p) {
    const GridInfo g = grid_of(p.get());
    Solution s;
    check(gbsde_solve(p.get(), s.out()), "solve");
    double y0 = 0;
    check(gbsde_solution_y0(s.get(), &y0), "y0");
    write_surface(run.out, "surfaces/u.csv", g, 0.0, g.nt, time_stride(run.cfg, g.nt),
                  [&](int k, std::vector<double>& v) {
                      for (int j = 0; j < g.nx; ++j)
                          check(gbsde_solution_node(s.get(), k, j, &v[j], nullptr, nullptr), "node");
                  });
    run.results["y0"] = y0;
    std::cout << "Y0 = " << fmt(y0) << '\n';

    const int n_export = export_count(run.cfg, run.cfg.integer("mc.n_paths"));
    if (n_export > 0) {
        Paths paths;
        check(gbsde_paths_simulate(p.get(), s.get(), run.cfg.text("mc.control").c_str(), n_export,
                                   run.cfg.seed("mc.seed"), paths.out()),
              "paths");
        const TripleStats st = write_triples(run.out, g, n_export, [&](int path, double* y, double* z, double* k,
                                                                       double* r, int* c) {
            check(gbsde_triple(s.get(), paths.get(), path, y, z, k, r, c), "triple");
        });
        run.results["triple_paths"] = n_export;
        run.results["max_residual"] = st.max_residual;
        run.results["clamped_nodes"] = st.clamped;
        if (st.clamped > 0) run.warnings.push_back(std::to_string(st.clamped) + " path nodes left the space domain");
    }
}

void cmd_two_epoch(Run& run, Problem& p) {
    const double t1 = run.cfg.real("two_epoch.t1");
    check(gbsde_problem_align_time(p.get(), t1), "align");
    const GridInfo g = grid_of(p.get());
    TwoEpoch te;
    check(gbsde_two_epoch_solve(p.get(), t1, run.cfg.text("two_epoch.psi").c_str(), te.out()), "two-epoch");
    double y0 = 0;
    int nt = 0, k1 = 0;
    check(gbsde_two_epoch_info(te.get(), &y0, &nt, &k1), "two-epoch info");
    const int stride = time_stride(run.cfg, nt);

    write_surface(run.out, "surfaces/early.csv", g, 0.0, k1, stride, [&](int k, std::vector<double>& v) {
        check(gbsde_two_epoch_early_slice(te.get(), k, v.data(), v.size()), "early slice");
    });
    {
        std::vector<double> yt1(g.nx);
        check(gbsde_two_epoch_y_t1(te.get(), yt1.data(), yt1.size()), "y_t1");
        auto f = run.out.open("surfaces/y_t1.csv");
        f << "x,u\n";
        for (int j = 0; j < g.nx; ++j) f << fmt(g.x(j)) << ',' << fmt(yt1[j]) << '\n';
    }

    int member_stride = run.cfg.integer("two_epoch.member_stride");
    if (member_stride < 0) throw ConfigError("two_epoch.member_stride must be >= 0");
    if (member_stride == 0) member_stride = std::max(1, (g.nx - 1) / 8);
    const double t1_node = k1 * g.dt();
    json members = json::array();
    for (int i = 0; i < g.nx; i += member_stride) {
        const std::string file = "member_" + std::to_string(i) + ".csv";
        write_surface(run.out, fs::path("surfaces/members") / file, g, t1_node, nt - k1, stride,
                      [&](int k, std::vector<double>& v) {
                          check(gbsde_two_epoch_member_slice(te.get(), i, k, v.data(), v.size()), "member slice");
                      });
        members.push_back(json{{"index", i}, {"x", g.x(i)}, {"file", file}});
    }
    {
        auto f = run.out.open("surfaces/members/manifest.json");
        f << json{{"t1", t1_node}, {"horizon", g.horizon}, {"time_stride", stride}, {"members", members}}.dump(2)
          << '\n';
    }

    run.results["y0"] = y0;
    run.results["k1"] = k1;
    run.results["nt"] = nt;
    std::cout << "Y0 = " << fmt(y0) << '\n';

    const int n_export = export_count(run.cfg, run.cfg.integer("mc.n_paths"));
    if (n_export > 0) {
        Paths paths;
        check(gbsde_paths_simulate(p.get(), nullptr, run.cfg.text("two_epoch.control").c_str(), n_export,
                                   run.cfg.seed("mc.seed"), paths.out()),
              "paths");
        const TripleStats st = write_triples(run.out, g, n_export, [&](int path, double* y, double* z, double* k,
                                                                       double* r, int* c) {
            check(gbsde_two_epoch_triple(te.get(), paths.get(), path, y, z, k, r, c), "triple");
        });
        run.results["max_residual"] = st.max_residual;
        run.results["clamped_nodes"] = st.clamped;
    }
}

std::vector<double> parse_times(const std::string& text) {
    std::vector<double> times;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size()) throw ConfigError("expect.times: bad time '" + item + "'");
        times.push_back(v);
    }
    if (times.empty()) throw ConfigError("expect.times is empty");
    return times;
}

void cmd_expect(Run& run, Problem& p) {
    const auto times = parse_times(run.cfg.text("expect.times"));
    const std::string phi = run.cfg.text("expect.phi");
    const int m = static_cast<int>(times.size());
    double v = 0;
    check(gbsde_g_expectation(p.get(), m, times.data(), phi.c_str(), &v), "g-expectation");
    run.results["value"] = v;
    std::cout << "E[phi] = " << fmt(v) << '\n';

    const int i = run.cfg.integer("expect.conditional");
    if (i <= 0) return;
    size_t count = 0;
    std::vector<double> table;
    const gbsde_status st =
        gbsde_conditional_g_expectation(p.get(), m, times.data(), phi.c_str(), i, nullptr, 0, &count);
    if (st != GBSDE_INVALID_ARGUMENT || count == 0) check(st, "conditional g-expectation");
    table.resize(count);
    check(gbsde_conditional_g_expectation(p.get(), m, times.data(), phi.c_str(), i, table.data(), table.size(),
                                          &count),
          "conditional g-expectation");
    const GridInfo g = grid_of(p.get());
    auto f = run.out.open("surfaces/conditional.csv");
    for (int d = 0; d < i; ++d) f << 'x' << d + 1 << ',';
    f << "u\n";
    std::vector<int> idx(i, 0);
    for (size_t c = 0; c < table.size(); ++c) {
        for (int d = 0; d < i; ++d) f << fmt(g.x(idx[d])) << ',';
        f << fmt(table[c]) << '\n';
        for (int d = i - 1; d >= 0; --d) {
            if (++idx[d] < g.nx) break;
            idx[d] = 0;
        }
    }
}

void cmd_simulate(Run& run, Problem& p) {
    const GridInfo g = grid_of(p.get());
    const std::string control = run.cfg.text("mc.control");
    const int n = run.cfg.integer("mc.n_paths");
    Solution s;
    if (needs_solution(control)) check(gbsde_solve(p.get(), s.out()), "solve");
    Paths paths;
    check(gbsde_paths_simulate(p.get(), s.get(), control.c_str(), n, run.cfg.seed("mc.seed"), paths.out()),
          "paths");
    double mean = 0, se = 0;
    check(gbsde_mc_bound(p.get(), paths.get(), &mean, &se), "mc bound");
    run.results["mean"] = mean;
    run.results["stderr"] = se;
    std::cout << "E_P[phi] = " << fmt(mean) << " +- " << fmt(se) << '\n';

    auto f = run.out.open("paths.csv");
    f << "path,k,t,B,qv\n";
    std::vector<double> b(g.nt + 1), qv(g.nt + 1);
    for (int i = 0, n_export = export_count(run.cfg, n); i < n_export; ++i) {
        check(gbsde_paths_get(paths.get(), i, b.data(), qv.data(), nullptr), "path");
        for (int k = 0; k <= g.nt; ++k)
            f << i << ',' << k << ',' << fmt(k * g.dt()) << ',' << fmt(b[k]) << ',' << fmt(qv[k]) << '\n';
    }
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& it : items) s += (s.empty() ? "" : ",") + it;
    return s;
}

void cmd_verify(Run& run, Problem& p, const std::vector<std::string>& positional) {
    gbsde_verify_options o;
    gbsde_verify_options_init(&o);
    o.alpha = run.cfg.real("verify.alpha");
    o.eps = run.cfg.real("verify.eps");
    o.lw = run.cfg.real("verify.lw");
    o.kappa_steps = run.cfg.integer("verify.kappa_steps");
    o.n_controls = run.cfg.integer("verify.n_controls");
    o.n_paths = run.cfg.integer("verify.n_paths");
    o.seed = run.cfg.seed("mc.seed");
    o.grid_tolerance = run.cfg.real("verify.grid_tolerance");
    const std::string pert = generator_expr(run.cfg.text("verify.perturbation"));
    const std::string ppert = run.cfg.text("verify.payoff_perturbation");
    o.perturbation = pert.empty() ? nullptr : pert.c_str();
    o.payoff_perturbation = ppert.empty() ? nullptr : ppert.c_str();
    const std::string names = positional.empty() ? run.cfg.text("verify.checks") : join(positional);

    Reports r;
    check(gbsde_verify(p.get(), &o, names.c_str(), r.out()), "verify");
    auto f = run.out.open("reports.jsonl");
    int failed = 0;
    json summary = json::array();
    for (size_t i = 0; i < gbsde_reports_count(r.get()); ++i) {
        const char* name = nullptr;
        int pass = 0;
        double measured = 0, bound = 0, tol = 0;
        check(gbsde_reports_get(r.get(), i, &name, &pass, &measured, &bound, &tol), "report");
        int nx = 0, nt = 0;
        double horizon = 0, dx = 0, dt = 0;
        check(gbsde_reports_grid(r.get(), i, &nx, &nt, &horizon, &dx, &dt), "report grid");
        json details = json::object();
        for (size_t j = 0; j < gbsde_reports_detail_count(r.get(), i); ++j) {
            const char* key = nullptr;
            double value = 0;
            check(gbsde_reports_detail(r.get(), i, j, &key, &value), "report detail");
            details[key] = value;
        }
        const json line{{"name", name},
                        {"pass", pass != 0},
                        {"measured", measured},
                        {"bound", bound},
                        {"tolerance", tol},
                        {"grid", {{"nx", nx}, {"nt", nt}, {"horizon", horizon}, {"dx", dx}, {"dt", dt}}},
                        {"details", details}};
        f << line.dump() << '\n';
        failed += pass ? 0 : 1;
        summary.push_back(json{{"name", name}, {"pass", pass != 0}});
        std::cout << (pass ? "PASS " : "FAIL ") << name << " measured=" << fmt(measured) << " bound=" << fmt(bound)
                  << " tol=" << fmt(tol) << '\n';
    }
    run.results["checks"] = summary;
    run.results["failed"] = failed;
    if (failed > 0) run.exit = kCheckFailed;
}

void cmd_convergence(Run& run, Problem& p) {
    const int levels = run.cfg.integer("convergence.levels");
    std::vector<gbsde_convergence_row> rows(std::max(levels, 0));
    size_t count = 0;
    check(gbsde_convergence(p.get(), levels, run.cfg.text("convergence.control").c_str(),
                            run.cfg.integer("convergence.n_paths"), run.cfg.seed("mc.seed"), rows.data(), rows.size(),
                            &count),
          "convergence");
    auto f = run.out.open("convergence.csv");
    f << "level,nx,nt,Y0,abs_err,max_residual,order\n";
    for (size_t i = 0; i < count; ++i) {
        const auto& r = rows[i];
        f << r.level << ',' << r.nx << ',' << r.nt << ',' << fmt(r.y0) << ',' << fmt(r.abs_err) << ','
          << fmt(r.max_residual) << ',' << fmt(r.order) << '\n';
        std::cout << "level " << r.level << ": Y0=" << fmt(r.y0) << " err=" << fmt(r.abs_err)
                  << " residual=" << fmt(r.max_residual) << " order=" << fmt(r.order) << '\n';
    }
    run.results["levels"] = count;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver for backward SDEs driven by G-Brownian motion"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
    app.add_option("--set", overrides, "Override a config key: section.key=value")->take_all();

    std::vector<std::string> checks;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"solve", "Solve the Markovian G-BSDE and export u and (Y, Z, K)"},
        {"two-epoch", "Solve with terminal psi(B_t1, B_T - B_t1) by pasting"},
        {"expect", "Lattice G-expectation of phi of Brownian increments"},
        {"simulate", "Simulate paths under a volatility control"},
        {"verify", "Run numerical checks (names or all)"},
        {"convergence", "Grid refinement table"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        if (name == "verify") sub->add_option("checks", checks, "Check names");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    const auto started = std::chrono::steady_clock::now();
    Config cfg;
    try {
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& o : overrides) cfg.set_override(o);
        if (!out_dir.empty()) cfg.set("output.dir", out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }

    try {
        const Output out(cfg.text("output.dir"));
        Run run(cfg, out);
        Problem p;
        build_problem(cfg, p, run.warnings);
        if (command == "solve") cmd_solve(run, p);
        else if (command == "two-epoch") cmd_two_epoch(run, p);
        else if (command == "expect") cmd_expect(run, p);
        else if (command == "simulate") cmd_simulate(run, p);
        else if (command == "verify") cmd_verify(run, p, checks);
        else cmd_convergence(run, p);

        for (const auto& w : run.warnings) std::cerr << "warning: " << w << '\n';
        const GridInfo g = grid_of(p.get());
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const json manifest{{"command", command},
                            {"config", cfg.resolved()},
                            {"seed", cfg.seed("mc.seed")},
                            {"grid", {{"nx", g.nx}, {"nt", g.nt}, {"x_lo", g.x_lo}, {"x_hi", g.x_hi},
                                      {"horizon", g.horizon}}},
                            {"versions", {{"gbsde", gbsde_version()}, {"artifact_format", 1}}},
                            {"started_utc", utc_now()},
                            {"wall_time_s", wall},
                            {"results", run.results},
                            {"warnings", run.warnings}};
        out.open("run_manifest.json") << manifest.dump(2) << '\n';
        return run.exit;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ApiError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
}
