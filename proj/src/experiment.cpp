#include "radflow/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "radflow/barriers.hpp"
#include "radflow/diagnostics.hpp"
#include "radflow/model.hpp"
#include "radflow/stationary.hpp"

namespace radflow {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& field, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(field + ": not a number: '" + text + "'");
    }
    if (trim(text.substr(used)) != "")
        throw std::invalid_argument(field + ": not a number: '" + text + "'");
    return v;
}

int to_int(const std::string& field, const std::string& text) {
    const double v = to_double(field, text);
    if (v != std::floor(v)) throw std::invalid_argument(field + ": not an integer: '" + text + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string& field, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw std::invalid_argument(field + ": not a boolean: '" + text + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

enum class Scen {
    critical,
    subcritical,
    original_rate,
    blowup,
    aggregation,
    mass_scaling,
    sandwich
};

Scen scen_of(const std::string& name) {
    if (name == "critical_radial") return Scen::critical;
    if (name == "subcritical_radial") return Scen::subcritical;
    if (name == "original_variables_rate") return Scen::original_rate;
    if (name == "supercritical_blowup") return Scen::blowup;
    if (name == "aggregation_steady") return Scen::aggregation;
    if (name == "mass_scaling") return Scen::mass_scaling;
    if (name == "comparison_sandwich") return Scen::sandwich;
    std::string all;
    for (const auto& n : scenario_names()) all += (all.empty() ? "" : ", ") + n;
    throw std::invalid_argument("scenario: unknown '" + name + "' (expected one of " + all + ")");
}

bool uses_aggregation(Scen s) { return s == Scen::aggregation || s == Scen::sandwich; }

// exact cell averages of the indicator of {r1 <= r <= r2}, scaled to mass
RadialProfile shell_profile(const RadialGrid& g, double r1, double r2, double mass) {
    std::vector<double> v(g.n_cells(), 0.0);
    for (int i = 0; i < g.n_cells(); ++i) {
        const double lo = std::max(g.face(i), r1), hi = std::min(g.face(i + 1), r2);
        if (hi > lo)
            v[i] = (ipow(hi, g.dim()) - ipow(lo, g.dim())) /
                   (ipow(g.face(i + 1), g.dim()) - ipow(g.face(i), g.dim()));
    }
    RadialProfile u(g, std::move(v));
    const double total = u.total_mass();
    if (!(total > 0.0)) throw std::invalid_argument("initial: shell carries no mass on this grid");
    const double s = mass / total;
    for (double& x : u.values) x *= s;
    return u;
}

RadialProfile normalized(RadialProfile u, double mass) {
    const double s = mass / u.total_mass();
    for (double& x : u.values) x *= s;
    return u;
}

// everything run() needs, distilled from the config and the steady solvers
struct Setup {
    Scen scen;
    ModelSpec spec;
    RadialGrid grid;
    RadialProfile initial;
    double mass;
    double horizon;
    StepControl ctrl;
};

RadialProfile build_initial(const ExperimentConfig& cfg, const RadialGrid& grid, double mass,
                            double auto_radius, const StationaryResult& base) {
    const InitialData& in = cfg.initial;
    switch (in.kind) {
        case InitialData::Kind::uniform_ball: {
            const double r = in.radius > 0.0 ? in.radius : auto_radius;
            return shell_profile(grid, 0.0, r, mass);
        }
        case InitialData::Kind::barenblatt_like: {
            const double r = in.radius > 0.0 ? in.radius : auto_radius;
            std::vector<double> v(grid.n_cells(), 0.0);
            for (int i = 0; i < grid.n_cells(); ++i) {
                const double s = 1.0 - ipow(grid.center(i) / r, 2);
                v[i] = s > 0.0 ? s * s * s : 0.0;
            }
            return normalized(RadialProfile(grid, std::move(v)), mass);
        }
        case InitialData::Kind::annulus:
            return shell_profile(grid, in.r1, in.r2, mass);
        case InitialData::Kind::scaled_stationary: {
            // shrink on the wide native grid, widen on the run grid
            RadialProfile member = in.R0 <= 1.0
                                       ? resample(scale_profile(base.profile, in.R0), grid)
                                       : scale_profile(resample(base.profile, grid), in.R0);
            return normalized(std::move(member), mass);
        }
        case InitialData::Kind::from_csv: {
            RadialProfile u = read_profile_csv(in.path, cfg.dim);
            if (u.grid != grid) u = resample(u, grid);
            return normalized(std::move(u), mass);
        }
    }
    throw std::logic_error("initial: unhandled kind");
}

Setup resolve(const ExperimentConfig& cfg) {
    const Scen scen = scen_of(cfg.scenario);

    StepControl ctrl;
    if (cfg.safety > 0.0) ctrl.safety = cfg.safety;
    if (cfg.blowup_density_factor > 0.0) ctrl.blowup_density_factor = cfg.blowup_density_factor;

    // csv initial data without an explicit mass keeps the file's mass
    double file_mass = 0.0;
    if (cfg.initial.kind == InitialData::Kind::from_csv && cfg.mass <= 0.0 &&
        cfg.mass_ratio <= 0.0)
        file_mass = read_profile_csv(cfg.initial.path, cfg.dim).total_mass();

    if (uses_aggregation(scen)) {
        const double mass = cfg.mass > 0.0 ? cfg.mass : (file_mass > 0.0 ? file_mass : 1.0);
        const ModelSpec spec = preset("aggregation", cfg.dim, cfg.q);
        StationaryResult us = solve_us(cfg.dim, cfg.q, mass, 512);
        const double rate = aggregation_rate_constant(us, cfg.dim) * (cfg.dim + cfg.q - 2.0);
        const double horizon =
            cfg.horizon >= 0.0 ? cfg.horizon : (scen == Scen::aggregation ? 8.0 : 5.0) / rate;
        ctrl.snapshot_interval = cfg.snapshot_interval > 0.0
                                     ? cfg.snapshot_interval
                                     : std::max(horizon / 24.0, 1e-6);
        RadialGrid grid(cfg.dim, cfg.r_max > 0.0 ? cfg.r_max : 1.6 * us.support_radius,
                        cfg.n_cells);
        // the sandwich scenario defaults to a gently stretched family member
        // so the initial datum already sits between the two barrier families
        ExperimentConfig tweaked = cfg;
        if (scen == Scen::sandwich && tweaked.initial.kind == InitialData::Kind::uniform_ball &&
            tweaked.initial.radius <= 0.0) {
            tweaked.initial.kind = InitialData::Kind::scaled_stationary;
            tweaked.initial.R0 = 1.15;
        }
        RadialProfile init = build_initial(tweaked, grid, mass, 1.2 * us.support_radius, us);
        return {scen, spec, grid, std::move(init), mass, horizon, ctrl};
    }

    const double mc = critical_mass(cfg.dim);
    double ratio = cfg.mass_ratio;
    if (cfg.mass <= 0.0 && ratio <= 0.0)
        ratio = scen == Scen::critical ? 1.0 : (scen == Scen::blowup ? 1.2 : 0.5);
    const double mass =
        cfg.mass > 0.0 ? cfg.mass : (file_mass > 0.0 ? file_mass : ratio * mc);
    if ((scen == Scen::subcritical || scen == Scen::original_rate) && !(mass < mc))
        throw std::invalid_argument("mass: must stay below the critical mass " + fmt(mc));
    if (scen == Scen::blowup && !(mass > mc))
        throw std::invalid_argument("mass: must exceed the critical mass " + fmt(mc));

    if (scen == Scen::blowup) {
        const ModelSpec spec = preset("pks_original", cfg.dim);
        StationaryResult coarse = solve_u1(cfg.dim, 1.0);
        RadialGrid fine_g(cfg.dim, 1.01 * coarse.support_radius, 2048);
        StationaryResult fine = solve_u1(cfg.dim, 1.0, fine_g);
        const double r0 = cfg.initial.kind == InitialData::Kind::scaled_stationary
                              ? cfg.initial.R0
                              : 0.1;
        RadialGrid grid(cfg.dim,
                        cfg.r_max > 0.0 ? cfg.r_max : 1.35 * r0 * coarse.support_radius,
                        cfg.n_cells);
        ctrl.snapshot_interval = cfg.snapshot_interval > 0.0 ? cfg.snapshot_interval : 0.01;
        if (cfg.blowup_density_factor <= 0.0) ctrl.blowup_density_factor = 20.0;
        // the scenario default is a tightly rescaled stationary bump, which
        // concentrates under the original-variables flow
        ExperimentConfig tweaked = cfg;
        if (tweaked.initial.kind == InitialData::Kind::uniform_ball &&
            tweaked.initial.radius <= 0.0) {
            tweaked.initial.kind = InitialData::Kind::scaled_stationary;
            tweaked.initial.R0 = r0;
        }
        RadialProfile init = build_initial(tweaked, grid, mass, 0.5 * grid.r_max(), fine);
        return {scen, spec, grid, std::move(init), mass,
                cfg.horizon >= 0.0 ? cfg.horizon : 1.0, ctrl};
    }

    if (scen == Scen::critical) {
        const ModelSpec spec = preset("pks_original", cfg.dim);
        StationaryResult base = solve_u1(cfg.dim, 1.0);
        RadialGrid grid(cfg.dim, cfg.r_max > 0.0 ? cfg.r_max : 12.0, cfg.n_cells);
        ctrl.snapshot_interval = cfg.snapshot_interval > 0.0 ? cfg.snapshot_interval : 0.25;
        RadialProfile init = build_initial(cfg, grid, mass, 2.0, base);
        return {scen, spec, grid, std::move(init), mass,
                cfg.horizon >= 0.0 ? cfg.horizon : 50.0, ctrl};
    }

    // subcritical_radial and original_variables_rate share the confined setup
    const ModelSpec spec = preset("pks_rescaled", cfg.dim);
    StationaryResult mu = solve_mu_A(cfg.dim, mass);
    RadialGrid grid(cfg.dim, cfg.r_max > 0.0 ? cfg.r_max : 1.5 * mu.support_radius,
                    cfg.n_cells);
    ctrl.snapshot_interval = cfg.snapshot_interval > 0.0 ? cfg.snapshot_interval : 0.25;
    RadialProfile init = build_initial(cfg, grid, mass, 0.9 * mu.support_radius, mu);
    return {scen, spec, grid, std::move(init), mass, cfg.horizon >= 0.0 ? cfg.horizon : 6.0,
            ctrl};
}

std::string output_root() {
    const char* env = std::getenv("RADFLOW_OUT");
    return env && *env ? env : "out";
}

std::string resolve_dir(const ExperimentConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    return output_root() + "/" + (cfg.scenario.empty() ? "experiment" : cfg.scenario);
}

const char* stop_name(StopReason r) {
    switch (r) {
        case StopReason::completed: return "completed";
        case StopReason::domain_overflow: return "domain_overflow";
        case StopReason::blowup_suspected: return "blowup_suspected";
    }
    return "unknown";
}

struct SeriesRow {
    double t, mass, m2, energy, rescaled, sup, w2, defect;
};

void write_series(const std::string& dir, const std::vector<SeriesRow>& rows) {
    const std::string path = dir + "/series.csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("output_dir: cannot write " + path);
    std::fputs("t,mass,m2,energy,rescaled_energy,sup_density,w2_to_target,dissipation_defect\n",
               f);
    for (const auto& r : rows)
        std::fprintf(f, "%s,%s,%s,%s,%s,%s,%s,%s\n", fmt(r.t).c_str(), fmt(r.mass).c_str(),
                     fmt(r.m2).c_str(), fmt(r.energy).c_str(), fmt(r.rescaled).c_str(),
                     fmt(r.sup).c_str(), fmt(r.w2).c_str(), fmt(r.defect).c_str());
    std::fclose(f);
}

json fit_json(const RateFit& fit) {
    return json{{"mode", fit.mode == RateMode::exponential ? "exponential" : "algebraic"},
                {"exponent", fit.exponent},
                {"prefactor", fit.prefactor},
                {"r2", fit.r2},
                {"window", {fit.window_begin, fit.window_end}},
                {"points", fit.points.size()}};
}

// least-squares slope of log y against log x, tolerant of two-point sweeps
json loglog_fit(const std::vector<std::pair<double, double>>& pts) {
    const int n = static_cast<int>(pts.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        if (!(x > 0.0) || !(y > 0.0)) return json();
        sx += std::log(x);
        sy += std::log(y);
        sxx += std::log(x) * std::log(x);
        sxy += std::log(x) * std::log(y);
    }
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) return json();
    const double slope = (n * sxy - sx * sy) / den;
    const double inter = (sy - slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [x, y] : pts) {
        const double e = std::log(y) - inter - slope * std::log(x);
        ss_res += e * e;
        ss_tot += (std::log(y) - sy / n) * (std::log(y) - sy / n);
    }
    return json{{"exponent", slope},
                {"prefactor", inter},
                {"r2", ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0}};
}

void write_summary(const std::string& dir, const json& summary) {
    std::ofstream f(dir + "/summary.json");
    if (!f) throw std::runtime_error("output_dir: cannot write " + dir + "/summary.json");
    f << summary.dump(2) << "\n";
}

RunReport fail_report(const ExperimentConfig& cfg, const std::string& message) {
    RunReport rep;
    rep.status = 2;
    rep.directory = resolve_dir(cfg);
    json summary{{"scenario", cfg.scenario},
                 {"status", 2},
                 {"error", message},
                 {"ledger",
                  {{"mass_drift_rel", 0.0}, {"clipped_mass", 0.0}, {"ordering_violation", 0.0}}}};
    rep.summary = summary.dump(2);
    std::error_code ec;
    fs::create_directories(rep.directory, ec);
    if (!ec) {
        std::ofstream f(rep.directory + "/summary.json");
        if (f) f << rep.summary << "\n";
    }
    return rep;
}

// the scheme's attractor near the sampled steady state, used as the distance
// target so the fitted decay is not floored by the sampling bias
RadialProfile settled_target(const RadialProfile& member, const ModelSpec& spec) {
    StepControl ctrl;
    ctrl.snapshot_interval = 10.0;
    return evolve(member, spec, ctrl, 10.0).final_state().profile;
}

RunReport run_mass_scaling(const ExperimentConfig& cfg, const std::string& dir) {
    const double mc = critical_mass(cfg.dim);
    const std::vector<double> masses{1e-3 * mc, 3e-3 * mc, 1e-2 * mc};
    RateFit fit = sup_density_scaling(masses, cfg.dim);

    std::vector<SeriesRow> rows;
    for (const auto& [a, sup] : fit.points)
        rows.push_back({a, a, kNan, kNan, kNan, sup, kNan, kNan});
    write_series(dir, rows);

    json summary{{"scenario", cfg.scenario},
                 {"dim", cfg.dim},
                 {"status", 0},
                 {"stop", "completed"},
                 {"masses", masses},
                 {"fit", fit_json(fit)},
                 {"ledger",
                  {{"mass_drift_rel", 0.0}, {"clipped_mass", 0.0}, {"ordering_violation", 0.0}}}};
    write_summary(dir, summary);
    return {0, dir, summary.dump(2)};
}

}  // namespace

InitialData InitialData::parse(const std::string& text) {
    const std::string t = trim(text);
    const std::size_t open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw std::invalid_argument("initial: expected kind(args), got '" + t + "'");
    const std::string kind = trim(t.substr(0, open));
    const std::string args = t.substr(open + 1, t.size() - open - 2);

    InitialData d;
    if (kind == "uniform_ball") {
        d.kind = Kind::uniform_ball;
        d.radius = to_double("initial", args);
    } else if (kind == "barenblatt_like") {
        d.kind = Kind::barenblatt_like;
        d.radius = to_double("initial", args);
    } else if (kind == "annulus") {
        const std::size_t comma = args.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("initial: annulus needs two radii");
        d.kind = Kind::annulus;
        d.r1 = to_double("initial", args.substr(0, comma));
        d.r2 = to_double("initial", args.substr(comma + 1));
        if (!(d.r1 >= 0.0) || !(d.r2 > d.r1))
            throw std::invalid_argument("initial: annulus needs 0 <= r1 < r2");
    } else if (kind == "scaled_stationary") {
        d.kind = Kind::scaled_stationary;
        d.R0 = to_double("initial", args);
        if (!(d.R0 > 0.0)) throw std::invalid_argument("initial: R0 must be positive");
    } else if (kind == "from_csv") {
        d.kind = Kind::from_csv;
        d.path = trim(args);
        if (d.path.empty()) throw std::invalid_argument("initial: from_csv needs a path");
    } else {
        throw std::invalid_argument("initial: unknown kind '" + kind + "'");
    }
    return d;
}

std::string InitialData::describe() const {
    switch (kind) {
        case Kind::uniform_ball: return "uniform_ball(" + fmt_short(radius) + ")";
        case Kind::barenblatt_like: return "barenblatt_like(" + fmt_short(radius) + ")";
        case Kind::annulus:
            return "annulus(" + fmt_short(r1) + "," + fmt_short(r2) + ")";
        case Kind::scaled_stationary: return "scaled_stationary(" + fmt_short(R0) + ")";
        case Kind::from_csv: return "from_csv(" + path + ")";
    }
    return "unknown";
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "scenario") cfg.scenario = val;
        else if (key == "dim") cfg.dim = to_int(key, val);
        else if (key == "q") cfg.q = to_double(key, val);
        else if (key == "mass") cfg.mass = to_double(key, val);
        else if (key == "mass_ratio") cfg.mass_ratio = to_double(key, val);
        else if (key == "initial") cfg.initial = InitialData::parse(val);
        else if (key == "r_max") cfg.r_max = to_double(key, val);
        else if (key == "n_cells") cfg.n_cells = to_int(key, val);
        else if (key == "horizon") cfg.horizon = to_double(key, val);
        else if (key == "snapshot_interval") cfg.snapshot_interval = to_double(key, val);
        else if (key == "safety") cfg.safety = to_double(key, val);
        else if (key == "blowup_density_factor") cfg.blowup_density_factor = to_double(key, val);
        else if (key == "output_dir") cfg.output_dir = val;
        else if (key == "write_snapshots") cfg.write_snapshots = to_bool(key, val);
        else if (key == "compute_w2") cfg.compute_w2 = to_bool(key, val);
        else if (key == "compute_defect") cfg.compute_defect = to_bool(key, val);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

void ExperimentConfig::validate() const {
    const Scen scen = scen_of(scenario);  // throws on unknown scenario
    if (dim < 3) throw std::invalid_argument("dim: must be at least 3");
    if (n_cells < 16) throw std::invalid_argument("n_cells: must be at least 16");
    if (mass < 0.0) throw std::invalid_argument("mass: must be positive");
    if (mass_ratio < 0.0) throw std::invalid_argument("mass_ratio: must be positive");
    if (mass > 0.0 && mass_ratio > 0.0)
        throw std::invalid_argument("mass: set either mass or mass_ratio, not both");
    if (uses_aggregation(scen)) {
        if (!(q > 2.0 - dim) || !(q <= 2.0))
            throw std::invalid_argument("q: admissible range is (2 - dim, 2]");
        if (mass_ratio > 0.0)
            throw std::invalid_argument("mass_ratio: aggregation scenarios take an absolute mass");
    }
    if (scen == Scen::mass_scaling && (mass > 0.0 || mass_ratio > 0.0))
        throw std::invalid_argument("mass: mass_scaling runs its fixed mass ladder");
    if ((scen == Scen::subcritical || scen == Scen::original_rate) && mass_ratio >= 1.0)
        throw std::invalid_argument("mass_ratio: must stay below 1 for subcritical scenarios");
    if (scen == Scen::blowup && mass_ratio > 0.0 && mass_ratio <= 1.0)
        throw std::invalid_argument("mass_ratio: must exceed 1 for supercritical_blowup");
    if (r_max < 0.0) throw std::invalid_argument("r_max: must be positive");
    if (initial.kind == InitialData::Kind::from_csv && initial.path.empty())
        throw std::invalid_argument("initial: from_csv needs a path");
    if (safety > 1.0) throw std::invalid_argument("safety: must lie in (0, 1]");
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{
        "critical_radial",     "subcritical_radial", "original_variables_rate",
        "supercritical_blowup", "aggregation_steady", "mass_scaling",
        "comparison_sandwich"};
    return names;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        return fail_report(cfg, e.what());
    }

    const std::string dir = resolve_dir(cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return fail_report(cfg, "output_dir: cannot create " + dir);

    try {
        if (scen_of(cfg.scenario) == Scen::mass_scaling) return run_mass_scaling(cfg, dir);

        Setup setup = resolve(cfg);
        const ModelSpec& spec = setup.spec;
        const bool critical_m = spec.m > 1.0;

        // scenario distance target, normalized to the run's exact mass
        bool has_target = false;
        RadialProfile target(setup.grid, std::vector<double>(setup.grid.n_cells(), 0.0));
        if (cfg.compute_w2) {
            if (setup.scen == Scen::subcritical || setup.scen == Scen::original_rate) {
                StationaryResult mu = solve_mu_A(cfg.dim, setup.mass, setup.grid);
                target = settled_target(normalized(mu.profile, setup.initial.total_mass()),
                                        spec);
                has_target = true;
            } else if (setup.scen == Scen::aggregation || setup.scen == Scen::sandwich) {
                if (cfg.q == 2.0) {
                    // closed form: constant density on the ball holding the mass
                    const double radius =
                        std::pow(setup.mass / setup.grid.sigma(), 1.0 / cfg.dim);
                    target = shell_profile(setup.grid, 0.0, radius,
                                           setup.initial.total_mass());
                } else {
                    target = normalized(
                        resample(solve_us(cfg.dim, cfg.q, setup.mass, 512).profile,
                                 setup.grid),
                        setup.initial.total_mass());
                }
                has_target = true;
            }
        }

        Trajectory traj = evolve(setup.initial, spec, setup.ctrl, setup.horizon);
        const int status = traj.stop == StopReason::completed ? 0 : 1;

        std::vector<SeriesRow> rows;
        std::vector<std::pair<double, double>> w2_series;
        for (const auto& snap : traj.snapshots) {
            SeriesRow row;
            row.t = snap.time;
            row.mass = snap.profile.total_mass();
            row.m2 = second_moment(snap.profile);
            row.energy = critical_m ? free_energy(snap.profile, spec.m) : kNan;
            row.rescaled = spec.potential.kind == PotentialSpec::Kind::quadratic
                               ? rescaled_energy(snap.profile, cfg.dim)
                               : kNan;
            row.sup = snap.profile.sup_density();
            row.w2 = kNan;
            if (has_target && row.mass > 0.0) {
                row.w2 = wasserstein(2, snap.profile, target);
                w2_series.emplace_back(snap.time, row.w2);
            }
            row.defect =
                cfg.compute_defect && critical_m ? dissipation_defect(snap.profile, spec.m) : kNan;
            rows.push_back(row);
        }
        write_series(dir, rows);

        if (cfg.write_snapshots) {
            for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
                write_profile_csv(traj.snapshots[k].profile, dir + "/" + name);
            }
        }

        const EvolutionState& fin = traj.final_state();
        json summary{{"scenario", cfg.scenario},
                     {"dim", cfg.dim},
                     {"mass", setup.mass},
                     {"initial", cfg.initial.describe()},
                     {"grid", {{"r_max", setup.grid.r_max()}, {"n_cells", setup.grid.n_cells()}}},
                     {"horizon", setup.horizon},
                     {"status", status},
                     {"stop", stop_name(traj.stop)},
                     {"stop_note", traj.note},
                     {"snapshots", traj.snapshots.size()},
                     {"final",
                      {{"time", fin.time},
                       {"mass", rows.back().mass},
                       {"m2", rows.back().m2},
                       {"sup_density", rows.back().sup},
                       {"energy", rows.back().energy},
                       {"w2_to_target", rows.back().w2},
                       {"dissipation_defect", rows.back().defect}}}};
        if (uses_aggregation(setup.scen)) summary["q"] = cfg.q;

        const double mass0 = rows.front().mass;
        double ordering_violation = 0.0;

        if (traj.snapshots.size() >= 2) {
            const auto& a = traj.snapshots[traj.snapshots.size() - 2];
            summary["mass_form_residual"] = mass_form_residual(a, traj.snapshots.back(), spec);
        }

        if (setup.scen == Scen::subcritical || setup.scen == Scen::original_rate) {
            if (w2_series.size() >= 5) {
                try {
                    summary["rate"] = fit_json(fit_rate(w2_series, RateMode::exponential,
                                                        setup.horizon / 6.0, setup.horizon));
                } catch (const std::exception& e) {
                    summary["rate_error"] = e.what();
                }
            }
        }

        if (setup.scen == Scen::original_rate && has_target) {
            // map run and target back to original variables on a wide grid
            const double grow = std::exp(setup.horizon / cfg.dim);
            RadialGrid wide(cfg.dim, 1.01 * grow * setup.grid.r_max(),
                            std::min(2048, 4 * setup.grid.n_cells()));
            RadialProfile wide_target = resample(target, wide);
            json orig = json::array();
            std::vector<std::pair<double, double>> orig_series;
            for (const auto& snap : traj.snapshots) {
                const double t = std::expm1(snap.time);
                RadialProfile u = rescale_to_similarity(resample(snap.profile, wide), t, false);
                RadialProfile v = rescale_to_similarity(wide_target, t, false);
                const double w2 = wasserstein(2, u, v);
                orig.push_back({t, w2});
                if (t > 0.0) orig_series.emplace_back(t, w2);
            }
            summary["series_original"] = orig;
            if (orig_series.size() >= 5) {
                try {
                    summary["rate_original"] =
                        fit_json(fit_rate(orig_series, RateMode::algebraic,
                                          std::expm1(setup.horizon / 2.0),
                                          std::expm1(setup.horizon)));
                } catch (const std::exception& e) {
                    summary["rate_original_error"] = e.what();
                }
            }
        }

        if (setup.scen == Scen::critical) {
            double f_rise = 0.0, m2_drop = 0.0, sup_max = 0.0;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                sup_max = std::max(sup_max, rows[k].sup);
                if (k > 0) {
                    f_rise = std::max(f_rise, rows[k].energy - rows[k - 1].energy);
                    m2_drop = std::max(m2_drop, rows[k - 1].m2 - rows[k].m2);
                }
            }
            summary["free_energy_rise_max"] = f_rise;
            summary["m2_drop_max"] = m2_drop;
            summary["sup_density_max"] = sup_max;
            summary["dissipation_defect_final"] = rows.back().defect;
        }

        if (setup.scen == Scen::blowup) {
            summary["initial_free_energy"] = rows.front().energy;
            bool m2_down = true;
            for (std::size_t k = 1; k < rows.size(); ++k)
                if (!(rows[k].m2 < rows[k - 1].m2)) m2_down = false;
            summary["m2_strictly_decreasing"] = m2_down;
            summary["stop_time"] = fin.time;
        }

        if (setup.scen == Scen::aggregation && w2_series.size() >= 5) {
            try {
                summary["rate"] = fit_json(fit_rate(w2_series, RateMode::exponential,
                                                    setup.horizon / 6.0, setup.horizon));
            } catch (const std::exception& e) {
                summary["rate_error"] = e.what();
            }
        }

        if (setup.scen == Scen::sandwich) {
            StationaryResult us = solve_us(cfg.dim, cfg.q, setup.mass, 512);
            BarrierFamily sub(us, 1.25, BarrierOde::aggregation, BarrierRole::subsolution,
                              aggregation_rate_constant(us, cfg.dim), cfg.q);
            BarrierFamily sup(us, 1.05, BarrierOde::aggregation, BarrierRole::supersolution,
                              supersolution_rate_constant(us, cfg.dim), cfg.q);
            double lo = 0.0, hi = 0.0;
            for (const auto& snap : traj.snapshots) {
                RadialProfile below = barrier_profile(sub, snap.time, setup.grid);
                RadialProfile above = barrier_profile(sup, snap.time, setup.grid);
                lo = std::max(lo, check_ordering(below, snap.profile).worst_violation);
                hi = std::max(hi, check_ordering(snap.profile, above).worst_violation);
            }
            summary["sandwich"] = {{"violation_below", lo},
                                   {"violation_above", hi},
                                   {"ordered", lo == 0.0 && hi == 0.0}};
            ordering_violation = std::max(lo, hi);
        }

        summary["ledger"] = {
            {"mass_drift_rel", std::abs(rows.back().mass - mass0) / std::max(mass0, 1e-300)},
            {"clipped_mass", fin.mass_drift},
            {"ordering_violation", ordering_violation}};

        write_summary(dir, summary);
        return {status, dir, summary.dump(2)};
    } catch (const std::exception& e) {
        return fail_report(cfg, e.what());
    }
}

RunReport run_sweep(const ExperimentConfig& base, const std::string& axis,
                    const std::vector<double>& values) {
    if (axis != "mass" && axis != "q" && axis != "R0" && axis != "n_cells")
        return fail_report(base, "axis: must be one of mass, q, R0, n_cells");
    if (values.size() < 2) return fail_report(base, "values: a sweep needs at least two values");

    const std::string root = resolve_dir(base);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) return fail_report(base, "output_dir: cannot create " + root);

    std::vector<ExperimentConfig> instances;
    for (double v : values) {
        ExperimentConfig cfg = base;
        cfg.output_dir = root + "/" + axis + "_" + fmt_short(v);
        if (axis == "mass") {
            cfg.mass = v;
            cfg.mass_ratio = 0.0;
        } else if (axis == "q") {
            cfg.q = v;
        } else if (axis == "R0") {
            cfg.initial.kind = InitialData::Kind::scaled_stationary;
            cfg.initial.R0 = v;
        } else {
            cfg.n_cells = static_cast<int>(v);
        }
        instances.push_back(std::move(cfg));
    }

    std::vector<std::future<RunReport>> futures;
    futures.reserve(instances.size());
    for (const auto& cfg : instances)
        futures.push_back(std::async(std::launch::async,
                                     [cfg]() { return run_experiment(cfg); }));
    std::vector<RunReport> reports;
    reports.reserve(futures.size());
    for (auto& f : futures) reports.push_back(f.get());

    int worst = 0;
    json per_instance = json::array();
    std::vector<std::pair<double, double>> sup_pts, res_pts;
    std::FILE* f = std::fopen((root + "/sweep.csv").c_str(), "w");
    if (!f) return fail_report(base, "output_dir: cannot write " + root + "/sweep.csv");
    std::fputs("axis,value,status,stop,sup_density,w2_to_target,mass_form_residual,exponent,r2\n",
               f);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        worst = std::max(worst, reports[i].status);
        double sup = kNan, w2 = kNan, res = kNan, expn = kNan, r2 = kNan;
        std::string stop = "error";
        json s;
        try {
            s = json::parse(reports[i].summary);
        } catch (const std::exception&) {
        }
        if (s.contains("stop")) stop = s["stop"].get<std::string>();
        if (s.contains("final")) {
            sup = s["final"].value("sup_density", kNan);
            w2 = s["final"].value("w2_to_target", kNan);
        }
        if (s.contains("mass_form_residual")) res = s["mass_form_residual"].get<double>();
        if (s.contains("rate") && s["rate"].is_object()) {
            expn = s["rate"].value("exponent", kNan);
            r2 = s["rate"].value("r2", kNan);
        }
        std::fprintf(f, "%s,%s,%d,%s,%s,%s,%s,%s,%s\n", axis.c_str(),
                     fmt(values[i]).c_str(), reports[i].status, stop.c_str(),
                     fmt(sup).c_str(), fmt(w2).c_str(), fmt(res).c_str(), fmt(expn).c_str(),
                     fmt(r2).c_str());
        per_instance.push_back({{"value", values[i]},
                                {"status", reports[i].status},
                                {"directory", reports[i].directory}});
        if (reports[i].status == 0 && std::isfinite(sup)) sup_pts.emplace_back(values[i], sup);
        if (reports[i].status == 0 && std::isfinite(res)) res_pts.emplace_back(values[i], res);
    }
    std::fclose(f);

    json summary{{"axis", axis}, {"status", worst}, {"instances", per_instance}};
    // mass sweeps fit the peak-density power law, n_cells sweeps the
    // first-order residual decay; other axes have no canonical combined fit
    if (axis == "mass" && sup_pts.size() >= 2) summary["fit"] = loglog_fit(sup_pts);
    if (axis == "n_cells" && res_pts.size() >= 2) summary["fit"] = loglog_fit(res_pts);

    std::ofstream sf(root + "/sweep_summary.json");
    if (sf) sf << summary.dump(2) << "\n";
    return {worst, root, summary.dump(2)};
}

}  // namespace radflow
