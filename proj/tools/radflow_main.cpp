// command line front end: config-driven runs, parameter sweeps, steady-state
// queries, and post-hoc analysis of the emitted CSV files
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "radflow/diagnostics.hpp"
#include "radflow/experiment.hpp"
#include "radflow/model.hpp"
#include "radflow/profile.hpp"
#include "radflow/stationary.hpp"

using nlohmann::json;

namespace {

radflow::StationaryResult solve_preset(const std::string& preset, int dim, double q, double h,
                                       double a, double mass) {
    if (preset == "pks_original") return radflow::solve_u1(dim, h);
    if (preset == "pks_rescaled")
        return radflow::solve_mu_A(dim,
                                   mass > 0.0 ? mass : 0.5 * radflow::critical_mass(dim));
    if (preset == "aggregation") return radflow::solve_us(dim, q, mass > 0.0 ? mass : 1.0);
    if (preset == "fokker_planck")
        return radflow::fokker_planck_profile(dim, a, mass > 0.0 ? mass : 1.0);
    throw std::invalid_argument(
        "preset: expected pks_original, pks_rescaled, aggregation, or fokker_planck");
}

json stationary_facts(const std::string& preset, int dim, double q, double h, double a,
                      double mass, const radflow::StationaryResult& res) {
    json out{{"preset", preset}, {"dim", dim}};
    if (preset == "pks_original") {
        out["h"] = h;
        out["critical_mass"] = radflow::critical_mass(dim);
    } else if (preset == "pks_rescaled") {
        out["critical_mass"] = radflow::critical_mass(dim);
    } else if (preset == "aggregation") {
        out["q"] = q;
    } else if (preset == "fokker_planck") {
        out["a"] = a;
    }
    if (mass > 0.0) out["mass_requested"] = mass;
    out["total_mass"] = res.total_mass;
    out["support_radius"] = res.support_radius;
    out["central_density"] = res.central_density;
    out["residual"] = res.residual;
    out["n_cells"] = res.profile.grid.n_cells();
    out["r_max"] = res.profile.grid.r_max();
    out["profile"] = json();
    return out;
}

// pulls one named column out of a series.csv as (t, value) pairs
std::vector<std::pair<double, double>> read_series_column(const std::string& path,
                                                          const std::string& column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::vector<std::string> names;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) names.push_back(cell);
    }
    int t_col = -1, v_col = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "t") t_col = static_cast<int>(i);
        if (names[i] == column) v_col = static_cast<int>(i);
    }
    if (t_col < 0) throw std::runtime_error(path + ": no 't' column");
    if (v_col < 0) throw std::runtime_error(path + ": no '" + column + "' column");
    std::vector<std::pair<double, double>> series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        double t = 0.0, v = 0.0;
        for (int i = 0; std::getline(ls, cell, ','); ++i) {
            if (i == t_col) t = std::stod(cell);
            if (i == v_col) v = std::stod(cell);
        }
        if (std::isfinite(t) && std::isfinite(v)) series.emplace_back(t, v);
    }
    return series;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radially symmetric nonlocal diffusion-aggregation lab"};
    app.require_subcommand(1);

    std::string config_path, axis, out_path, preset, series_path, mode = "exp";
    std::string column = "w2_to_target";
    std::string file_a, file_b;
    std::vector<double> values;
    int dim = 3;
    double q = 2.0, h = 1.0, a = 1.0, mass = 0.0, order = 2.0;
    double begin = -1.0, end = -1.0;

    auto* cmd_run = app.add_subcommand("run", "execute one experiment config");
    cmd_run->add_option("config", config_path, "key = value config file")->required();

    auto* cmd_sweep = app.add_subcommand("sweep", "run a config across one parameter axis");
    cmd_sweep->add_option("config", config_path)->required();
    cmd_sweep->add_option("--axis", axis, "mass, q, R0, or n_cells")->required();
    cmd_sweep->add_option("--values", values, "comma separated values")
        ->required()
        ->delimiter(',');

    auto* cmd_stat = app.add_subcommand("stationary", "solve a steady profile, print its facts");
    cmd_stat->add_option("--preset", preset,
                         "pks_original, pks_rescaled, aggregation, fokker_planck")
        ->required();
    cmd_stat->add_option("--d", dim, "space dimension");
    cmd_stat->add_option("--q", q, "kernel exponent (aggregation)");
    cmd_stat->add_option("--scale", h, "central density scale (pks_original)");
    cmd_stat->add_option("--a", a, "confinement strength (fokker_planck)");
    cmd_stat->add_option("--mass", mass, "total mass");
    cmd_stat->add_option("--out", out_path, "also write the profile as CSV");

    auto* cmd_cmp = app.add_subcommand("compare", "transport distance between two profile CSVs");
    cmd_cmp->add_option("a", file_a)->required();
    cmd_cmp->add_option("b", file_b)->required();
    cmd_cmp->add_option("--d", dim, "space dimension");
    cmd_cmp->add_option("--p", order, "transport order");

    auto* cmd_rates = app.add_subcommand("rates", "fit a decay rate to a series.csv column");
    cmd_rates->add_option("series", series_path)->required();
    cmd_rates->add_option("--mode", mode, "exp or alg")->required();
    cmd_rates->add_option("--column", column, "series column to fit");
    cmd_rates->add_option("--begin", begin, "fit window start");
    cmd_rates->add_option("--end", end, "fit window end");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            radflow::RunReport rep =
                radflow::run_experiment(radflow::ExperimentConfig::from_file(config_path));
            std::cout << rep.summary << "\n";
            return rep.status;
        }
        if (cmd_sweep->parsed()) {
            radflow::RunReport rep = radflow::run_sweep(
                radflow::ExperimentConfig::from_file(config_path), axis, values);
            std::cout << rep.summary << "\n";
            return rep.status;
        }
        if (cmd_stat->parsed()) {
            radflow::StationaryResult res = solve_preset(preset, dim, q, h, a, mass);
            json out = stationary_facts(preset, dim, q, h, a, mass, res);
            if (!out_path.empty()) {
                radflow::write_profile_csv(res.profile, out_path);
                out["profile"] = out_path;
            }
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (cmd_cmp->parsed()) {
            radflow::RadialProfile ua = radflow::read_profile_csv(file_a, dim);
            radflow::RadialProfile ub = radflow::read_profile_csv(file_b, dim);
            const double ma = ua.total_mass(), mb = ub.total_mass();
            if (!(mb > 0.0)) throw std::runtime_error(file_b + ": zero profile");
            for (double& v : ub.values) v *= ma / mb;
            json out{{"mass_a", ma},
                     {"mass_b", mb},
                     {"p", order},
                     {"distance", radflow::wasserstein(order, ua, ub)}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (cmd_rates->parsed()) {
            radflow::RateMode rm;
            if (mode == "exp") rm = radflow::RateMode::exponential;
            else if (mode == "alg") rm = radflow::RateMode::algebraic;
            else throw std::invalid_argument("mode: expected exp or alg");
            auto series = read_series_column(series_path, column);
            radflow::RateFit fit = begin >= 0.0 && end > begin
                                       ? radflow::fit_rate(series, rm, begin, end)
                                       : radflow::fit_rate(series, rm);
            json out{{"mode", mode == "exp" ? "exponential" : "algebraic"},
                     {"column", column},
                     {"exponent", fit.exponent},
                     {"prefactor", fit.prefactor},
                     {"r2", fit.r2},
                     {"window", {fit.window_begin, fit.window_end}},
                     {"points", fit.points.size()}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
