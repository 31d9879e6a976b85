#include "radflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "radflow/model.hpp"
#include "radflow/stationary.hpp"

namespace radflow {

namespace {

const double gl4_node[2] = {0.3399810435848563, 0.8611363115940526};
const double gl4_weight[2] = {0.6521451548625461, 0.3478548451374538};

// integral of M(r)^2 / (sigma r^{d-1}) over the grid plus the constant-mass
// tail; M evaluated exactly inside each cell
double interaction_integral(const RadialProfile& u) {
    const RadialGrid& g = u.grid;
    const int d = g.dim();
    const double sigma = g.sigma();
    double acc = 0.0;
    double mass = 0.0;
    for (int i = 0; i < g.n_cells(); ++i) {
        const double lo = g.face(i);
        const double hi = g.face(i + 1);
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (int s = 0; s < 2; ++s) {
            for (double sign : {-1.0, 1.0}) {
                const double r = mid + sign * half * gl4_node[s];
                const double m_r = mass + u.values[i] * sigma / d * (ipow(r, d) - ipow(lo, d));
                acc += gl4_weight[s] * half * m_r * m_r / (sigma * ipow(r, d - 1));
            }
        }
        mass += u.values[i] * g.cell_volume(i);
    }
    if (mass > 0.0 && d > 2)
        acc += mass * mass / (sigma * (d - 2) * ipow(g.r_max(), d - 2));
    return acc;
}

}  // namespace

double free_energy(const RadialProfile& u, double m) {
    if (!(m > 1.0)) throw std::invalid_argument("free_energy: m must exceed 1");
    double entropy = 0.0;
    for (int i = 0; i < u.grid.n_cells(); ++i)
        entropy += std::pow(u.values[i], m) / (m - 1.0) * u.grid.cell_volume(i);
    return entropy - 0.5 * interaction_integral(u);
}

double rescaled_energy(const RadialProfile& u, int dim) {
    const double m = critical_exponent(dim);
    return free_energy(u, m) + second_moment(u) / (2.0 * dim);
}

double dissipation_defect(const RadialProfile& u, double m) {
    if (!(m > 1.0)) throw std::invalid_argument("dissipation_defect: m must exceed 1");
    const RadialGrid& g = u.grid;
    const int n = g.n_cells();
    const int d = g.dim();
    const double sigma = g.sigma();
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = std::pow(u.values[i], m - 1.0);
    // even reflection through the origin, zero padding past r_max
    auto pv = [&](int i) {
        if (i < 0) return p[-i - 1];
        return i < n ? p[i] : 0.0;
    };
    double defect = 0.0;
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dp =
            (pv(i - 2) - 8.0 * pv(i - 1) + 8.0 * pv(i + 1) - pv(i + 2)) / (12.0 * g.dr());
        const double r = g.center(i);
        const double m_r = mass + u.values[i] * sigma / d * (ipow(r, d) - ipow(g.face(i), d));
        const double expr = m / (m - 1.0) * dp + m_r / (sigma * ipow(r, d - 1));
        defect += u.values[i] * expr * expr * g.cell_volume(i);
        mass += u.values[i] * g.cell_volume(i);
    }
    return defect;
}

std::vector<double> virial_check(const std::vector<EvolutionState>& snapshots, int dim) {
    if (snapshots.size() < 3)
        throw std::invalid_argument("virial_check: needs at least three snapshots");
    const double m = critical_exponent(dim);
    std::vector<double> residuals;
    for (std::size_t k = 1; k + 1 < snapshots.size(); ++k) {
        const double dt = snapshots[k + 1].time - snapshots[k - 1].time;
        const double lhs =
            (second_moment(snapshots[k + 1].profile) - second_moment(snapshots[k - 1].profile)) /
            dt;
        const double rhs = 2.0 * (dim - 2) * free_energy(snapshots[k].profile, m);
        residuals.push_back(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
    }
    return residuals;
}

double hls_ratio(const RadialProfile& u, double m) {
    const double mass = u.total_mass();
    if (!(mass > 0.0)) throw std::invalid_argument("hls_ratio: zero profile");
    double um = 0.0;
    for (int i = 0; i < u.grid.n_cells(); ++i)
        um += std::pow(u.values[i], m) * u.grid.cell_volume(i);
    return interaction_integral(u) / (std::pow(mass, 2.0 / u.grid.dim()) * um);
}

double wasserstein(double p, const RadialProfile& a, const RadialProfile& b) {
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein: order must be at least 1");
    const double ma = a.total_mass();
    const double mb = b.total_mass();
    if (!(ma > 0.0) || !(mb > 0.0)) throw std::invalid_argument("wasserstein: zero profile");
    if (std::abs(ma - mb) > 1e-8 * std::max(ma, mb))
        throw std::invalid_argument("wasserstein: total masses differ");
    const MassFunction fa = mass_function(a);
    const MassFunction fb = mass_function(b);
    std::vector<double> cuts;
    cuts.reserve(fa.values.size() + fb.values.size());
    for (double v : fa.values) cuts.push_back(v / ma);
    for (double v : fb.values) cuts.push_back(v / mb);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    double lo = 0.0;
    for (double hi : cuts) {
        hi = std::min(hi, 1.0);
        if (hi - lo < 1e-15) continue;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (int s = 0; s < 2; ++s) {
            for (double sign : {-1.0, 1.0}) {
                const double t = mid + sign * half * gl4_node[s];
                const double dq = quantile(fa, t * ma) - quantile(fb, t * mb);
                acc += gl4_weight[s] * half * std::pow(std::abs(dq), p);
            }
        }
        lo = hi;
    }
    return std::pow(acc, 1.0 / p);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& series, RateMode mode,
                 double window_begin, double window_end) {
    RateFit fit;
    fit.mode = mode;
    fit.window_begin = window_begin;
    fit.window_end = window_end;
    for (const auto& [t, v] : series) {
        if (t < window_begin || t > window_end) continue;
        if (!(v > 0.0))
            throw std::invalid_argument("fit_rate: nonpositive value inside the fit window");
        if (mode == RateMode::algebraic && !(t > 0.0))
            throw std::invalid_argument("fit_rate: nonpositive time in algebraic mode");
        fit.points.emplace_back(t, v);
    }
    const int n = static_cast<int>(fit.points.size());
    if (n < 5) throw std::invalid_argument("fit_rate: fewer than five points in the window");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [t, v] : fit.points) {
        const double x = mode == RateMode::algebraic ? std::log(t) : t;
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.prefactor = (sy - fit.exponent * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [t, v] : fit.points) {
        const double x = mode == RateMode::algebraic ? std::log(t) : t;
        const double y = std::log(v);
        ss_res += (y - fit.prefactor - fit.exponent * x) * (y - fit.prefactor - fit.exponent * x);
        ss_tot += (y - sy / n) * (y - sy / n);
    }
    fit.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& series, RateMode mode) {
    double last = 0.0;
    for (const auto& [t, v] : series) last = std::max(last, t);
    return fit_rate(series, mode, 0.2 * last, last);
}

RateFit sup_density_scaling(const std::vector<double>& masses, int dim) {
    if (masses.size() < 2)
        throw std::invalid_argument("sup_density_scaling: needs at least two masses");
    const double cap = 0.5 * critical_mass(dim);
    for (double a : masses)
        if (!(a > 0.0) || !(a < cap))
            throw std::invalid_argument(
                "sup_density_scaling: masses must lie in (0, critical/2)");
    const double a_max = *std::max_element(masses.begin(), masses.end());
    const double support = solve_mu_A(dim, a_max).support_radius;
    RadialGrid grid(dim, 2.2 * support, 256);
    const double radius = 1.2 * support;
    const ModelSpec spec = preset("pks_rescaled", dim);
    std::vector<std::pair<double, double>> series;
    for (double a : masses) {
        std::vector<double> v(grid.n_cells(), 0.0);
        const double ball = grid.sigma() / dim * ipow(radius, dim);
        for (int i = 0; i < grid.n_cells(); ++i)
            if (grid.face(i + 1) <= radius) v[i] = a / ball;
        Trajectory traj = evolve(RadialProfile(grid, v), spec, StepControl{}, 6.0);
        series.emplace_back(a, traj.final_state().profile.sup_density());
    }
    std::sort(series.begin(), series.end());
    // two or three masses are a legitimate sweep here, so fit directly instead
    // of going through fit_rate's five-point requirement
    RateFit fit;
    fit.mode = RateMode::algebraic;
    fit.window_begin = series.front().first;
    fit.window_end = series.back().first;
    fit.points = series;
    const int n = static_cast<int>(series.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [a, s] : series) {
        const double x = std::log(a);
        const double y = std::log(s);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.prefactor = (sy - fit.exponent * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [a, s] : series) {
        const double x = std::log(a);
        const double y = std::log(s);
        ss_res += (y - fit.prefactor - fit.exponent * x) * (y - fit.prefactor - fit.exponent * x);
        ss_tot += (y - sy / n) * (y - sy / n);
    }
    fit.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
}

}  // namespace radflow
