#include "radflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace radflow {

RadialProfile::RadialProfile(RadialGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n_cells())
        throw std::invalid_argument("RadialProfile: values size does not match n_cells");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0)
            throw std::invalid_argument("RadialProfile: cell " + std::to_string(i) +
                                        " is negative or not finite");
    }
}

double RadialProfile::total_mass() const {
    double m = 0.0;
    for (int i = 0; i < grid.n_cells(); ++i) m += values[i] * grid.cell_volume(i);
    return m;
}

double RadialProfile::sup_density() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

MassFunction::MassFunction(RadialGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n_cells() + 1)
        throw std::invalid_argument("MassFunction: values size does not match n_cells + 1");
    if (values[0] != 0.0)
        throw std::invalid_argument("MassFunction: value at r = 0 must be zero");
}

MassFunction mass_function(const RadialProfile& u) {
    const int n = u.grid.n_cells();
    std::vector<double> m(n + 1, 0.0);
    for (int i = 0; i < n; ++i) m[i + 1] = m[i] + u.values[i] * u.grid.cell_volume(i);
    return MassFunction(u.grid, std::move(m));
}

RadialProfile density_from_mass(const MassFunction& m) {
    const int n = m.grid.n_cells();
    const double tol = 1e-12 * std::max(m.total(), 0.0);
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) {
        double dm = m.values[i + 1] - m.values[i];
        if (dm < -tol)
            throw std::invalid_argument("density_from_mass: decreasing mass at face " +
                                        std::to_string(i + 1) + " (r = " +
                                        std::to_string(m.grid.face(i + 1)) + ")");
        u[i] = std::max(dm, 0.0) / m.grid.cell_volume(i);
    }
    return RadialProfile(m.grid, std::move(u));
}

double mass_at(const MassFunction& m, double r) {
    const RadialGrid& g = m.grid;
    if (r <= 0.0) return 0.0;
    if (r >= g.r_max()) return m.total();
    int i = std::min(static_cast<int>(r / g.dr()), g.n_cells() - 1);
    if (r < g.face(i)) --i;
    if (r > g.face(i + 1)) ++i;
    const double cell_mass = m.values[i + 1] - m.values[i];
    const double frac = (ipow(r, g.dim()) - ipow(g.face(i), g.dim())) /
                        (ipow(g.face(i + 1), g.dim()) - ipow(g.face(i), g.dim()));
    return m.values[i] + cell_mass * frac;
}

double quantile(const MassFunction& m, double s) {
    const RadialGrid& g = m.grid;
    const double total = m.total();
    const double slack = 1e-12 * std::max(total, 1.0);
    if (s < -slack || s > total + slack)
        throw std::invalid_argument("quantile: mass value outside [0, total]");
    s = std::clamp(s, 0.0, total);
    if (s <= 0.0) return 0.0;
    // first face with M >= s; the crossing lives in the cell just inside
    auto it = std::lower_bound(m.values.begin(), m.values.end(), s);
    int f = static_cast<int>(it - m.values.begin());
    if (f == 0) return 0.0;
    const int c = f - 1;
    const double dm = m.values[f] - m.values[c];
    if (dm <= 0.0) return g.face(f);
    const double frac = (s - m.values[c]) / dm;
    const double pd = ipow(g.face(c), g.dim()) +
                      frac * (ipow(g.face(f), g.dim()) - ipow(g.face(c), g.dim()));
    return std::pow(pd, 1.0 / g.dim());
}

RadialProfile decreasing_rearrangement(const RadialProfile& u) {
    const int n = u.grid.n_cells();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return u.values[a] > u.values[b]; });
    // cumulative volume of the sorted value stream and of the cells themselves
    std::vector<double> ws(n + 1, 0.0), vs(n + 1, 0.0);
    for (int k = 0; k < n; ++k) ws[k + 1] = ws[k] + u.grid.cell_volume(order[k]);
    for (int i = 0; i < n; ++i) vs[i + 1] = vs[i] + u.grid.cell_volume(i);
    std::vector<double> out(n, 0.0);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        while (k < n && ws[k] < vs[i + 1]) {
            const double overlap = std::min(ws[k + 1], vs[i + 1]) - std::max(ws[k], vs[i]);
            if (overlap > 0.0) acc += overlap * u.values[order[k]];
            if (ws[k + 1] > vs[i + 1]) break;
            ++k;
        }
        out[i] = acc / u.grid.cell_volume(i);
    }
    return RadialProfile(u.grid, std::move(out));
}

double second_moment(const RadialProfile& u) {
    double m2 = 0.0;
    for (int i = 0; i < u.grid.n_cells(); ++i) {
        const double r = u.grid.center(i);
        m2 += u.values[i] * r * r * u.grid.cell_volume(i);
    }
    return m2;
}

RadialProfile scale_profile(const RadialProfile& u, double c) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("scale_profile: factor must be positive and finite");
    const RadialGrid& g = u.grid;
    const MassFunction m = mass_function(u);
    const double total = m.total();
    if (c > 1.0) {
        const double inside = mass_at(m, g.r_max() / c);
        if (total - inside > 1e-12 * std::max(total, 1.0))
            throw std::invalid_argument("scale_profile: scaled support exceeds r_max");
    }
    const int n = g.n_cells();
    std::vector<double> out(n);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cur = mass_at(m, g.face(i + 1) / c);
        out[i] = std::max(cur - prev, 0.0) / g.cell_volume(i);
        prev = cur;
    }
    return RadialProfile(g, std::move(out));
}

RadialProfile resample(const RadialProfile& u, const RadialGrid& g) {
    if (g.dim() != u.grid.dim())
        throw std::invalid_argument("resample: dimension mismatch");
    const MassFunction m = mass_function(u);
    const double total = m.total();
    if (total - mass_at(m, g.r_max()) > 1e-12 * std::max(total, 1.0))
        throw std::invalid_argument("resample: support exceeds target r_max");
    const int n = g.n_cells();
    std::vector<double> out(n);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cur = mass_at(m, g.face(i + 1));
        out[i] = std::max(cur - prev, 0.0) / g.cell_volume(i);
        prev = cur;
    }
    return RadialProfile(g, std::move(out));
}

void write_profile_csv(const RadialProfile& u, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_profile_csv: cannot open " + path);
    std::fputs("r,u\n", f);
    for (int i = 0; i < u.grid.n_cells(); ++i)
        std::fprintf(f, "%.17g,%.17g\n", u.grid.center(i), u.values[i]);
    std::fclose(f);
}

RadialProfile read_profile_csv(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_profile_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("r,u", 0) != 0)
        throw std::runtime_error("read_profile_csv: missing r,u header in " + path);
    std::vector<double> r, u;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double rv, uv;
        char comma;
        if (!(ls >> rv >> comma >> uv) || comma != ',')
            throw std::runtime_error("read_profile_csv: malformed line '" + line + "'");
        r.push_back(rv);
        u.push_back(uv);
    }
    if (r.size() < 8) throw std::runtime_error("read_profile_csv: fewer than 8 cells");
    const double dr = 2.0 * r[0];
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (std::abs(r[i] - (i + 0.5) * dr) > 1e-9 * std::max(1.0, r.back()))
            throw std::runtime_error("read_profile_csv: cell centers are not uniform");
    }
    RadialGrid g(dim, dr * static_cast<double>(r.size()), static_cast<int>(r.size()));
    return RadialProfile(g, std::move(u));
}

}  // namespace radflow
