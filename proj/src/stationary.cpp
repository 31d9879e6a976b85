#include "radflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "radflow/model.hpp"
#include "radflow/nonlocal.hpp"

namespace radflow {

namespace {

// Fine uniform-step record of one outward shot of the first-order system
//   p' = -((m-1)/m) (drift(r) + M / (sigma r^(d-1))),   p = u^(m-1)
//   M' = sigma r^(d-1) p_+^(1/(m-1))
// stopped at the first zero of p.
struct FineSolution {
    int dim = 0;
    double m = 0.0;
    double step = 0.0;
    std::vector<double> p, mass_at_node;  // node k sits at r = k * step
    double support = 0.0;
    double mass = 0.0;

    double density(double r) const {
        if (r >= support) return 0.0;
        const double t = r / step;
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), p.size() - 2);
        const double f = t - k;
        const double pv = p[k] * (1.0 - f) + p[k + 1] * f;
        return pv > 0.0 ? std::pow(pv, 1.0 / (m - 1.0)) : 0.0;
    }
    double mass_inside(double r) const {
        if (r >= support) return mass;
        const double t = r / step;
        const std::size_t k =
            std::min<std::size_t>(static_cast<std::size_t>(t), mass_at_node.size() - 2);
        const double f = t - k;
        return mass_at_node[k] * (1.0 - f) + mass_at_node[k + 1] * f;
    }
};

struct Derivs {
    double dp, dm;
};

Derivs rhs(int dim, double m, double drift_coef, double sigma, double r, double p, double mass) {
    Derivs d;
    const double u = p > 0.0 ? std::pow(p, 1.0 / (m - 1.0)) : 0.0;
    d.dm = sigma * ipow(r, dim - 1) * u;
    double v = drift_coef * r;
    if (r > 0.0) v += mass / (sigma * ipow(r, dim - 1));
    d.dp = -(m - 1.0) / m * v;
    return d;
}

void rk4_step(int dim, double m, double drift_coef, double sigma, double r, double h, double* p,
              double* mass) {
    const Derivs k1 = rhs(dim, m, drift_coef, sigma, r, *p, *mass);
    const Derivs k2 =
        rhs(dim, m, drift_coef, sigma, r + 0.5 * h, *p + 0.5 * h * k1.dp, *mass + 0.5 * h * k1.dm);
    const Derivs k3 =
        rhs(dim, m, drift_coef, sigma, r + 0.5 * h, *p + 0.5 * h * k2.dp, *mass + 0.5 * h * k2.dm);
    const Derivs k4 = rhs(dim, m, drift_coef, sigma, r + h, *p + h * k3.dp, *mass + h * k3.dm);
    *p += h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    *mass += h / 6.0 * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm);
}

// drift_coef = 0 gives the free family, 1/d the confined one
FineSolution shoot(int dim, double h, bool confined, double step) {
    const double m = critical_exponent(dim);
    const double sigma = RadialGrid::unit_sphere_area(dim);
    const double drift_coef = confined ? 1.0 / dim : 0.0;
    // crossing estimate from the drift-only linearization, used for the cap
    const double r_star = std::sqrt(2.0 * dim * m * std::pow(h, m - 2.0) / (m - 1.0));
    const double r_cap = 100.0 * r_star;

    FineSolution fs;
    fs.dim = dim;
    fs.m = m;
    fs.step = step;
    const double p0 = std::pow(h, m - 1.0);
    // Series start through the origin.  The mass/shell ratio in the drift is
    // r-singular enough that early RK4 steps carry an O(step^3) local error,
    // so the first stretch of nodes comes from the expansion
    //   p = p0 - b r^2 - c4 r^4,  M = sigma (h r^d / d + u2 r^(d+2) / (d+2))
    // after which the one-step bias has decayed below the residual target.
    const double lam = (m - 1.0) / m;
    const double b = lam * (drift_coef + h / dim) / 2.0;
    const double u2 = -h * b / ((m - 1.0) * p0);
    const double c4 = lam * u2 / (dim + 2.0) / 4.0;
    const int k_series = 32;
    double p = p0, mass = 0.0, r = 0.0;
    fs.p.push_back(p);
    fs.mass_at_node.push_back(0.0);
    for (int k = 1; k <= k_series; ++k) {
        r = k * step;
        p = p0 - b * r * r - c4 * ipow(r, 4);
        mass = sigma * (h * ipow(r, dim) / dim + u2 * ipow(r, dim + 2) / (dim + 2.0));
        fs.p.push_back(p);
        fs.mass_at_node.push_back(mass);
    }
    while (r < r_cap) {
        double pn = p, mn = mass;
        rk4_step(dim, m, drift_coef, sigma, r, step, &pn, &mn);
        if (pn <= 0.0) {
            double lo = 0.0, hi = step, ml = mass;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                double pm = p, mm = mass;
                rk4_step(dim, m, drift_coef, sigma, r, mid, &pm, &mm);
                if (pm > 0.0) {
                    lo = mid;
                    ml = mm;
                } else {
                    hi = mid;
                }
            }
            fs.support = r + 0.5 * (lo + hi);
            fs.mass = ml;
            fs.p.push_back(0.0);
            fs.mass_at_node.push_back(ml);
            return fs;
        }
        p = pn;
        mass = mn;
        r += step;
        fs.p.push_back(p);
        fs.mass_at_node.push_back(mass);
    }
    throw std::runtime_error("shoot: profile did not vanish before the radius cap");
}

// independent check of the first-order balance on the fine nodes, using a
// five-point derivative so the finite-difference error sits far below the
// integrator's
double fine_residual(const FineSolution& fs, bool confined) {
    const int dim = fs.dim;
    const double m = fs.m;
    const double sigma = RadialGrid::unit_sphere_area(dim);
    const double s = fs.step;
    const std::size_t n = fs.p.size();
    double worst = 0.0;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        const double r = k * s;
        if (r > 0.95 * fs.support) break;
        const double dp =
            (-fs.p[k + 2] + 8.0 * fs.p[k + 1] - 8.0 * fs.p[k - 1] + fs.p[k - 2]) / (12.0 * s);
        double v = fs.mass_at_node[k] / (sigma * ipow(r, dim - 1));
        if (confined) v += r / dim;
        worst = std::max(worst, std::abs(m / (m - 1.0) * dp + v));
    }
    return worst;
}

RadialProfile sample_onto(const FineSolution& fs, const RadialGrid& g) {
    if (fs.support > g.r_max())
        throw std::invalid_argument("stationary profile does not fit inside the grid");
    std::vector<double> v(g.n_cells(), 0.0);
    for (int i = 0; i < g.n_cells(); ++i) {
        const double a = g.face(i), b = g.face(i + 1);
        if (a < fs.support && fs.support <= b) {
            // edge cell: assign the fine mass inside the cell, spread over it
            v[i] = (fs.mass - fs.mass_inside(a)) / g.cell_volume(i);
        } else {
            v[i] = fs.density(g.center(i));
        }
    }
    return RadialProfile(g, v);
}

StationaryResult package(const FineSolution& fs, const RadialGrid& g, double h, bool confined) {
    StationaryResult res{sample_onto(fs, g), fs.support, fs.mass, h, fine_residual(fs, confined)};
    return res;
}

double default_step(int dim, double h) {
    const double m = critical_exponent(dim);
    const double r_star = std::sqrt(2.0 * dim * m * std::pow(h, m - 2.0) / (m - 1.0));
    return r_star / 4096.0;
}

}  // namespace

StationaryResult solve_u1(int dim, double central_density) {
    if (central_density <= 0.0) throw std::invalid_argument("solve_u1: central density must be > 0");
    FineSolution fs = shoot(dim, central_density, false, default_step(dim, central_density));
    RadialGrid g(dim, 1.25 * fs.support, 512);
    return package(fs, g, central_density, false);
}

StationaryResult solve_u1(int dim, double central_density, const RadialGrid& grid) {
    if (central_density <= 0.0) throw std::invalid_argument("solve_u1: central density must be > 0");
    if (grid.dim() != dim) throw std::invalid_argument("solve_u1: grid dimension mismatch");
    const double step = std::min(default_step(dim, central_density), grid.dr() / 16.0);
    FineSolution fs = shoot(dim, central_density, false, step);
    return package(fs, grid, central_density, false);
}

double critical_mass(int dim) {
    static std::mutex mu;
    static std::map<int, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(dim);
    if (it != cache.end()) return it->second;
    const double step = default_step(dim, 1.0);
    const double coarse = shoot(dim, 1.0, false, step).mass;
    const double fine = shoot(dim, 1.0, false, 0.5 * step).mass;
    const double mc = (16.0 * fine - coarse) / 15.0;
    cache.emplace(dim, mc);
    return mc;
}

namespace {

// Bisect the central density until the confined shot carries the target mass.
FineSolution shoot_for_mass(int dim, double mass, double step_cap) {
    const double mc = critical_mass(dim);
    if (!(mass > 0.0)) throw std::invalid_argument("solve_mu_A: mass must be positive");
    if (mass >= mc) {
        std::ostringstream os;
        os << "solve_mu_A: mass " << mass << " is supercritical (critical mass " << mc << ")";
        throw std::invalid_argument(os.str());
    }
    auto mass_of = [&](double h) {
        return shoot(dim, h, true, std::min(default_step(dim, h), step_cap)).mass;
    };
    double h_hi = 1.0;
    while (mass_of(h_hi) < mass) {
        h_hi *= 8.0;
        if (h_hi > 1e14)
            throw std::runtime_error("solve_mu_A: central density bracket blew up");
    }
    double h_lo = h_hi / 8.0;
    while (h_lo > 0.0 && mass_of(h_lo) > mass) h_lo /= 8.0;
    for (int it = 0; it < 200; ++it) {
        const double h = 0.5 * (h_lo + h_hi);
        const double got = mass_of(h);
        if (std::abs(got - mass) <= 1e-10 * mass) {
            return shoot(dim, h, true, std::min(default_step(dim, h), step_cap));
        }
        (got < mass ? h_lo : h_hi) = h;
        if (h_hi - h_lo <= 1e-15 * h_hi) break;
    }
    return shoot(dim, 0.5 * (h_lo + h_hi), true,
                 std::min(default_step(dim, 0.5 * (h_lo + h_hi)), step_cap));
}

}  // namespace

StationaryResult solve_mu_A(int dim, double mass) {
    FineSolution fs = shoot_for_mass(dim, mass, 1e300);
    RadialGrid g(dim, 1.25 * fs.support, 512);
    const double h = fs.density(0.0);
    return package(fs, g, h, true);
}

StationaryResult solve_mu_A(int dim, double mass, const RadialGrid& grid) {
    if (grid.dim() != dim) throw std::invalid_argument("solve_mu_A: grid dimension mismatch");
    FineSolution fs = shoot_for_mass(dim, mass, grid.dr() / 16.0);
    const double h = fs.density(0.0);
    return package(fs, grid, h, true);
}

StationaryResult solve_us(int dim, double q, double mass, int n_cells) {
    if (!(mass > 0.0)) throw std::invalid_argument("solve_us: mass must be positive");
    if (q <= 2.0 - dim || q > 2.0)
        throw std::invalid_argument("solve_us: q must lie in (2 - dim, 2]");
    const double sigma = RadialGrid::unit_sphere_area(dim);
    const double r_flat = std::pow(sigma, -1.0 / dim);  // exact support at q = 2
    RadialGrid g(dim, 2.0 * r_flat, n_cells);
    const KernelMatrix& km = KernelMatrix::get(g, q);

    const double omega = 0.5;
    double radius = r_flat;
    std::vector<double> u(g.n_cells(), 0.0);
    for (int i = 0; i < g.n_cells(); ++i)
        if (g.center(i) < radius) u[i] = 1.0;
    auto renorm = [&](std::vector<double>& v) {
        double s = 0.0;
        for (int i = 0; i < g.n_cells(); ++i) s += v[i] * g.cell_volume(i);
        if (s <= 0.0) throw std::runtime_error("solve_us: iteration lost all mass");
        const double c = mass / s;
        for (double& x : v) x *= c;
    };
    renorm(u);

    std::vector<double> defects;
    double defect = 1.0;
    for (int iter = 0; iter < 2000; ++iter) {
        std::vector<double> w = km.apply(u);

        // support update first: move toward the radius where the cumulative
        // field mass reaches the total, the zero-velocity condition there;
        // invert the piecewise-constant cumulative exactly in r^d
        double r_star = radius, acc = 0.0;
        for (int f = 0; f < g.n_cells(); ++f) {
            const double next = acc + w[f] * g.cell_volume(f);
            if (next >= mass) {
                if (w[f] > 0.0) {
                    const double rd =
                        ipow(g.face(f), dim) + (mass - acc) * dim / (sigma * w[f]);
                    r_star = std::pow(rd, 1.0 / dim);
                } else {
                    r_star = g.face(f);
                }
                break;
            }
            acc = next;
        }
        radius = (1.0 - omega) * radius + omega * r_star;

        // restrict to the ball of the current support radius, fractional on
        // the edge cell
        std::vector<double> nu(g.n_cells(), 0.0);
        for (int i = 0; i < g.n_cells(); ++i) {
            const double a = g.face(i), b = g.face(i + 1);
            if (b <= radius) {
                nu[i] = w[i];
            } else if (a < radius) {
                const double frac =
                    (ipow(radius, dim) - ipow(a, dim)) / (ipow(b, dim) - ipow(a, dim));
                nu[i] = w[i] * frac;
            }
        }
        renorm(nu);
        defect = 0.0;
        for (int i = 0; i < g.n_cells(); ++i) {
            if (g.face(i + 1) <= radius) defect = std::max(defect, std::abs(nu[i] - u[i]));
            u[i] = (1.0 - omega) * u[i] + omega * nu[i];
        }
        defect /= std::max(u[0], 1e-300);
        defects.push_back(defect);
        if (defect < 1e-12 && std::abs(r_star - radius) < 1e-12 * radius) break;
    }
    if (defect > 1e-8) {
        std::ostringstream os;
        os << "solve_us: fixed point did not converge; defect history tail:";
        for (std::size_t k = defects.size() > 6 ? defects.size() - 6 : 0; k < defects.size(); ++k)
            os << " " << defects[k];
        throw std::runtime_error(os.str());
    }

    RadialProfile prof(g, u);
    // report the residual of the defining balance on interior cells
    std::vector<double> w = km.apply(u);
    double res = 0.0;
    for (int i = 0; i < g.n_cells(); ++i)
        if (g.face(i + 1) <= radius) res = std::max(res, std::abs(w[i] - u[i]));
    res /= std::max(u[0], 1e-300);
    double mt_at_r = 0.0;
    for (int f = 0; f < g.n_cells(); ++f) {
        if (g.face(f + 1) <= radius) {
            mt_at_r += w[f] * g.cell_volume(f);
        } else {
            mt_at_r += w[f] * sigma / dim * (ipow(radius, dim) - ipow(g.face(f), dim));
            break;
        }
    }
    res = std::max(res, std::abs(mt_at_r - mass) / mass);
    return StationaryResult{prof, radius, prof.total_mass(), u[0], res};
}

namespace {

double fp_mass(int dim, double c, double b) {
    // sigma int_0^R (c - b r^2)^(1/(m-1)) r^(d-1) dr, R = sqrt(c/b)
    const double m = critical_exponent(dim);
    const double sigma = RadialGrid::unit_sphere_area(dim);
    const double R = std::sqrt(c / b);
    static GaussLegendre gl(64);
    double acc = 0.0;
    for (std::size_t k = 0; k < gl.x.size(); ++k) {
        const double r = 0.5 * R * (gl.x[k] + 1.0);
        const double val = std::max(0.0, c - b * r * r);
        acc += gl.w[k] * std::pow(val, 1.0 / (m - 1.0)) * ipow(r, dim - 1);
    }
    return sigma * acc * 0.5 * R;
}

}  // namespace

StationaryResult fokker_planck_profile(int dim, double a, double mass) {
    if (!(a > 0.0) || !(mass > 0.0))
        throw std::invalid_argument("fokker_planck_profile: a and mass must be positive");
    const double m = critical_exponent(dim);
    const double b = a * (m - 1.0) / (2.0 * m);
    // rough bracket from the pure power scaling of mass in C
    double c_hi = 1.0;
    while (fp_mass(dim, c_hi, b) < mass) c_hi *= 4.0;
    const double support = std::sqrt(c_hi / b);
    RadialGrid g(dim, 1.25 * support, 512);
    return fokker_planck_profile(dim, a, mass, g);
}

StationaryResult fokker_planck_profile(int dim, double a, double mass, const RadialGrid& grid) {
    if (!(a > 0.0) || !(mass > 0.0))
        throw std::invalid_argument("fokker_planck_profile: a and mass must be positive");
    if (grid.dim() != dim)
        throw std::invalid_argument("fokker_planck_profile: grid dimension mismatch");
    const double m = critical_exponent(dim);
    const double b = a * (m - 1.0) / (2.0 * m);
    double c_lo = 0.0, c_hi = 1.0;
    while (fp_mass(dim, c_hi, b) < mass) {
        c_hi *= 4.0;
        if (c_hi > 1e300) throw std::runtime_error("fokker_planck_profile: bracket blew up");
    }
    for (int it = 0; it < 200; ++it) {
        const double c = 0.5 * (c_lo + c_hi);
        (fp_mass(dim, c, b) < mass ? c_lo : c_hi) = c;
    }
    const double c = 0.5 * (c_lo + c_hi);
    const double support = std::sqrt(c / b);
    if (support > grid.r_max())
        throw std::invalid_argument("fokker_planck_profile: support exceeds the grid");
    std::vector<double> v(grid.n_cells(), 0.0);
    for (int i = 0; i < grid.n_cells(); ++i) {
        const double r = grid.center(i);
        const double val = c - b * r * r;
        v[i] = val > 0.0 ? std::pow(val, 1.0 / (m - 1.0)) : 0.0;
    }
    RadialProfile prof(grid, v);
    const double res = std::abs(fp_mass(dim, c, b) - mass) / mass;
    return StationaryResult{prof, support, fp_mass(dim, c, b), std::pow(c, 1.0 / (m - 1.0)), res};
}

}  // namespace radflow
