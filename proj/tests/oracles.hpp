#pragma once

// Self-contained numerical oracles for the test suite.  These deliberately
// avoid the library's own quadrature and solver code paths so that agreement
// is meaningful.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "radflow/profile.hpp"

namespace oracle {

// exact cell averages of a uniform ball, normalized to the requested mass
inline radflow::RadialProfile uniform_ball(const radflow::RadialGrid& g, double radius,
                                           double mass) {
    std::vector<double> v(g.n_cells(), 0.0);
    for (int i = 0; i < g.n_cells(); ++i) {
        const double lo = g.face(i), hi = g.face(i + 1);
        if (lo >= radius) break;
        v[i] = (radflow::ipow(std::min(hi, radius), g.dim()) - radflow::ipow(lo, g.dim())) /
               (radflow::ipow(hi, g.dim()) - radflow::ipow(lo, g.dim()));
    }
    radflow::RadialProfile u(g, std::move(v));
    const double s = mass / u.total_mass();
    for (double& x : u.values) x *= s;
    return u;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// composite Gauss-Legendre with nodes found by Newton iteration on P_n
struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
    explicit GaussRule(int n) {
        x.resize(n);
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            x[i] = t;
            w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
    double integrate(const std::function<double(double)>& f, double a, double b) const {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            s += w[i] * f(0.5 * (a + b) + 0.5 * (b - a) * x[i]);
        return s * 0.5 * (b - a);
    }
};

// Lane-Emden: theta'' + ((dim - 1)/xi) theta' + theta^p = 0, theta(0) = 1.
// Returns the first zero xi1 and theta'(xi1).
inline void lane_emden(double p, int dim, double h, double* xi1, double* dtheta) {
    auto acc = [&](double x, double t, double dt) {
        const double tp = t > 0.0 ? std::pow(t, p) : 0.0;
        return -tp - (dim - 1) / x * dt;
    };
    double xi, th, dth;
    // series start to step off the regular singular point
    xi = h;
    th = 1.0 - xi * xi / (2.0 * dim);
    dth = -xi / dim;
    while (th > 0.0) {
        const double k1t = dth, k1d = acc(xi, th, dth);
        const double k2t = dth + 0.5 * h * k1d, k2d = acc(xi + 0.5 * h, th + 0.5 * h * k1t, dth + 0.5 * h * k1d);
        const double k3t = dth + 0.5 * h * k2d, k3d = acc(xi + 0.5 * h, th + 0.5 * h * k2t, dth + 0.5 * h * k2d);
        const double k4t = dth + h * k3d, k4d = acc(xi + h, th + h * k3t, dth + h * k3d);
        const double thn = th + h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t);
        const double dthn = dth + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
        if (thn <= 0.0) {
            const double f = th / (th - thn);
            *xi1 = xi + f * h;
            *dtheta = dth + f * (dthn - dth);
            return;
        }
        th = thn;
        dth = dthn;
        xi += h;
    }
    throw std::runtime_error("lane_emden: no zero found");
}

// deterministic bump-sum profile values on given cell centers
inline std::vector<double> random_profile(const std::vector<double>& centers, double r_span,
                                          std::uint64_t seed, int bumps = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> amp(bumps), loc(bumps), wid(bumps);
    for (int b = 0; b < bumps; ++b) {
        amp[b] = 0.2 + uni(rng);
        loc[b] = 0.6 * r_span * uni(rng);
        wid[b] = r_span * (0.08 + 0.25 * uni(rng));
    }
    std::vector<double> v(centers.size(), 0.0);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (int b = 0; b < bumps; ++b) {
            const double z = (centers[i] - loc[b]) / wid[b];
            if (std::abs(z) < 1.0) v[i] += amp[b] * (1.0 - z * z) * (1.0 - z * z);
        }
    }
    return v;
}

}  // namespace oracle
