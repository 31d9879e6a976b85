#pragma once

#include <utility>
#include <vector>

#include "radflow/evolution.hpp"
#include "radflow/profile.hpp"

namespace radflow {

// Entropy plus Newtonian interaction,
//   F(u) = int u^m/(m-1) dx - (1/2) int_0^inf M(r)^2/(sigma_d r^{d-1}) dr,
// the second term being int u (u*N) dx reduced to the mass function through
// d_r(N*u) = M/(sigma_d r^{d-1}).  The integral beyond r_max uses the analytic
// constant-mass tail.
double free_energy(const RadialProfile& u, double m);

// Free energy of the confined problem: adds int |x|^2 u/(2d) dx.  Lyapunov
// functional of the rescaled flow, m = 2 - 2/d implied.
double rescaled_energy(const RadialProfile& u, int dim);

// int u | (m/(m-1)) d_r u^{m-1} + M/(sigma_d r^{d-1}) |^2 dx over the support:
// the energy-dissipation integrand of the unconfined flow.  Vanishes exactly
// on the critical stationary family.
double dissipation_defect(const RadialProfile& u, double m);

// Relative residuals of dM2/dt = 2(d-2) F(u) at interior snapshot times,
// m = 2 - 2/d.  Needs at least three snapshots.
std::vector<double> virial_check(const std::vector<EvolutionState>& snapshots, int dim);

// |int u (u*N)| / (||u||_1^{2/d} ||u||_m^m); its supremum over profiles
// estimates the sharp interpolation constant.
double hls_ratio(const RadialProfile& u, double m);

// p-Wasserstein distance of the mass-normalized profiles by the radial
// quantile formula, exact for monotone radial transport.  Masses must agree
// to 1e-8 relative.
double wasserstein(double p, const RadialProfile& a, const RadialProfile& b);

enum class RateMode { exponential, algebraic };

// Least-squares fit of log(value) against time (exponential) or log(time)
// (algebraic) over a window.
struct RateFit {
    RateMode mode = RateMode::exponential;
    double exponent = 0.0;
    double prefactor = 0.0;  // fitted log-prefactor
    double r2 = 0.0;
    double window_begin = 0.0;
    double window_end = 0.0;
    std::vector<std::pair<double, double>> points;  // the fitted subseries
};

RateFit fit_rate(const std::vector<std::pair<double, double>>& series, RateMode mode,
                 double window_begin, double window_end);
// Default window skips the initial transient: starts at 20% of the last time.
RateFit fit_rate(const std::vector<std::pair<double, double>>& series, RateMode mode);

// Runs the confined critical model from a fixed-shape datum scaled to each
// mass until tau = 6 (late enough for the smallest masses to equilibrate) and
// fits log sup-density against log mass.  All masses must lie below half the
// critical mass.
RateFit sup_density_scaling(const std::vector<double>& masses, int dim);

}  // namespace radflow
