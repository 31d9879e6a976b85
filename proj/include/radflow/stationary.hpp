#pragma once

#include "radflow/profile.hpp"

namespace radflow {

// Output of the steady-profile solvers.  support_radius, total_mass and
// central_density come from the fine solver state; residual is the defect of
// the defining equation measured independently on that state, not on the
// cell-sampled profile.
struct StationaryResult {
    RadialProfile profile;
    double support_radius = 0.0;
    double total_mass = 0.0;
    double central_density = 0.0;
    double residual = 0.0;
};

// Compactly supported solution of (m/(m-1)) Lap(u^(m-1)) + u = 0, m = 2 - 2/d,
// shot outward from u(0) = h until u vanishes.  At the critical exponent the
// total mass is the same for every h.
StationaryResult solve_u1(int dim, double central_density);
StationaryResult solve_u1(int dim, double central_density, const RadialGrid& grid);

// Mass of the family above, Richardson-extrapolated across step halving and
// cached per dimension.
double critical_mass(int dim);

// Steady profile of the self-similar (confined) critical equation with
// requested mass A < critical_mass(dim): shooting on the central density.
StationaryResult solve_mu_A(int dim, double mass);
StationaryResult solve_mu_A(int dim, double mass, const RadialGrid& grid);

// Steady state of the aggregation model, u = (q+d-2)|x|^(q-2) * u on its
// support, by damped fixed-point iteration with mass renormalization.  The
// support radius depends only on (d, q); values scale linearly with mass.
StationaryResult solve_us(int dim, double q, double mass, int n_cells = 256);

// Barenblatt-type profile (C - a ((m-1)/(2m)) r^2)_+^(1/(m-1)) with C fixed by
// the mass constraint, m = 2 - 2/d.
StationaryResult fokker_planck_profile(int dim, double a, double mass);
StationaryResult fokker_planck_profile(int dim, double a, double mass, const RadialGrid& grid);

}  // namespace radflow
