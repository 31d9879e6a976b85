#pragma once

#include "radflow/profile.hpp"
#include "radflow/stationary.hpp"

namespace radflow {

enum class BarrierOde { pks_rescaled, aggregation };
enum class BarrierRole { subsolution, supersolution, exact_solution };

// Scaled copy of a stationary profile, R(t)^{-d} base(x / R(t)), with the
// scaling radius driven by a scalar ODE toward R = 1.  For the confined
// critical model the family member is itself an exact solution; for the
// aggregation model the family brackets solutions from below (rate built from
// the average steady density) or, heuristically, from above (sup density).
struct BarrierFamily {
    StationaryResult base;
    double R0;
    BarrierOde ode;
    BarrierRole role;
    double rate;  // C1 in R' = C1 (1 - R^{d+q-2}) R^{1-d}; aggregation only
    double q;     // kernel exponent entering the aggregation ODE

    BarrierFamily(StationaryResult base_profile, double initial_radius, BarrierOde radius_ode,
                  BarrierRole barrier_role, double rate_constant = 1.0, double kernel_q = 2.0);
    void validate() const;
};

// R(tau) by closed form where one exists: confined model
// R = (1 + (R0^d - 1) e^{-tau})^{1/d}; aggregation at q = 2 via S = R^d,
// S' = C1 d (1 - S).  Other aggregation exponents integrate the ODE.
double scaling_radius(const BarrierFamily& family, double tau);

// Same radius by direct one-step integration of the ODE, used to cross-check
// the closed forms.
double scaling_radius_numeric(const BarrierFamily& family, double tau);

// Base profile dilated by scaling_radius(tau), conservatively rebinned.  Mass
// equals the base mass at every tau.  The grid overload rebins onto a caller
// grid, which is how families with R0 > 1 get the headroom the base grid
// lacks.  Throws if the scaled support does not fit.
RadialProfile barrier_profile(const BarrierFamily& family, double tau);
RadialProfile barrier_profile(const BarrierFamily& family, double tau, const RadialGrid& grid);

// Result of the mass-function comparison at every face.  worst_violation is 0
// when ordered and the largest M_lower - M_upper excess otherwise.
struct OrderingReport {
    bool ordered = true;
    double worst_violation = 0.0;
    double at_radius = 0.0;
};

// Checks M_lower(r) <= M_upper(r) at every grid face ("lower is less
// concentrated than upper").  Grids must match.
OrderingReport check_ordering(const RadialProfile& lower, const RadialProfile& upper);

// C1 = (average density of the steady state over its support ball) / d, the
// rate constant of the subsolution family.
double aggregation_rate_constant(const StationaryResult& us, int dim);

// Same formula with the sup density in place of the average: heuristic rate
// for the supersolution family, not certified by theory.
double supersolution_rate_constant(const StationaryResult& us, int dim);

}  // namespace radflow
