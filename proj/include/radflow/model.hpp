#pragma once

#include <string>
#include <vector>

#include "radflow/profile.hpp"

namespace radflow {

// Attraction kernel whose Laplacian (q + d - 2) |x|^(q-2) drives the nonlocal
// drift.  q = 0 stands for the logarithmic kernel; admissible q is (2-d, 2].
struct KernelSpec {
    enum class Kind { none, power_law };
    Kind kind = Kind::none;
    double q = 0.0;

    static KernelSpec none() { return {}; }
    static KernelSpec power_law(double q) { return {Kind::power_law, q}; }
};

// External confining potential V(r); quadratic means V = a r^2 / 2.
struct PotentialSpec {
    enum class Kind { none, quadratic };
    Kind kind = Kind::none;
    double a = 0.0;

    static PotentialSpec none() { return {}; }
    static PotentialSpec quadratic(double a) { return {Kind::quadratic, a}; }

    double slope(double r) const { return kind == Kind::quadratic ? a * r : 0.0; }
};

// u_t = c1 Lap(u^m) + div(u grad(u * (c2 N + c3 K) + V)) with N the Newtonian
// potential normalized so Lap(N) = delta.
struct ModelSpec {
    int dim = 3;
    double m = 1.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    KernelSpec kernel;
    PotentialSpec potential;

    void validate() const;
    bool has_diffusion() const { return c1 > 0.0; }
};

double critical_exponent(int dim);  // 2 - 2/d
bool is_critical(const ModelSpec& spec);

// Named parameter bundles:
//   pks_original       critical aggregation-diffusion, no potential
//   pks_rescaled       same plus the quadratic drift r/d of similarity variables
//   porous_medium      bare degenerate diffusion
//   aggregation        pure transport, repulsive Newtonian + power-law attraction
//   fokker_planck      degenerate diffusion in a quadratic well
ModelSpec preset(const std::string& name, int dim, double q = 0.0, double a = 0.0);

// Advective speed multiplying dM/dr in the mass-function form of the equation,
// evaluated at every face; zero at r = 0 by symmetry.
std::vector<double> radial_velocity(const ModelSpec& spec, const RadialProfile& u);

}  // namespace radflow
