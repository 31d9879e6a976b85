#pragma once

#include <string>
#include <vector>

#include "radflow/grid.hpp"

namespace radflow {

// Nonnegative cell-averaged radial density.
struct RadialProfile {
    RadialGrid grid;
    std::vector<double> values;  // one per cell

    RadialProfile(RadialGrid g, std::vector<double> v);

    double total_mass() const;
    double sup_density() const;
};

// Cumulative mass over centered balls, stored at the n_cells + 1 faces.
// values[0] == 0 and the sequence is nondecreasing.
struct MassFunction {
    RadialGrid grid;
    std::vector<double> values;  // one per face

    MassFunction(RadialGrid g, std::vector<double> v);

    double total() const { return values.back(); }
};

MassFunction mass_function(const RadialProfile& u);
RadialProfile density_from_mass(const MassFunction& m);

// Mass inside radius r, exact for the piecewise-constant density underlying m.
double mass_at(const MassFunction& m, double r);

// Smallest radius enclosing mass s; exact inverse of the piecewise-constant
// cumulative mass (r^d interpolation inside a cell).
double quantile(const MassFunction& m, double s);

// Radially nonincreasing profile carrying the same cell-value distribution:
// cell values are sorted by value and refilled outward in volume order.
RadialProfile decreasing_rearrangement(const RadialProfile& u);

// int |x|^2 u dx by the midpoint rule over cells
double second_moment(const RadialProfile& u);

// Mass-preserving dilation c^{-d} u(x / c): the scaled mass function is
// M(r / c), rebinned conservatively onto the same grid.  Throws if c > 1
// pushes support past r_max.
RadialProfile scale_profile(const RadialProfile& u, double c);

// Conservative rebinning onto another grid of the same dimension: each target
// cell receives exactly the source mass inside it.  Throws if the support does
// not fit inside the target grid.
RadialProfile resample(const RadialProfile& u, const RadialGrid& g);

void write_profile_csv(const RadialProfile& u, const std::string& path);
RadialProfile read_profile_csv(const std::string& path, int dim);

}  // namespace radflow
