#pragma once

#include <vector>

#include "radflow/profile.hpp"

namespace radflow {

// Gauss-Legendre nodes on [0, pi] carrying the spherical weight sin^(d-2).
struct AngularQuadrature {
    int dim = 3;
    int order = 64;
    std::vector<double> theta, weight;

    static AngularQuadrature make(int dim, int order = 64);
    double total_weight() const;
};

// Raw Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n);
};

// I(r, s) = int_0^pi (r^2 + s^2 - 2 r s cos t)^((q-2)/2) sin^(d-2) t dt.
// Closed form in d = 3; elsewhere the angle is split at pi/3 and the inner
// (near-singular) part is integrated in the chord-distance variable with the
// power absorbed by substitution, the outer part by the angular quadrature.
double angular_distance_integral(int dim, double q, double r, double s);
double angular_distance_integral_quadrature(int dim, double q, double r, double s,
                                            int angular_order = 64);

// Dense discretization of u -> (q + d - 2) |x|^(q-2) * u at cell centers,
// built once per (grid, q) and cached.  Row i applied to cell values gives the
// convolution at center i; entries are nonnegative.
class KernelMatrix {
public:
    static const KernelMatrix& get(const RadialGrid& g, double q);
    static KernelMatrix build(const RadialGrid& g, double q, int angular_order = 64,
                              bool force_quadrature = false);

    std::vector<double> apply(const std::vector<double>& cell_values) const;
    double entry(int i, int j) const { return entries_[static_cast<std::size_t>(i) * n_ + j]; }
    int size() const { return n_; }

private:
    KernelMatrix(int n, std::vector<double> e) : n_(n), entries_(std::move(e)) {}
    int n_ = 0;
    std::vector<double> entries_;
};

// slope of the Newtonian potential of u: M(r) / (sigma_d r^(d-1))
double newtonian_slope(const MassFunction& m, double r);

RadialProfile kernel_convolution(const RadialProfile& u, double q);

// cumulative integral of the convolution over centered balls, face-aligned
MassFunction m_tilde(const RadialProfile& u, double q);

}  // namespace radflow
