#include "radflow/barriers.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace radflow {

BarrierFamily::BarrierFamily(StationaryResult base_profile, double initial_radius,
                             BarrierOde radius_ode, BarrierRole barrier_role,
                             double rate_constant, double kernel_q)
    : base(std::move(base_profile)),
      R0(initial_radius),
      ode(radius_ode),
      role(barrier_role),
      rate(rate_constant),
      q(kernel_q) {}

void BarrierFamily::validate() const {
    if (!(R0 > 0.0) || !std::isfinite(R0))
        throw std::invalid_argument("BarrierFamily: R0 must be positive and finite");
    if (!(base.total_mass > 0.0))
        throw std::invalid_argument("BarrierFamily: base profile must carry positive mass");
    const int d = base.profile.grid.dim();
    if (ode == BarrierOde::aggregation) {
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw std::invalid_argument("BarrierFamily: aggregation rate must be positive");
        if (!(q > 2.0 - d) || !(q <= 2.0))
            throw std::invalid_argument("BarrierFamily: q must lie in (2-d, 2]");
    }
}

double scaling_radius(const BarrierFamily& family, double tau) {
    family.validate();
    if (!(tau >= 0.0))
        throw std::invalid_argument("scaling_radius: tau must be nonnegative");
    const int d = family.base.profile.grid.dim();
    const double s0 = std::pow(family.R0, d) - 1.0;
    if (family.ode == BarrierOde::pks_rescaled)
        return std::pow(1.0 + s0 * std::exp(-tau), 1.0 / d);
    if (family.q == 2.0)
        return std::pow(1.0 + s0 * std::exp(-family.rate * d * tau), 1.0 / d);
    return scaling_radius_numeric(family, tau);
}

double scaling_radius_numeric(const BarrierFamily& family, double tau) {
    family.validate();
    if (!(tau >= 0.0))
        throw std::invalid_argument("scaling_radius: tau must be nonnegative");
    const int d = family.base.profile.grid.dim();
    const bool agg = family.ode == BarrierOde::aggregation;
    const double c = agg ? family.rate : 1.0 / d;
    const double p = agg ? d + family.q - 2.0 : static_cast<double>(d);
    auto rhs = [&](double r) { return c * (1.0 - std::pow(r, p)) * std::pow(r, 1.0 - d); };
    const double step = 1e-3 / (c * p);
    double r = family.R0;
    double t = 0.0;
    while (tau - t > 1e-15 * (1.0 + tau)) {
        const double h = std::min(step, tau - t);
        const double k1 = rhs(r);
        const double k2 = rhs(r + 0.5 * h * k1);
        const double k3 = rhs(r + 0.5 * h * k2);
        const double k4 = rhs(r + h * k3);
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return r;
}

RadialProfile barrier_profile(const BarrierFamily& family, double tau) {
    return scale_profile(family.base.profile, scaling_radius(family, tau));
}

RadialProfile barrier_profile(const BarrierFamily& family, double tau, const RadialGrid& grid) {
    return scale_profile(resample(family.base.profile, grid), scaling_radius(family, tau));
}

OrderingReport check_ordering(const RadialProfile& lower, const RadialProfile& upper) {
    const RadialGrid& g = lower.grid;
    if (g.dim() != upper.grid.dim() || g.n_cells() != upper.grid.n_cells() ||
        g.r_max() != upper.grid.r_max())
        throw std::invalid_argument("check_ordering: profiles live on different grids");
    const MassFunction ml = mass_function(lower);
    const MassFunction mu = mass_function(upper);
    OrderingReport rep;
    int at = 0;
    for (int f = 0; f <= g.n_cells(); ++f) {
        const double excess = ml.values[f] - mu.values[f];
        if (excess > rep.worst_violation) {
            rep.worst_violation = excess;
            at = f;
        }
    }
    rep.ordered = rep.worst_violation == 0.0;
    rep.at_radius = g.face(at);
    return rep;
}

double aggregation_rate_constant(const StationaryResult& us, int dim) {
    if (dim != us.profile.grid.dim())
        throw std::invalid_argument("aggregation_rate_constant: dimension mismatch");
    if (!(us.support_radius > 0.0) || !(us.total_mass > 0.0))
        throw std::invalid_argument("aggregation_rate_constant: degenerate support");
    const double vol =
        us.profile.grid.sigma() / dim * std::pow(us.support_radius, dim);
    return us.total_mass / vol / dim;
}

double supersolution_rate_constant(const StationaryResult& us, int dim) {
    if (dim != us.profile.grid.dim())
        throw std::invalid_argument("supersolution_rate_constant: dimension mismatch");
    if (!(us.support_radius > 0.0))
        throw std::invalid_argument("supersolution_rate_constant: degenerate support");
    return us.profile.sup_density() / dim;
}

}  // namespace radflow
