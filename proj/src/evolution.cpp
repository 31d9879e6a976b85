#include "radflow/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace radflow {

EvolutionState step(const EvolutionState& state, const ModelSpec& spec, const StepControl& ctrl) {
    spec.validate();
    if (!(ctrl.safety > 0.0 && ctrl.safety <= 1.0))
        throw std::invalid_argument("step: safety factor must lie in (0, 1]");
    const RadialGrid& g = state.profile.grid;
    if (g.dim() != spec.dim) throw std::invalid_argument("step: grid dimension mismatch");
    const int n = g.n_cells();
    const double dr = g.dr();
    const std::vector<double>& u = state.profile.values;

    const std::vector<double> v = radial_velocity(spec, state.profile);

    double dt = ctrl.max_dt;
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    if (vmax > 0.0) dt = std::min(dt, ctrl.safety * dr / vmax);
    const double umax = state.profile.sup_density();
    if (spec.has_diffusion() && umax > 0.0) {
        const double limit =
            dr * dr / (2.0 * spec.c1 * spec.m * std::pow(umax, spec.m - 1.0) * spec.dim);
        dt = std::min(dt, ctrl.safety * limit);
    }
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::runtime_error("step: no positive time step available");

    std::vector<double> pm;
    if (spec.has_diffusion()) {
        pm.resize(n);
        for (int i = 0; i < n; ++i) pm[i] = std::pow(u[i], spec.m);
    }
    // outward mass flux through each face; both ends stay at zero
    std::vector<double> flux(n + 1, 0.0);
    for (int f = 1; f < n; ++f) {
        const double shell = g.sigma() * ipow(g.face(f), g.dim() - 1);
        double F = 0.0;
        if (spec.has_diffusion()) F -= spec.c1 * shell * (pm[f] - pm[f - 1]) / dr;
        const double w = -v[f];  // particle velocity, outward positive
        F += shell * (w > 0.0 ? u[f - 1] : u[f]) * w;
        flux[f] = F;
    }

    std::vector<double> nu(n);
    double clipped = 0.0;
    for (int i = 0; i < n; ++i) {
        double val = u[i] + dt * (flux[i] - flux[i + 1]) / g.cell_volume(i);
        if (val < 0.0) {
            clipped += -val * g.cell_volume(i);
            val = 0.0;
        }
        nu[i] = val;
    }
    if (nu[n - 1] > 0.0) {
        std::ostringstream os;
        os << "support reached the outer boundary at t = " << state.time;
        throw DomainOverflowError(os.str());
    }

    EvolutionState next(state.time + dt, RadialProfile(g, std::move(nu)));
    next.step_count = state.step_count + 1;
    next.last_dt = dt;
    next.mass_drift = state.mass_drift + clipped;
    return next;
}

Trajectory evolve(const RadialProfile& initial, const ModelSpec& spec, const StepControl& ctrl,
                  double horizon, const std::vector<Observer>& observers) {
    spec.validate();
    if (horizon < 0.0) throw std::invalid_argument("evolve: horizon must be nonnegative");
    if (!(ctrl.snapshot_interval > 0.0))
        throw std::invalid_argument("evolve: snapshot interval must be positive");

    Trajectory traj;
    EvolutionState st(0.0, initial);
    auto record = [&](const EvolutionState& s) {
        traj.snapshots.push_back(s);
        for (const auto& obs : observers) obs(s);
    };
    record(st);
    if (horizon == 0.0) return traj;

    const double sup0 = initial.sup_density();
    const double m2_start = second_moment(initial);
    const double eps = 1e-12 * std::max(1.0, horizon);
    double first_dt = 0.0;
    int tick = 1;
    while (st.time < horizon - eps) {
        const double target = std::min(horizon, tick * ctrl.snapshot_interval);
        StepControl capped = ctrl;
        capped.max_dt = std::min(ctrl.max_dt, target - st.time);
        try {
            st = step(st, spec, capped);
        } catch (const DomainOverflowError& e) {
            traj.stop = StopReason::domain_overflow;
            traj.note = e.what();
            if (traj.snapshots.back().time + eps < st.time) record(st);
            return traj;
        }
        const bool landed = st.time >= target - eps;
        if (!landed) {
            // stability dt only; a cadence-landing dt is artificially short
            if (first_dt == 0.0) {
                first_dt = st.last_dt;
            } else if (st.last_dt < ctrl.min_dt_ratio * first_dt) {
                traj.stop = StopReason::blowup_suspected;
                std::ostringstream os;
                os << "time step collapsed to " << st.last_dt << " at t = " << st.time;
                traj.note = os.str();
                record(st);
                return traj;
            }
        }
        if (landed) {
            record(st);
            if (sup0 > 0.0 && st.profile.sup_density() >= ctrl.blowup_density_factor * sup0 &&
                second_moment(st.profile) < m2_start) {
                traj.stop = StopReason::blowup_suspected;
                std::ostringstream os;
                os << "sup density grew " << st.profile.sup_density() / sup0
                   << "x with shrinking second moment at t = " << st.time;
                traj.note = os.str();
                return traj;
            }
            while (tick * ctrl.snapshot_interval <= target + eps) ++tick;
        }
    }
    return traj;
}

double mass_form_residual(const EvolutionState& before, const EvolutionState& after,
                          const ModelSpec& spec) {
    spec.validate();
    if (!(after.time > before.time))
        throw std::invalid_argument("mass_form_residual: states must be time-ordered");
    if (!(before.profile.grid == after.profile.grid))
        throw std::invalid_argument("mass_form_residual: grid mismatch");
    const RadialGrid& g = before.profile.grid;
    const int n = g.n_cells();
    const double dt = after.time - before.time;
    const double dr = g.dr();
    const MassFunction mb = mass_function(before.profile);
    const MassFunction ma = mass_function(after.profile);
    const std::vector<double> v = radial_velocity(spec, before.profile);
    const std::vector<double>& u = before.profile.values;

    double worst = 0.0;
    for (int f = 1; f < n; ++f) {
        const double shell = g.sigma() * ipow(g.face(f), g.dim() - 1);
        const double lhs = (ma.values[f] - mb.values[f]) / dt;
        double rhs = 0.0;
        if (spec.has_diffusion())
            rhs += spec.c1 * shell * (std::pow(u[f], spec.m) - std::pow(u[f - 1], spec.m)) / dr;
        rhs += shell * 0.5 * (u[f - 1] + u[f]) * v[f];
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

RadialProfile rescale_to_similarity(const RadialProfile& u, double t, bool forward) {
    if (t < 0.0) throw std::invalid_argument("rescale_to_similarity: t must be nonnegative");
    const double c = std::pow(t + 1.0, (forward ? -1.0 : 1.0) / u.grid.dim());
    return scale_profile(u, c);
}

}  // namespace radflow
