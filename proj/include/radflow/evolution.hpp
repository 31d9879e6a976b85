#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "radflow/model.hpp"
#include "radflow/profile.hpp"

namespace radflow {

// One instant of a trajectory plus the scheme's running bookkeeping.
struct EvolutionState {
    double time = 0.0;
    RadialProfile profile;
    long step_count = 0;
    double last_dt = 0.0;
    double mass_drift = 0.0;  // total clipped-negative mass, audited not lost

    EvolutionState(double t, RadialProfile p) : time(t), profile(std::move(p)) {}
};

// Explicit-step limits and trajectory output cadence.
struct StepControl {
    double safety = 0.4;  // fraction of the stability limits, in (0, 1]
    double max_dt = std::numeric_limits<double>::infinity();
    double snapshot_interval = 0.1;
    // blow-up flags: time step collapse relative to the first step, or
    // sup-density growth paired with a shrinking second moment
    double min_dt_ratio = 1e-12;
    double blowup_density_factor = 1e4;
};

struct DomainOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class StopReason { completed, domain_overflow, blowup_suspected };

struct Trajectory {
    std::vector<EvolutionState> snapshots;  // first at t = 0, last at stop time
    StopReason stop = StopReason::completed;
    std::string note;  // human-readable stop detail for early stops

    const EvolutionState& final_state() const { return snapshots.back(); }
};

using Observer = std::function<void(const EvolutionState&)>;

// One conservative finite-volume update: centered differences for the
// degenerate diffusion flux, upwinded advection with the particle velocity
// (minus radial_velocity), zero flux through both ends, explicit Euler with
// dt = safety * min(diffusive limit, advective limit) capped by max_dt.
// Negative cells are clipped to zero with the clipped mass added to
// mass_drift.  Throws DomainOverflowError when support reaches r_max.
EvolutionState step(const EvolutionState& state, const ModelSpec& spec, const StepControl& ctrl);

// Repeated step landing exactly on the snapshot cadence and the horizon.
// Observers run on every recorded snapshot.  Early stops (support overflow,
// blow-up signals) are recorded in the trajectory instead of thrown.
Trajectory evolve(const RadialProfile& initial, const ModelSpec& spec, const StepControl& ctrl,
                  double horizon, const std::vector<Observer>& observers = {});

// Sup-norm discrepancy between the two sides of the mass-function form of
// the equation across the time interval of two states, each side evaluated
// by finite differences; refines at first order in (dr, dt).
double mass_form_residual(const EvolutionState& before, const EvolutionState& after,
                          const ModelSpec& spec);

// Similarity change of variables about time t: forward compresses support by
// (t+1)^(1/d) and scales amplitude by (t+1); backward inverts.  Mass is
// preserved exactly by conservative rebinning.
RadialProfile rescale_to_similarity(const RadialProfile& u, double t, bool forward);

}  // namespace radflow
