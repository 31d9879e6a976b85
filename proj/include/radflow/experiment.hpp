#pragma once

#include <string>
#include <vector>

#include "radflow/evolution.hpp"
#include "radflow/profile.hpp"

namespace radflow {

// Initial-datum descriptor; the config syntax is kind(args):
//   uniform_ball(radius), barenblatt_like(radius), annulus(r1,r2),
//   scaled_stationary(R0), from_csv(path).
// radius = 0 lets the scenario pick its default shape parameter.
struct InitialData {
    enum class Kind { uniform_ball, barenblatt_like, annulus, scaled_stationary, from_csv };
    Kind kind = Kind::uniform_ball;
    double radius = 0.0;
    double r1 = 0.0, r2 = 0.0;
    double R0 = 1.0;
    std::string path;

    static InitialData parse(const std::string& text);
    std::string describe() const;
};

// One experiment, loaded from flat key = value text.  Zero or negative
// sentinels mean "scenario default"; unknown keys are rejected by name.
struct ExperimentConfig {
    std::string scenario;
    int dim = 3;
    double q = 2.0;           // attraction exponent for aggregation scenarios
    double mass = 0.0;        // absolute target mass, exclusive with mass_ratio
    double mass_ratio = 0.0;  // mass as a fraction of the critical mass
    InitialData initial;
    double r_max = 0.0;
    int n_cells = 256;
    double horizon = -1.0;
    double snapshot_interval = -1.0;
    double safety = -1.0;
    double blowup_density_factor = -1.0;
    std::string output_dir;  // empty: $RADFLOW_OUT (default "out") / scenario
    bool write_snapshots = true;
    bool compute_w2 = true;
    bool compute_defect = true;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text);
    void validate() const;  // throws std::invalid_argument naming the field
};

// Names of the bundled scenarios, in canonical order.
const std::vector<std::string>& scenario_names();

// Outcome of a run: 0 clean, 1 stopped on a runtime signal (overflow or
// blow-up), 2 invalid config.  summary holds the JSON text written to
// summary.json in directory.
struct RunReport {
    int status = 0;
    std::string directory;
    std::string summary;
};

RunReport run_experiment(const ExperimentConfig& cfg);

// One instance per axis value (axis: mass, q, R0 or n_cells), run
// concurrently in per-instance subdirectories, then aggregated into
// sweep.csv plus a combined power-law fit where the axis defines one.
RunReport run_sweep(const ExperimentConfig& base, const std::string& axis,
                    const std::vector<double>& values);

}  // namespace radflow
