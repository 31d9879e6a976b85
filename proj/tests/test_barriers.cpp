#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "radflow/barriers.hpp"
#include "radflow/evolution.hpp"
#include "radflow/model.hpp"
#include "radflow/stationary.hpp"

using namespace radflow;

namespace {

// least-squares slope of log|y| against t
double log_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const int n = static_cast<int>(t.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ly = std::log(std::abs(y[i]));
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
    }
    return (n * sty - st * sy) / (n * stt - st * st);
}

BarrierFamily confined_family(double R0) {
    return BarrierFamily(solve_mu_A(3, 0.5 * critical_mass(3)), R0, BarrierOde::pks_rescaled,
                         BarrierRole::exact_solution);
}

}  // namespace

TEST_CASE("confined scaling radius closed form") {
    BarrierFamily fam = confined_family(1.0);
    for (double tau : {0.0, 0.3, 2.0, 11.0}) CHECK(scaling_radius(fam, tau) == 1.0);

    fam.R0 = std::cbrt(2.0);
    CHECK(scaling_radius(fam, std::log(2.0)) == doctest::Approx(std::cbrt(1.5)).epsilon(1e-12));
    CHECK(scaling_radius(fam, 0.0) == doctest::Approx(fam.R0).epsilon(1e-14));

    double prev = scaling_radius(fam, 0.0);
    for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double r = scaling_radius(fam, tau);
        CHECK(r < prev);
        CHECK(r > 1.0);
        prev = r;
    }

    fam.R0 = 0.6;
    prev = 0.0;
    for (double tau : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double r = scaling_radius(fam, tau);
        CHECK(r > prev);
        CHECK(r < 1.0);
        prev = r;
    }

    CHECK_THROWS_AS(scaling_radius(fam, -0.1), std::invalid_argument);
    fam.R0 = -1.0;
    CHECK_THROWS_AS(scaling_radius(fam, 1.0), std::invalid_argument);
}

TEST_CASE("numeric radius integration matches closed forms") {
    BarrierFamily fam = confined_family(1.3);
    for (double tau : {0.1, 1.0, 10.0})
        CHECK(scaling_radius_numeric(fam, tau) ==
              doctest::Approx(scaling_radius(fam, tau)).epsilon(1e-10));
    fam.R0 = 0.45;
    for (double tau : {0.1, 1.0, 10.0})
        CHECK(scaling_radius_numeric(fam, tau) ==
              doctest::Approx(scaling_radius(fam, tau)).epsilon(1e-10));

    StationaryResult flat = solve_us(3, 2.0, 1.0);
    BarrierFamily agg(flat, 1.7, BarrierOde::aggregation, BarrierRole::subsolution,
                      aggregation_rate_constant(flat, 3), 2.0);
    for (double tau : {0.1, 1.0, 10.0})
        CHECK(scaling_radius_numeric(agg, tau) ==
              doctest::Approx(scaling_radius(agg, tau)).epsilon(1e-10));
}

TEST_CASE("confined radius approaches 1 at unit exponential rate") {
    BarrierFamily fam = confined_family(1.4);
    std::vector<double> taus, gaps;
    for (double tau = 2.0; tau <= 6.0 + 1e-9; tau += 0.5) {
        taus.push_back(tau);
        gaps.push_back(scaling_radius(fam, tau) - 1.0);
    }
    CHECK(log_slope(taus, gaps) == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("aggregation radius decays at the linearized rate") {
    StationaryResult us = solve_us(3, 1.5, 1.0);
    BarrierFamily fam(us, 1.2, BarrierOde::aggregation, BarrierRole::subsolution,
                      aggregation_rate_constant(us, 3), 1.5);
    const double lin = fam.rate * (3.0 + fam.q - 2.0);
    std::vector<double> ts, gaps;
    for (double t = 2.0 / lin; t <= 5.0 / lin; t += 0.5 / lin) {
        ts.push_back(t);
        gaps.push_back(scaling_radius(fam, t) - 1.0);
    }
    const double slope = log_slope(ts, gaps);
    CHECK(std::abs(slope + lin) <= 0.05 * lin);
}

TEST_CASE("barrier profiles preserve mass and limit to the base") {
    BarrierFamily fam = confined_family(1.3);
    RadialGrid g(3, 6.0, 256);
    const double base_mass = fam.base.profile.total_mass();
    for (double tau : {0.0, 0.4, 1.7, 6.0}) {
        RadialProfile bp = barrier_profile(fam, tau, g);
        CHECK(bp.total_mass() == doctest::Approx(base_mass).epsilon(1e-12));
    }

    RadialProfile far = barrier_profile(fam, 40.0, g);
    RadialProfile base_on_g = resample(fam.base.profile, g);
    for (int i = 0; i < g.n_cells(); ++i)
        CHECK(far.values[i] == doctest::Approx(base_on_g.values[i]).epsilon(1e-10));

    RadialProfile start = barrier_profile(fam, 0.0, g);
    RadialProfile direct = scale_profile(base_on_g, fam.R0);
    for (int i = 0; i < g.n_cells(); ++i)
        CHECK(start.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-12));

    // R0 = 1.3 does not fit on the base solver grid itself
    CHECK_THROWS_AS(barrier_profile(fam, 0.0), std::invalid_argument);
}

TEST_CASE("mass function ordering report") {
    RadialGrid g(3, 4.0, 64);
    std::vector<double> spread(64, 0.0), tight(64, 0.0);
    const double vol1 = g.sigma() / 3.0;
    for (int i = 0; i < 64; ++i) {
        if (g.face(i + 1) <= 2.0) spread[i] = 1.0 / (vol1 * 8.0);
        if (g.face(i + 1) <= 1.0) tight[i] = 1.0 / vol1;
    }
    RadialProfile us(g, spread), ut(g, tight);

    OrderingReport refl = check_ordering(us, us);
    CHECK(refl.ordered);
    CHECK(refl.worst_violation == 0.0);

    OrderingReport good = check_ordering(us, ut);
    CHECK(good.ordered);
    OrderingReport bad = check_ordering(ut, us);
    CHECK_FALSE(bad.ordered);
    CHECK(bad.worst_violation > 0.0);
    CHECK(bad.at_radius > 0.0);
    CHECK(bad.at_radius < 2.0);

    RadialGrid other(3, 4.0, 96);
    CHECK_THROWS_AS(check_ordering(us, RadialProfile(other, std::vector<double>(96, 0.0))),
                    std::invalid_argument);
}

TEST_CASE("larger R0 gives a less concentrated member at every tau") {
    RadialGrid g(3, 7.0, 192);
    BarrierFamily inner = confined_family(1.1);
    BarrierFamily outer = confined_family(1.5);
    for (double tau : {0.0, 0.5, 2.0, 5.0}) {
        OrderingReport rep =
            check_ordering(barrier_profile(outer, tau, g), barrier_profile(inner, tau, g));
        CHECK(rep.ordered);
    }
}

TEST_CASE("steady-state rate constants") {
    StationaryResult flat = solve_us(3, 2.0, 1.0);
    CHECK(aggregation_rate_constant(flat, 3) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(supersolution_rate_constant(flat, 3) == doctest::Approx(1.0).epsilon(1e-6));

    StationaryResult big = solve_us(3, 2.0, 2.5);
    CHECK(aggregation_rate_constant(big, 3) == doctest::Approx(2.5).epsilon(1e-9));

    for (double q : {0.5, 1.5}) {
        StationaryResult us = solve_us(3, q, 1.0);
        const double c1 = aggregation_rate_constant(us, 3);
        const double c2 = supersolution_rate_constant(us, 3);
        CHECK(c1 > 0.0);
        CHECK(c2 > c1);
    }

    CHECK_THROWS_AS(aggregation_rate_constant(flat, 4), std::invalid_argument);
    StationaryResult broken = flat;
    broken.support_radius = 0.0;
    CHECK_THROWS_AS(aggregation_rate_constant(broken, 3), std::invalid_argument);
    CHECK_THROWS_AS(supersolution_rate_constant(broken, 3), std::invalid_argument);
}

TEST_CASE("confined family member is an exact solution of the evolution") {
    const ModelSpec spec = preset("pks_rescaled", 3);
    RadialGrid g(3, 6.0, 256);
    BarrierFamily fam = confined_family(1.3);

    RadialProfile init = barrier_profile(fam, 0.0, g);
    StepControl ctrl;
    ctrl.snapshot_interval = 0.25;
    Trajectory traj = evolve(init, spec, ctrl, 1.0);

    double worst = 0.0;
    for (const EvolutionState& st : traj.snapshots) {
        RadialProfile ref = barrier_profile(fam, st.time, g);
        MassFunction me = mass_function(st.profile);
        MassFunction mr = mass_function(ref);
        for (int k = 1; k <= 9; ++k) {
            const double s = 0.1 * k * fam.base.total_mass;
            worst = std::max(worst, std::abs(quantile(me, s) - quantile(mr, s)));
        }
    }
    CHECK(worst <= 2.0 * g.dr());
}
