#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "oracles.hpp"
#include "radflow/profile.hpp"

using namespace radflow;

namespace {

RadialProfile uniform_ball(const RadialGrid& g, double density, double radius) {
    std::vector<double> v(g.n_cells(), 0.0);
    for (int i = 0; i < g.n_cells(); ++i) {
        const double lo = g.face(i), hi = g.face(i + 1);
        if (hi <= radius) v[i] = density;
        else if (lo < radius)
            v[i] = density * (ipow(radius, g.dim()) - ipow(lo, g.dim())) /
                   (ipow(hi, g.dim()) - ipow(lo, g.dim()));
    }
    return RadialProfile(g, std::move(v));
}

}  // namespace

TEST_CASE("grid geometry") {
    RadialGrid g(3, 2.0, 16);
    CHECK(g.dr() == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g.sigma() == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-14));
    CHECK(RadialGrid::unit_sphere_area(4) == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
    CHECK(RadialGrid::unit_sphere_area(5) == doctest::Approx(8.0 * std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-14));
    double vol = 0.0;
    for (int i = 0; i < g.n_cells(); ++i) vol += g.cell_volume(i);
    CHECK(vol == doctest::Approx(g.ball_volume(2.0)).epsilon(1e-14));
    CHECK_THROWS(RadialGrid(2, 1.0, 16));
    CHECK_THROWS(RadialGrid(3, -1.0, 16));
    CHECK_THROWS(RadialGrid(3, 1.0, 4));
}

TEST_CASE("mass function of uniform ball matches quadrature oracle") {
    RadialGrid g(3, 2.0, 256);
    const double c = 0.7, R = 1.0;
    auto u = uniform_ball(g, c, R);
    auto m = mass_function(u);
    // oracle: direct Simpson quadrature of sigma * s^2 * u(s)
    for (double r : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        const double want = oracle::simpson([&](double s) { return g.sigma() * s * s * c; }, 0.0,
                                            std::min(r, R), 4000);
        const int f = static_cast<int>(std::lround(r / g.dr()));
        CHECK(m.values[f] == doctest::Approx(want).epsilon(1e-9));
    }
    CHECK(m.values[0] == 0.0);
    CHECK(m.total() == doctest::Approx(c * g.ball_volume(R)).epsilon(1e-13));
}

TEST_CASE("mass function of zero profile is zero") {
    RadialGrid g(3, 1.0, 32);
    RadialProfile u(g, std::vector<double>(32, 0.0));
    auto m = mass_function(u);
    for (double v : m.values) CHECK(v == 0.0);
}

TEST_CASE("scaled profile shifts the mass function argument") {
    RadialGrid g(3, 4.0, 256);
    auto u = RadialProfile(g, oracle::random_profile(g.centers(), 2.0, 42));
    auto m = mass_function(u);
    for (double R : {0.5, 1.3}) {
        auto uR = scale_profile(u, R);
        auto mR = mass_function(uR);
        for (int f = 0; f <= g.n_cells(); f += 17)
            CHECK(mR.values[f] == doctest::Approx(mass_at(m, g.face(f) / R)).epsilon(1e-12));
        CHECK(uR.total_mass() == doctest::Approx(u.total_mass()).epsilon(1e-13));
    }
    CHECK_THROWS(scale_profile(u, 10.0));  // support would leave the grid
}

TEST_CASE("density from mass round trip") {
    RadialGrid g(4, 3.0, 128);
    auto u = RadialProfile(g, oracle::random_profile(g.centers(), 3.0, 7));
    auto m = mass_function(u);
    auto u2 = density_from_mass(m);
    for (int i = 0; i < g.n_cells(); ++i)
        CHECK(u2.values[i] == doctest::Approx(u.values[i]).epsilon(1e-12));
    auto m2 = mass_function(u2);
    for (int f = 0; f <= g.n_cells(); ++f)
        CHECK(m2.values[f] == doctest::Approx(m.values[f]).epsilon(1e-12));
}

TEST_CASE("density from mass rejects decreasing input") {
    RadialGrid g(3, 1.0, 8);
    std::vector<double> mv{0.0, 1.0, 2.0, 1.5, 2.5, 3.0, 3.0, 3.0, 3.0};
    MassFunction m(g, mv);
    CHECK_THROWS_WITH_AS(density_from_mass(m), doctest::Contains("face 3"), std::invalid_argument);
}

TEST_CASE("quantile inverts the mass function") {
    RadialGrid g(3, 2.0, 256);
    auto u = uniform_ball(g, 1.0, 1.0);
    auto m = mass_function(u);
    const double A = m.total();
    // ball of radius 1: mass A/8 sits inside radius 1/2 exactly
    CHECK(quantile(m, A / 8.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(quantile(m, 0.0) == 0.0);
    CHECK(quantile(m, A) == doctest::Approx(1.0).epsilon(1e-14));
    // continuum inverse everywhere on the support
    for (double s : {0.01, 0.2, 0.5, 0.77, 0.999}) {
        CHECK(quantile(m, s * A) == doctest::Approx(std::cbrt(s)).epsilon(1e-13));
    }
    CHECK_THROWS(quantile(m, -0.5));
    CHECK_THROWS(quantile(m, 2.0 * A));
}

TEST_CASE("quantile and mass_at are mutually consistent on random data") {
    RadialGrid g(3, 5.0, 128);
    auto u = RadialProfile(g, oracle::random_profile(g.centers(), 4.0, 99));
    auto m = mass_function(u);
    const double A = m.total();
    for (int k = 1; k < 40; ++k) {
        const double s = A * k / 40.0;
        const double r = quantile(m, s);
        CHECK(mass_at(m, r) == doctest::Approx(s).epsilon(1e-10));
        CHECK(r <= g.r_max());
    }
    // faces map back to themselves
    for (int f = 8; f <= g.n_cells(); f += 24) {
        if (m.values[f] > m.values[f - 1])
            CHECK(quantile(m, m.values[f]) == doctest::Approx(g.face(f)).epsilon(1e-12));
    }
}

TEST_CASE("decreasing rearrangement maps an annulus to a ball") {
    RadialGrid g(3, 2.0, 200);  // faces hit r = 1 and r = 2^(1/3) only approximately
    const double r1 = 1.0, r2 = std::cbrt(2.0);
    std::vector<double> v(g.n_cells(), 0.0);
    for (int i = 0; i < g.n_cells(); ++i) {
        const double lo = g.face(i), hi = g.face(i + 1);
        const double a = std::max(lo, r1), b = std::min(hi, r2);
        if (b > a)
            v[i] = (ipow(b, 3) - ipow(a, 3)) / (ipow(hi, 3) - ipow(lo, 3));
    }
    RadialProfile u(g, v);
    auto s = decreasing_rearrangement(u);
    CHECK(s.total_mass() == doctest::Approx(u.total_mass()).epsilon(1e-12));
    // annulus volume equals the unit ball volume, so the rearrangement is the
    // indicator of B(0,1) up to one-cell smearing at each edge
    for (int i = 0; i < g.n_cells(); ++i) {
        const double r = g.center(i);
        if (r < 1.0 - 2.0 * g.dr()) CHECK(s.values[i] == doctest::Approx(1.0).epsilon(1e-9));
        if (r > 1.0 + 2.0 * g.dr()) CHECK(s.values[i] == 0.0);
    }
}

TEST_CASE("decreasing rearrangement properties on random data") {
    RadialGrid g(3, 4.0, 128);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto u = RadialProfile(g, oracle::random_profile(g.centers(), 4.0, seed));
        auto s = decreasing_rearrangement(u);
        CHECK(s.total_mass() == doctest::Approx(u.total_mass()).epsilon(1e-12));
        for (int i = 1; i < g.n_cells(); ++i) CHECK(s.values[i] <= s.values[i - 1] + 1e-14);
        // idempotent
        auto s2 = decreasing_rearrangement(s);
        for (int i = 0; i < g.n_cells(); ++i)
            CHECK(s2.values[i] == doctest::Approx(s.values[i]).epsilon(1e-12));
        // superlevel volumes agree within one cell volume
        for (double lvl : {0.2, 0.5, 1.0}) {
            double va = 0.0, vb = 0.0;
            for (int i = 0; i < g.n_cells(); ++i) {
                if (u.values[i] > lvl) va += g.cell_volume(i);
                if (s.values[i] > lvl) vb += g.cell_volume(i);
            }
            CHECK(std::abs(va - vb) <= g.cell_volume(g.n_cells() - 1) + 1e-12);
        }
    }
}

TEST_CASE("rearrangement of monotone input is the identity") {
    RadialGrid g(3, 3.0, 64);
    std::vector<double> v(g.n_cells());
    for (int i = 0; i < g.n_cells(); ++i) v[i] = 2.0 / (1.0 + g.center(i) * g.center(i));
    RadialProfile u(g, v);
    auto s = decreasing_rearrangement(u);
    for (int i = 0; i < g.n_cells(); ++i)
        CHECK(s.values[i] == doctest::Approx(u.values[i]).epsilon(1e-13));
}

TEST_CASE("second moment") {
    RadialGrid g(3, 2.0, 512);
    RadialProfile z(g, std::vector<double>(512, 0.0));
    CHECK(second_moment(z) == 0.0);
    auto u = uniform_ball(g, 1.0, 1.0);
    const double A = u.total_mass();
    // uniform ball: m2 = (3/5) A R^2 (midpoint rule error O(dr^2))
    CHECK(second_moment(u) == doctest::Approx(0.6 * A).epsilon(2e-5));
    // dilation scales the second moment by R^2
    auto u2 = scale_profile(u, 1.5);
    CHECK(second_moment(u2) == doctest::Approx(1.5 * 1.5 * second_moment(u)).epsilon(1e-4));
}

TEST_CASE("profile csv round trip") {
    RadialGrid g(3, 2.5, 64);
    auto u = RadialProfile(g, oracle::random_profile(g.centers(), 2.5, 11));
    const std::string path = "test_profile_roundtrip.csv";
    write_profile_csv(u, path);
    auto v = read_profile_csv(path, 3);
    CHECK(v.grid == u.grid);
    for (int i = 0; i < g.n_cells(); ++i) CHECK(v.values[i] == u.values[i]);
    std::remove(path.c_str());
}

TEST_CASE("profile validation") {
    RadialGrid g(3, 1.0, 8);
    CHECK_THROWS(RadialProfile(g, std::vector<double>(7, 0.0)));
    std::vector<double> neg(8, 0.1);
    neg[3] = -0.2;
    CHECK_THROWS(RadialProfile(g, neg));
}
