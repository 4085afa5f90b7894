#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magnonkit/io_response.hpp>
#include <magnonkit/lindblad_steady.hpp>

using namespace magnonkit;

TEST_CASE("crossing branch limits and gap")
{
    CrossingParams p{2.0, 8000.0, 10.0, 0.0};

    SUBCASE("zero coupling reduces to the bare lines")
    {
        // Below the crossing the branch sits on the cavity line p2 + p3.
        CHECK(crossing_branch(-20.0, p) == doctest::Approx(p.p2 + p.p3));
        CHECK(crossing_branch(20.0, p) == doctest::Approx(p.p2 + p.p3));
        CHECK(p.crossing_current() == doctest::Approx(5.0));
        // Bare magnon line crosses the bare cavity line at I0 within 1e-6.
        CHECK(p.magnon_bare_freq(p.crossing_current()) ==
              doctest::Approx(p.coupler_bare_freq()).epsilon(1e-9));
    }

    SUBCASE("discontinuity at I0 equals the full gap 2 p4")
    {
        p.p4 = 22.5;
        const double i0 = p.crossing_current();
        const double below = crossing_branch(i0 - 1e-9, p);
        const double at = crossing_branch(i0, p);  // sgn(0) = +1
        CHECK(below - at == doctest::Approx(2.0 * p.p4).epsilon(1e-6));
    }

    SUBCASE("far-detuned asymptotes return to the cavity line")
    {
        p.p4 = 22.5;
        CHECK(crossing_branch(-1000.0, p) == doctest::Approx(p.p2 + p.p3).epsilon(1e-4));
        CHECK(crossing_branch(1000.0, p) == doctest::Approx(p.p2 + p.p3).epsilon(1e-4));
    }
}

TEST_CASE("reflection coefficient limits")
{
    ReflectionParams rp;
    rp.coupler_bare_freq = 8456.0;
    rp.kappa_int = 1.58;
    rp.kappa_cpl = 0.51;
    rp.coupling = 0.0;
    rp.gamma_m = 1.3;
    rp.magnon_bare_freq = 8456.0;

    SUBCASE("unity far off resonance")
    {
        CHECK(std::abs(reflection(8456.0 + 5000.0, rp) - std::complex<double>(1.0, 0.0)) <
              1e-3);
    }

    SUBCASE("zero on resonance at critical coupling")
    {
        rp.kappa_int = 1.0;
        rp.kappa_cpl = 1.0;
        CHECK(std::abs(reflection(8456.0, rp)) < 1e-12);
    }

    SUBCASE("passive: |r| <= 1 over the whole line, with and without the magnon")
    {
        rp.coupling = 22.5;
        rp.magnon_bare_freq = 8460.0;
        for (double w = 8356.0; w < 8556.0; w += 0.37)
            CHECK(std::abs(reflection(w, rp)) <= 1.0 + 1e-12);
    }

    SUBCASE("coupled magnon produces two dips")
    {
        rp.coupling = 22.5;
        rp.magnon_bare_freq = 8456.0;  // on resonance: hybridized modes at +-g
        const double mid = std::abs(reflection(8456.0, rp));
        const double dip_lo = std::abs(reflection(8456.0 - 22.5, rp));
        const double dip_hi = std::abs(reflection(8456.0 + 22.5, rp));
        CHECK(dip_lo < mid);
        CHECK(dip_hi < mid);
    }

    rp.gamma_m = -1.0;
    CHECK_THROWS_AS(reflection(8456.0, rp), std::invalid_argument);
}

TEST_CASE("probe occupancy is linear in power")
{
    const double n1 = probe_occupancy(1e-18, 10449.16, 1.27, 3.72);
    const double n2 = probe_occupancy(2e-18, 10449.16, 1.27, 3.72);
    CHECK(n2 == doctest::Approx(2.0 * n1).epsilon(1e-12));
    CHECK(probe_occupancy(0.0, 10449.16, 1.27, 3.72) == doctest::Approx(0.0));
    CHECK_THROWS_AS(probe_occupancy(1e-18, 10449.16, 0.0, 3.72), std::invalid_argument);
}

namespace {

SystemParams slope_params()
{
    SystemParams p;
    p.cavity_bare_freqs = {6994.0, 8414.5, 10441.5, 12800.0};
    p.qubit_bare_freq = 8040.6;
    p.bare_anharmonicity = -137.2;
    p.magnon_bare_freq = 7951.50;
    p.qubit_cavity_couplings = {73.0, 126.1, 135.4, 116.0};
    p.magnon_cavity_couplings = {-13.6, 22.5, -20.3, 14.0};
    p.cavity_linewidths = {1.39, 2.09, 3.72};
    p.cavity_linewidths_cpl = {0.13, 0.51, 1.27};
    p.cavity_linewidths_int = {1.26, 1.58, 2.45};
    p.magnon_linewidth = 1.3;
    return p;
}

}  // namespace

TEST_CASE("Kittel drive strength scaling and guards")
{
    const SystemParams p = slope_params();

    const double o1 = kittel_drive_strength(1e-15, p, 7.79, 7950.0);
    const double o4 = kittel_drive_strength(4e-15, p, 7.79, 7950.0);
    CHECK(o4 == doctest::Approx(2.0 * o1).epsilon(1e-12));
    CHECK(kittel_drive_strength(0.0, p, 7.79, 7950.0) == doctest::Approx(0.0));

    SystemParams zero = p;
    zero.qubit_cavity_couplings = {0.0, 0.0, 0.0, 0.0};
    zero.magnon_cavity_couplings = {0.0, 0.0, 0.0, 0.0};
    CHECK(kittel_drive_strength(1e-15, zero, 0.0, 7950.0) == doctest::Approx(0.0));

    SystemParams bad = p;
    bad.magnon_bare_freq = bad.cavity_bare_freqs[0];
    CHECK_THROWS_AS(kittel_drive_strength(1e-15, bad, 7.79, 7950.0),
                    std::invalid_argument);
}

TEST_CASE("slope is consistent with the drive strength at 1 fW")
{
    const SystemParams p = slope_params();
    const double omega = kittel_drive_strength(1e-15, p, 7.79, 7950.0);
    const double slope = occupancy_slope(p, 7.79, 1.3, -0.38, 7950.0);
    CHECK(slope ==
          doctest::Approx(omega * omega / (0.65 * 0.65 + 0.38 * 0.38)).epsilon(1e-12));

    // A global sign flip of every cavity coupling leaves the slope invariant:
    // g_qm is bilinear in those couplings, so its sign does not change.
    SystemParams flipped = p;
    for (double& g : flipped.qubit_cavity_couplings) g = -g;
    for (double& g : flipped.magnon_cavity_couplings) g = -g;
    CHECK(occupancy_slope(flipped, 7.79, 1.3, -0.38, 7950.0) ==
          doctest::Approx(slope).epsilon(1e-12));

    // gamma_m -> infinity kills the slope.
    CHECK(occupancy_slope(p, 7.79, 1e9, -0.38, 7950.0) < 1e-12);
}

TEST_CASE("linear occupancy algebra")
{
    CHECK(linear_occupancy(0.0, 1.3, -0.38) == doctest::Approx(0.0));
    CHECK(linear_occupancy(0.65, 1.3, 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(linear_occupancy(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("linear occupancy matches the Lindblad solver at K = 0")
{
    const double gamma = 1.3, delta = -0.38;
    for (double target : {0.01, 0.3, 1.0, 2.0}) {
        const double omega = std::sqrt(
            target * ((gamma / 2.0) * (gamma / 2.0) + delta * delta));
        KerrModel m{delta, 0.0, omega, gamma, 30};
        const double n = steady_state(m).occupancy;
        CHECK(n == doctest::Approx(linear_occupancy(omega, gamma, delta)).epsilon(0.01));
    }
}
