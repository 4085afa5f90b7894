#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magnonkit/lindblad_steady.hpp>

#include <Eigen/Eigenvalues>

using namespace magnonkit;

namespace {

double omega_for(double nbar, double gamma, double delta)
{
    return std::sqrt(nbar * ((gamma / 2.0) * (gamma / 2.0) + delta * delta));
}

}  // namespace

TEST_CASE("steady state density-matrix invariants")
{
    KerrModel m{-0.38, -0.15, 0.9, 1.3, 30};
    const SteadyState s = steady_state(m);

    CHECK(s.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s.rho);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);

    CHECK(s.residual < 1e-8);
    CHECK(!s.truncation_warning);
    CHECK(s.occupancy > 0.0);
}

TEST_CASE("undriven mode relaxes to vacuum")
{
    KerrModel m{-0.38, -0.15, 0.0, 1.3, 20};
    const SteadyState s = steady_state(m);
    CHECK(s.occupancy == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(s.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("linear (K = 0) occupancy matches the Lorentzian formula")
{
    const double gamma = 1.3, delta = -0.38;
    for (double target : {0.01, 0.1, 0.5, 1.0, 2.0}) {
        KerrModel m{delta, 0.0, omega_for(target, gamma, delta), gamma, 30};
        CHECK(steady_state(m).occupancy == doctest::Approx(target).epsilon(0.01));
    }
}

TEST_CASE("truncation is raised automatically under strong driving")
{
    const double gamma = 1.0, delta = 0.0;
    KerrModel m{delta, 0.0, omega_for(15.0, gamma, delta), gamma, 30};
    const SteadyState s = steady_state(m);
    CHECK(s.fock_dim_used > 30);
    CHECK(s.occupancy == doctest::Approx(15.0).epsilon(0.02));
}

TEST_CASE("Kerr sign bends the occupancy curve")
{
    // With red detuning, a negative Kerr pulls the mode toward resonance as
    // it fills, enhancing the occupancy relative to the linear response;
    // far beyond resonance it saturates below linear.
    const double gamma = 1.3, delta = -0.38;
    const double om_small = omega_for(0.3, gamma, delta);
    KerrModel lin{delta, 0.0, om_small, gamma, 30};
    KerrModel kerr{delta, -0.2, om_small, gamma, 30};
    CHECK(steady_state(kerr).occupancy > steady_state(lin).occupancy);

    const double om_big = omega_for(6.0, gamma, delta);
    lin.omega_mw_strength = kerr.omega_mw_strength = om_big;
    CHECK(steady_state(kerr).occupancy < steady_state(lin).occupancy);
}

TEST_CASE("kerr_sweep lays out the occupancy surface")
{
    const std::vector<double> kerr = {0.0, -0.1, -0.2};
    const std::vector<double> omega = {0.0, 0.4, 0.8, 1.2};
    const KerrSweep sw = kerr_sweep(1.3, -0.38, kerr, omega, 25);
    REQUIRE(sw.occupancy.size() == 3);
    REQUIRE(sw.occupancy[0].size() == 4);
    for (const auto& row : sw.occupancy) {
        CHECK(row[0] == doctest::Approx(0.0).epsilon(1e-10));
        for (std::size_t w = 1; w < row.size(); ++w)
            CHECK(row[w] > row[w - 1]);  // monotone in drive
    }
    // Stronger negative Kerr -> larger occupancy at fixed moderate drive.
    CHECK(sw.occupancy[2][2] > sw.occupancy[1][2]);
    CHECK(sw.occupancy[1][2] > sw.occupancy[0][2]);
}

TEST_CASE("model validation")
{
    KerrModel m{0.0, 0.0, 1.0, 0.0, 30};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.gamma_m = 1.0;
    m.fock_dim = 3;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("Kerr fit recovers synthetic generating parameters")
{
    const double gamma = 1.3, delta = -0.38;
    const double true_kerr = -0.15, true_prop = 0.10;  // MHz^2 per fW

    std::vector<OccupancyPoint> data;
    for (double p_fw : {0.8, 1.6, 2.8, 4.2, 6.0, 8.0, 10.0, 12.0}) {
        KerrModel m{delta, true_kerr, std::sqrt(true_prop * p_fw), gamma, 30};
        data.push_back({p_fw, steady_state(m).occupancy, 0.05});
    }

    KerrFitOptions opts;
    opts.kerr_min = -0.3;
    opts.kerr_max = 0.0;
    opts.omega2_samples = 40;
    const KerrFitResult fit = fit_kerr(data, gamma, delta, opts);

    CHECK(fit.kerr == doctest::Approx(true_kerr).epsilon(1e-9));  // on-grid value
    CHECK(fit.proportionality == doctest::Approx(true_prop).epsilon(0.02));
    CHECK(fit.r2 > 0.999);
    CHECK(fit.r2_surface.size() == fit.kerr_grid.size());

    CHECK_THROWS_AS(fit_kerr({{1.0, 0.5, 0.0}}, gamma, delta, opts),
                    std::invalid_argument);
}

TEST_CASE("Kerr bounds bracket the best fit over nuisance corners")
{
    const double gamma = 1.3, delta = -0.38;
    std::vector<OccupancyPoint> data;
    for (double p_fw : {1.0, 2.5, 4.5, 7.0, 10.0, 13.0}) {
        KerrModel m{delta, -0.12, std::sqrt(0.08 * p_fw), gamma, 25};
        data.push_back({p_fw, steady_state(m).occupancy, 0.05});
    }
    KerrFitOptions opts;
    opts.kerr_min = -0.3;
    opts.kerr_max = 0.0;
    opts.kerr_step = 0.02;
    opts.prop_steps = 41;
    opts.omega2_samples = 24;
    opts.fock_dim = 25;
    const KerrBounds b =
        fit_kerr_bounds(data, {1.3 - 0.4, 1.3 + 0.4}, {-0.38 - 0.1, -0.38 + 0.1}, opts);
    CHECK(b.kerr_low <= -0.12);
    CHECK(b.kerr_high >= -0.12 - 1e-9);
    CHECK(b.kerr_low < b.kerr_high + 1e-9);
}
