#pragma once

// Input-output-theory models: dressed avoided-crossing branch, cavity-magnon
// reflection coefficient, probe occupancy from readout power, Kittel drive
// strength and the occupancy-per-power slope.
//
// Frequencies in MHz (linear); powers in watts unless noted.

#include "hybrid_model.hpp"
#include "units.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace magnonkit {

// Fit parameterization of the dressed avoided-crossing branch
//   w_c^g(I) = p1 I + p2 - sgn(I - I0) sqrt((p1 I - p3)^2 + p4^2).
struct CrossingParams {
    double p1 = 0.0;  // MHz/mA
    double p2 = 0.0;  // MHz
    double p3 = 0.0;  // MHz
    double p4 = 0.0;  // MHz, = |g_m-c|

    double coupler_bare_freq() const { return p2 + p3; }
    double magnon_bare_freq(double current_ma) const
    {
        return (p2 - p3) + 2.0 * p1 * current_ma;
    }
    double coupling() const { return std::abs(p4); }
    double crossing_current() const
    {
        // w_m'(I0) = w_c'  =>  p1 I0 = p3
        return p3 / p1;
    }
};

// sgn(0) taken as +1.
inline double crossing_branch(double current_ma, const CrossingParams& p)
{
    const double u = p.p1 * current_ma - p.p3;
    const double sign = (current_ma - p.crossing_current()) < 0.0 ? -1.0 : 1.0;
    return p.p1 * current_ma + p.p2 - sign * std::sqrt(u * u + p.p4 * p.p4);
}

struct ReflectionParams {
    double coupler_bare_freq = 0.0;  // w_c^bare', MHz
    double kappa_int = 0.0;          // MHz
    double kappa_cpl = 0.0;          // MHz
    double coupling = 0.0;           // |g_m-c|, MHz
    double gamma_m = 0.0;            // MHz
    double magnon_bare_freq = 0.0;   // w_m^bare'(I) at the given current, MHz

    void validate() const
    {
        if (kappa_int < 0.0 || kappa_cpl < 0.0 || gamma_m < 0.0)
            throw std::invalid_argument("ReflectionParams: rates must be >= 0");
    }
};

// Complex reflection coefficient of the coupler mode hybridized with the
// Kittel mode; fits consume Re(r).
inline std::complex<double> reflection(double omega_r, const ReflectionParams& rp)
{
    rp.validate();
    using namespace std::complex_literals;
    const std::complex<double> magnon_term =
        rp.coupling * rp.coupling /
        (omega_r - rp.magnon_bare_freq + 0.5i * rp.gamma_m);
    const std::complex<double> num =
        omega_r - rp.coupler_bare_freq + 0.5i * (rp.kappa_int - rp.kappa_cpl) - magnon_term;
    const std::complex<double> den =
        omega_r - rp.coupler_bare_freq + 0.5i * (rp.kappa_int + rp.kappa_cpl) - magnon_term;
    return num / den;
}

// nbar_p = (P_r / hbar w_p) kappa_cpl / (kappa/2)^2.
inline double probe_occupancy(double power_w, double omega_p_mhz, double kappa_cpl_mhz,
                              double kappa_mhz)
{
    if (power_w < 0.0 || omega_p_mhz <= 0.0 || kappa_cpl_mhz <= 0.0 || kappa_mhz <= 0.0)
        throw std::invalid_argument("probe_occupancy: inputs must be positive");
    const double flux = power_w / (kHbar * mhz_to_rad_s(omega_p_mhz));  // photons/s
    const double k = mhz_to_rad_s(kappa_mhz);
    return flux * mhz_to_rad_s(kappa_cpl_mhz) / ((k / 2.0) * (k / 2.0));
}

// Kittel drive strength from input-output theory,
//   Omega_mw = sqrt(P/hbar w) sum_p sqrt(k_p^cpl)
//              [ g_mp/D_mp + g_qm g_qp / (D_qm sqrt(D_mp^2 + k_p^2)) ],
// summed over the first `n_modes` cavity modes (default 3). Result in MHz.
inline double kittel_drive_strength(double power_w, const SystemParams& params,
                                    double g_qm_mhz, double omega_mw_mhz,
                                    std::size_t n_modes = 3)
{
    if (power_w < 0.0)
        throw std::invalid_argument("kittel_drive_strength: power must be >= 0");
    if (n_modes > params.n_cavity_modes()) n_modes = params.n_cavity_modes();
    const double delta_qm = params.qubit_bare_freq - params.magnon_bare_freq;
    if (delta_qm == 0.0)
        throw std::invalid_argument("kittel_drive_strength: zero qubit-magnon detuning");

    double bracket_sum = 0.0;  // units sqrt(rad/s)
    for (std::size_t p = 0; p < n_modes; ++p) {
        const double delta_mp = params.cavity_bare_freqs[p] - params.magnon_bare_freq;
        if (delta_mp == 0.0)
            throw std::invalid_argument("kittel_drive_strength: zero cavity-magnon detuning");
        const double kappa_p = params.cavity_linewidths[p];
        const double bracket =
            params.magnon_cavity_couplings[p] / delta_mp +
            g_qm_mhz * params.qubit_cavity_couplings[p] /
                (delta_qm * std::sqrt(delta_mp * delta_mp + kappa_p * kappa_p));
        bracket_sum += std::sqrt(mhz_to_rad_s(params.cavity_linewidths_cpl[p])) * bracket;
    }
    const double flux = power_w / (kHbar * mhz_to_rad_s(omega_mw_mhz));  // 1/s
    return rad_s_to_mhz(std::sqrt(flux) * bracket_sum);
}

// Lorentzian steady-state occupancy nbar = Omega^2 / ((gamma/2)^2 + delta^2).
inline double linear_occupancy(double omega_mhz, double gamma_mhz, double delta_mhz)
{
    if (gamma_mhz <= 0.0)
        throw std::invalid_argument("linear_occupancy: gamma must be > 0");
    return omega_mhz * omega_mhz /
           ((gamma_mhz / 2.0) * (gamma_mhz / 2.0) + delta_mhz * delta_mhz);
}

// Slope of the magnon occupancy against excitation power, in magnons per
// femtowatt.
inline double occupancy_slope(const SystemParams& params, double g_qm_mhz,
                              double gamma_m_mhz, double delta_mw_mhz,
                              double omega_mw_mhz, std::size_t n_modes = 3)
{
    const double omega_at_1fw =
        kittel_drive_strength(1e-15, params, g_qm_mhz, omega_mw_mhz, n_modes);
    return linear_occupancy(omega_at_1fw, gamma_m_mhz, delta_mw_mhz);
}

}  // namespace magnonkit
