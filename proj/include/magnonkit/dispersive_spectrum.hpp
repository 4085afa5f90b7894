#pragma once

// Analytical spectrum of a qubit dispersively coupled to a driven harmonic
// oscillator, the composite magnon-ladder/probe-photon model used when
// fitting measured spectra, power broadening, and number-state probability
// extraction with a Poisson reference.
//
// Frequencies and rates are linear (omega/2pi) in MHz.

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace magnonkit {

// Parameters of the spectrum for one oscillator ladder.
struct SpectrumModel {
    double omega_q = 0.0;           // qubit frequency, oscillator in vacuum (MHz)
    double gamma_q = 1.0;           // qubit linewidth (MHz)
    double chi = 0.0;               // dispersive shift (MHz)
    double kappa = 1.0;             // oscillator linewidth (MHz)
    double delta_d = 0.0;           // drive detuning (MHz)
    double omega_d_strength = 0.0;  // drive strength Omega_d (MHz)
    int n_max = 10;                 // ladder truncation

    void validate() const
    {
        if (gamma_q <= 0.0 || kappa <= 0.0)
            throw std::invalid_argument("SpectrumModel: gamma_q and kappa must be > 0");
        if (n_max < 1)
            throw std::invalid_argument("SpectrumModel: n_max must be >= 1");
    }

    // Drive strength producing occupancy nbar_g with the qubit in |g>.
    static double strength_for_occupancy(double nbar_g, double kappa, double delta_d)
    {
        return std::sqrt(nbar_g * ((kappa / 2.0) * (kappa / 2.0) + delta_d * delta_d));
    }
};

// Derived quantities of the ladder: per-peak frequencies/linewidths,
// occupancies, distinguishability and the complex weight generator A.
struct SpectrumComponents {
    std::complex<double> a_coeff{0.0, 0.0};
    double b_stark = 0.0;  // ac Stark shift (MHz)
    double d_ss = 0.0;
    double nbar_g = 0.0;
    double nbar_e = 0.0;
    std::vector<double> peak_freqs;       // omega_q^(n)
    std::vector<double> peak_linewidths;  // gamma_q^(n)
    std::vector<double> weights;          // Re[(-A)^n e^A]/n!
    bool negative_weight_warning = false;  // some weight < -1e-12
};

inline SpectrumComponents spectrum_components(const SpectrumModel& m)
{
    m.validate();
    SpectrumComponents c;
    const double hk = m.kappa / 2.0;
    const double om2 = m.omega_d_strength * m.omega_d_strength;
    c.nbar_g = om2 / (hk * hk + m.delta_d * m.delta_d);
    c.nbar_e = om2 / (hk * hk + (m.delta_d + 2.0 * m.chi) * (m.delta_d + 2.0 * m.chi));
    c.d_ss = 2.0 * (c.nbar_g + c.nbar_e) * m.chi * m.chi /
             (hk * hk + m.chi * m.chi + (m.chi + m.delta_d) * (m.chi + m.delta_d));
    const std::complex<double> z(hk, 2.0 * m.chi + m.delta_d);
    c.a_coeff = c.d_ss * std::conj(z) / z;
    c.b_stark = m.chi * (c.nbar_g + c.nbar_e - c.d_ss);

    c.peak_freqs.resize(m.n_max + 1);
    c.peak_linewidths.resize(m.n_max + 1);
    c.weights.resize(m.n_max + 1);
    const std::complex<double> ea = std::exp(c.a_coeff);
    std::complex<double> pw(1.0, 0.0);  // (-A)^n / n!
    for (int n = 0; n <= m.n_max; ++n) {
        c.peak_freqs[n] = m.omega_q + c.b_stark + n * (2.0 * m.chi + m.delta_d);
        c.peak_linewidths[n] = m.gamma_q + m.kappa * (n + c.d_ss);
        c.weights[n] = (pw * ea).real();
        if (c.weights[n] < -1e-12) c.negative_weight_warning = true;
        pw *= -c.a_coeff / static_cast<double>(n + 1);
    }
    return c;
}

// S_n(w) = (1/pi)(1/n!) Re[ (-A)^n e^A / (gamma^(n) - i(w - w^(n))) ].
struct Spectrum {
    std::vector<double> total;                    // S(w) on the grid
    std::vector<std::vector<double>> components;  // S_n(w), n = 0..n_max
};

inline Spectrum spectrum(const SpectrumModel& m, std::span<const double> omega_s)
{
    const SpectrumComponents c = spectrum_components(m);
    Spectrum s;
    s.total.assign(omega_s.size(), 0.0);
    s.components.assign(c.weights.size(), std::vector<double>(omega_s.size(), 0.0));

    const std::complex<double> ea = std::exp(c.a_coeff);
    std::complex<double> pw(1.0, 0.0);
    constexpr double inv_pi = 1.0 / 3.14159265358979323846;
    for (std::size_t n = 0; n < c.weights.size(); ++n) {
        const std::complex<double> num = pw * ea;
        for (std::size_t k = 0; k < omega_s.size(); ++k) {
            const std::complex<double> den(c.peak_linewidths[n],
                                           -(omega_s[k] - c.peak_freqs[n]));
            const double v = inv_pi * (num / den).real();
            s.components[n][k] = v;
            s.total[k] += v;
        }
        pw *= -c.a_coeff / static_cast<double>(n + 1);
    }
    return s;
}

// Magnon ladder with a first-order probe-photon correction: the n_p = 1
// replica is shifted by 2 chi_qp + delta_p, widened by kappa_p and carries
// relative weight B. Output is A_conv * S + offset, matching Re(dr) data.
struct CompositeModel {
    SpectrumModel magnon;       // chi = chi_qm, kappa = gamma_m, drive = Omega_mw
    double chi_qp = 0.0;        // MHz
    double kappa_p = 1.0;       // MHz
    double delta_p = 0.0;       // readout detuning (MHz)
    double photon_weight = 0.0;  // relative one-photon weight B
    double conversion = 1.0;     // conversion factor A
    double offset = 0.0;         // Re(dr) offset

    void validate() const
    {
        magnon.validate();
        if (photon_weight < 0.0)
            throw std::invalid_argument("CompositeModel: photon weight B must be >= 0");
    }
};

inline std::vector<double> composite_spectrum(const CompositeModel& c,
                                              std::span<const double> omega_s)
{
    c.validate();
    SpectrumModel shifted = c.magnon;
    shifted.omega_q += 2.0 * c.chi_qp + c.delta_p;
    shifted.gamma_q += c.kappa_p;

    const Spectrum s0 = spectrum(c.magnon, omega_s);
    const Spectrum s1 = spectrum(shifted, omega_s);
    std::vector<double> out(omega_s.size());
    for (std::size_t k = 0; k < omega_s.size(); ++k)
        out[k] = c.conversion * (s0.total[k] + c.photon_weight * s1.total[k]) + c.offset;
    return out;
}

// Per-magnon-number components of the composite model (n_p = 0 and 1 parts
// summed), before conversion/offset. Used to plot the shaded components.
inline std::vector<std::vector<double>> composite_components(const CompositeModel& c,
                                                             std::span<const double> omega_s)
{
    c.validate();
    SpectrumModel shifted = c.magnon;
    shifted.omega_q += 2.0 * c.chi_qp + c.delta_p;
    shifted.gamma_q += c.kappa_p;
    const Spectrum s0 = spectrum(c.magnon, omega_s);
    const Spectrum s1 = spectrum(shifted, omega_s);
    std::vector<std::vector<double>> out(s0.components.size());
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n].resize(omega_s.size());
        for (std::size_t k = 0; k < omega_s.size(); ++k)
            out[n][k] = s0.components[n][k] + c.photon_weight * s1.components[n][k];
    }
    return out;
}

// p_n as the ratio of integrated component weights. Weights below -1e-12
// flag a non-dispersive model regime; mildly negative weights clip to 0.
struct NumberProbabilities {
    std::vector<double> p;
    bool negative_weight_warning = false;
};

inline NumberProbabilities number_probabilities(const SpectrumModel& m)
{
    const SpectrumComponents c = spectrum_components(m);
    NumberProbabilities out;
    out.negative_weight_warning = c.negative_weight_warning;
    out.p.resize(c.weights.size());
    double total = 0.0;
    for (double w : c.weights) total += std::max(w, 0.0);
    for (std::size_t n = 0; n < c.weights.size(); ++n)
        out.p[n] = std::max(c.weights[n], 0.0) / total;
    return out;
}

inline NumberProbabilities number_probabilities(const CompositeModel& c)
{
    // The probe correction multiplies every magnon weight by (1 + B), so the
    // magnon-number distribution is that of the magnon ladder alone.
    return number_probabilities(c.magnon);
}

inline std::vector<double> poisson_reference(double d_ss, int n_max)
{
    if (d_ss < 0.0)
        throw std::invalid_argument("poisson_reference: mean must be >= 0");
    std::vector<double> p(n_max + 1);
    double term = std::exp(-d_ss);
    for (int n = 0; n <= n_max; ++n) {
        p[n] = term;
        term *= d_ss / static_cast<double>(n + 1);
    }
    return p;
}

// gamma_q(P) = sqrt(eta P + gamma_q(0)^2), P in watts, rates in MHz.
inline double power_broadened_linewidth(double power_w, double eta, double gamma0)
{
    if (power_w < 0.0)
        throw std::invalid_argument("power_broadened_linewidth: power must be >= 0");
    if (gamma0 <= 0.0)
        throw std::invalid_argument("power_broadened_linewidth: gamma0 must be > 0");
    return std::sqrt(eta * power_w + gamma0 * gamma0);
}

// Omega_s = (1/2) sqrt(gamma(P)^2 - gamma(0)^2).
inline double rabi_from_linewidth(double gamma_p, double gamma0)
{
    if (gamma_p < gamma0)
        throw std::invalid_argument("rabi_from_linewidth: gamma(P) < gamma(0)");
    return 0.5 * std::sqrt(gamma_p * gamma_p - gamma0 * gamma0);
}

// Linewidth gamma/2pi in MHz from a dephasing time T2* in microseconds.
inline double linewidth_from_t2(double t2_star_us)
{
    if (t2_star_us <= 0.0)
        throw std::invalid_argument("linewidth_from_t2: T2* must be > 0");
    return 1.0 / (3.14159265358979323846 * t2_star_us);
}

}  // namespace magnonkit
