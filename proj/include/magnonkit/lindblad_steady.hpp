#pragma once

// Steady state of the driven Kerr Kittel mode under single-mode relaxation,
// occupancy sweeps, and the R^2-based Kerr-coefficient fit against measured
// occupancy-vs-power data.
//
// H/hbar = (delta + K/2) n - (K/2) n^2 + Omega (c + c'),
// L rho = -i[H, rho] + gamma (c rho c' - {n, rho}/2).
//
// Vectorization is column-stacking: rho(i, j) lives at vec index i + d*j,
// so vec(A X B) = (B^T kron A) vec(X).

#include "fock_algebra.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace magnonkit {

struct KerrModel {
    double delta_mw = 0.0;           // MHz
    double kerr = 0.0;               // K_m, MHz
    double omega_mw_strength = 0.0;  // Omega_mw, MHz
    double gamma_m = 1.0;            // MHz
    int fock_dim = 30;

    void validate() const
    {
        if (gamma_m <= 0.0)
            throw std::invalid_argument("KerrModel: gamma_m must be > 0");
        if (fock_dim < 5)
            throw std::invalid_argument("KerrModel: fock_dim must be >= 5");
    }
};

using SparseOp = Eigen::SparseMatrix<Complex>;

inline SparseOp build_liouvillian(const KerrModel& m)
{
    m.validate();
    const int d = m.fock_dim;
    const double twopi = 2.0 * std::numbers::pi;  // MHz-linear inputs, angular generator

    // Dense single-mode H (real symmetric, tridiagonal here).
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (int n = 0; n < d; ++n)
        h(n, n) = (m.delta_mw + m.kerr / 2.0) * n - (m.kerr / 2.0) * n * n;
    for (int n = 1; n < d; ++n) {
        h(n - 1, n) += m.omega_mw_strength * std::sqrt(static_cast<double>(n));
        h(n, n - 1) += m.omega_mw_strength * std::sqrt(static_cast<double>(n));
    }

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(d) * d * 4);
    auto vec_idx = [d](int i, int j) { return i + d * j; };
    const Complex mi(0.0, -1.0);

    // -i (I kron H - H^T kron I); H real so H^T = H element-wise transposed.
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            if (h(i, k) == 0.0) continue;
            for (int j = 0; j < d; ++j) {
                trip.emplace_back(vec_idx(i, j), vec_idx(k, j), mi * twopi * h(i, k));
                trip.emplace_back(vec_idx(j, k), vec_idx(j, i), -mi * twopi * h(i, k));
            }
        }
    // gamma [ (cbar kron c) - (I kron n)/2 - (n kron I)/2 ], c real.
    const double g = twopi * m.gamma_m;
    for (int i = 1; i < d; ++i)
        for (int j = 1; j < d; ++j)
            trip.emplace_back(vec_idx(i - 1, j - 1), vec_idx(i, j),
                              Complex(g * std::sqrt(static_cast<double>(i) * j), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            trip.emplace_back(vec_idx(i, j), vec_idx(i, j), Complex(-0.5 * g * (i + j), 0.0));

    SparseOp lv(d * d, d * d);
    lv.setFromTriplets(trip.begin(), trip.end());
    return lv;
}

struct SteadyState {
    Eigen::MatrixXcd rho;
    double occupancy = 0.0;
    double residual = 0.0;           // ||L rho|| / ||L||
    bool truncation_warning = false;  // top two Fock levels hold > 1e-6
    int fock_dim_used = 0;
};

namespace detail {

inline SteadyState steady_state_once(const KerrModel& m)
{
    const int d = m.fock_dim;
    const SparseOp lv = build_liouvillian(m);

    // Replace the row of rho(0,0) with the trace constraint tr(rho) = 1.
    SparseOp sys = lv;
    sys.prune([](int row, int, const Complex&) { return row != 0; });
    std::vector<Eigen::Triplet<Complex>> trace_row;
    for (int i = 0; i < d; ++i)
        trace_row.emplace_back(0, i + d * i, Complex(1.0, 0.0));
    SparseOp tr(d * d, d * d);
    tr.setFromTriplets(trace_row.begin(), trace_row.end());
    sys += tr;
    sys.makeCompressed();

    Eigen::SparseLU<SparseOp> solver;
    solver.compute(sys);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("steady_state: singular or ill-conditioned Liouvillian solve");
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
    rhs(0) = 1.0;
    Eigen::VectorXcd x = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("steady_state: Liouvillian solve failed");

    SteadyState out;
    out.fock_dim_used = d;
    out.rho = Eigen::Map<Eigen::MatrixXcd>(x.data(), d, d);
    out.rho = 0.5 * (out.rho + out.rho.adjoint().eval());  // symmetrize roundoff
    out.rho /= out.rho.trace().real();

    out.occupancy = 0.0;
    for (int n = 0; n < d; ++n) out.occupancy += n * out.rho(n, n).real();

    const double top = out.rho(d - 1, d - 1).real() + out.rho(d - 2, d - 2).real();
    out.truncation_warning = top > 1e-6;

    Eigen::Map<Eigen::VectorXcd> rho_vec(out.rho.data(), d * d);
    out.residual = (lv * rho_vec).norm() / lv.norm();
    return out;
}

}  // namespace detail

// Solves L rho = 0 with unit trace; the Fock truncation is raised
// automatically while the top levels carry population, up to dim 80.
inline SteadyState steady_state(KerrModel m, int max_fock_dim = 80)
{
    m.validate();
    for (;;) {
        SteadyState s = detail::steady_state_once(m);
        if (!s.truncation_warning || m.fock_dim >= max_fock_dim) return s;
        m.fock_dim = std::min(max_fock_dim, m.fock_dim * 2);
    }
}

// Occupancy surface <n>(Omega^2, K) for plotting and fitting.
struct KerrSweep {
    std::vector<double> kerr_values;    // MHz
    std::vector<double> omega_values;   // MHz
    std::vector<std::vector<double>> occupancy;  // [kerr][omega]
};

inline KerrSweep kerr_sweep(double gamma_m, double delta_mw,
                            const std::vector<double>& kerr_list,
                            const std::vector<double>& omega_grid, int fock_dim = 30)
{
    KerrSweep sw;
    sw.kerr_values = kerr_list;
    sw.omega_values = omega_grid;
    sw.occupancy.resize(kerr_list.size());
    for (std::size_t k = 0; k < kerr_list.size(); ++k) {
        sw.occupancy[k].resize(omega_grid.size());
        for (std::size_t w = 0; w < omega_grid.size(); ++w) {
            KerrModel m{delta_mw, kerr_list[k], omega_grid[w], gamma_m, fock_dim};
            sw.occupancy[k][w] = steady_state(m).occupancy;
        }
    }
    return sw;
}

struct OccupancyPoint {
    double power_fw = 0.0;  // P_mw in femtowatts
    double occupancy = 0.0;
    double ci = 0.0;  // 95% CI half-width (unused by the R^2 fit itself)
};

struct KerrFitOptions {
    double kerr_min = -0.6;   // MHz
    double kerr_max = 0.2;    // MHz
    double kerr_step = 0.01;  // MHz
    double prop_span = 0.5;   // +-50% around the linear-fit slope
    int prop_steps = 101;
    int fock_dim = 30;
    int omega2_samples = 48;  // curve resolution per Kerr value
};

struct KerrFitResult {
    double kerr = 0.0;             // MHz
    double proportionality = 0.0;  // Omega^2 per fW, MHz^2/fW
    double r2 = 0.0;
    std::vector<double> kerr_grid;
    std::vector<double> prop_grid;
    std::vector<std::vector<double>> r2_surface;  // [kerr][prop]
};

// Grid search over (K_m, Omega^2/P) maximizing the coefficient of
// determination between the simulated and measured occupancy curves.
inline KerrFitResult fit_kerr(const std::vector<OccupancyPoint>& data, double gamma_m,
                              double delta_mw, KerrFitOptions opts = {})
{
    if (data.size() < 4)
        throw std::invalid_argument("fit_kerr: need at least 4 data points");
    double mean = 0.0, p_max = 0.0;
    for (const auto& pt : data) {
        mean += pt.occupancy;
        p_max = std::max(p_max, pt.power_fw);
    }
    mean /= static_cast<double>(data.size());
    double ss_tot = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& pt : data) {
        ss_tot += (pt.occupancy - mean) * (pt.occupancy - mean);
        sxx += pt.power_fw * pt.power_fw;
        sxy += pt.power_fw * pt.occupancy;
    }
    if (ss_tot <= 0.0)
        throw std::invalid_argument("fit_kerr: degenerate data (constant occupancy)");

    // Through-origin linear slope anchors the proportionality-constant grid:
    // in the linear regime <n> = prop P / ((gamma/2)^2 + delta^2).
    const double lorentz = (gamma_m / 2.0) * (gamma_m / 2.0) + delta_mw * delta_mw;
    const double prop_center = (sxy / sxx) * lorentz;

    KerrFitResult res;
    for (double k = opts.kerr_min; k <= opts.kerr_max + 1e-12; k += opts.kerr_step)
        res.kerr_grid.push_back(k);
    for (int i = 0; i < opts.prop_steps; ++i) {
        const double f = 1.0 - opts.prop_span +
                         2.0 * opts.prop_span * i / std::max(1, opts.prop_steps - 1);
        res.prop_grid.push_back(prop_center * f);
    }

    const double prop_max = *std::max_element(res.prop_grid.begin(), res.prop_grid.end());
    const double om2_max = prop_max * p_max;

    res.r2_surface.assign(res.kerr_grid.size(),
                          std::vector<double>(res.prop_grid.size(), 0.0));
    res.r2 = -std::numeric_limits<double>::infinity();
    std::vector<double> om2_grid(opts.omega2_samples), n_curve(opts.omega2_samples);
    for (std::size_t ki = 0; ki < res.kerr_grid.size(); ++ki) {
        // Precompute <n>(Omega^2) once per Kerr value, interpolate per prop.
        for (int s = 0; s < opts.omega2_samples; ++s) {
            om2_grid[s] = om2_max * s / static_cast<double>(opts.omega2_samples - 1);
            KerrModel m{delta_mw, res.kerr_grid[ki], std::sqrt(om2_grid[s]), gamma_m,
                        opts.fock_dim};
            n_curve[s] = steady_state(m).occupancy;
        }
        auto interp = [&](double om2) {
            if (om2 <= 0.0) return 0.0;
            const double x = om2 / om2_max * (opts.omega2_samples - 1);
            const int s = std::min(static_cast<int>(x), opts.omega2_samples - 2);
            const double t = x - s;
            return (1.0 - t) * n_curve[s] + t * n_curve[s + 1];
        };
        for (std::size_t pi = 0; pi < res.prop_grid.size(); ++pi) {
            double ss_res = 0.0;
            for (const auto& pt : data) {
                const double model = interp(res.prop_grid[pi] * pt.power_fw);
                ss_res += (pt.occupancy - model) * (pt.occupancy - model);
            }
            const double r2 = 1.0 - ss_res / ss_tot;
            res.r2_surface[ki][pi] = r2;
            if (r2 > res.r2) {
                res.r2 = r2;
                res.kerr = res.kerr_grid[ki];
                res.proportionality = res.prop_grid[pi];
            }
        }
    }
    return res;
}

// Extremal best-fit Kerr over the four (gamma_m, delta_mw) corner
// combinations, per the error-bar procedure of the R^2 fit.
struct KerrBounds {
    double kerr_low = 0.0;
    double kerr_high = 0.0;
};

inline KerrBounds fit_kerr_bounds(const std::vector<OccupancyPoint>& data,
                                  std::pair<double, double> gamma_m_range,
                                  std::pair<double, double> delta_mw_range,
                                  KerrFitOptions opts = {})
{
    KerrBounds b{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
    for (double g : {gamma_m_range.first, gamma_m_range.second})
        for (double dl : {delta_mw_range.first, delta_mw_range.second}) {
            const double k = fit_kerr(data, g, dl, opts).kerr;
            b.kerr_low = std::min(b.kerr_low, k);
            b.kerr_high = std::max(b.kerr_high, k);
        }
    return b;
}

}  // namespace magnonkit
