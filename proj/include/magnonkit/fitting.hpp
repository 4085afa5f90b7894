#pragma once

// Damped nonlinear least squares (Levenberg-Marquardt on finite-difference
// Jacobians, box constraints by projection) plus the model adapters for
// every fit the pipeline needs: avoided crossing, global reflection spectra,
// qubit spectra against the dispersive models, power broadening and
// ordinary linear fits. 95% confidence intervals from the scaled covariance.

#include "dispersive_spectrum.hpp"
#include "io_response.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace magnonkit {

struct FitProblem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
    Eigen::VectorXd initial;
    Eigen::VectorXd lower;      // empty = unbounded
    Eigen::VectorXd upper;      // empty = unbounded
    std::vector<bool> fixed;    // empty = all free

    void validate(Eigen::Index n_data) const
    {
        Eigen::Index free = initial.size();
        for (bool f : fixed)
            if (f) --free;
        if (free > n_data)
            throw std::invalid_argument("FitProblem: more free parameters than data points");
    }
};

struct FitResult {
    Eigen::VectorXd estimates;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd ci95;       // 1.96 sqrt(diag cov); 0 for fixed parameters
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
    bool singular_flagged = false;          // pseudo-inverse fallback used
    std::vector<bool> at_lower, at_upper;   // active bound constraints
};

struct FitOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-10;
    double step_tol = 1e-12;
    double rss_rel_tol = 1e-14;
};

namespace detail {

inline double fd_step(double p) { return std::max(1e-6 * std::abs(p), 1e-9); }

inline Eigen::VectorXd clamp_params(Eigen::VectorXd p, const FitProblem& prob)
{
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (prob.lower.size() > 0) p(i) = std::max(p(i), prob.lower(i));
        if (prob.upper.size() > 0) p(i) = std::min(p(i), prob.upper(i));
    }
    return p;
}

}  // namespace detail

inline FitResult least_squares(const FitProblem& prob, const FitOptions& opts = {})
{
    Eigen::VectorXd p = prob.initial;
    if (prob.lower.size() > 0 || prob.upper.size() > 0) p = detail::clamp_params(p, prob);
    Eigen::VectorXd r = prob.residual(p);
    if (!r.allFinite())
        throw std::invalid_argument("least_squares: residuals not finite at initial guess");
    prob.validate(r.size());

    const Eigen::Index n_par = p.size();
    const Eigen::Index n_data = r.size();
    std::vector<int> free;
    for (Eigen::Index i = 0; i < n_par; ++i)
        if (prob.fixed.empty() || !prob.fixed[i]) free.push_back(static_cast<int>(i));
    const Eigen::Index k = static_cast<Eigen::Index>(free.size());

    FitResult res;
    res.estimates = p;
    res.rss = r.squaredNorm();

    auto jacobian = [&](const Eigen::VectorXd& at) {
        Eigen::MatrixXd j(n_data, k);
        for (Eigen::Index c = 0; c < k; ++c) {
            const int i = free[c];
            const double h = detail::fd_step(at(i));
            Eigen::VectorXd hi = at, lo = at;
            hi(i) += h;
            lo(i) -= h;
            j.col(c) = (prob.residual(hi) - prob.residual(lo)) / (2.0 * h);
        }
        return j;
    };

    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    Eigen::MatrixXd j;
    if (k > 0) {
        j = jacobian(p);
        for (; iter < opts.max_iterations; ++iter) {
            const Eigen::VectorXd g = j.transpose() * r;
            if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tol * std::max(1.0, std::sqrt(res.rss))) {
                converged = true;
                break;
            }
            const Eigen::MatrixXd jtj = j.transpose() * j;
            bool accepted = false;
            for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
                Eigen::MatrixXd damped = jtj;
                for (Eigen::Index d = 0; d < k; ++d)
                    damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
                const Eigen::VectorXd step = damped.ldlt().solve(-g);
                Eigen::VectorXd cand = p;
                for (Eigen::Index c = 0; c < k; ++c) cand(free[c]) += step(c);
                cand = detail::clamp_params(cand, prob);
                const Eigen::VectorXd rc = prob.residual(cand);
                const double rss_c = rc.squaredNorm();
                if (rc.allFinite() && rss_c < res.rss) {
                    const double rel_drop = (res.rss - rss_c) / std::max(res.rss, 1e-300);
                    const double step_norm = (cand - p).norm();
                    p = cand;
                    r = rc;
                    res.rss = rss_c;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = true;
                    j = jacobian(p);
                    if (rel_drop < opts.rss_rel_tol ||
                        step_norm < opts.step_tol * (1.0 + p.norm())) {
                        converged = true;
                    }
                } else {
                    lambda *= 4.0;
                }
            }
            if (!accepted || converged) {
                converged = converged || !accepted ? converged : false;
                if (!accepted) converged = true;  // no downhill direction left
                break;
            }
        }
    } else {
        converged = true;
    }

    res.estimates = p;
    res.iterations = iter;
    res.converged = converged;

    // Covariance s^2 (J'J)^-1 over the free parameters.
    res.covariance = Eigen::MatrixXd::Zero(n_par, n_par);
    res.ci95 = Eigen::VectorXd::Zero(n_par);
    if (k > 0) {
        j = jacobian(p);
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const double dof = static_cast<double>(n_data - k);
        const double s2 = dof > 0 ? res.rss / dof : 0.0;
        Eigen::MatrixXd inv;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
        if (lu.isInvertible()) {
            inv = lu.inverse();
        } else {
            res.singular_flagged = true;
            inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
        }
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b)
                res.covariance(free[a], free[b]) = s2 * inv(a, b);
        for (Eigen::Index a = 0; a < k; ++a) {
            const double var = res.covariance(free[a], free[a]);
            res.ci95(free[a]) = 1.96 * std::sqrt(std::max(var, 0.0));
        }
    }

    res.at_lower.assign(n_par, false);
    res.at_upper.assign(n_par, false);
    const double edge_tol = 1e-12;
    for (Eigen::Index i = 0; i < n_par; ++i) {
        if (prob.lower.size() > 0 && p(i) <= prob.lower(i) + edge_tol * (1.0 + std::abs(p(i))))
            res.at_lower[i] = true;
        if (prob.upper.size() > 0 && p(i) >= prob.upper(i) - edge_tol * (1.0 + std::abs(p(i))))
            res.at_upper[i] = true;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Ordinary linear fit y = slope x + offset (offset optionally fixed at 0).

struct LinearFit {
    double slope = 0.0;
    double offset = 0.0;
    double slope_ci95 = 0.0;
    double offset_ci95 = 0.0;
    double rss = 0.0;
};

inline LinearFit fit_linear(std::span<const double> x, std::span<const double> y,
                            bool through_origin = false)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_linear: need >= 2 matching points");
    const auto n = static_cast<double>(x.size());
    LinearFit f;
    if (through_origin) {
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
        }
        f.slope = sxy / sxx;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - f.slope * x[i];
            f.rss += e * e;
        }
        const double s2 = x.size() > 1 ? f.rss / (n - 1.0) : 0.0;
        f.slope_ci95 = 1.96 * std::sqrt(s2 / sxx);
        return f;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / den;
    f.offset = (sy - f.slope * sx) / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.slope * x[i] - f.offset;
        f.rss += e * e;
    }
    const double s2 = x.size() > 2 ? f.rss / (n - 2.0) : 0.0;
    f.slope_ci95 = 1.96 * std::sqrt(s2 * n / den);
    f.offset_ci95 = 1.96 * std::sqrt(s2 * sxx / den);
    return f;
}

// ---------------------------------------------------------------------------
// Avoided-crossing branch fit (p1..p4).

struct CrossingFit {
    CrossingParams params;
    FitResult fit;
};

inline CrossingFit fit_crossing(std::span<const double> current_ma,
                                std::span<const double> omega_mhz)
{
    if (current_ma.size() != omega_mhz.size() || current_ma.size() < 4)
        throw std::invalid_argument("fit_crossing: need >= 4 matching points");

    // Sort by current for the initial-guess heuristics.
    std::vector<std::size_t> order(current_ma.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return current_ma[a] < current_ma[b]; });

    // Far from the crossing the branch sits at w_c' = p2 + p3.
    const std::size_t edge = std::max<std::size_t>(1, order.size() / 10);
    double wc = 0.0;
    for (std::size_t i = 0; i < edge; ++i)
        wc += omega_mhz[order[i]] + omega_mhz[order[order.size() - 1 - i]];
    wc /= static_cast<double>(2 * edge);

    // Deviation D = u - sgn(u) sqrt(u^2 + p4^2) with u = p1 I - p3 inverts to
    // u = (D^2 - p4^2) / (2 D); |D| peaks at p4 near the crossing. A single
    // pass is biased by the slow p4^2/(2u) tails, so iterate: regress (p1, p3),
    // then refresh wc and p4 from the partially fitted model.
    double p4 = 0.0;
    for (std::size_t i = 0; i < omega_mhz.size(); ++i)
        p4 = std::max(p4, std::abs(omega_mhz[i] - wc));
    double p1 = 1.0, p3 = 0.0;
    for (int pass = 0; pass < 8; ++pass) {
        std::vector<double> us, is;
        for (std::size_t i = 0; i < omega_mhz.size(); ++i) {
            const double d = omega_mhz[i] - wc;
            if (std::abs(d) > 0.05 * p4)
                is.push_back(current_ma[i]), us.push_back((d * d - p4 * p4) / (2.0 * d));
        }
        if (is.size() < 2) break;
        const LinearFit lf = fit_linear(is, us);
        if (std::abs(lf.slope) > 1e-12) p1 = lf.slope;
        p3 = -lf.offset;
        // wc from the model residual, p4 from D^2 - 2 u D = p4^2 near the
        // crossing (|u| < 3 p4), where the inversion is well conditioned.
        double wc_new = 0.0;
        for (std::size_t i = 0; i < omega_mhz.size(); ++i) {
            const double u = p1 * current_ma[i] - p3;
            const double s = u < 0.0 ? -1.0 : 1.0;
            wc_new += omega_mhz[i] - u + s * std::sqrt(u * u + p4 * p4);
        }
        wc = wc_new / static_cast<double>(omega_mhz.size());
        double p4sq = 0.0;
        std::size_t near = 0;
        for (std::size_t i = 0; i < omega_mhz.size(); ++i) {
            const double u = p1 * current_ma[i] - p3;
            if (std::abs(u) < 3.0 * p4) {
                const double d = omega_mhz[i] - wc;
                p4sq += d * d - 2.0 * u * d;
                ++near;
            }
        }
        if (near > 0 && p4sq > 0.0) p4 = std::sqrt(p4sq / static_cast<double>(near));
    }

    const bool one_sided = [&] {
        const double i0 = p3 / p1;
        bool below = false, above = false;
        for (double i : current_ma) (i < i0 ? below : above) = true;
        return !(below && above);
    }();

    FitProblem prob;
    prob.initial = Eigen::Vector4d(p1, wc - p3, p3, p4);
    prob.residual = [&](const Eigen::VectorXd& p) {
        CrossingParams cp{p(0), p(1), p(2), p(3)};
        Eigen::VectorXd r(static_cast<Eigen::Index>(current_ma.size()));
        for (std::size_t i = 0; i < current_ma.size(); ++i)
            r(static_cast<Eigen::Index>(i)) = crossing_branch(current_ma[i], cp) - omega_mhz[i];
        return r;
    };
    CrossingFit out;
    out.fit = least_squares(prob);
    out.params = {out.fit.estimates(0), out.fit.estimates(1), out.fit.estimates(2),
                  std::abs(out.fit.estimates(3))};
    if (one_sided) out.fit.singular_flagged = true;  // ill-conditioned warning
    return out;
}

// ---------------------------------------------------------------------------
// Global reflection-spectrum fit: shared (gamma_m, g_m-c), per-current
// magnon frequency.

struct ReflectionCurve {
    double current_ma = 0.0;
    std::vector<double> omega_mhz;
    std::vector<double> re_r;
};

struct ReflectionGlobalFit {
    double gamma_m = 0.0;
    double coupling = 0.0;
    std::vector<double> magnon_freqs;  // per curve, MHz
    FitResult fit;                     // layout: [gamma_m, g, w_m_1 .. w_m_M]
};

inline ReflectionGlobalFit fit_reflection_global(
    const std::vector<ReflectionCurve>& curves, double kappa_int, double kappa_cpl,
    double coupler_freq, std::optional<double> gamma_init = {},
    std::optional<double> coupling_init = {})
{
    if (curves.size() < 2)
        throw std::invalid_argument("fit_reflection_global: need >= 2 curves");

    const double kappa = kappa_int + kappa_cpl;
    Eigen::Index n_data = 0;
    for (const auto& c : curves) {
        if (c.omega_mhz.size() != c.re_r.size())
            throw std::invalid_argument("fit_reflection_global: curve size mismatch");
        n_data += static_cast<Eigen::Index>(c.omega_mhz.size());
    }

    // Initial magnon frequency per curve: deepest point outside the bare
    // cavity window.
    Eigen::VectorXd init(2 + static_cast<Eigen::Index>(curves.size()));
    init(0) = gamma_init.value_or(2.0);
    init(1) = coupling_init.value_or(15.0);
    for (std::size_t c = 0; c < curves.size(); ++c) {
        double best = curves[c].omega_mhz.front(), best_v = 1e300;
        for (std::size_t i = 0; i < curves[c].omega_mhz.size(); ++i) {
            if (std::abs(curves[c].omega_mhz[i] - coupler_freq) < kappa) continue;
            if (curves[c].re_r[i] < best_v) {
                best_v = curves[c].re_r[i];
                best = curves[c].omega_mhz[i];
            }
        }
        init(2 + static_cast<Eigen::Index>(c)) = best;
    }

    FitProblem prob;
    prob.initial = init;
    prob.residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n_data);
        Eigen::Index at = 0;
        for (std::size_t c = 0; c < curves.size(); ++c) {
            ReflectionParams rp;
            rp.coupler_bare_freq = coupler_freq;
            rp.kappa_int = kappa_int;
            rp.kappa_cpl = kappa_cpl;
            rp.gamma_m = std::abs(p(0));
            rp.coupling = std::abs(p(1));
            rp.magnon_bare_freq = p(2 + static_cast<Eigen::Index>(c));
            for (std::size_t i = 0; i < curves[c].omega_mhz.size(); ++i)
                r(at++) = reflection(curves[c].omega_mhz[i], rp).real() - curves[c].re_r[i];
        }
        return r;
    };

    ReflectionGlobalFit out;
    out.fit = least_squares(prob);
    out.gamma_m = std::abs(out.fit.estimates(0));
    out.coupling = std::abs(out.fit.estimates(1));
    for (std::size_t c = 0; c < curves.size(); ++c)
        out.magnon_freqs.push_back(out.fit.estimates(2 + static_cast<Eigen::Index>(c)));
    return out;
}

// ---------------------------------------------------------------------------
// Qubit spectrum with the probe mode as the oscillator (magnon vacuum).
// Free: omega_q, gamma_q, chi_qp, nbar_p, conversion, offset.

struct QubitVacuumFit {
    SpectrumModel model;     // fitted photon-ladder model
    double nbar_p = 0.0;
    double conversion = 0.0;
    double offset = 0.0;
    FitResult fit;  // layout: [omega_q, gamma_q, chi_qp, nbar_p, conv, offset]
};

struct QubitVacuumInit {
    double omega_q = 0.0;   // 0 = from data peak
    double gamma_q = 1.0;
    double chi_qp = -0.5;
    double nbar_p = 0.1;
};

inline QubitVacuumFit fit_qubit_spectrum_vacuum(std::span<const double> omega_s,
                                                std::span<const double> re_dr,
                                                double kappa_p, int n_max = 10,
                                                QubitVacuumInit guess = {})
{
    if (omega_s.size() != re_dr.size() || omega_s.size() < 8)
        throw std::invalid_argument("fit_qubit_spectrum_vacuum: bad data");

    double offset0 = re_dr[0];
    std::size_t peak = 0;
    for (std::size_t i = 0; i < re_dr.size(); ++i)
        if (std::abs(re_dr[i] - offset0) > std::abs(re_dr[peak] - offset0)) peak = i;
    const double wq0 = guess.omega_q != 0.0 ? guess.omega_q : omega_s[peak];
    const double amp0 = re_dr[peak] - offset0;
    const double conv0 = amp0 * 3.141592653589793 * guess.gamma_q;

    auto model_of = [&](const Eigen::VectorXd& p) {
        SpectrumModel m;
        m.omega_q = p(0);
        m.gamma_q = std::abs(p(1));
        m.chi = p(2);
        m.kappa = kappa_p;
        m.delta_d = 0.0;
        m.omega_d_strength =
            SpectrumModel::strength_for_occupancy(std::abs(p(3)), kappa_p, 0.0);
        m.n_max = n_max;
        return m;
    };

    FitProblem prob;
    prob.initial = Eigen::VectorXd(6);
    prob.initial << wq0, guess.gamma_q, guess.chi_qp, guess.nbar_p, conv0, offset0;
    prob.residual = [&](const Eigen::VectorXd& p) {
        const Spectrum s = spectrum(model_of(p), omega_s);
        Eigen::VectorXd r(static_cast<Eigen::Index>(omega_s.size()));
        for (std::size_t i = 0; i < omega_s.size(); ++i)
            r(static_cast<Eigen::Index>(i)) = p(4) * s.total[i] + p(5) - re_dr[i];
        return r;
    };

    QubitVacuumFit out;
    out.fit = least_squares(prob);
    out.model = model_of(out.fit.estimates);
    out.nbar_p = std::abs(out.fit.estimates(3));
    out.conversion = out.fit.estimates(4);
    out.offset = out.fit.estimates(5);
    return out;
}

// ---------------------------------------------------------------------------
// Qubit spectrum with a driven Kittel mode (composite model). Fixed:
// omega_q^(np=0), gamma_q^(np=0), gamma_m, B, chi_qp, kappa_p.
// Free: chi_qm, delta_mw, nbar_m, conversion, offset.

struct QubitMagnonFixed {
    double omega_q_np0 = 0.0;   // MHz
    double gamma_q_np0 = 1.0;   // MHz
    double gamma_m = 1.3;       // MHz
    double photon_weight = 0.03;
    double chi_qp = -0.73;      // MHz (qubit splitting per probe photon, = 2 chi)
    double kappa_p = 3.72;      // MHz
    int n_max = 10;
};

struct QubitMagnonFit {
    CompositeModel model;
    double chi_qm = 0.0;
    double delta_mw = 0.0;
    double nbar_m = 0.0;
    double conversion = 0.0;
    double offset = 0.0;
    FitResult fit;  // layout: [chi_qm, delta_mw, nbar_m, conv, offset]
};

struct QubitMagnonInit {
    double chi_qm = 1.3;
    double delta_mw = -0.3;
    double nbar_m = 0.5;
};

inline CompositeModel make_magnon_composite(const QubitMagnonFixed& fx, double chi_qm,
                                            double delta_mw, double nbar_m,
                                            double conversion = 1.0, double offset = 0.0)
{
    CompositeModel c;
    c.magnon.omega_q = fx.omega_q_np0;
    c.magnon.gamma_q = fx.gamma_q_np0;
    c.magnon.chi = chi_qm;
    c.magnon.kappa = fx.gamma_m;
    c.magnon.delta_d = delta_mw;
    c.magnon.omega_d_strength =
        SpectrumModel::strength_for_occupancy(nbar_m, fx.gamma_m, delta_mw);
    c.magnon.n_max = fx.n_max;
    // The probe correction uses half the per-photon qubit splitting so the
    // replica lands at the splitting itself.
    c.chi_qp = fx.chi_qp / 2.0;
    c.kappa_p = fx.kappa_p;
    c.delta_p = 0.0;
    c.photon_weight = fx.photon_weight;
    c.conversion = conversion;
    c.offset = offset;
    return c;
}

inline QubitMagnonFit fit_qubit_spectrum_magnon(std::span<const double> omega_s,
                                                std::span<const double> re_dr,
                                                const QubitMagnonFixed& fx,
                                                QubitMagnonInit guess = {})
{
    if (omega_s.size() != re_dr.size() || omega_s.size() < 8)
        throw std::invalid_argument("fit_qubit_spectrum_magnon: bad data");

    double offset0 = re_dr[0];
    std::size_t peak = 0;
    for (std::size_t i = 0; i < re_dr.size(); ++i)
        if (std::abs(re_dr[i] - offset0) > std::abs(re_dr[peak] - offset0)) peak = i;
    const double conv0 =
        (re_dr[peak] - offset0) * 3.141592653589793 * fx.gamma_q_np0 * (1.0 + guess.nbar_m);

    FitProblem prob;
    prob.initial = Eigen::VectorXd(5);
    prob.initial << guess.chi_qm, guess.delta_mw, guess.nbar_m, conv0, offset0;
    prob.residual = [&](const Eigen::VectorXd& p) {
        const CompositeModel c =
            make_magnon_composite(fx, p(0), p(1), std::abs(p(2)), p(3), p(4));
        const std::vector<double> y = composite_spectrum(c, omega_s);
        Eigen::VectorXd r(static_cast<Eigen::Index>(omega_s.size()));
        for (std::size_t i = 0; i < omega_s.size(); ++i)
            r(static_cast<Eigen::Index>(i)) = y[i] - re_dr[i];
        return r;
    };

    QubitMagnonFit out;
    out.fit = least_squares(prob);
    out.chi_qm = out.fit.estimates(0);
    out.delta_mw = out.fit.estimates(1);
    out.nbar_m = std::abs(out.fit.estimates(2));
    out.conversion = out.fit.estimates(3);
    out.offset = out.fit.estimates(4);
    out.model = make_magnon_composite(fx, out.chi_qm, out.delta_mw, out.nbar_m,
                                      out.conversion, out.offset);
    return out;
}

// Magnon number probabilities of a fitted composite model with extremal-
// corner error propagation over the 95% CIs of (nbar_m, chi_qm, delta_mw).
struct ProbabilityBand {
    std::vector<double> p;
    std::vector<double> p_low;
    std::vector<double> p_high;
};

inline ProbabilityBand magnon_probabilities_with_bounds(const QubitMagnonFit& f,
                                                        const QubitMagnonFixed& fx)
{
    ProbabilityBand band;
    band.p = number_probabilities(f.model).p;
    band.p_low = band.p;
    band.p_high = band.p;
    const double d_chi = f.fit.ci95(0), d_det = f.fit.ci95(1), d_n = f.fit.ci95(2);
    for (double chi : {f.chi_qm - d_chi, f.chi_qm + d_chi})
        for (double det : {f.delta_mw - d_det, f.delta_mw + d_det})
            for (double nb : {std::max(f.nbar_m - d_n, 0.0), f.nbar_m + d_n}) {
                const CompositeModel c = make_magnon_composite(fx, chi, det, nb);
                const auto p = number_probabilities(c).p;
                for (std::size_t n = 0; n < band.p.size(); ++n) {
                    band.p_low[n] = std::min(band.p_low[n], p[n]);
                    band.p_high[n] = std::max(band.p_high[n], p[n]);
                }
            }
    return band;
}

// ---------------------------------------------------------------------------
// Power broadening gamma(P) = sqrt(eta P + gamma0^2) with gamma0 bounded
// below by the T1 limit 1/(2 pi T1).

struct PowerBroadeningFit {
    double eta = 0.0;      // MHz^2 / W
    double gamma0 = 0.0;   // MHz
    bool floor_active = false;
    FitResult fit;         // layout: [eta, gamma0]
};

inline PowerBroadeningFit fit_power_broadening(std::span<const double> power_w,
                                               std::span<const double> gamma_mhz,
                                               double t1_us)
{
    if (power_w.size() != gamma_mhz.size() || power_w.size() < 3)
        throw std::invalid_argument("fit_power_broadening: need >= 3 matching points");
    if (t1_us <= 0.0)
        throw std::invalid_argument("fit_power_broadening: T1 must be > 0");
    const double floor = 1.0 / (2.0 * 3.141592653589793 * t1_us);  // MHz

    double gmin = gamma_mhz[0], gmax = gamma_mhz[0], pmax = power_w[0];
    for (std::size_t i = 0; i < power_w.size(); ++i) {
        gmin = std::min(gmin, gamma_mhz[i]);
        gmax = std::max(gmax, gamma_mhz[i]);
        pmax = std::max(pmax, power_w[i]);
    }
    const double g0_init = std::max(gmin, floor);
    const double eta_init = std::max((gmax * gmax - g0_init * g0_init) / pmax, 1e-6);

    // Fit eta in MHz^2/fW so both parameters are O(1); rescale on output.
    constexpr double fw = 1e-15;
    FitProblem prob;
    prob.initial = Eigen::Vector2d(eta_init * fw, g0_init);
    prob.lower = Eigen::Vector2d(0.0, floor);
    prob.residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(power_w.size()));
        for (std::size_t i = 0; i < power_w.size(); ++i)
            r(static_cast<Eigen::Index>(i)) =
                std::sqrt(p(0) * (power_w[i] / fw) + p(1) * p(1)) - gamma_mhz[i];
        return r;
    };

    PowerBroadeningFit out;
    out.fit = least_squares(prob);
    out.fit.estimates(0) /= fw;
    out.fit.ci95(0) /= fw;
    out.fit.covariance(0, 0) /= fw * fw;
    out.fit.covariance(0, 1) /= fw;
    out.fit.covariance(1, 0) /= fw;
    out.eta = out.fit.estimates(0);
    out.gamma0 = out.fit.estimates(1);
    out.floor_active = out.fit.at_lower[1];
    return out;
}

}  // namespace magnonkit
