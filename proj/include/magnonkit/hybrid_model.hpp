#pragma once

// Full hybrid Hamiltonian of the cavity/transmon/Kittel system, its
// diagonalization with bare-state labeling, and extraction of the derived
// dispersive parameters (chi_qp, chi_qm, K_m, g_qm, Lamb shifts, dressed
// qubit frequency and anharmonicity).
//
// Unit convention throughout: linear frequencies (omega/2pi) in MHz.

#include "fock_algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace magnonkit {

inline constexpr const char* kTransmonLabel = "transmon";
inline constexpr const char* kKittelLabel = "kittel";

inline std::string cavity_label(std::size_t p) { return "te10" + std::to_string(p + 1); }

// Bare frequencies, couplings and linewidths of the hybrid system.
// Cavity vectors are indexed by p-1 for the TE10p mode.
struct SystemParams {
    std::vector<double> cavity_bare_freqs;        // MHz
    double qubit_bare_freq = 0.0;                 // MHz
    double bare_anharmonicity = 0.0;              // MHz, negative
    double magnon_bare_freq = 0.0;                // MHz
    std::vector<double> qubit_cavity_couplings;   // MHz
    std::vector<double> magnon_cavity_couplings;  // MHz, signed

    std::vector<double> cavity_linewidths;        // kappa_10p, MHz
    std::vector<double> cavity_linewidths_cpl;    // kappa_10p^cpl, MHz
    std::vector<double> cavity_linewidths_int;    // kappa_10p^int, MHz
    double qubit_linewidth0 = 0.0;                // gamma_q(0), MHz
    double magnon_linewidth = 0.0;                // gamma_m, MHz

    std::size_t n_cavity_modes() const { return cavity_bare_freqs.size(); }

    void validate() const
    {
        std::size_t n = cavity_bare_freqs.size();
        if (qubit_cavity_couplings.size() != n || magnon_cavity_couplings.size() != n)
            throw std::invalid_argument("SystemParams: coupling vectors must match cavity mode count");
        if (bare_anharmonicity >= 0.0)
            throw std::invalid_argument("SystemParams: bare anharmonicity must be negative");
        if (qubit_linewidth0 < 0.0 || magnon_linewidth < 0.0)
            throw std::invalid_argument("SystemParams: linewidths must be >= 0");
        for (std::size_t i = 0; i < cavity_linewidths.size(); ++i) {
            if (cavity_linewidths[i] < 0.0 || cavity_linewidths_cpl[i] < 0.0 ||
                cavity_linewidths_int[i] < 0.0)
                throw std::invalid_argument("SystemParams: linewidths must be >= 0");
            if (std::abs(cavity_linewidths_cpl[i] + cavity_linewidths_int[i] -
                         cavity_linewidths[i]) > 1e-9)
                throw std::invalid_argument(
                    "SystemParams: kappa_cpl + kappa_int must equal kappa for mode " +
                    cavity_label(i));
        }
    }
};

// Default truncation: {0,1,2} per cavity mode, {g,e,f} for the transmon,
// {0,1,2} magnons.
inline ModeLayout default_layout(std::size_t n_cavity_modes, int cavity_dim = 3,
                                 int transmon_dim = 3, int magnon_dim = 3)
{
    std::vector<int> dims;
    std::vector<std::string> labels;
    for (std::size_t p = 0; p < n_cavity_modes; ++p) {
        dims.push_back(cavity_dim);
        labels.push_back(cavity_label(p));
    }
    dims.push_back(transmon_dim);
    labels.emplace_back(kTransmonLabel);
    dims.push_back(magnon_dim);
    labels.emplace_back(kKittelLabel);
    return ModeLayout(std::move(dims), std::move(labels));
}

// H/hbar in MHz:
//   sum_p w_p a_p'a_p + (w_q - a/2) b'b + (a/2)(b'b)^2 + w_m c'c
//   + sum_p [ g_qp (a_p'b + a_p b') + g_mp (a_p'c + a_p c') ]
inline Matrix build_hamiltonian(const SystemParams& params, const ModeLayout& layout)
{
    params.validate();
    for (std::size_t p = 0; p < params.n_cavity_modes(); ++p)
        if (!layout.has(cavity_label(p)))
            throw std::invalid_argument("build_hamiltonian: layout missing " + cavity_label(p));
    if (!layout.has(kTransmonLabel) || !layout.has(kKittelLabel))
        throw std::invalid_argument("build_hamiltonian: layout missing transmon or kittel mode");

    // Matrix elements are assembled directly in the occupation basis; the
    // dense-operator route costs O(d^3) per coupling term and is prohibitive
    // at the enlarged truncations used by convergence checks.
    const std::size_t iq = layout.index_of(kTransmonLabel);
    const std::size_t im = layout.index_of(kKittelLabel);
    std::vector<std::size_t> ic(params.n_cavity_modes());
    for (std::size_t p = 0; p < params.n_cavity_modes(); ++p)
        ic[p] = layout.index_of(cavity_label(p));

    const int d = layout.total_dim();
    Matrix h = Matrix::Zero(d, d);
    std::vector<int> occ;
    for (int i = 0; i < d; ++i) {
        occ = layout.unflatten(i);
        const double nb = occ[iq];
        double diag = (params.qubit_bare_freq - params.bare_anharmonicity / 2.0) * nb +
                      (params.bare_anharmonicity / 2.0) * nb * nb +
                      params.magnon_bare_freq * occ[im];
        for (std::size_t p = 0; p < params.n_cavity_modes(); ++p)
            diag += params.cavity_bare_freqs[p] * occ[ic[p]];
        h(i, i) = diag;

        // a_p' x and h.c., with x the transmon or Kittel lowering operator.
        auto hop = [&](std::size_t from, std::size_t to, double g) {
            if (g == 0.0 || occ[from] == 0 || occ[to] + 1 >= layout.dims[to]) return;
            std::vector<int> occ2 = occ;
            --occ2[from];
            ++occ2[to];
            const int j = layout.flatten(occ2);
            const double amp = g * std::sqrt(static_cast<double>(occ[from]) * (occ[to] + 1));
            h(j, i) += amp;
            h(i, j) += amp;
        };
        for (std::size_t p = 0; p < params.n_cavity_modes(); ++p) {
            hop(iq, ic[p], params.qubit_cavity_couplings[p]);
            hop(im, ic[p], params.magnon_cavity_couplings[p]);
        }
    }
    return h;
}

namespace detail {

// One invariant subspace of a Hermitian matrix, found from its sparsity
// pattern. `basis` holds the global basis indices of the block.
struct EigenBlock {
    std::vector<int> basis;
    Eigen::VectorXd evals;
    Eigen::MatrixXcd evecs;  // columns in the block-local basis
};

// Diagonalizes H block by block. Blocks are the connected components of the
// graph whose edges are nonzero off-diagonal entries; for the hybrid
// Hamiltonian these are the total-excitation-number sectors, which keeps
// large truncations tractable.
inline std::vector<EigenBlock> block_eig(const Matrix& h)
{
    const int n = static_cast<int>(h.rows());
    const double tol = 1e-14 * std::max(1.0, h.cwiseAbs().maxCoeff());

    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(h(i, j)) > tol) {
                int ri = find(i), rj = find(j);
                if (ri != rj) parent[ri] = rj;
            }

    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

    std::vector<EigenBlock> blocks;
    blocks.reserve(groups.size());
    for (auto& [root, basis] : groups) {
        const int m = static_cast<int>(basis.size());
        Matrix hb(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                hb(i, j) = h(basis[i], basis[j]);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(hb);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("block_eig: eigensolver failed to converge");
        blocks.push_back({std::move(basis), solver.eigenvalues(), solver.eigenvectors()});
    }
    return blocks;
}

}  // namespace detail

// Eigenvalues of the hybrid Hamiltonian with bare-state labels assigned by
// maximum squared overlap. Energies are relative to the ground state.
struct DressedLevels {
    ModeLayout layout;
    std::vector<double> energies;            // indexed like `labels`
    std::vector<std::vector<int>> labels;    // per-mode occupations
    std::vector<double> overlaps;            // |<bare|dressed>|^2

    std::map<int, std::size_t> index_by_flat;  // flattened bare label -> entry

    bool has(std::span<const int> occ) const
    {
        return index_by_flat.count(layout.flatten(occ)) > 0;
    }
    double energy(std::span<const int> occ) const { return energies[entry(occ)]; }
    double overlap(std::span<const int> occ) const { return overlaps[entry(occ)]; }

    std::size_t entry(std::span<const int> occ) const
    {
        auto it = index_by_flat.find(layout.flatten(occ));
        if (it == index_by_flat.end()) {
            std::ostringstream msg;
            msg << "DressedLevels: no state labeled (";
            for (std::size_t k = 0; k < occ.size(); ++k)
                msg << (k ? "," : "") << occ[k];
            msg << "); truncation too small?";
            throw std::invalid_argument(msg.str());
        }
        return it->second;
    }

    // Energy of the state with single occupation of `mode` on top of `base`.
    std::vector<int> occ_with(std::initializer_list<std::pair<const char*, int>> occs) const
    {
        std::vector<int> occ(layout.n_modes(), 0);
        for (const auto& [label, n] : occs)
            occ[layout.index_of(label)] = n;
        return occ;
    }
};

// Full Hermitian eigendecomposition with greedy maximum-overlap labeling.
// Ties that leave a state unassignable are a labeling failure, not a guess.
inline DressedLevels diagonalize(const Matrix& h, const ModeLayout& layout)
{
    if (h.rows() != layout.total_dim())
        throw std::invalid_argument("diagonalize: H dimension does not match layout");
    if (!is_hermitian(h, 1e-12))
        throw std::invalid_argument("diagonalize: H is not Hermitian");

    DressedLevels out;
    out.layout = layout;
    out.energies.resize(h.rows());
    out.labels.resize(h.rows());
    out.overlaps.resize(h.rows());

    std::size_t next = 0;
    for (const auto& block : detail::block_eig(h)) {
        const int m = static_cast<int>(block.basis.size());
        // overlap(i, j) = |<basis_i|eig_j>|^2
        Eigen::MatrixXd ov = block.evecs.cwiseAbs2();
        struct Cand { double o; int i, j; };
        std::vector<Cand> cands;
        cands.reserve(static_cast<std::size_t>(m) * m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (ov(i, j) > 0.0) cands.push_back({ov(i, j), i, j});
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.o != b.o) return a.o > b.o;
            return std::tie(a.i, a.j) < std::tie(b.i, b.j);
        });
        std::vector<bool> used_basis(m, false), used_eig(m, false);
        int assigned = 0;
        for (const auto& c : cands) {
            if (used_basis[c.i] || used_eig[c.j]) continue;
            used_basis[c.i] = true;
            used_eig[c.j] = true;
            out.energies[next] = block.evals(c.j);
            out.labels[next] = layout.unflatten(block.basis[c.i]);
            out.overlaps[next] = c.o;
            out.index_by_flat[block.basis[c.i]] = next;
            ++next;
            ++assigned;
        }
        if (assigned != m)
            throw std::runtime_error(
                "diagonalize: labeling failure, could not assign a bare state to every "
                "eigenstate (degenerate block?)");
    }

    const std::vector<int> ground(layout.n_modes(), 0);
    const double e0 = out.energies[out.entry(ground)];
    for (double& e : out.energies) e -= e0;
    return out;
}

// chi_qp, chi_qm, K_m, g_qm and companions, all in MHz.
struct DerivedParams {
    double chi_qp = 0.0;
    double chi_qm = 0.0;
    double kerr_m = 0.0;
    double g_qm = 0.0;
    double lamb_shift_m = 0.0;
    double dressed_qubit_freq = 0.0;
    double dressed_anharmonicity = 0.0;
    double min_label_overlap = 1.0;  // smallest overlap among states used
    bool low_confidence = false;     // min overlap < 0.5
};

namespace detail {

inline void track_overlap(DerivedParams& d, const DressedLevels& lv, std::span<const int> occ)
{
    d.min_label_overlap = std::min(d.min_label_overlap, lv.overlap(occ));
    if (d.min_label_overlap < 0.5) d.low_confidence = true;
}

}  // namespace detail

// Dispersive shifts from labeled dressed levels.
//
// chi_qm follows the half-difference of the magnon frequency with the
// transmon excited vs ground. The probe-mode value is reported as the full
// frequency pull (equivalently, the qubit peak splitting per probe photon),
// which is the convention of the reference values it is compared against.
inline DerivedParams extract_dispersive(const DressedLevels& lv,
                                        const std::string& probe_mode = "te103")
{
    DerivedParams d;
    const auto e_only = lv.occ_with({{kTransmonLabel, 1}});
    const auto p_only = lv.occ_with({{probe_mode.c_str(), 1}});
    const auto p_and_e = lv.occ_with({{probe_mode.c_str(), 1}, {kTransmonLabel, 1}});
    const auto m_only = lv.occ_with({{kKittelLabel, 1}});
    const auto m_and_e = lv.occ_with({{kKittelLabel, 1}, {kTransmonLabel, 1}});

    const double w_p_g = lv.energy(p_only);
    const double w_p_e = lv.energy(p_and_e) - lv.energy(e_only);
    const double w_m_g = lv.energy(m_only);
    const double w_m_e = lv.energy(m_and_e) - lv.energy(e_only);

    d.chi_qp = w_p_e - w_p_g;
    d.chi_qm = (w_m_e - w_m_g) / 2.0;
    for (const auto& occ : {e_only, p_only, p_and_e, m_only, m_and_e})
        detail::track_overlap(d, lv, occ);
    return d;
}

// K_m = 2 w_{m,0->1}^g - w_{m,0->2}^g.
inline double extract_kerr(const DressedLevels& lv)
{
    const auto m1 = lv.occ_with({{kKittelLabel, 1}});
    const auto m2 = lv.occ_with({{kKittelLabel, 2}});
    return 2.0 * lv.energy(m1) - lv.energy(m2);
}

// Dressed qubit frequency and anharmonicity with all other modes in vacuum.
inline std::pair<double, double> dressed_qubit(const DressedLevels& lv)
{
    const auto e = lv.occ_with({{kTransmonLabel, 1}});
    const auto f = lv.occ_with({{kTransmonLabel, 2}});
    const double wq = lv.energy(e);
    const double alpha = (lv.energy(f) - lv.energy(e)) - wq;
    return {wq, alpha};
}

inline double magnon_lamb_shift(const SystemParams& params, const DressedLevels& lv)
{
    const auto m1 = lv.occ_with({{kKittelLabel, 1}});
    return params.magnon_bare_freq - lv.energy(m1);
}

namespace detail {

// Splitting between the two dressed levels with the largest combined weight
// on |transmon e, vacuum> and |one magnon, vacuum>.
inline double hybridized_gap(const SystemParams& params, const ModeLayout& layout,
                             double magnon_bare_freq)
{
    SystemParams p = params;
    p.magnon_bare_freq = magnon_bare_freq;
    const Matrix h = build_hamiltonian(p, layout);

    std::vector<int> occ_e(layout.n_modes(), 0), occ_m(layout.n_modes(), 0);
    occ_e[layout.index_of(kTransmonLabel)] = 1;
    occ_m[layout.index_of(kKittelLabel)] = 1;
    const int ie = layout.flatten(occ_e);
    const int im = layout.flatten(occ_m);

    for (const auto& block : block_eig(h)) {
        auto it_e = std::find(block.basis.begin(), block.basis.end(), ie);
        if (it_e == block.basis.end()) continue;
        auto it_m = std::find(block.basis.begin(), block.basis.end(), im);
        if (it_m == block.basis.end()) continue;
        const int le = static_cast<int>(it_e - block.basis.begin());
        const int lm = static_cast<int>(it_m - block.basis.begin());
        const int m = static_cast<int>(block.basis.size());
        std::vector<std::pair<double, int>> weight(m);
        for (int j = 0; j < m; ++j)
            weight[j] = {std::norm(block.evecs(le, j)) + std::norm(block.evecs(lm, j)), j};
        std::sort(weight.begin(), weight.end(), std::greater<>());
        return std::abs(block.evals(weight[0].second) - block.evals(weight[1].second));
    }
    throw std::runtime_error("hybridized_gap: qubit and magnon states not in one block");
}

}  // namespace detail

// Qubit-magnon coupling as half the minimal splitting of the hybridized
// levels, found by golden-section search of the gap over the bare magnon
// frequency.
inline double extract_coupling_qm(const SystemParams& params, const ModeLayout& layout,
                                  std::optional<std::pair<double, double>> bracket = {},
                                  double tol = 1e-3)
{
    auto [lo, hi] = bracket.value_or(std::make_pair(params.qubit_bare_freq - 50.0,
                                                    params.qubit_bare_freq + 50.0));
    if (!(lo < hi))
        throw std::invalid_argument("extract_coupling_qm: invalid bracket");

    auto gap = [&](double wm) { return detail::hybridized_gap(params, layout, wm); };

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = gap(x1), f2 = gap(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = gap(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = gap(x2);
        }
    }
    const double gmin = std::min(f1, f2);
    if (!std::isfinite(gmin))
        throw std::runtime_error("extract_coupling_qm: gap minimization failed");
    return gmin / 2.0;
}

// Everything at once; the usual entry point for reports.
inline DerivedParams derive_all(const SystemParams& params, const ModeLayout& layout,
                                const std::string& probe_mode = "te103",
                                bool with_g_qm = true)
{
    const DressedLevels lv = diagonalize(build_hamiltonian(params, layout), layout);
    DerivedParams d = extract_dispersive(lv, probe_mode);
    d.kerr_m = extract_kerr(lv);
    d.lamb_shift_m = magnon_lamb_shift(params, lv);
    std::tie(d.dressed_qubit_freq, d.dressed_anharmonicity) = dressed_qubit(lv);
    if (with_g_qm) d.g_qm = extract_coupling_qm(params, layout);

    const auto m2 = lv.occ_with({{kKittelLabel, 2}});
    const auto f = lv.occ_with({{kTransmonLabel, 2}});
    detail::track_overlap(d, lv, m2);
    detail::track_overlap(d, lv, f);
    return d;
}

// Recomputes the derived parameters with every truncation dimension raised
// by one and reports the largest relative change.
struct ConvergenceReport {
    DerivedParams base;
    DerivedParams refined;
    double max_relative_change = 0.0;
    bool flagged = false;  // > 1% change
};

inline ConvergenceReport convergence_check(const SystemParams& params,
                                           const ModeLayout& base_layout,
                                           const std::string& probe_mode = "te103")
{
    std::vector<int> dims_up = base_layout.dims;
    for (int& d : dims_up) ++d;
    const ModeLayout refined(dims_up, base_layout.labels);

    ConvergenceReport rep;
    rep.base = derive_all(params, base_layout, probe_mode, /*with_g_qm=*/false);
    rep.refined = derive_all(params, refined, probe_mode, /*with_g_qm=*/false);

    auto rel = [](double a, double b) {
        const double scale = std::max({std::abs(a), std::abs(b), 1e-9});
        return std::abs(a - b) / scale;
    };
    rep.max_relative_change = std::max({
        rel(rep.base.chi_qp, rep.refined.chi_qp),
        rel(rep.base.chi_qm, rep.refined.chi_qm),
        rel(rep.base.kerr_m, rep.refined.kerr_m),
        rel(rep.base.lamb_shift_m, rep.refined.lamb_shift_m),
        rel(rep.base.dressed_qubit_freq, rep.refined.dressed_qubit_freq),
        rel(rep.base.dressed_anharmonicity, rep.refined.dressed_anharmonicity),
    });
    rep.flagged = rep.max_relative_change > 0.01 || rep.base.low_confidence ||
                  rep.refined.low_confidence;
    return rep;
}

}  // namespace magnonkit
