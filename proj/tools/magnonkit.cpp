// Command-line front end: parameter derivation, model sweeps and every
// fitting pipeline, consuming a JSON parameter file and CSV data tables and
// emitting JSON reports or CSV plot data.
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <magnonkit/dispersive_spectrum.hpp>
#include <magnonkit/fitting.hpp>
#include <magnonkit/fock_algebra.hpp>
#include <magnonkit/hybrid_model.hpp>
#include <magnonkit/io_response.hpp>
#include <magnonkit/lindblad_steady.hpp>
#include <magnonkit/params_io.hpp>
#include <magnonkit/units.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mk = magnonkit;

namespace {

struct CommonArgs {
    std::string params_path;
    std::string data_path;
    std::string out_path;
    std::string format;  // "json" or "csv"; empty = command default
    std::string truncation;
    std::string fix;
    std::string grid;
};

void add_common(CLI::App* cmd, CommonArgs& a)
{
    cmd->add_option("--params", a.params_path, "parameter file (JSON)");
    cmd->add_option("--data", a.data_path, "input data table (CSV)");
    cmd->add_option("--out", a.out_path, "output file (default: stdout)");
    cmd->add_option("--format", a.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--truncation", a.truncation, "per-mode dims, e.g. 3,3,3,3,3,3");
    cmd->add_option("--fix", a.fix, "key=value[,key=value...] model constants");
    cmd->add_option("--grid", a.grid, "sweep grid as lo:hi:n");
}

std::map<std::string, double> parse_fix(const std::string& text,
                                        const std::vector<std::string>& allowed)
{
    std::map<std::string, double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--fix: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            std::string have;
            for (const auto& k : allowed) have += (have.empty() ? "" : ", ") + k;
            throw std::invalid_argument("--fix: unknown key '" + key + "' (allowed: " + have + ")");
        }
        try {
            std::size_t pos = 0;
            out[key] = std::stod(item.substr(eq + 1), &pos);
            if (pos != item.size() - eq - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument("--fix: cannot parse value for '" + key + "'");
        }
    }
    return out;
}

double fix_or(const std::map<std::string, double>& fix, const std::string& key, double dflt)
{
    auto it = fix.find(key);
    return it == fix.end() ? dflt : it->second;
}

std::vector<double> parse_grid(const std::string& spec)
{
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::stringstream ss(spec);
    if (!(ss >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 2 ||
        !(ss >> std::ws).eof())
        throw std::invalid_argument("--grid: expected lo:hi:n with n >= 2, got '" + spec + "'");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / static_cast<double>(n - 1);
    return g;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::invalid_argument(flag + ": cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument(flag + ": empty list");
    return out;
}

mk::ParameterFile load_params(const CommonArgs& a)
{
    if (a.params_path.empty())
        throw std::invalid_argument("this command requires --params <file>");
    mk::ParameterFile pf = mk::load_parameter_file(a.params_path);
    if (!a.truncation.empty()) {
        pf.truncation.clear();
        for (double v : parse_list(a.truncation, "--truncation"))
            pf.truncation.push_back(static_cast<int>(v));
        pf.layout();  // validate
    }
    return pf;
}

void emit(const CommonArgs& a, const std::string& text)
{
    if (a.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(a.out_path);
        if (!out) throw std::invalid_argument("cannot open output file '" + a.out_path + "'");
        out << text;
    }
}

void emit_csv(const CommonArgs& a, const mk::CsvTable& t)
{
    std::ostringstream ss;
    mk::write_csv(ss, t);
    emit(a, ss.str());
}

mk::Report make_report(const std::string& command, const CommonArgs& a)
{
    mk::Report rep;
    rep.command = command;
    if (!a.params_path.empty()) rep.add_input(a.params_path);
    if (!a.data_path.empty()) rep.add_input(a.data_path);
    return rep;
}

// ---------------------------------------------------------------------------

int cmd_params(const CommonArgs& a)
{
    const mk::ParameterFile pf = load_params(a);
    const mk::ModeLayout layout = pf.layout();
    const mk::DerivedParams d = mk::derive_all(pf.system, layout, pf.probe_mode);

    mk::Report rep = make_report("params", a);
    rep.derived["chi_qm_MHz"] = d.chi_qm;
    rep.derived["chi_qp_MHz"] = d.chi_qp;
    rep.derived["kerr_m_MHz"] = d.kerr_m;
    rep.derived["g_qm_MHz"] = d.g_qm;
    rep.derived["lamb_shift_m_MHz"] = d.lamb_shift_m;
    rep.derived["dressed_qubit_freq_MHz"] = d.dressed_qubit_freq;
    rep.derived["dressed_anharmonicity_MHz"] = d.dressed_anharmonicity;
    rep.derived["min_label_overlap"] = d.min_label_overlap;
    if (d.low_confidence) rep.warnings.push_back("state labeling overlap below 0.5");

    // Reference values for the derived dispersive parameters.
    const struct {
        const char* name;
        double value, reference;
    } refs[] = {
        {"chi_qm_MHz", d.chi_qm, 1.27},
        {"chi_qp_MHz", d.chi_qp, -0.73},
        {"kerr_m_MHz", d.kerr_m, -0.12},
        {"g_qm_MHz", d.g_qm, 6.67},
    };
    mk::json cmp = mk::json::object();
    for (const auto& r : refs) {
        cmp[r.name] = {{"value", r.value},
                       {"reference", r.reference},
                       {"deviation_pct", 100.0 * (r.value - r.reference) / std::abs(r.reference)}};
    }
    rep.derived["reference_comparison"] = cmp;
    emit(a, rep.to_string());
    return 0;
}

int cmd_spectrum(const CommonArgs& a)
{
    const auto fix = parse_fix(
        a.fix, {"omega_q", "gamma_q", "chi", "kappa", "delta_d", "omega_d", "nbar",
                "n_max", "chi_qp", "kappa_p", "delta_p", "photon_weight"});
    mk::SpectrumModel m;
    m.omega_q = fix_or(fix, "omega_q", 0.0);
    m.gamma_q = fix_or(fix, "gamma_q", 1.0);
    m.chi = fix_or(fix, "chi", 1.3);
    m.kappa = fix_or(fix, "kappa", 1.3);
    m.delta_d = fix_or(fix, "delta_d", 0.0);
    m.n_max = static_cast<int>(fix_or(fix, "n_max", 10));
    if (fix.count("nbar") && fix.count("omega_d"))
        throw std::invalid_argument("--fix: give either omega_d or nbar, not both");
    m.omega_d_strength =
        fix.count("nbar")
            ? mk::SpectrumModel::strength_for_occupancy(fix.at("nbar"), m.kappa, m.delta_d)
            : fix_or(fix, "omega_d", 0.0);

    std::vector<double> grid = a.grid.empty()
                                   ? parse_grid(std::to_string(m.omega_q - 15.0) + ":" +
                                                std::to_string(m.omega_q + 15.0) + ":601")
                                   : parse_grid(a.grid);

    mk::CsvTable t;
    t.columns = {"omega_s_GHz", "s_total"};
    const bool composite = fix.count("chi_qp") || fix.count("kappa_p") ||
                           fix.count("photon_weight");
    if (composite) {
        mk::CompositeModel c;
        c.magnon = m;
        c.chi_qp = fix_or(fix, "chi_qp", 0.0);
        c.kappa_p = fix_or(fix, "kappa_p", 3.72);
        c.delta_p = fix_or(fix, "delta_p", 0.0);
        c.photon_weight = fix_or(fix, "photon_weight", 0.03);
        const std::vector<double> y = mk::composite_spectrum(c, grid);
        const auto comps = mk::composite_components(c, grid);
        for (std::size_t n = 0; n < comps.size(); ++n)
            t.columns.push_back("s_" + std::to_string(n));
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::vector<double> row{grid[k] / 1e3, y[k]};
            for (const auto& comp : comps) row.push_back(comp[k]);
            t.rows.push_back(std::move(row));
        }
    } else {
        const mk::Spectrum s = mk::spectrum(m, grid);
        for (std::size_t n = 0; n < s.components.size(); ++n)
            t.columns.push_back("s_" + std::to_string(n));
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::vector<double> row{grid[k] / 1e3, s.total[k]};
            for (const auto& comp : s.components) row.push_back(comp[k]);
            t.rows.push_back(std::move(row));
        }
    }
    emit_csv(a, t);
    return 0;
}

int cmd_crossing(const CommonArgs& a)
{
    const auto fix = parse_fix(a.fix, {"p1", "p2", "p3", "p4"});
    for (const char* k : {"p1", "p2", "p3", "p4"})
        if (!fix.count(k))
            throw std::invalid_argument(std::string("crossing: --fix must set ") + k);
    const mk::CrossingParams p{fix.at("p1"), fix.at("p2"), fix.at("p3"), fix.at("p4")};
    if (a.grid.empty()) throw std::invalid_argument("crossing: --grid lo:hi:n (mA) required");

    mk::CsvTable t;
    t.columns = {"current_mA", "omega_GHz"};
    for (double i : parse_grid(a.grid))
        t.rows.push_back({i, mk::crossing_branch(i, p) / 1e3});
    emit_csv(a, t);
    return 0;
}

int cmd_kerr_sweep(const CommonArgs& a, const std::string& kerr_list_text)
{
    const auto fix = parse_fix(a.fix, {"gamma_m", "delta_mw", "fock_dim"});
    double gamma_m = fix_or(fix, "gamma_m", 1.3);
    double delta_mw = fix_or(fix, "delta_mw", -0.38);
    if (!a.params_path.empty()) {
        const mk::ParameterFile pf = load_params(a);
        if (pf.system.magnon_linewidth > 0.0 && !fix.count("gamma_m"))
            gamma_m = pf.system.magnon_linewidth;
        if (pf.constants.mw_detuning_mhz != 0.0 && !fix.count("delta_mw"))
            delta_mw = pf.constants.mw_detuning_mhz;
    }
    const int fock_dim = static_cast<int>(fix_or(fix, "fock_dim", 30));
    const std::vector<double> kerr = parse_list(kerr_list_text, "--kerr");
    const std::vector<double> omega =
        a.grid.empty() ? parse_grid("0:1.5:20") : parse_grid(a.grid);

    const mk::KerrSweep sw = mk::kerr_sweep(gamma_m, delta_mw, kerr, omega, fock_dim);
    mk::CsvTable t;
    t.columns = {"kerr_MHz", "omega_mw_MHz", "omega_mw_sq_MHz2", "n_bar"};
    for (std::size_t k = 0; k < sw.kerr_values.size(); ++k)
        for (std::size_t w = 0; w < sw.omega_values.size(); ++w)
            t.rows.push_back({sw.kerr_values[k], sw.omega_values[w],
                              sw.omega_values[w] * sw.omega_values[w], sw.occupancy[k][w]});
    emit_csv(a, t);
    return 0;
}

int cmd_occupancy(const CommonArgs& a)
{
    const mk::ParameterFile pf = load_params(a);
    const auto fix = parse_fix(a.fix, {"readout_power_aw", "g_qm", "n_modes"});
    const double power_w = fix.count("readout_power_aw")
                               ? fix.at("readout_power_aw") * 1e-18
                               : pf.constants.readout_power_w;
    if (power_w <= 0.0)
        throw std::invalid_argument("occupancy: readout power missing (file or --fix)");

    const std::size_t probe = pf.layout().index_of(pf.probe_mode);
    const double kappa_p = pf.system.cavity_linewidths.at(probe);
    const double kappa_cpl = pf.system.cavity_linewidths_cpl.at(probe);
    const double omega_p = pf.constants.readout_freq_mhz > 0.0
                               ? pf.constants.readout_freq_mhz
                               : pf.system.cavity_bare_freqs.at(probe);

    mk::Report rep = make_report("occupancy", a);
    rep.derived["probe_occupancy"] =
        mk::probe_occupancy(power_w, omega_p, kappa_cpl, kappa_p);

    const double g_qm = fix_or(fix, "g_qm", pf.constants.g_qm_mhz);
    if (g_qm > 0.0 && pf.system.magnon_linewidth > 0.0 &&
        pf.constants.mw_freq_mhz > 0.0) {
        rep.derived["occupancy_slope_per_fw"] = mk::occupancy_slope(
            pf.system, g_qm, pf.system.magnon_linewidth, pf.constants.mw_detuning_mhz,
            pf.constants.mw_freq_mhz,
            static_cast<std::size_t>(fix_or(fix, "n_modes", 3)));
    }
    emit(a, rep.to_string());
    return 0;
}

// ---------------------------------------------------------------------------
// fit subcommand.

mk::CsvTable load_data(const CommonArgs& a)
{
    if (a.data_path.empty()) throw std::invalid_argument("fit requires --data <file>");
    mk::CsvTable t = mk::load_csv(a.data_path);
    if (t.rows.empty()) throw std::invalid_argument("fit: data file has no rows");
    return t;
}

void put_fit_diagnostics(mk::Report& rep, const mk::FitResult& f)
{
    rep.derived["rss"] = f.rss;
    rep.derived["iterations"] = f.iterations;
    rep.derived["converged"] = f.converged;
    if (f.singular_flagged)
        rep.warnings.push_back("ill-conditioned fit: covariance from pseudo-inverse");
}

int fit_crossing_cmd(const CommonArgs& a)
{
    const mk::CsvTable t = load_data(a);
    const std::vector<double> current = t.column("current_mA");
    std::vector<double> omega = t.column("omega_GHz");
    for (double& w : omega) w *= 1e3;

    const mk::CrossingFit f = mk::fit_crossing(current, omega);
    mk::Report rep = make_report("fit crossing", a);
    const char* names[] = {"p1_MHz_per_mA", "p2_MHz", "p3_MHz", "p4_MHz"};
    for (int i = 0; i < 4; ++i)
        rep.add_estimate(names[i], f.fit.estimates(i), f.fit.ci95(i));
    rep.derived["coupler_bare_freq_MHz"] = f.params.coupler_bare_freq();
    rep.derived["coupling_MHz"] = f.params.coupling();
    rep.derived["crossing_current_mA"] = f.params.crossing_current();
    put_fit_diagnostics(rep, f.fit);
    emit(a, rep.to_string());
    return 0;
}

int fit_reflection_cmd(const CommonArgs& a)
{
    const mk::ParameterFile pf = load_params(a);
    const auto fix =
        parse_fix(a.fix, {"coupler_freq", "kappa_int", "kappa_cpl", "gamma_m", "coupling"});
    const std::size_t coupler = pf.layout().index_of(pf.coupler_mode);
    const double kappa_int =
        fix_or(fix, "kappa_int", pf.system.cavity_linewidths_int.at(coupler));
    const double kappa_cpl =
        fix_or(fix, "kappa_cpl", pf.system.cavity_linewidths_cpl.at(coupler));
    const double coupler_freq =
        fix_or(fix, "coupler_freq", pf.system.cavity_bare_freqs.at(coupler));

    const mk::CsvTable t = load_data(a);
    const std::size_t ci = t.col("current_mA");
    const std::size_t wi = t.col("omega_r_GHz");
    const std::size_t ri = t.col("re_r");
    std::map<double, mk::ReflectionCurve> by_current;
    for (const auto& row : t.rows) {
        mk::ReflectionCurve& c = by_current[row[ci]];
        c.current_ma = row[ci];
        c.omega_mhz.push_back(row[wi] * 1e3);
        c.re_r.push_back(row[ri]);
    }
    std::vector<mk::ReflectionCurve> curves;
    for (auto& [i, c] : by_current) curves.push_back(std::move(c));

    std::optional<double> g0, gm0;
    if (fix.count("gamma_m")) gm0 = fix.at("gamma_m");
    if (fix.count("coupling")) g0 = fix.at("coupling");
    const mk::ReflectionGlobalFit f =
        mk::fit_reflection_global(curves, kappa_int, kappa_cpl, coupler_freq, gm0, g0);

    mk::Report rep = make_report("fit reflection", a);
    rep.add_estimate("gamma_m_MHz", f.gamma_m, f.fit.ci95(0));
    rep.add_estimate("coupling_MHz", f.coupling, f.fit.ci95(1));
    mk::json per = mk::json::array();
    for (std::size_t c = 0; c < curves.size(); ++c)
        per.push_back({{"current_mA", curves[c].current_ma},
                       {"magnon_freq_MHz", f.magnon_freqs[c]},
                       {"ci95", f.fit.ci95(2 + static_cast<Eigen::Index>(c))}});
    rep.derived["magnon_freqs"] = per;
    put_fit_diagnostics(rep, f.fit);
    emit(a, rep.to_string());
    return 0;
}

int fit_qubit_vacuum_cmd(const CommonArgs& a)
{
    const mk::ParameterFile pf = load_params(a);
    const auto fix = parse_fix(a.fix, {"kappa_p", "n_max", "omega_q", "gamma_q", "chi_qp",
                                       "nbar_p"});
    const std::size_t probe = pf.layout().index_of(pf.probe_mode);
    const double kappa_p = fix_or(fix, "kappa_p", pf.system.cavity_linewidths.at(probe));

    const mk::CsvTable t = load_data(a);
    std::vector<double> omega = t.column("omega_s_GHz");
    for (double& w : omega) w *= 1e3;
    const std::vector<double> y = t.column("re_delta_r");

    mk::QubitVacuumInit init;
    init.omega_q = fix_or(fix, "omega_q", 0.0);
    init.gamma_q = fix_or(fix, "gamma_q", 1.0);
    init.chi_qp = fix_or(fix, "chi_qp", -0.5);
    init.nbar_p = fix_or(fix, "nbar_p", 0.1);
    const mk::QubitVacuumFit f = mk::fit_qubit_spectrum_vacuum(
        omega, y, kappa_p, static_cast<int>(fix_or(fix, "n_max", 10)), init);

    mk::Report rep = make_report("fit qubit-vacuum", a);
    rep.add_estimate("omega_q_MHz", f.model.omega_q, f.fit.ci95(0));
    rep.add_estimate("gamma_q_MHz", f.model.gamma_q, f.fit.ci95(1));
    rep.add_estimate("chi_qp_MHz", f.model.chi, f.fit.ci95(2));
    rep.add_estimate("nbar_p", f.nbar_p, f.fit.ci95(3));
    rep.add_estimate("conversion", f.conversion, f.fit.ci95(4));
    rep.add_estimate("offset", f.offset, f.fit.ci95(5));
    put_fit_diagnostics(rep, f.fit);
    emit(a, rep.to_string());
    return 0;
}

int fit_qubit_magnon_cmd(const CommonArgs& a)
{
    const mk::ParameterFile pf = load_params(a);
    const auto fix = parse_fix(
        a.fix, {"omega_q", "gamma_q", "gamma_m", "photon_weight", "chi_qp", "kappa_p",
                "n_max", "chi_qm", "delta_mw", "nbar_m"});
    for (const char* k : {"omega_q", "gamma_q"})
        if (!fix.count(k))
            throw std::invalid_argument(
                std::string("fit qubit-magnon: --fix must set the dressed ") + k);

    const std::size_t probe = pf.layout().index_of(pf.probe_mode);
    mk::QubitMagnonFixed fx;
    fx.omega_q_np0 = fix.at("omega_q");
    fx.gamma_q_np0 = fix.at("gamma_q");
    fx.gamma_m = fix_or(fix, "gamma_m", pf.system.magnon_linewidth);
    fx.photon_weight = fix_or(fix, "photon_weight", 0.03);
    fx.chi_qp = fix_or(fix, "chi_qp", -0.73);
    fx.kappa_p = fix_or(fix, "kappa_p", pf.system.cavity_linewidths.at(probe));
    fx.n_max = static_cast<int>(fix_or(fix, "n_max", 10));

    const mk::CsvTable t = load_data(a);
    std::vector<double> omega = t.column("omega_s_GHz");
    for (double& w : omega) w *= 1e3;
    const std::vector<double> y = t.column("re_delta_r");

    mk::QubitMagnonInit init;
    init.chi_qm = fix_or(fix, "chi_qm", 1.3);
    init.delta_mw = fix_or(fix, "delta_mw", pf.constants.mw_detuning_mhz);
    init.nbar_m = fix_or(fix, "nbar_m", 0.5);
    const mk::QubitMagnonFit f = mk::fit_qubit_spectrum_magnon(omega, y, fx, init);

    mk::Report rep = make_report("fit qubit-magnon", a);
    rep.add_estimate("chi_qm_MHz", f.chi_qm, f.fit.ci95(0));
    rep.add_estimate("delta_mw_MHz", f.delta_mw, f.fit.ci95(1));
    rep.add_estimate("nbar_m", f.nbar_m, f.fit.ci95(2));
    rep.add_estimate("conversion", f.conversion, f.fit.ci95(3));
    rep.add_estimate("offset", f.offset, f.fit.ci95(4));
    put_fit_diagnostics(rep, f.fit);

    const mk::ProbabilityBand band = mk::magnon_probabilities_with_bounds(f, fx);
    mk::json probs = mk::json::array();
    for (std::size_t n = 0; n < band.p.size(); ++n)
        probs.push_back({{"n", n},
                         {"p", band.p[n]},
                         {"p_low", band.p_low[n]},
                         {"p_high", band.p_high[n]}});
    rep.derived["magnon_number_probabilities"] = probs;
    emit(a, rep.to_string());
    return 0;
}

int fit_broadening_cmd(const CommonArgs& a)
{
    const auto fix = parse_fix(a.fix, {"t1_us"});
    double t1 = fix_or(fix, "t1_us", 0.0);
    if (!a.params_path.empty() && t1 == 0.0) t1 = load_params(a).constants.t1_us;
    if (t1 <= 0.0)
        throw std::invalid_argument("fit broadening: T1 missing (params file or --fix t1_us)");

    const mk::CsvTable t = load_data(a);
    std::vector<double> power = t.column("p_s_fW");
    for (double& p : power) p *= 1e-15;
    const std::vector<double> gamma = t.column("gamma_q_MHz");

    const mk::PowerBroadeningFit f = mk::fit_power_broadening(power, gamma, t1);
    mk::Report rep = make_report("fit broadening", a);
    rep.add_estimate("eta_MHz2_per_W", f.eta, f.fit.ci95(0));
    rep.add_estimate("gamma_q0_MHz", f.gamma0, f.fit.ci95(1));
    rep.derived["t1_floor_MHz"] = 1.0 / (mk::kTwoPi * t1);
    rep.derived["floor_active"] = f.floor_active;
    put_fit_diagnostics(rep, f.fit);
    emit(a, rep.to_string());
    return 0;
}

int fit_kerr_cmd(const CommonArgs& a)
{
    const auto fix = parse_fix(
        a.fix, {"gamma_m", "delta_mw", "kerr_min", "kerr_max", "kerr_step", "fock_dim"});
    double gamma_m = fix_or(fix, "gamma_m", 0.0);
    double delta_mw = fix_or(fix, "delta_mw", 0.0);
    if (!a.params_path.empty()) {
        const mk::ParameterFile pf = load_params(a);
        if (!fix.count("gamma_m")) gamma_m = pf.system.magnon_linewidth;
        if (!fix.count("delta_mw")) delta_mw = pf.constants.mw_detuning_mhz;
    }
    if (gamma_m <= 0.0)
        throw std::invalid_argument("fit kerr: gamma_m missing (params file or --fix)");

    const mk::CsvTable t = load_data(a);
    const std::size_t pi = t.col("p_mw_fW");
    const std::size_t ni = t.col("n_bar");
    const std::size_t cii = t.col("ci");
    std::vector<mk::OccupancyPoint> data;
    for (const auto& row : t.rows) data.push_back({row[pi], row[ni], row[cii]});

    mk::KerrFitOptions opts;
    opts.kerr_min = fix_or(fix, "kerr_min", opts.kerr_min);
    opts.kerr_max = fix_or(fix, "kerr_max", opts.kerr_max);
    opts.kerr_step = fix_or(fix, "kerr_step", opts.kerr_step);
    opts.fock_dim = static_cast<int>(fix_or(fix, "fock_dim", opts.fock_dim));

    const mk::KerrFitResult f = mk::fit_kerr(data, gamma_m, delta_mw, opts);
    mk::Report rep = make_report("fit kerr", a);
    rep.derived["kerr_MHz"] = f.kerr;
    rep.derived["proportionality_MHz2_per_fW"] = f.proportionality;
    rep.derived["r2"] = f.r2;
    emit(a, rep.to_string());
    return 0;
}

int fit_linear_cmd(const CommonArgs& a)
{
    const auto fix = parse_fix(a.fix, {"through_origin"});
    const mk::CsvTable t = load_data(a);
    if (t.columns.size() < 2)
        throw std::invalid_argument("fit linear: need two CSV columns (x, y)");
    const std::vector<double> x = t.column(t.columns[0]);
    const std::vector<double> y = t.column(t.columns[1]);

    const mk::LinearFit f = mk::fit_linear(x, y, fix_or(fix, "through_origin", 0.0) != 0.0);
    mk::Report rep = make_report("fit linear", a);
    rep.add_estimate("slope", f.slope, f.slope_ci95);
    rep.add_estimate("offset", f.offset, f.offset_ci95);
    rep.derived["rss"] = f.rss;
    emit(a, rep.to_string());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid-system modeling and fitting toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string fit_kind, kerr_list = "0,-0.1,-0.2";

    CLI::App* params = app.add_subcommand("params", "derive dispersive parameters");
    CLI::App* spectrum = app.add_subcommand("spectrum", "qubit spectrum plot data");
    CLI::App* crossing = app.add_subcommand("crossing", "avoided-crossing branch plot data");
    CLI::App* kerrsweep = app.add_subcommand("kerr-sweep", "steady-state occupancy sweep");
    CLI::App* occupancy = app.add_subcommand("occupancy", "probe occupancy and slope");
    CLI::App* fit = app.add_subcommand("fit", "fit a model to CSV data");
    fit->add_option("kind", fit_kind, "one of crossing|reflection|qubit-vacuum|qubit-magnon|broadening|kerr|linear")
        ->required()
        ->check(CLI::IsMember({"crossing", "reflection", "qubit-vacuum", "qubit-magnon",
                               "broadening", "kerr", "linear"}));
    kerrsweep->add_option("--kerr", kerr_list, "comma-separated Kerr values (MHz)");
    for (CLI::App* cmd : {params, spectrum, crossing, kerrsweep, occupancy, fit})
        add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (params->parsed()) return cmd_params(args);
        if (spectrum->parsed()) return cmd_spectrum(args);
        if (crossing->parsed()) return cmd_crossing(args);
        if (kerrsweep->parsed()) return cmd_kerr_sweep(args, kerr_list);
        if (occupancy->parsed()) return cmd_occupancy(args);
        if (fit->parsed()) {
            if (fit_kind == "crossing") return fit_crossing_cmd(args);
            if (fit_kind == "reflection") return fit_reflection_cmd(args);
            if (fit_kind == "qubit-vacuum") return fit_qubit_vacuum_cmd(args);
            if (fit_kind == "qubit-magnon") return fit_qubit_magnon_cmd(args);
            if (fit_kind == "broadening") return fit_broadening_cmd(args);
            if (fit_kind == "kerr") return fit_kerr_cmd(args);
            if (fit_kind == "linear") return fit_linear_cmd(args);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
