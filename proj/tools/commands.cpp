#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "pxpscar/dynamics.hpp"
#include "pxpscar/fsa.hpp"
#include "pxpscar/hilbert.hpp"
#include "pxpscar/operators.hpp"
#include "pxpscar/optimize.hpp"
#include "pxpscar/spectral.hpp"
#include "pxpscar/toymodel.hpp"
#include "pxpscar/version.hpp"

namespace pxp::cli {

namespace {

using nlohmann::json;

void add_coupling_options(CLI::App* sub, CouplingChoice& c, const std::string& default_source) {
    c.source = default_source;
    sub->add_option("--couplings", c.source, "Coupling source")
        ->check(CLI::IsMember({"none", "ansatz", "file"}))
        ->capture_default_str();
    sub->add_option("--couplings-file", c.file, "JSON coupling file for --couplings file");
    sub->add_option("--range", c.range, "Ansatz range R (0: N/2)")->check(CLI::NonNegativeNumber)->capture_default_str();
}

Eigen::VectorXcd neel_vector(const ConstrainedBasis& basis) {
    return basis_vector(basis, neel_state(basis).z2).cast<std::complex<double>>();
}

// ---------------------------------------------------------------------------

struct BasisArgs {
    int n = 0;
    std::string bc = "periodic";
    int step = 0;
};

void run_basis(const BasisArgs& a, const GlobalOptions& g) {
    Run run("basis", g);
    run.params = {{"n", a.n}, {"bc", a.bc}, {"step", a.step}};
    require(a.step >= 0 && a.step <= 2, "--step must be 0, 1 or 2");
    const ConstrainedBasis basis(a.n, boundary_from_string(a.bc));
    const json summary = basis_summary(basis, a.step);
    run.write_json("json", summary);
    run.finish(summary);
}

// ---------------------------------------------------------------------------

struct QuenchArgs {
    int n = 0;
    CouplingChoice couplings;
    double t_max = 50.0;
    double dt = 0.05;
    int krylov_dim = 30;
    double krylov_tol = 1e-10;
    double period = 0.0;
    double window = 0.2;
    double peak_tol = 1e-7;
    bool no_entropy = false;
    int schmidt_stride = 0;
};

void run_quench(const QuenchArgs& a, const GlobalOptions& g) {
    Run run("quench", g);
    run.params = {{"n", a.n},          {"couplings", to_json(a.couplings)}, {"t_max", a.t_max},
                  {"dt", a.dt},        {"krylov_dim", a.krylov_dim},        {"period", a.period},
                  {"window", a.window}, {"entropy", !a.no_entropy},         {"schmidt_stride", a.schmidt_stride}};
    run.tolerances = {{"krylov_tol", a.krylov_tol}, {"peak_tol", a.peak_tol}};

    const ConstrainedBasis basis(a.n, Boundary::Periodic);
    const CouplingSet c = resolve_couplings(a.couplings, a.n);
    validate_couplings(c, a.n, Boundary::Periodic);
    QuenchOptions o;
    o.t_max = a.t_max;
    o.dt = a.dt;
    o.krylov.dim = a.krylov_dim;
    o.krylov.tol = a.krylov_tol;
    o.entropy = !a.no_entropy;
    o.schmidt_stride = a.schmidt_stride;
    o.period = a.period > 0.0 ? a.period : solve_constraint().tau;
    o.window_fraction = a.window;
    o.peak_tol = a.peak_tol;
    const auto rec = fidelity_series(build_hamiltonian(basis, c), neel_vector(basis), o, a.no_entropy ? nullptr : &basis);

    {
        auto os = run.open("csv");
        write_quench_csv(os, rec);
    }
    {
        auto os = run.open("peaks.csv");
        os << "m,t (1/flip amplitude),g\n";
        for (const auto& p : rec.peaks) os << p.m << ',' << p.t << ',' << p.g << '\n';
    }
    json peaks = json::array();
    for (const auto& p : rec.peaks) peaks.push_back(to_json(p));
    json schmidt = json::array();
    for (const auto& s : rec.schmidt) schmidt.push_back({{"t", s.t}, {"p", s.p}});
    run.write_json("json", {{"n_sites", a.n},
                            {"dim", basis.dim()},
                            {"couplings", to_json(c)},
                            {"period", o.period},
                            {"peaks", peaks},
                            {"schmidt", schmidt},
                            {"max_norm_drift", rec.max_norm_drift},
                            {"krylov_matvecs", rec.stats.matvecs},
                            {"krylov_error_estimate", rec.stats.error_estimate}});

    json summary{{"n_sites", a.n}, {"dim", basis.dim()}, {"samples", rec.t.size()}, {"peaks", rec.peaks.size()}};
    if (!rec.peaks.empty()) {
        summary["first_peak_t"] = rec.peaks.front().t;
        summary["first_peak_g"] = rec.peaks.front().g;
    }
    run.finish(summary);
}

// ---------------------------------------------------------------------------

struct OptimizeArgs {
    std::string cost = "fsa";
    int n = 16;
    int range = 2;
    std::uint64_t seed = 0;
    double initial_step = 0.05;
    double x_tol = 1e-6;
    double f_tol = 1e-10;
    int max_iterations = 2000;
    double peak_tol = 1e-9;
    double krylov_tol = 1e-12;
    double window = 0.15;
    bool cross = false;
};

void write_trace_csv(std::ostream& os, const OptimizationTrace& t) {
    os << "iteration,evaluations,cost";
    const std::size_t dim = t.best_x.size();
    for (std::size_t i = 0; i < dim; ++i) os << ",h" << i + 2 << " (flip amplitude)";
    os << '\n';
    for (const auto& it : t.iterates) {
        os << it.iteration << ',' << it.evaluations << ',' << it.cost;
        for (double x : it.x) os << ',' << x;
        os << '\n';
    }
}

void run_optimize(const OptimizeArgs& a, const GlobalOptions& g) {
    Run run("optimize", g);
    run.seed = a.seed;
    run.params = {{"cost", a.cost}, {"n", a.n},       {"range", a.range},
                  {"seed", a.seed}, {"window", a.window}, {"max_iterations", a.max_iterations},
                  {"initial_step", a.initial_step}, {"cross", a.cross}};
    run.tolerances = {{"x_tol", a.x_tol}, {"f_tol", a.f_tol}, {"peak_tol", a.peak_tol}, {"krylov_tol", a.krylov_tol}};

    CostSpec spec;
    spec.kind = parse_cost_kind(a.cost);
    spec.n_sites = a.n;
    spec.range = a.range;
    spec.peak_tol = a.peak_tol;
    spec.krylov_tol = a.krylov_tol;
    spec.window_fraction = a.window;
    NelderMeadOptions nm;
    nm.initial_step = a.initial_step;
    nm.x_tol = a.x_tol;
    nm.f_tol = a.f_tol;
    nm.max_iterations = a.max_iterations;
    nm.seed = a.seed;

    if (!a.cross) {
        const auto r = optimize_couplings(spec, nm);
        run.write_json("json", to_json(r, false));
        {
            auto os = run.open("trace.csv");
            write_trace_csv(os, r.trace);
        }
        run.finish({{"cost", a.cost},
                    {"best_cost", r.trace.best_cost},
                    {"best_x", r.trace.best_x},
                    {"termination", r.trace.termination},
                    {"evaluations", r.trace.evaluations}});
        return;
    }

    std::map<CostKind, Eigen::VectorXd> optima;
    json summary{{"cross", true}};
    for (CostKind k : all_cost_kinds()) {
        CostSpec s = spec;
        s.kind = k;
        const auto r = optimize_couplings(s, nm);
        const std::string name = to_string(k);
        run.write_json(name + ".json", to_json(r, false));
        auto os = run.open(name + ".trace.csv");
        write_trace_csv(os, r.trace);
        optima[k] = Eigen::Map<const Eigen::VectorXd>(r.trace.best_x.data(),
                                                      static_cast<Eigen::Index>(r.trace.best_x.size()));
        summary[name + "_best_cost"] = r.trace.best_cost;
    }
    const auto cross = cross_evaluate(optima, spec);
    run.write_json("cross.json", to_json(cross));
    run.finish(summary);
}

// ---------------------------------------------------------------------------

struct SpectrumArgs {
    int n = 20;
    std::string sector = "k0,I+";
    int step = 2;
    CouplingChoice couplings;
    bool values_only = false;
    bool no_entropy = false;
    bool levels = false;
    double spacing = 0.0;
    std::size_t dense_cap = 20000;
};

void run_spectrum(const SpectrumArgs& a, const GlobalOptions& g) {
    Run run("spectrum", g);
    run.params = {{"n", a.n},
                  {"sector", a.sector},
                  {"step", a.step},
                  {"couplings", to_json(a.couplings)},
                  {"values_only", a.values_only},
                  {"entropy", !a.no_entropy && !a.values_only},
                  {"levels", a.levels},
                  {"spacing", a.spacing},
                  {"dense_cap", a.dense_cap}};
    SpectrumOptions so;
    so.dense_cap = a.dense_cap;
    so.vectors = !a.values_only;
    run.tolerances = {{"degeneracy_tol", so.degeneracy_tol}};

    const ConstrainedBasis basis(a.n, Boundary::Periodic);
    const SectorLabel label = SectorLabel::parse(a.sector, a.step);
    const CouplingSet c = resolve_couplings(a.couplings, a.n);
    validate_couplings(c, a.n, Boundary::Periodic);
    auto rec = diagonalize_sector(basis, label, c, so);

    json out{{"n_sites", a.n},
             {"sector", label.to_string()},
             {"dim", rec.size()},
             {"couplings", to_json(c)},
             {"reference_weight", rec.reference_weight}};
    json summary{{"n_sites", a.n}, {"sector", label.to_string()}, {"dim", rec.size()}};

    if (!a.values_only) {
        if (!a.no_entropy) eigenstate_entropies(rec, basis);
        const double spacing = a.spacing > 0.0 ? a.spacing : solve_constraint().level_spacing();
        const auto band = special_band(rec, a.n, spacing);
        out["band_spacing_reference"] = spacing;
        out["band"] = to_json(band);
        out["band_gaps"] = band_spacings(rec, band);
        if (!a.no_entropy && band.complete) {
            json central = json::array();
            for (const auto& s : central_special_states(rec, band))
                central.push_back({{"E", s.energy}, {"S", s.entropy}});
            out["central_band_states"] = central;
        }
        summary["band_members"] = band.members.size();
        summary["band_weight"] = band.captured_weight;
    }
    // Everything that can fail runs before the first file is written.
    LevelStatsOptions lo;
    std::optional<LevelStats> stats;
    if (a.levels) {
        stats = r_statistic(positive_branch(rec.energies), lo);
        out["level_stats"] = to_json(*stats, lo);
        summary["mean_r"] = stats->mean_r;
    }
    {
        auto os = run.open("csv");
        write_spectrum_csv(os, rec);
    }
    if (stats) {
        auto os = run.open("histogram.csv");
        write_histogram_csv(os, *stats);
    }
    run.write_json("json", out);
    run.finish(summary);
}

// ---------------------------------------------------------------------------

struct FsaArgs {
    int n = 16;
    CouplingChoice couplings;
    double h2 = std::nan("");
};

void run_fsa(const FsaArgs& a, const GlobalOptions& g) {
    Run run("fsa", g);
    const bool manual_h2 = !std::isnan(a.h2);
    run.params = {{"n", a.n}, {"couplings", to_json(a.couplings)}};
    if (manual_h2) run.params["h2"] = a.h2;

    const ConstrainedBasis basis(a.n, Boundary::Periodic);
    const CouplingSet c = manual_h2 ? CouplingSet::manual({a.h2}) : resolve_couplings(a.couplings, a.n);
    validate_couplings(c, a.n, Boundary::Periodic);
    const auto pm = split_pm(basis, c);
    const auto hz = commutator_hz(pm.plus, pm.minus);
    const auto H = build_hamiltonian(basis, c);
    const auto s = fsa_basis(pm.plus, basis_vector(basis, neel_state(basis).z2), a.n);
    const auto su2 = su2_report(s, pm.plus, hz);
    const auto ritz = project_tridiagonal(s, H);
    const auto var = subspace_variance(s, H, hz);

    std::vector<double> errors;
    for (int k = 1; k < s.size(); ++k) errors.push_back(fsa_error(s, pm.minus, k));
    {
        auto os = run.open("steps.csv");
        os.precision(17);
        os << "k,step_norm (flip amplitude),beta,gamma,hz (flip amplitude),fsa_error\n";
        for (int k = 0; k < s.size(); ++k) {
            const auto i = static_cast<std::size_t>(k);
            os << k << ',' << s.step_norm[i] << ',' << s.beta[i] << ',' << s.gamma[i] << ',' << su2.hz[i] << ','
               << (k == 0 ? 0.0 : errors[i - 1]) << '\n';
        }
    }
    {
        auto os = run.open("ritz.csv");
        os.precision(17);
        os << "index,E (flip amplitude)\n";
        for (Eigen::Index i = 0; i < ritz.values.size(); ++i) os << i << ',' << ritz.values(i) << '\n';
    }
    json out{{"n_sites", a.n},
             {"couplings", to_json(c)},
             {"su2", to_json(su2)},
             {"ritz", to_json(ritz)},
             {"ritz_anharmonicity", ritz_anharmonicity(ritz.values)},
             {"subspace_variance", {{"from_square", var.from_square}, {"from_hz", var.from_hz}, {"value", var.value}}},
             {"fsa_errors", errors},
             {"fsa_error3", fsa_error3(s, pm.minus)}};
    if (manual_h2) {
        const auto f = extract_f_coefficients(basis, a.h2);
        const double h = a.h2;
        const int L = a.n / 2;
        out["f_coefficients"] = {{"f2", f.f2},
                                 {"f4", f.f4},
                                 {"f6", f.f6},
                                 {"class_spread", f.class_spread},
                                 {"f2_closed_form", f2_closed_form(h, L)},
                                 {"f4_closed_form", f4_closed_form(h, L)},
                                 {"f6_closed_form", f6_closed_form(h, L)}};
    }
    run.write_json("json", out);
    run.finish({{"n_sites", a.n},
                {"r_spread", su2.r_spread},
                {"delta_rms_rel", su2.delta_rms_rel},
                {"subspace_variance", var.value},
                {"fsa_error3", fsa_error3(s, pm.minus)}});
}

// ---------------------------------------------------------------------------

struct ToyArgs {
    int n = 14;
    std::uint64_t seed = 1;
    double omega = 1.0;
    double sigma = 0.25;
    bool down = false;
    double t_max = 10.0;
    double dt = 0.01;
    int revivals = 100;
    int dense_max = 12;
};

void run_toy(const ToyArgs& a, const GlobalOptions& g) {
    Run run("toy", g);
    run.seed = a.seed;
    run.params = {{"n", a.n},         {"seed", a.seed},   {"omega", a.omega},       {"sigma", a.sigma},
                  {"initial", a.down ? "down" : "up"}, {"t_max", a.t_max}, {"dt", a.dt},
                  {"revivals", a.revivals}, {"dense_max_sites", a.dense_max},
                  {"time_convention", "exp(-2 pi i H t)"}};

    const ToySpec spec = random_toy_spec(a.n, a.seed, a.omega, a.sigma);
    ToyOptions o;
    o.initial_up = !a.down;
    o.t_max = a.t_max;
    o.dt = a.dt;
    o.revivals = a.revivals;
    o.dense_max_sites = a.dense_max;
    run.tolerances = {{"support_threshold", o.support_threshold}};

    const auto tower = scar_tower(a.n);
    const auto residuals = tower_residuals(build_toy(spec), tower, a.omega);
    const auto d = toy_diagnostics(spec, o);

    {
        auto os = run.open("residuals.csv");
        os.precision(17);
        os << "m (S^x),residual (Omega)\n";
        for (std::size_t j = 0; j < residuals.size(); ++j) os << tower.m(j) << ',' << residuals[j] << '\n';
    }
    {
        auto os = run.open("csv");
        write_toy_csv(os, d);
    }
    {
        auto os = run.open("echo.csv");
        write_toy_echo_csv(os, d);
    }
    json out = to_json(d);
    out["tower_residuals"] = residuals;
    run.write_json("json", out);
    const double worst = *std::max_element(residuals.begin(), residuals.end());
    run.finish({{"n_sites", a.n},
                {"method", d.method},
                {"max_tower_residual", worst},
                {"support_count", d.support_count},
                {"max_overlap", d.max_overlap},
                {"max_revival_deviation", d.max_revival_deviation}});
}

// ---------------------------------------------------------------------------

struct ScalingArgs {
    std::vector<int> sizes{16, 20, 24};
    int m_max = 1000;
    double window = 0.2;
    double peak_tol = 1e-7;
    int collapse_m = 100;
    ScalingWindows windows;
};

void run_scaling(const ScalingArgs& a, const GlobalOptions& g) {
    Run run("scaling", g);
    run.params = {{"n", a.sizes},
                  {"m_max", a.m_max},
                  {"window", a.window},
                  {"collapse_m", a.collapse_m},
                  {"short_window", {a.windows.short_lo, a.windows.short_hi}},
                  {"long_window", {a.windows.long_lo, a.windows.long_hi}},
                  {"couplings", "ansatz, range N/2"}};
    run.tolerances = {{"peak_tol", a.peak_tol}};
    require(a.m_max >= 1, "--mmax must be >= 1");

    const auto k = solve_constraint();
    std::vector<ScalingSeries> series;
    std::vector<std::vector<RevivalPeak>> all_peaks;
    for (int n : a.sizes) {
        const auto sf = neel_spectral_fidelity(n, ansatz_couplings(k.h0, n / 2));
        auto peaks = track_revivals([&](double t) { return sf(t); }, k.tau, a.m_max, a.window, a.peak_tol);
        series.push_back(scaling_series(n, peaks, a.windows));
        all_peaks.push_back(std::move(peaks));
    }
    {
        auto os = run.open("csv");
        os.precision(17);
        os << "N,m,t (1/flip amplitude),g,g_tilde,gamma\n";
        for (std::size_t i = 0; i < series.size(); ++i)
            for (std::size_t j = 0; j < all_peaks[i].size(); ++j)
                os << series[i].n_sites << ',' << all_peaks[i][j].m << ',' << all_peaks[i][j].t << ','
                   << series[i].g[j] << ',' << series[i].g_tilde[j] << ',' << series[i].gamma[j] << '\n';
    }
    json out{{"series", json::array()}};
    json mc = json::array();
    for (const auto& s : series) {
        out["series"].push_back(to_json(s));
        mc.push_back(s.m_c ? json(*s.m_c) : json(nullptr));
    }
    json summary{{"m_c", mc}};
    if (series.size() >= 2) {
        const auto c = collapse_spread(series, std::min(a.collapse_m, a.m_max));
        out["collapse"] = to_json(c);
        summary["collapse_max_spread"] = c.max_spread;
        summary["collapse_worst_m"] = c.worst_m;
    }
    run.write_json("json", out);
    run.finish(summary);
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Scarred constrained spin chains: spectra, revivals, optimization and a toy tower model", "pxpscar"};
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.set_config("--config", "", "INI file of key=value pairs; [section] names a subcommand");

    GlobalOptions g;
    app.add_flag("--json", g.json, "Print a JSON summary on stdout");
    app.add_option("--out", g.out_dir, "Output directory (default: $PXPSCAR_OUTPUT_DIR, else pxpscar-out)");
    app.add_option("--threads", g.threads, "Worker threads (0: one per physical core)")->check(CLI::NonNegativeNumber);
    app.add_option("--tag", g.tag, "Label added to output file names");

    BasisArgs basis;
    auto* sb = app.add_subcommand("basis", "Constrained basis dimension and sector table");
    sb->add_option("--n", basis.n, "Number of sites")->required();
    sb->add_option("--bc", basis.bc, "Boundary")->check(CLI::IsMember({"periodic", "open"}))->capture_default_str();
    sb->add_option("--step", basis.step, "Translation step for the sector table (0: none)")->capture_default_str();

    QuenchArgs quench;
    auto* sq = app.add_subcommand("quench", "Neel-state quench: echo, entropy and revival peaks");
    sq->add_option("--n", quench.n, "Number of sites")->required();
    add_coupling_options(sq, quench.couplings, "ansatz");
    sq->add_option("--tmax", quench.t_max, "Final time")->check(CLI::PositiveNumber)->capture_default_str();
    sq->add_option("--dt", quench.dt, "Sampling step")->check(CLI::PositiveNumber)->capture_default_str();
    sq->add_option("--krylov-dim", quench.krylov_dim, "Krylov dimension")->check(CLI::Range(2, 400))->capture_default_str();
    sq->add_option("--krylov-tol", quench.krylov_tol, "Krylov error per unit time")->check(CLI::PositiveNumber)->capture_default_str();
    sq->add_option("--period", quench.period, "Revival period guess (0: ansatz tau)")->check(CLI::NonNegativeNumber);
    sq->add_option("--window", quench.window, "Peak window as a fraction of the period")->capture_default_str();
    sq->add_option("--peak-tol", quench.peak_tol, "Peak time tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    sq->add_flag("--no-entropy", quench.no_entropy, "Skip the half-chain entropy");
    sq->add_option("--schmidt-stride", quench.schmidt_stride, "Keep Schmidt spectra every k samples (0: never)")
        ->check(CLI::NonNegativeNumber);

    OptimizeArgs opt;
    auto* so = app.add_subcommand("optimize", "Nelder-Mead search over h_2..h_R from the ansatz");
    so->add_option("--cost", opt.cost, "Cost function")
        ->check(CLI::IsMember({"fid", "fsa", "trvar", "rvals"}))
        ->capture_default_str();
    so->add_option("--n", opt.n, "Number of sites")->capture_default_str();
    so->add_option("--range", opt.range, "Coupling range R")->capture_default_str();
    so->add_option("--seed", opt.seed, "Recorded seed (the search is deterministic)")->capture_default_str();
    so->add_option("--initial-step", opt.initial_step, "Relative simplex step")->check(CLI::PositiveNumber)->capture_default_str();
    so->add_option("--x-tol", opt.x_tol, "Simplex diameter tolerance")->check(CLI::NonNegativeNumber)->capture_default_str();
    so->add_option("--f-tol", opt.f_tol, "Cost spread tolerance")->check(CLI::NonNegativeNumber)->capture_default_str();
    so->add_option("--max-iter", opt.max_iterations, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    so->add_option("--peak-tol", opt.peak_tol, "Revival peak tolerance (fid)")->check(CLI::PositiveNumber)->capture_default_str();
    so->add_option("--krylov-tol", opt.krylov_tol, "Krylov tolerance (fid)")->check(CLI::PositiveNumber)->capture_default_str();
    so->add_option("--window", opt.window, "Revival window fraction (fid)")->check(CLI::PositiveNumber)->capture_default_str();
    so->add_flag("--cross", opt.cross, "Optimize every cost and cross-evaluate the optima");

    SpectrumArgs spec;
    auto* ss = app.add_subcommand("spectrum", "Sector diagonalization: overlaps, entropies, special band, level statistics");
    ss->add_option("--n", spec.n, "Number of sites")->capture_default_str();
    ss->add_option("--sector", spec.sector, "Sector label, e.g. k0,I+")->capture_default_str();
    ss->add_option("--step", spec.step, "Translation step used by the label")->check(CLI::IsMember({1, 2}))->capture_default_str();
    add_coupling_options(ss, spec.couplings, "ansatz");
    ss->add_flag("--values-only", spec.values_only, "Eigenvalues only (no overlaps, band or entropy)");
    ss->add_flag("--no-entropy", spec.no_entropy, "Skip eigenstate entropies");
    ss->add_flag("--levels", spec.levels, "Gap-ratio statistic of the positive branch");
    ss->add_option("--spacing", spec.spacing, "Band spacing reference (0: ansatz value)")->check(CLI::NonNegativeNumber);
    ss->add_option("--dense-cap", spec.dense_cap, "Largest dense sector")->capture_default_str();

    FsaArgs fsa;
    auto* sf = app.add_subcommand("fsa", "Forward-scattering subspace, SU(2) diagnostics and Ritz values");
    sf->add_option("--n", fsa.n, "Number of sites")->capture_default_str();
    add_coupling_options(sf, fsa.couplings, "ansatz");
    sf->add_option("--h2", fsa.h2, "Range-4 deformation with this h_2 (overrides --couplings)");

    ToyArgs toy;
    auto* st = app.add_subcommand("toy", "Random-coupling toy model with an embedded spin tower");
    st->add_option("--n", toy.n, "Number of sites")->capture_default_str();
    st->add_option("--seed", toy.seed, "Coupling seed")->capture_default_str();
    st->add_option("--omega", toy.omega, "Field strength Omega")->capture_default_str();
    st->add_option("--sigma", toy.sigma, "Coupling standard deviation")->check(CLI::NonNegativeNumber)->capture_default_str();
    st->add_flag("--down", toy.down, "Start from the all-down state");
    st->add_option("--tmax", toy.t_max, "Echo series length")->check(CLI::PositiveNumber)->capture_default_str();
    st->add_option("--dt", toy.dt, "Echo sampling step")->check(CLI::PositiveNumber)->capture_default_str();
    st->add_option("--revivals", toy.revivals, "Integer revivals checked")->check(CLI::NonNegativeNumber)->capture_default_str();
    st->add_option("--dense-max", toy.dense_max, "Largest N on the dense route")->capture_default_str();

    ScalingArgs scal;
    auto* sc = app.add_subcommand("scaling", "Revival decay rates Gamma(m) and power-law crossover");
    sc->add_option("--n", scal.sizes, "System sizes")->delimiter(',')->capture_default_str();
    sc->add_option("--mmax", scal.m_max, "Revivals tracked")->check(CLI::PositiveNumber)->capture_default_str();
    sc->add_option("--window", scal.window, "Peak window fraction")->check(CLI::PositiveNumber)->capture_default_str();
    sc->add_option("--peak-tol", scal.peak_tol, "Peak time tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    sc->add_option("--collapse-m", scal.collapse_m, "Largest m in the collapse check")->check(CLI::PositiveNumber)->capture_default_str();
    sc->add_option("--short-lo", scal.windows.short_lo, "First m of the short-time fit window")->capture_default_str();
    sc->add_option("--short-hi", scal.windows.short_hi, "Last m of the short-time fit window")->capture_default_str();
    sc->add_option("--long-lo", scal.windows.long_lo, "First m of the long-time fit window")->capture_default_str();
    sc->add_option("--long-hi", scal.windows.long_hi, "Last m of the long-time fit window")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        g.threads = apply_threads(g.threads);
        if (sb->parsed()) run_basis(basis, g);
        else if (sq->parsed()) run_quench(quench, g);
        else if (so->parsed()) run_optimize(opt, g);
        else if (ss->parsed()) run_spectrum(spec, g);
        else if (sf->parsed()) run_fsa(fsa, g);
        else if (st->parsed()) run_toy(toy, g);
        else if (sc->parsed()) run_scaling(scal, g);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::bad_alloc&) {
        std::cerr << "error (too-large): out of memory\n";
        return kResourceCap;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kSuccess;
}

}  // namespace pxp::cli
