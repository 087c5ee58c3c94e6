#include "pxpscar/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "pxpscar/dynamics.hpp"
#include "pxpscar/errors.hpp"
#include "pxpscar/fsa.hpp"

namespace pxp {

// ---------------------------------------------------------------------------
// Nelder-Mead

OptimizationTrace nelder_mead(const Objective& cost, const Eigen::VectorXd& init, const NelderMeadOptions& opts) {
    require(init.size() >= 1, "Nelder-Mead needs at least one parameter");
    require(opts.max_iterations >= 1, "max_iterations must be positive");
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index n = init.size();

    OptimizationTrace trace;
    trace.seed = opts.seed;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++trace.evaluations;
        return cost(x);
    };

    std::vector<Eigen::VectorXd> xs{init};
    std::vector<double> fs{eval(init)};
    if (!std::isfinite(fs[0])) fail(ErrorKind::InvalidArgument, "cost is not finite at the initial point");
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd v = init;
        v(i) = v(i) != 0.0 ? (1.0 + opts.initial_step) * v(i) : 0.00025;
        xs.push_back(v);
        fs.push_back(eval(v));
    }

    std::vector<std::size_t> order(xs.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        std::vector<Eigen::VectorXd> x2;
        std::vector<double> f2;
        for (auto i : order) {
            x2.push_back(xs[i]);
            f2.push_back(fs[i]);
        }
        xs.swap(x2);
        fs.swap(f2);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i) d = std::max(d, (xs[i] - xs[0]).norm());
        return d;
    };
    auto record = [&](int it) {
        const double best = trace.iterates.empty() ? fs[0] : std::min(trace.iterates.back().cost, fs[0]);
        trace.iterates.push_back({it, trace.evaluations, std::vector<double>(xs[0].data(), xs[0].data() + n), best});
    };

    bool finite = std::all_of(fs.begin(), fs.end(), [](double f) { return std::isfinite(f); });
    sort_simplex();
    record(0);
    int it = 0;
    while (finite) {
        const double spread = fs.back() - fs.front();
        if (diameter() < opts.x_tol) {
            trace.converged = true;
            trace.termination = "x_tol";
            break;
        }
        if (spread < opts.f_tol) {
            trace.converged = true;
            trace.termination = "f_tol";
            break;
        }
        if (it >= opts.max_iterations) {
            trace.termination = "max_iterations";
            break;
        }
        ++it;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) centroid += xs[i];
        centroid /= static_cast<double>(n);
        const Eigen::VectorXd& worst = xs.back();

        const Eigen::VectorXd xr = centroid + kReflect * (centroid - worst);
        const double fr = eval(xr);
        bool shrink = false;
        if (!std::isfinite(fr)) {
            finite = false;
            break;
        }
        if (fr < fs[0]) {
            const Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
            const double fe = eval(xe);
            if (!std::isfinite(fe)) {
                finite = false;
                break;
            }
            if (fe < fr) {
                xs.back() = xe;
                fs.back() = fe;
            } else {
                xs.back() = xr;
                fs.back() = fr;
            }
        } else if (fr < fs[fs.size() - 2]) {
            xs.back() = xr;
            fs.back() = fr;
        } else if (fr < fs.back()) {
            const Eigen::VectorXd xc = centroid + kContract * (xr - centroid);
            const double fc = eval(xc);
            if (!std::isfinite(fc)) {
                finite = false;
                break;
            }
            if (fc <= fr) {
                xs.back() = xc;
                fs.back() = fc;
            } else {
                shrink = true;
            }
        } else {
            const Eigen::VectorXd xc = centroid - kContract * (centroid - worst);
            const double fc = eval(xc);
            if (!std::isfinite(fc)) {
                finite = false;
                break;
            }
            if (fc < fs.back()) {
                xs.back() = xc;
                fs.back() = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 1; i < xs.size(); ++i) {
                xs[i] = xs[0] + kShrink * (xs[i] - xs[0]);
                fs[i] = eval(xs[i]);
                if (!std::isfinite(fs[i])) finite = false;
            }
            if (!finite) break;
        }
        sort_simplex();
        record(it);
    }
    if (!finite) {
        trace.aborted = true;
        trace.termination = "non-finite cost";
    }

    // Best finite vertex seen in the simplex.
    std::size_t best = 0;
    for (std::size_t i = 0; i < fs.size(); ++i)
        if (std::isfinite(fs[i]) && (!std::isfinite(fs[best]) || fs[i] < fs[best])) best = i;
    trace.best_x.assign(xs[best].data(), xs[best].data() + n);
    trace.best_cost = std::min(fs[best], trace.iterates.back().cost);
    if (trace.best_cost < fs[best]) trace.best_x = trace.iterates.back().x;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double f : fs) {
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    trace.final_spread = hi - lo;
    trace.final_diameter = diameter();
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

// ---------------------------------------------------------------------------
// Costs

const char* to_string(CostKind k) {
    switch (k) {
        case CostKind::Fid: return "fid";
        case CostKind::Fsa: return "fsa";
        case CostKind::Trvar: return "trvar";
        case CostKind::Rvals: return "rvals";
    }
    return "?";
}

CostKind parse_cost_kind(const std::string& s) {
    for (auto k : all_cost_kinds())
        if (s == to_string(k)) return k;
    fail(ErrorKind::InvalidArgument, "unknown cost kind '" + s + "' (expected fid, fsa, trvar or rvals)");
}

const std::vector<CostKind>& all_cost_kinds() {
    static const std::vector<CostKind> kinds{CostKind::Fid, CostKind::Fsa, CostKind::Trvar, CostKind::Rvals};
    return kinds;
}

Eigen::VectorXd ansatz_vector(int range) {
    require(range >= 2, "range must be at least 2");
    const auto c = ansatz_couplings(solve_constraint().h0, range);
    return Eigen::Map<const Eigen::VectorXd>(c.values.data(), static_cast<Eigen::Index>(c.values.size()));
}

CouplingSet to_couplings(const Eigen::VectorXd& h) {
    return CouplingSet::manual(std::vector<double>(h.data(), h.data() + h.size()));
}

Cost::Cost(const CostSpec& spec) : spec_(spec), failures_(std::make_shared<std::vector<std::string>>()) {
    require(spec.n_sites >= 6 && spec.n_sites % 2 == 0, "cost needs an even N >= 6");
    require(spec.range >= 2 && spec.range <= spec.n_sites / 2, "range must satisfy 2 <= R <= N/2");
    require(spec.window_fraction > 0.0 && spec.window_fraction < 0.5, "window fraction must lie in (0, 0.5)");
    basis_ = std::make_shared<const ConstrainedBasis>(spec.n_sites, Boundary::Periodic);
    if (spec.kind == CostKind::Fid)
        sector_ = std::make_shared<const SymmetrySector>(build_sector(*basis_, SectorLabel{2, 0, 1}));
}

Cost make_cost(const CostSpec& spec) { return Cost(spec); }

double Cost::operator()(const Eigen::VectorXd& h) const {
    require(h.size() == spec_.range - 1, "cost expects h_2..h_R");
    try {
        const double v = evaluate(to_couplings(h));
        if (!std::isfinite(v)) {
            failures_->push_back("non-finite cost value");
            return std::numeric_limits<double>::infinity();
        }
        return v;
    } catch (const Error& e) {
        failures_->push_back(std::string(to_string(e.kind())) + ": " + e.what());
        return std::numeric_limits<double>::infinity();
    }
}

double Cost::evaluate(const CouplingSet& c) const {
    const int n = spec_.n_sites;
    if (spec_.kind == CostKind::Fid) {
        // The Neel state lives entirely in the two-site k = 0, I = + sector.
        const auto H = real_part(build_sector_hamiltonian(*sector_, c));
        const Eigen::VectorXcd psi = sector_->project_config(neel_config(n));
        KrylovOptions ko;
        ko.tol = spec_.krylov_tol;
        const double tau = solve_constraint().tau;
        const auto mv = as_matvec(H);
        FidelityProbe probe(mv, psi, krylov_evolve(mv, psi, tau, ko), tau, ko);
        const auto peaks = track_revivals([&](double t) { return probe(t); }, tau, 1, spec_.window_fraction,
                                          spec_.peak_tol);
        return 1.0 - peaks.at(0).g;
    }
    const auto pm = split_pm(*basis_, c);
    const auto s = fsa_basis(pm.plus, basis_vector(*basis_, neel_state(*basis_).z2), n);
    switch (spec_.kind) {
        case CostKind::Fsa: return fsa_error3(s, pm.minus);
        case CostKind::Trvar: {
            const auto H = build_hamiltonian(*basis_, c);
            return subspace_variance(s, H, commutator_hz(pm.plus, pm.minus)).value;
        }
        case CostKind::Rvals: return ritz_anharmonicity(project_tridiagonal(s, build_hamiltonian(*basis_, c)).values);
        case CostKind::Fid: break;
    }
    fail(ErrorKind::InternalInconsistency, "unhandled cost kind");
}

OptimizationResult optimize_couplings(const CostSpec& spec, const NelderMeadOptions& opts) {
    const Cost cost(spec);
    OptimizationResult r;
    r.spec = spec;
    r.trace = nelder_mead([&](const Eigen::VectorXd& h) { return cost(h); }, ansatz_vector(spec.range), opts);
    r.cost_failures = cost.failures();
    for (std::size_t i = 0; i < r.trace.best_x.size(); ++i)
        if (r.trace.best_x[i] < 0.0) r.negative_d.push_back(static_cast<int>(i) + 2);
    return r;
}

CrossEvaluation cross_evaluate(const std::map<CostKind, Eigen::VectorXd>& optima, const CostSpec& base) {
    CrossEvaluation out;
    for (auto k : all_cost_kinds())
        if (optima.count(k)) out.kinds.push_back(k);
    require(!out.kinds.empty(), "no optima to evaluate");
    const auto cols = static_cast<Eigen::Index>(all_cost_kinds().size());
    out.values.resize(static_cast<Eigen::Index>(out.kinds.size()), cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        CostSpec spec = base;
        spec.kind = all_cost_kinds()[static_cast<std::size_t>(j)];
        const Cost cost(spec);
        for (std::size_t i = 0; i < out.kinds.size(); ++i)
            out.values(static_cast<Eigen::Index>(i), j) = cost(optima.at(out.kinds[i]));
    }
    return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const OptimizationTrace& t, bool include_wall_time) {
    nlohmann::json its = nlohmann::json::array();
    for (const auto& i : t.iterates)
        its.push_back({{"iteration", i.iteration}, {"evaluations", i.evaluations}, {"x", i.x}, {"best_cost", i.cost}});
    nlohmann::json j{{"iterates", its},
                     {"best_x", t.best_x},
                     {"best_cost", t.best_cost},
                     {"converged", t.converged},
                     {"aborted", t.aborted},
                     {"termination", t.termination},
                     {"final_spread", t.final_spread},
                     {"final_diameter", t.final_diameter},
                     {"evaluations", t.evaluations},
                     {"seed", t.seed}};
    if (include_wall_time) j["wall_seconds"] = t.wall_seconds;
    return j;
}

nlohmann::json to_json(const OptimizationResult& r, bool include_wall_time) {
    CouplingSet couplings = CouplingSet::manual(r.trace.best_x);
    couplings.provenance = CouplingProvenance::Optimized;
    return {{"cost", to_string(r.spec.kind)},
            {"n_sites", r.spec.n_sites},
            {"range", r.spec.range},
            {"peak_tol", r.spec.peak_tol},
            {"krylov_tol", r.spec.krylov_tol},
            {"window_fraction", r.spec.window_fraction},
            {"couplings", to_json(couplings)},
            {"negative_couplings_d", r.negative_d},
            {"cost_failures", r.cost_failures},
            {"trace", to_json(r.trace, include_wall_time)}};
}

nlohmann::json to_json(const CrossEvaluation& c) {
    nlohmann::json rows = nlohmann::json::object();
    for (std::size_t i = 0; i < c.kinds.size(); ++i) {
        nlohmann::json row = nlohmann::json::object();
        for (std::size_t j = 0; j < all_cost_kinds().size(); ++j)
            row[to_string(all_cost_kinds()[j])] =
                c.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        rows[to_string(c.kinds[i])] = row;
    }
    return {{"rows_are_optimum_of", "cost kind"}, {"values", rows}};
}

}  // namespace pxp
