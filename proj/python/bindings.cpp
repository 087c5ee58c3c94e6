#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "pxpscar/dynamics.hpp"
#include "pxpscar/errors.hpp"
#include "pxpscar/fsa.hpp"
#include "pxpscar/hilbert.hpp"
#include "pxpscar/linalg.hpp"
#include "pxpscar/operators.hpp"
#include "pxpscar/optimize.hpp"
#include "pxpscar/spectral.hpp"
#include "pxpscar/toymodel.hpp"
#include "pxpscar/version.hpp"

namespace py = pybind11;
using namespace pxp;

namespace {

py::object to_python(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_python(v));
            return std::move(out);
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
            return std::move(out);
        }
        default: return py::none();
    }
}

// None: bare chain; "ansatz": golden-ratio ansatz up to N/2; a sequence: h_2, h_3, ...
CouplingSet couplings_arg(const py::object& c, int n_sites) {
    if (c.is_none()) return CouplingSet::none();
    if (py::isinstance<py::str>(c)) {
        const auto s = c.cast<std::string>();
        require(s == "ansatz" || s == "none", "couplings must be None, 'ansatz', 'none' or a sequence of h_d");
        return s == "none" ? CouplingSet::none() : ansatz_couplings(solve_constraint().h0, n_sites / 2);
    }
    return CouplingSet::manual(c.cast<std::vector<double>>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Scarred constrained spin chains: exact diagonalization, revivals and coupling optimization";

    // Module-lifetime exception types, intentionally never released.
    static PyObject* numeric_error = PyErr_NewException("pxpscar._core.NumericError", PyExc_RuntimeError, nullptr);
    static PyObject* too_large = PyErr_NewException("pxpscar._core.TooLargeError", PyExc_MemoryError, nullptr);
    m.attr("NumericError") = py::reinterpret_borrow<py::object>(numeric_error);
    m.attr("TooLargeError") = py::reinterpret_borrow<py::object>(too_large);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
            switch (e.kind()) {
                case ErrorKind::InvalidArgument:
                case ErrorKind::Unsupported: PyErr_SetString(PyExc_ValueError, msg.c_str()); return;
                case ErrorKind::TooLarge: PyErr_SetString(too_large, msg.c_str()); return;
                default: PyErr_SetString(numeric_error, msg.c_str()); return;
            }
        }
    });

    m.def("version", [] { return std::string(library_version()); });
    m.def("dense_backend_ok", &dense_backend_ok, "Self-test of the BLAS/LAPACK backend");

    m.def("solve_constraint", [] {
        const auto k = solve_constraint();
        py::dict d;
        d["h0"] = k.h0;
        d["h"] = k.h;
        d["delta"] = k.delta;
        d["tau"] = k.tau;
        d["level_spacing"] = k.level_spacing();
        return d;
    });
    m.def("optimal_h2_analytic", &optimal_h2_analytic);
    m.def("range4_residual_error", &range4_residual_error, py::arg("h2"));
    m.def(
        "ansatz_couplings", [](int range) { return ansatz_couplings(solve_constraint().h0, range).values; },
        py::arg("range"), "h_2..h_range of the golden-ratio ansatz");

    m.def(
        "basis_summary",
        [](int n, const std::string& bc, int step) {
            return to_python(basis_summary(ConstrainedBasis(n, boundary_from_string(bc)), step));
        },
        py::arg("n"), py::arg("bc") = "periodic", py::arg("step") = 0);
    m.def(
        "basis_states",
        [](int n, const std::string& bc) {
            const ConstrainedBasis b(n, boundary_from_string(bc));
            return std::vector<Config>(b.states().begin(), b.states().end());
        },
        py::arg("n"), py::arg("bc") = "periodic", "Configurations as integers, bit i = site i up");

    m.def(
        "quench",
        [](int n, const py::object& couplings, double t_max, double dt, bool entropy, double period) {
            const ConstrainedBasis basis(n, Boundary::Periodic);
            const auto c = couplings_arg(couplings, n);
            validate_couplings(c, n, Boundary::Periodic);
            QuenchOptions o;
            o.t_max = t_max;
            o.dt = dt;
            o.entropy = entropy;
            o.period = period > 0.0 ? period : solve_constraint().tau;
            const Eigen::VectorXcd psi = basis_vector(basis, neel_state(basis).z2).cast<std::complex<double>>();
            const auto rec = fidelity_series(build_hamiltonian(basis, c), psi, o, entropy ? &basis : nullptr);
            py::list peaks;
            for (const auto& p : rec.peaks) peaks.append(to_python(to_json(p)));
            py::dict d;
            d["t"] = rec.t;
            d["g"] = rec.g;
            d["entropy"] = rec.entropy;
            d["peaks"] = peaks;
            d["max_norm_drift"] = rec.max_norm_drift;
            return d;
        },
        py::arg("n"), py::arg("couplings") = "ansatz", py::arg("t_max") = 50.0, py::arg("dt") = 0.05,
        py::arg("entropy") = true, py::arg("period") = 0.0, "Neel-state Loschmidt echo on the periodic chain");

    m.def(
        "revival_peaks",
        [](int n, const py::object& couplings, int m_max, double window) {
            const auto sf = neel_spectral_fidelity(n, couplings_arg(couplings, n));
            py::list out;
            for (const auto& p : track_revivals([&](double t) { return sf(t); }, solve_constraint().tau, m_max, window))
                out.append(to_python(to_json(p)));
            return out;
        },
        py::arg("n"), py::arg("couplings") = "ansatz", py::arg("m_max") = 1, py::arg("window") = 0.2);

    m.def(
        "spectrum",
        [](int n, const std::string& sector, int step, const py::object& couplings, bool vectors, bool entropy) {
            const ConstrainedBasis basis(n, Boundary::Periodic);
            SpectrumOptions so;
            so.vectors = vectors || entropy;
            auto rec = diagonalize_sector(basis, SectorLabel::parse(sector, step), couplings_arg(couplings, n), so);
            py::dict d;
            d["sector"] = rec.label.to_string();
            d["energies"] = rec.energies;
            if (so.vectors) {
                d["overlaps"] = rec.overlaps;
                if (entropy) d["entropies"] = eigenstate_entropies(rec, basis);
                const auto band = special_band(rec, n, solve_constraint().level_spacing());
                d["band"] = to_python(to_json(band));
            }
            return d;
        },
        py::arg("n"), py::arg("sector") = "k0,I+", py::arg("step") = 2, py::arg("couplings") = "ansatz",
        py::arg("vectors") = true, py::arg("entropy") = false);

    m.def(
        "r_statistic",
        [](std::vector<double> energies, double discard_fraction, bool positive_only) {
            LevelStatsOptions lo;
            lo.discard_fraction = discard_fraction;
            if (positive_only)
                energies = positive_branch(
                    Eigen::Map<const Eigen::VectorXd>(energies.data(), static_cast<Eigen::Index>(energies.size())));
            return to_python(to_json(r_statistic(std::move(energies), lo), lo));
        },
        py::arg("energies"), py::arg("discard_fraction") = 0.1, py::arg("positive_only") = false);

    m.def(
        "su2_report",
        [](int n, const py::object& couplings) {
            return to_python(to_json(su2_report(ConstrainedBasis(n, Boundary::Periodic), couplings_arg(couplings, n))));
        },
        py::arg("n"), py::arg("couplings") = "ansatz");

    m.def(
        "cost",
        [](const std::string& kind, int n, const std::vector<double>& h) {
            CostSpec spec;
            spec.kind = parse_cost_kind(kind);
            spec.n_sites = n;
            spec.range = static_cast<int>(h.size()) + 1;
            const Cost c(spec);
            return c(Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size())));
        },
        py::arg("kind"), py::arg("n"), py::arg("h"), "fid, fsa, trvar or rvals cost of h_2..h_R (inf on failure)");

    m.def(
        "optimize",
        [](const std::string& kind, int n, int range, double x_tol, double f_tol, int max_iterations) {
            CostSpec spec;
            spec.kind = parse_cost_kind(kind);
            spec.n_sites = n;
            spec.range = range;
            NelderMeadOptions nm;
            nm.x_tol = x_tol;
            nm.f_tol = f_tol;
            nm.max_iterations = max_iterations;
            return to_python(to_json(optimize_couplings(spec, nm), false));
        },
        py::arg("kind"), py::arg("n"), py::arg("range"), py::arg("x_tol") = 1e-6, py::arg("f_tol") = 1e-10,
        py::arg("max_iterations") = 2000, "Nelder-Mead from the ansatz");

    m.def(
        "toy",
        [](int n, std::uint64_t seed, double omega, double sigma, bool initial_up, int revivals, double t_max,
           double dt) {
            const auto spec = random_toy_spec(n, seed, omega, sigma);
            ToyOptions o;
            o.initial_up = initial_up;
            o.revivals = revivals;
            o.t_max = t_max;
            o.dt = dt;
            auto j = to_json(toy_diagnostics(spec, o));
            j["tower_residuals"] = tower_residuals(build_toy(spec), scar_tower(n), omega);
            return to_python(j);
        },
        py::arg("n") = 10, py::arg("seed") = 1, py::arg("omega") = 1.0, py::arg("sigma") = 0.25,
        py::arg("initial_up") = true, py::arg("revivals") = 100, py::arg("t_max") = 10.0, py::arg("dt") = 0.01,
        "Toy tower model diagnostics; time evolution is exp(-2 pi i H t)");
}
