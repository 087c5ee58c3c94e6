#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pxpscar/hilbert.hpp"
#include "pxpscar/operators.hpp"

namespace pxp {

// ---------------------------------------------------------------------------
// Nelder-Mead

struct NelderMeadOptions {
    double initial_step = 0.05;  ///< relative perturbation per coordinate
    double x_tol = 1e-6;         ///< simplex diameter
    double f_tol = 1e-10;        ///< cost spread over the simplex
    int max_iterations = 2000;
    /// Recorded for provenance; the search itself is deterministic.
    std::uint64_t seed = 0;
};

struct Iterate {
    int iteration = 0;
    int evaluations = 0;
    std::vector<double> x;  ///< best vertex after this iteration
    double cost = 0.0;      ///< best cost so far, non-increasing
};

struct OptimizationTrace {
    std::vector<Iterate> iterates;
    std::vector<double> best_x;
    double best_cost = 0.0;
    bool converged = false;
    bool aborted = false;          ///< the cost returned a non-finite value
    std::string termination;       ///< "x_tol", "f_tol", "max_iterations" or "non-finite cost"
    double final_spread = 0.0;     ///< max - min cost over the final simplex
    double final_diameter = 0.0;   ///< max distance from the best vertex
    int evaluations = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Reflection 1, expansion 2, contraction 1/2, shrink 1/2. The initial simplex
/// adds initial_step * x_i to one coordinate at a time (0.00025 for x_i = 0).
/// Stops when the diameter is below x_tol or the spread below f_tol.
/// Throws InvalidArgument if the cost is not finite at init.
OptimizationTrace nelder_mead(const Objective& cost, const Eigen::VectorXd& init, const NelderMeadOptions& opts = {});

// ---------------------------------------------------------------------------
// Cost functions over h_2..h_R

enum class CostKind { Fid, Fsa, Trvar, Rvals };

const char* to_string(CostKind k);
/// Accepts "fid", "fsa", "trvar", "rvals"; throws InvalidArgument otherwise.
CostKind parse_cost_kind(const std::string& s);
const std::vector<CostKind>& all_cost_kinds();

struct CostSpec {
    CostKind kind = CostKind::Fsa;
    int n_sites = 16;
    int range = 2;                 ///< R; the search runs over h_2..h_R
    double peak_tol = 1e-9;        ///< golden-section time tolerance (fid)
    double krylov_tol = 1e-12;     ///< Krylov error per unit time (fid)
    double window_fraction = 0.15; ///< fid peak bracket tau*(1 +- window_fraction)
};

/// Cost of a coupling vector (h_2..h_R). Module errors become +inf and their
/// messages are kept in failures().
class Cost {
public:
    explicit Cost(const CostSpec& spec);

    double operator()(const Eigen::VectorXd& h) const;
    const CostSpec& spec() const noexcept { return spec_; }
    const std::vector<std::string>& failures() const noexcept { return *failures_; }

private:
    double evaluate(const CouplingSet& c) const;

    CostSpec spec_;
    std::shared_ptr<const ConstrainedBasis> basis_;
    std::shared_ptr<const SymmetrySector> sector_;
    std::shared_ptr<std::vector<std::string>> failures_;
};

Cost make_cost(const CostSpec& spec);

/// h_2..h_R of the exponential ansatz.
Eigen::VectorXd ansatz_vector(int range);
CouplingSet to_couplings(const Eigen::VectorXd& h);

/// Nelder-Mead from the ansatz.
struct OptimizationResult {
    CostSpec spec;
    OptimizationTrace trace;
    std::vector<std::string> cost_failures;
    std::vector<int> negative_d;  ///< d with h_d < 0 at the optimum
};

OptimizationResult optimize_couplings(const CostSpec& spec, const NelderMeadOptions& opts = {});

/// rows: optimum kind, columns: cost kind, both in all_cost_kinds() order.
struct CrossEvaluation {
    std::vector<CostKind> kinds;
    Eigen::MatrixXd values;
};

CrossEvaluation cross_evaluate(const std::map<CostKind, Eigen::VectorXd>& optima, const CostSpec& base);

nlohmann::json to_json(const OptimizationTrace& t, bool include_wall_time);
nlohmann::json to_json(const OptimizationResult& r, bool include_wall_time);
nlohmann::json to_json(const CrossEvaluation& c);

}  // namespace pxp
