#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pxpscar/hilbert.hpp"
#include "pxpscar/sparse.hpp"

namespace pxp {

enum class CouplingProvenance { Ansatz, Optimized, Manual };

std::string to_string(CouplingProvenance p);
CouplingProvenance provenance_from_string(const std::string& s);

/// Deformation strengths h_d for d = 2..range, in units of the bare flip
/// amplitude. values[0] is h_2.
struct CouplingSet {
    std::vector<double> values;
    CouplingProvenance provenance = CouplingProvenance::Manual;
    std::optional<double> ansatz_h0;

    int range() const noexcept { return static_cast<int>(values.size()) + 1; }
    /// h_d, or 0 outside 2..range.
    double h(int d) const noexcept;

    static CouplingSet none() { return {}; }
    static CouplingSet manual(std::vector<double> values);
};

nlohmann::json to_json(const CouplingSet& c);
CouplingSet couplings_from_json(const nlohmann::json& j);

/// Constants of the emergent SU(2) algebra for the golden-ratio family.
struct AlgebraConstants {
    double h0;     ///< ansatz amplitude fixed by the constraint
    double h;      ///< 2 * sum_{n>=2} (-1)^n h_n
    double delta;  ///< harmonic gap of H^z, (1 - h)^2
    double tau;    ///< revival period 2 pi / sqrt(2 delta)

    double level_spacing() const noexcept;  ///< 2 pi / tau
};

/// Golden-ratio ansatz h_d = h0 (phi^(d-1) - phi^-(d-1))^-2 for d = 2..range.
CouplingSet ansatz_couplings(double h0, int range);

/// Alternating sum 2 * sum_{n>=2} (-1)^n h_n over the given couplings.
double alternating_sum(const CouplingSet& c);

/// Residual (1-h)(1-h-16 S1) - 16 S2 of the SU(2) harmonic-spacing condition,
/// with S1 = sum h_{2n}, S2 = sum h_{2n}^2, for the untruncated ansatz family.
double constraint_residual(double h0);

/// Root of constraint_residual on [0.01, 0.10] by bisection.
AlgebraConstants solve_constraint();

/// h2* = 1/2 - 1/sqrt(5), the smaller root of 1 - 20 x (1 - x) = 0.
double optimal_h2_analytic();
/// Remaining distance-4 error -32 h^2 (1 - h) of the range-4 deformation.
double range4_residual_error(double h2);

/// Flip amplitude for site i given the (unchanged) neighbour pattern:
/// 1 - sum_d h_d (z_{i-d} + z_{i+d}). Open boundary drops missing sites.
double flip_amplitude(Config c, int site, int n_sites, Boundary boundary, const CouplingSet& couplings);

/// True if site i may flip: both neighbours down (missing neighbours count as down).
bool flippable(Config c, int site, int n_sites, Boundary boundary) noexcept;

SparseOperator build_pxp(const ConstrainedBasis& basis);
SparseOperator build_deformation(const ConstrainedBasis& basis, const CouplingSet& couplings);
/// H0 + deformation, assembled in one pass.
SparseOperator build_hamiltonian(const ConstrainedBasis& basis, const CouplingSet& couplings);

struct RaisingLowering {
    SparseOperator plus;   ///< dressed sigma^- on even 0-based sites, sigma^+ on odd
    SparseOperator minus;  ///< adjoint of plus
};

RaisingLowering split_pm(const ConstrainedBasis& basis, const CouplingSet& couplings);

/// H^z = [H+, H-] as an explicit sparse matrix.
SparseOperator commutator_hz(const SparseOperator& plus, const SparseOperator& minus);

/// Hamiltonian restricted to a periodic symmetry sector, in the basis of
/// normalized projected representatives.
ComplexSparseOperator build_sector_hamiltonian(const SymmetrySector& sector, const CouplingSet& couplings);

/// Real part of an operator whose imaginary parts vanish (real sectors).
/// Throws InternalInconsistency if an imaginary part exceeds 1e-12.
SparseOperator real_part(const ComplexSparseOperator& op);

/// Number of H+ steps separating a configuration from the Neel state.
int fsa_grade(Config c, int n_sites) noexcept;

void validate_couplings(const CouplingSet& couplings, int n_sites, Boundary boundary);

}  // namespace pxp
