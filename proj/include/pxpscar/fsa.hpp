#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pxpscar/dynamics.hpp"
#include "pxpscar/hilbert.hpp"
#include "pxpscar/operators.hpp"

namespace pxp {

/// Forward-scattering subspace |k> = beta_k H+ |k-1>, k = 0..N, |0> = Neel.
///
/// Three equivalent normalization conventions are kept side by side:
///   step_norm[k] = || H+ |k-1> ||   (Lanczos off-diagonal of the projected H)
///   beta[k]      = 1 / step_norm[k] (step normalization, beta[0] = 1)
///   gamma[k]     = prod_{j<=k} beta[j], so |k> = gamma[k] (H+)^k |0>.
struct FsaSubspace {
    int n_sites = 0;
    std::vector<Eigen::VectorXd> vectors;
    std::vector<double> step_norm;
    std::vector<double> beta;
    std::vector<double> gamma;

    int size() const noexcept { return static_cast<int>(vectors.size()); }
    /// Columns are the subspace vectors.
    Eigen::MatrixXd matrix() const;
};

/// Builds the N+1 vectors. Throws DegenerateCoupling if H+|k> vanishes for k < N
/// and InternalInconsistency if H+|N> does not.
FsaSubspace fsa_basis(const SparseOperator& h_plus, const Eigen::VectorXd& neel, int n_sites);
/// Convenience: split H and seed with the Neel state of the basis.
FsaSubspace fsa_basis(const ConstrainedBasis& basis, const CouplingSet& couplings);

struct RitzPairs {
    Eigen::VectorXd diagonal;     ///< zero for a weight-changing H
    Eigen::VectorXd off_diagonal; ///< step norms 1..N
    Eigen::VectorXd values;       ///< ascending
    Eigen::MatrixXd vectors;      ///< in subspace coordinates
};

/// Projection of H onto the subspace, computed from the full-space action.
RitzPairs project_tridiagonal(const FsaSubspace& s, const SparseOperator& H);

struct SubspaceVariance {
    double from_square = 0.0;  ///< sum <k|H^2|k> - tr K(H)^2
    double from_hz = 0.0;      ///< sum <k|H^z|k>
    double value = 0.0;
};

/// tr{K(H^2) - K(H)^2} two ways; throws InternalInconsistency when they
/// disagree beyond 1e-8 relative.
SubspaceVariance subspace_variance(const FsaSubspace& s, const SparseOperator& H, const SparseOperator& hz);
/// tr{K(H^2) - K(H)^2} for any orthonormal columns q (one column: the variance).
double subspace_variance(const Eigen::MatrixXcd& q, const MatVec& H);

/// || H- |k> - step_norm[k] |k-1> ||^2 = <k|H+ H-|k> - step_norm[k]^2.
double fsa_error(const FsaSubspace& s, const SparseOperator& h_minus, int k);
/// First non-trivial forward-scattering error, on the third vector:
/// || H- |3> - step_norm[3] |2> ||^2. Steps 1 and 2 are exact for any
/// translation-invariant H, because H-|k> for k <= 2 lies in a
/// one-dimensional space.
double fsa_error3(const FsaSubspace& s, const SparseOperator& h_minus);

/// RMS residual of the best-fit arithmetic progression through sorted values.
double ritz_anharmonicity(const Eigen::VectorXd& values);

struct Su2Report {
    int n_sites = 0;
    std::vector<double> t;          ///< <k+1|H+|k>, N entries
    std::vector<double> r;          ///< t_k / sqrt((s-m_k)(s+m_k+1))
    double scale = 0.0;             ///< least-squares constant c in t_k ~ c sqrt(...)
    std::vector<double> r_rescaled; ///< r_k / scale
    double r_spread = 0.0;          ///< (max r - min r) / mean r
    std::vector<double> hz;         ///< <k|H^z|k>, N+1 entries
    std::vector<double> hz_var;     ///< <k|(H^z)^2|k> - <k|H^z|k>^2
    std::vector<double> delta;      ///< hz[k+1] - hz[k], N entries
    double delta_mean = 0.0;
    double delta_mean_interior = 0.0;  ///< first and last spacing excluded
    double delta_rms_rel = 0.0;        ///< RMS(delta - mean) / mean
    /// ||P[H^z,H+]P - Delta P H+ P||_F / ||P H+ P||_F with Delta = delta_mean.
    double algebra_residual = 0.0;
};

Su2Report su2_report(const FsaSubspace& s, const SparseOperator& h_plus, const SparseOperator& hz);
Su2Report su2_report(const ConstrainedBasis& basis, const CouplingSet& couplings);

/// Coefficients of H^z|2> relative to |2> on two-flip configurations,
/// grouped by the distance between the flipped sites (2, 4, >= 6).
struct FCoefficients {
    double f2 = 0.0;
    double f4 = 0.0;
    double f6 = 0.0;
    /// Largest deviation within a distance class (should vanish).
    double class_spread = 0.0;
};

/// Needs couplings with h_2 only (range-4 deformation).
FCoefficients extract_f_coefficients(const ConstrainedBasis& basis, double h2);

/// Closed forms for the coefficients in h = h_2 with L = N/2.
double f2_closed_form(double h, int L);
double f4_closed_form(double h, int L);
double f6_closed_form(double h, int L);

nlohmann::json to_json(const Su2Report& r);
nlohmann::json to_json(const RitzPairs& r);

}  // namespace pxp
