#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pxpscar/hilbert.hpp"
#include "pxpscar/operators.hpp"
#include "pxpscar/sparse.hpp"

namespace pxp {

using MatVec = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

MatVec as_matvec(const SparseOperator& H);
MatVec as_matvec(const ComplexSparseOperator& H);

struct KrylovOptions {
    int dim = 30;
    /// Allowed 2-norm error per unit of the requested time step.
    double tol = 1e-10;
};

struct KrylovStats {
    int substeps = 0;
    int matvecs = 0;
    double error_estimate = 0.0;
};

/// Lanczos basis around one state with full reorthogonalization. Any
/// exp(-iHt)|psi> inside the space is available without further matvecs.
class KrylovSpace {
public:
    /// Stops growing early once exp(-iH t_target)|psi> meets tol |t_target/t_ref|
    /// (t_target = 0 disables the early stop).
    KrylovSpace(const MatVec& H, const Eigen::VectorXcd& psi, int max_dim, double t_target = 0.0, double tol = 0.0,
                double t_ref = 1.0);

    int dim() const noexcept { return static_cast<int>(basis_.size()); }
    int matvecs() const noexcept { return matvecs_; }
    /// True if the space is invariant (Lanczos breakdown).
    bool invariant() const noexcept { return invariant_; }

    Eigen::VectorXcd evolve(double t) const;
    /// A-posteriori error beta_m |[exp(-itT)]_{m,0}| ||psi||.
    double error_estimate(double t) const;
    /// Largest |t| <= |t_max| (same sign) with error_estimate <= tol |t| / |t_ref|.
    double admissible_step(double t_max, double tol, double t_ref) const;

    /// Coefficients V^dagger phi, used by amplitude().
    Eigen::VectorXcd coordinates(const Eigen::VectorXcd& phi) const;
    /// <phi|exp(-iHt)|psi> given coordinates(phi).
    std::complex<double> amplitude(const Eigen::VectorXcd& phi_coordinates, double t) const;

private:
    Eigen::VectorXcd reduced_propagator(double t) const;
    void diagonalize(const std::vector<double>& alpha, const std::vector<double>& beta);

    std::vector<Eigen::VectorXcd> basis_;
    Eigen::VectorXd ritz_values_;
    Eigen::MatrixXd ritz_vectors_;
    double next_beta_ = 0.0;
    double psi_norm_ = 0.0;
    int matvecs_ = 0;
    bool invariant_ = false;
};

/// exp(-iH dt)|psi> with adaptive sub-stepping on the Lanczos error estimate.
Eigen::VectorXcd krylov_evolve(const MatVec& H, const Eigen::VectorXcd& psi, double dt, const KrylovOptions& opts = {},
                               KrylovStats* stats = nullptr);
Eigen::VectorXcd krylov_evolve(const SparseOperator& H, const Eigen::VectorXcd& psi, double dt,
                               const KrylovOptions& opts = {}, KrylovStats* stats = nullptr);
Eigen::VectorXcd krylov_evolve(const ComplexSparseOperator& H, const Eigen::VectorXcd& psi, double dt,
                               const KrylovOptions& opts = {}, KrylovStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Entanglement

struct Entanglement {
    double entropy = 0.0;        ///< natural log
    std::vector<double> spectrum;  ///< Schmidt probabilities, descending
};

/// Half-chain cut of the constrained space: sites 0..N/2-1 versus the rest.
class HalfChainCut {
public:
    explicit HalfChainCut(const ConstrainedBasis& basis);

    Entanglement operator()(const Eigen::VectorXcd& psi) const;
    Entanglement operator()(const Eigen::VectorXd& psi) const;

    std::size_t left_dim() const noexcept { return n_left_; }
    std::size_t right_dim() const noexcept { return n_right_; }

private:
    std::size_t dim_;
    std::size_t n_left_ = 0, n_right_ = 0;
    std::vector<std::uint32_t> left_, right_;
};

Entanglement entanglement_entropy(const Eigen::VectorXcd& psi, const ConstrainedBasis& basis);

/// Half-chain cut of an unconstrained 2^N register (bit i = site i).
Entanglement product_space_entanglement(const Eigen::VectorXcd& psi, int n_sites);

Entanglement entanglement_from_probabilities(std::vector<double> p);

// ---------------------------------------------------------------------------
// Fidelity and revivals

struct RevivalPeak {
    int m = 0;
    double t = 0.0;
    double g = 0.0;
};

struct SchmidtSample {
    double t = 0.0;
    std::vector<double> p;
};

struct QuenchRecord {
    std::vector<double> t, g, entropy;
    std::vector<SchmidtSample> schmidt;
    std::vector<RevivalPeak> peaks;
    double max_norm_drift = 0.0;
    KrylovStats stats;
};

struct QuenchOptions {
    double t_max = 50.0;
    double dt = 0.05;
    KrylovOptions krylov;
    bool entropy = true;
    /// Keep the Schmidt spectrum every this many steps (0: never).
    int schmidt_stride = 0;
    /// Reference revival period; peaks are searched near multiples of it.
    double period = 0.0;
    double window_fraction = 0.2;
    double peak_tol = 1e-7;
};

/// Loschmidt echo |<psi0|exp(-iHt)|psi0>|^2 on a uniform grid. Entropy needs
/// the full constrained basis; pass nullptr to skip it (e.g. sector runs).
QuenchRecord fidelity_series(const SparseOperator& H, const Eigen::VectorXcd& psi0, const QuenchOptions& opts,
                             const ConstrainedBasis* basis = nullptr);

/// Golden-section maximization on [lo, hi] followed by a parabolic polish.
/// Throws NonUnimodal when a bracket end beats both interior probes.
RevivalPeak golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-7);

/// Loschmidt echo at arbitrary times near an anchor state, reusing the
/// local Krylov space and re-anchoring when it stops being accurate.
class FidelityProbe {
public:
    FidelityProbe(MatVec H, Eigen::VectorXcd psi0, Eigen::VectorXcd anchor, double t_anchor,
                  const KrylovOptions& opts = {});
    double operator()(double t);

private:
    void reanchor(double t);

    MatVec H_;
    Eigen::VectorXcd psi0_;
    Eigen::VectorXcd anchor_;
    double t_anchor_;
    KrylovOptions opts_;
    std::optional<KrylovSpace> space_;
    Eigen::VectorXcd coords_;
};

/// Peak of g(t) in [t_guess - window, t_guess + window], from psi0 at t = 0.
RevivalPeak revival_peak(const SparseOperator& H, const Eigen::VectorXcd& psi0, double t_guess, double window,
                         const KrylovOptions& opts = {}, double tol = 1e-7);

/// g(t) = |sum_i w_i exp(-i E_i t)|^2 from a spectral decomposition.
struct SpectralFidelity {
    Eigen::VectorXd energies;
    Eigen::VectorXd weights;

    double operator()(double t) const;
};

/// Neel-state spectral fidelity from the (two-site translation, k = 0, I = +1)
/// sector, which contains the whole Neel state.
SpectralFidelity neel_spectral_fidelity(int n_sites, const CouplingSet& couplings);

/// Peaks m = 1..m_max near multiples of the period, each located by a grid
/// scan of +-window_fraction*period around the extrapolated position then
/// golden section.
std::vector<RevivalPeak> track_revivals(const std::function<double(double)>& g, double period, int m_max,
                                        double window_fraction = 0.2, double tol = 1e-7);

// ---------------------------------------------------------------------------
// Scaling of revival decay

struct PowerLawFit {
    double C = 0.0;
    double mu = 0.0;
    int points = 0;
    bool valid = false;
};

struct ScalingSeries {
    int n_sites = 0;
    std::vector<int> m;
    std::vector<double> g, g_tilde, gamma;
    PowerLawFit short_fit, long_fit;
    std::optional<double> m_c;
};

struct ScalingWindows {
    int short_lo = 5, short_hi = 60;
    int long_lo = 200, long_hi = 1000;
    int min_points = 3;
};

/// Gamma(m) = (1 - g_m^{1/N}) / m, zero where g_m > 1 - 1e-14.
double decay_rate(double g, int n_sites, int m);

/// Power-law fits and their intersection for one system size.
ScalingSeries scaling_series(int n_sites, const std::vector<RevivalPeak>& peaks, const ScalingWindows& w = {});
/// Same from precomputed rates.
ScalingSeries fit_rates(int n_sites, const std::vector<int>& m, const std::vector<double>& gamma,
                        const ScalingWindows& w = {});

/// Spread of Gamma(m) across system sizes at each shared m <= m_max:
/// (max - min) / mean. Points where every rate vanishes have spread 0.
struct CollapseReport {
    std::vector<int> m;
    std::vector<double> spread;
    double max_spread = 0.0;
    int worst_m = 0;
};

CollapseReport collapse_spread(const std::vector<ScalingSeries>& series, int m_max);

nlohmann::json to_json(const ScalingSeries& s);
nlohmann::json to_json(const CollapseReport& c);
nlohmann::json to_json(const RevivalPeak& p);
void write_quench_csv(std::ostream& os, const QuenchRecord& r);

}  // namespace pxp
