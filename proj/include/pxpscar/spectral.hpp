#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pxpscar/dynamics.hpp"
#include "pxpscar/hilbert.hpp"
#include "pxpscar/operators.hpp"

namespace pxp {

struct SpectrumOptions {
    /// Largest sector dimension handed to the dense solver.
    std::size_t dense_cap = 20000;
    /// Eigenvectors are needed for overlaps, bands and entropies.
    bool vectors = true;
    /// Relative gap below which eigenvalues count as degenerate.
    double degeneracy_tol = 1e-10;
};

/// Eigen-decomposition of one symmetry sector of the periodic chain.
struct SpectrumRecord {
    int n_sites = 0;
    SectorLabel label;
    Eigen::VectorXd energies;   ///< ascending
    /// |<psi_ref|E_i>|^2 with psi_ref the Neel state (two-site sectors) or
    /// (Neel + Neel')/sqrt2 (one-site sectors), projected into the sector.
    /// Inside each degenerate cluster the weight is rotated onto one vector.
    Eigen::VectorXd overlaps;
    /// Weight of psi_ref in this sector.
    double reference_weight = 0.0;
    Eigen::MatrixXd real_vectors;      ///< filled for real sectors
    Eigen::MatrixXcd complex_vectors;  ///< filled for complex sectors
    std::vector<double> entropies;     ///< filled by eigenstate_entropies

    std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
    bool has_vectors() const noexcept { return real_vectors.size() > 0 || complex_vectors.size() > 0; }
    Eigen::VectorXcd vector(std::size_t i) const;
};

/// Throws TooLarge when the sector exceeds the dense cap.
SpectrumRecord diagonalize_sector(const SymmetrySector& sector, const CouplingSet& couplings,
                                  const SpectrumOptions& opts = {});
SpectrumRecord diagonalize_sector(const ConstrainedBasis& basis, const SectorLabel& label,
                                  const CouplingSet& couplings, const SpectrumOptions& opts = {});

/// Eigenvalues of every sector for the given translation step, merged and sorted.
std::vector<double> all_sector_energies(const ConstrainedBasis& basis, const CouplingSet& couplings,
                                        int translation_step, const SpectrumOptions& opts = {});

// ---------------------------------------------------------------------------
// Special band

struct BandWindow {
    int m = 0;                 ///< ladder index, centre at E = 0 is m = N/2
    double centre = 0.0;
    std::optional<std::size_t> member;
    double overlap = 0.0;      ///< best |c|^2 in the window
    double next_best = 0.0;    ///< runner-up |c|^2 in the same window
};

struct SpecialBand {
    std::vector<BandWindow> windows;     ///< N+1 windows, ascending energy
    std::vector<std::size_t> members;    ///< indices into the record, ascending energy
    bool complete = false;               ///< every window found a candidate
    double captured_weight = 0.0;        ///< sum of member overlaps
    /// Smallest member overlap over the largest non-member overlap.
    double separation = 0.0;
};

/// Scans windows of width 0.5*spacing outward from E = 0 and keeps the
/// largest-overlap state of each. The first step is one spacing; later windows
/// sit one measured gap beyond the previous member, following the ladder where
/// it narrows towards the band edges.
SpecialBand special_band(const SpectrumRecord& record, int n_sites, double spacing);

/// Energy gaps between consecutive band members.
std::vector<double> band_spacings(const SpectrumRecord& record, const SpecialBand& band);

// ---------------------------------------------------------------------------
// Level statistics

struct LevelStatsOptions {
    double discard_fraction = 0.1;  ///< dropped at each spectral edge
    int unfold_degree = 3;
    int histogram_bins = 40;
    double histogram_max = 4.0;
    std::size_t min_levels = 100;
};

struct LevelStats {
    double mean_r = 0.0;
    std::vector<double> r;
    std::vector<double> spacings;    ///< unfolded
    double mean_spacing = 0.0;
    std::vector<double> histogram;   ///< P(s) density on uniform bins
    double bin_width = 0.0;
    std::size_t levels_used = 0;
    std::size_t skipped_ratios = 0;  ///< both neighbouring gaps zero
};

/// Gap-ratio statistic after discarding edges; throws InsufficientData when
/// fewer than min_levels remain.
LevelStats r_statistic(std::vector<double> energies, const LevelStatsOptions& opts = {});

/// Levels strictly above zero. The constrained chain has a spectrum symmetric
/// about zero plus a degenerate zero-energy manifold; the positive half keeps
/// every independent level once.
std::vector<double> positive_branch(const Eigen::VectorXd& energies, double zero_tol = 1e-8);

/// Pools the ratio series of several sectors.
LevelStats pool(const std::vector<LevelStats>& parts);

// ---------------------------------------------------------------------------
// Eigenstate entanglement and weights

/// Half-chain entropy of every eigenvector, lifted to the full basis; also
/// stores the result in record.entropies.
std::vector<double> eigenstate_entropies(SpectrumRecord& record, const ConstrainedBasis& basis);

struct SpecialStateEntropy {
    double energy = 0.0;
    double entropy = 0.0;
};

/// The two band members with the smallest positive energy.
std::vector<SpecialStateEntropy> central_special_states(const SpectrumRecord& record, const SpecialBand& band);

struct Support {
    std::size_t count = 0;       ///< overlaps above threshold
    double captured = 0.0;       ///< their total weight
    double max_overlap = 0.0;
    double max_times_n = 0.0;    ///< max |c|^2 * N
};

Support lemma_support(const std::vector<double>& overlaps, double threshold, int n_sites);

/// Least-squares residual of y = a + b*f(x).
double linear_fit_residual(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Low-lying states on the open chain

struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    int iterations = 0;
};

/// Lowest k eigenpairs of a real symmetric operator by restarted Lanczos with
/// full reorthogonalization. Throws NumericFailure without convergence.
EigenPairs lowest_eigenpairs(const SparseOperator& H, int k, double tol = 1e-10, int max_dim = 200,
                             int max_restarts = 30);

struct LowLying {
    double e0 = 0.0, e1 = 0.0, gap = 0.0;
    std::vector<double> schmidt;   ///< ground-state singular values, descending
    double tail_weight = 0.0;      ///< sum of lambda_i^2 for i >= 3
};

/// Ground and first excited state of the open chain, middle-cut Schmidt values.
LowLying low_lying_proxy(const ConstrainedBasis& open_basis, const CouplingSet& couplings);

// ---------------------------------------------------------------------------
// Output

nlohmann::json to_json(const LevelStats& s, const LevelStatsOptions& opts);
nlohmann::json to_json(const SpecialBand& b);
nlohmann::json to_json(const LowLying& l);
/// Columns: E, |c|^2, S (S empty when not computed).
void write_spectrum_csv(std::ostream& os, const SpectrumRecord& r);
void write_histogram_csv(std::ostream& os, const LevelStats& s);

}  // namespace pxp
