#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pxpscar/sparse.hpp"
#include "pxpscar/spectral.hpp"

namespace pxp {

/// Unconstrained spin-1/2 ring with an exactly embedded spin-N/2 tower:
///   H = (omega/2) sum_i sigma^x_i + sum_i V_{i-1,i+2} P_{i,i+1},
///   V_{a,d} = sum_{mu,nu} J^{mu nu} sigma^mu_a sigma^nu_d,  P = (1 - sigma.sigma)/4.
/// Bit i of a basis index is site i, set bit = spin up.
struct ToySpec {
    int n_sites = 14;
    double omega = 1.0;
    double sigma = 0.25;       ///< standard deviation of each J entry
    std::uint64_t seed = 1;
    /// couplings[i] holds J^{mu nu} of the bond around (i, i+1), row-major in
    /// mu, nu = x, y, z.
    std::vector<std::array<double, 9>> couplings;
};

constexpr int kMaxToySites = 16;

/// Draws 9 independent Gaussians per bond from mt19937_64(seed).
ToySpec random_toy_spec(int n_sites, std::uint64_t seed, double omega = 1.0, double sigma = 0.25);
/// All J = 0: a free transverse field.
ToySpec free_toy_spec(int n_sites, double omega = 1.0);

/// Sparse 2^N Hamiltonian. Each bond term is symmetrized as (V P + P V^dagger)/2.
ComplexSparseOperator build_toy(const ToySpec& spec);

/// (1 - sigma_a.sigma_b)/4 on two sites; local index = bit_a | bit_b << 1.
Eigen::Matrix4cd singlet_projector();
/// P_{i,i+1} on the full ring.
ComplexSparseOperator singlet_projector(int n_sites, int i);

/// States |s = N/2, S^x = m> for m = -N/2..N/2, built as z-basis Dicke states
/// and rotated by a Hadamard on every site.
struct ScarTower {
    int n_sites = 0;
    std::vector<Eigen::VectorXd> states;  ///< index j has m = j - N/2
    double m(std::size_t j) const { return static_cast<double>(j) - n_sites / 2.0; }
    std::size_t size() const noexcept { return states.size(); }
};

ScarTower scar_tower(int n_sites);

/// ||H|m> - omega m |m>|| for every tower state, in tower order.
std::vector<double> tower_residuals(const ComplexSparseOperator& H, const ScarTower& tower, double omega);
/// Largest of tower_residuals.
double tower_residual(const ComplexSparseOperator& H, const ScarTower& tower, double omega);

/// |up...up> (up = true) or |down...down>.
Eigen::VectorXcd polarized_state(int n_sites, bool up);

struct ToyOptions {
    bool initial_up = true;        ///< false starts from |down...down>
    double t_max = 10.0;           ///< fidelity series in units of 2 pi / omega-scale time
    double dt = 0.01;
    int revivals = 100;            ///< integer times checked by direct propagation
    int dense_max_sites = 12;      ///< larger systems use the Krylov route
    double support_threshold = 1e-10;
};

/// Overlap fan, echo and eigenstate entanglement. Time evolution is
/// exp(-2 pi i H t) in this module.
struct ToyDiagnostics {
    ToySpec spec;
    std::string method;               ///< "dense" or "krylov"
    bool initial_up = true;
    std::vector<double> energies;     ///< dense: all levels; krylov: the invariant subspace
    std::vector<double> overlaps;     ///< |<psi0|E>|^2 aligned with energies
    std::vector<double> entropies;    ///< half-chain entropy of each listed eigenstate
    std::vector<bool> tower_member;   ///< overlap above the support threshold
    std::size_t support_count = 0;
    double support_weight = 0.0;
    double max_overlap = 0.0;
    double max_eigen_residual = 0.0;  ///< over the listed support eigenvectors
    std::vector<double> t, g;
    std::vector<double> revival_deviation;  ///< |1 - g(m)| for m = 1..revivals
    double max_revival_deviation = 0.0;
    std::optional<LevelStats> bulk_r;       ///< dense route only
    std::optional<double> bulk_entropy_mean;
    double random_entropy = 0.0;            ///< random normalized vector, same cut
};

ToyDiagnostics toy_diagnostics(const ToySpec& spec, const ToyOptions& opts = {});

/// C(N, k) / 2^N.
double binomial_weight(int n, int k);

nlohmann::json to_json(const ToySpec& s);
nlohmann::json to_json(const ToyDiagnostics& d);
/// Columns: E, overlap, S, tower; the header names units.
void write_toy_csv(std::ostream& os, const ToyDiagnostics& d);
/// Columns: t, g; the header names units.
void write_toy_echo_csv(std::ostream& os, const ToyDiagnostics& d);

}  // namespace pxp
