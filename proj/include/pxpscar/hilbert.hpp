#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace pxp {

/// Spin configuration; bit i set means site i (0-based) is up.
using Config = std::uint64_t;

enum class Boundary { Periodic, Open };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// True if no two adjacent sites are both up. For periodic boundary sites
/// n-1 and 0 count as adjacent.
bool is_blockade_valid(Config c, int n_sites, Boundary boundary);

/// Blockade-constrained Hilbert space, states sorted by integer value.
class ConstrainedBasis {
public:
    ConstrainedBasis(int n_sites, Boundary boundary);

    int n_sites() const noexcept { return n_sites_; }
    Boundary boundary() const noexcept { return boundary_; }
    std::size_t dim() const noexcept { return states_.size(); }

    std::span<const Config> states() const noexcept { return states_; }
    Config state(std::size_t i) const { return states_[i]; }

    std::optional<std::size_t> find(Config c) const noexcept;
    /// Throws InvalidArgument if c is not a member.
    std::size_t index_of(Config c) const;
    bool contains(Config c) const noexcept { return find(c).has_value(); }

private:
    int n_sites_;
    Boundary boundary_;
    std::vector<Config> states_;
};

ConstrainedBasis enumerate_basis(int n_sites, Boundary boundary);

/// Up on even 0-based sites, i.e. odd sites in 1-based counting.
Config neel_config(int n_sites);
/// The translated partner, up on odd 0-based sites.
Config neel_prime_config(int n_sites);

struct NeelIndices {
    std::size_t z2;
    std::size_t z2_prime;
};

NeelIndices neel_state(const ConstrainedBasis& basis);

Eigen::VectorXd basis_vector(const ConstrainedBasis& basis, std::size_t index);

// ---------------------------------------------------------------------------
// Symmetry reduction

Config translate(Config c, int n_sites, int shift);
/// Site-centered reflection i -> (n - i) mod n.
Config reflect(Config c, int n_sites);

/// translation_step is 1 (one-site translation, n momenta) or 2 (two-site
/// translation, n/2 momenta, keeps the Neel state symmetry-pure). inversion is
/// +1/-1, or 0 when the sector is not resolved by reflection. Reflection can
/// only be resolved at real momenta (k = 0 or k = n_momenta/2).
struct SectorLabel {
    int translation_step = 2;
    int momentum = 0;
    int inversion = 0;

    std::string to_string() const;
    static SectorLabel parse(const std::string& text, int default_step = 2);
    bool operator==(const SectorLabel&) const = default;
};

class SymmetrySector {
public:
    struct Canonical {
        Config representative;
        /// <representative| P |c>, with P the sector projector.
        std::complex<double> amplitude;
    };

    SymmetrySector(int n_sites, SectorLabel label);

    const SectorLabel& label() const noexcept { return label_; }
    int n_sites() const noexcept { return n_sites_; }
    int group_order() const noexcept { return group_order_; }
    std::size_t dim() const noexcept { return reps_.size(); }
    bool empty() const noexcept { return reps_.empty(); }
    bool is_real() const noexcept;

    std::span<const Config> representatives() const noexcept { return reps_; }
    /// ||P|r>|| for each representative.
    std::span<const double> norms() const noexcept { return norms_; }

    Canonical canonicalize(Config c) const;
    std::optional<std::size_t> representative_index(Config rep) const noexcept;

    Eigen::VectorXcd project(const ConstrainedBasis& basis, const Eigen::VectorXcd& full) const;
    Eigen::VectorXcd lift(const ConstrainedBasis& basis, const Eigen::VectorXcd& reduced) const;
    /// Sector coordinates of the single configuration |c>.
    Eigen::VectorXcd project_config(Config c) const;

private:
    friend SymmetrySector build_sector(const ConstrainedBasis&, SectorLabel);

    std::complex<double> character(int translation, int reflected) const;

    int n_sites_;
    SectorLabel label_;
    int n_translations_;
    int group_order_;
    std::vector<Config> reps_;
    std::vector<double> norms_;
};

SymmetrySector build_sector(const ConstrainedBasis& basis, SectorLabel label);

/// Every label that partitions the space for the given translation step.
std::vector<SectorLabel> all_sector_labels(int n_sites, int translation_step);

/// Permute amplitudes of a full-basis vector by a lattice translation.
Eigen::VectorXd apply_translation(const ConstrainedBasis& basis, const Eigen::VectorXd& psi, int shift);

nlohmann::json basis_summary(const ConstrainedBasis& basis, int translation_step = 0);

}  // namespace pxp
