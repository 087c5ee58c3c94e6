#include "pxpscar/hilbert.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>

#include "pxpscar/errors.hpp"

namespace pxp {

namespace {

constexpr int kMaxSites = 62;

Config low_mask(int n) { return n >= 64 ? ~Config{0} : ((Config{1} << n) - 1); }

// Depth-first, high bit first, 0 before 1: produces ascending order.
void enumerate_open(int pos, Config prefix, bool prev_up, std::vector<Config>& out) {
    if (pos < 0) {
        out.push_back(prefix);
        return;
    }
    enumerate_open(pos - 1, prefix, false, out);
    if (!prev_up) enumerate_open(pos - 1, prefix | (Config{1} << pos), true, out);
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "open"; }

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic" || s == "pbc") return Boundary::Periodic;
    if (s == "open" || s == "obc") return Boundary::Open;
    fail(ErrorKind::InvalidArgument, "unknown boundary condition '" + s + "'");
}

bool is_blockade_valid(Config c, int n_sites, Boundary boundary) {
    if ((c & ~low_mask(n_sites)) != 0) return false;
    if ((c & (c >> 1)) != 0) return false;
    if (boundary == Boundary::Periodic && n_sites > 1) {
        const bool first = c & 1;
        const bool last = (c >> (n_sites - 1)) & 1;
        if (first && last) return false;
    }
    return true;
}

ConstrainedBasis::ConstrainedBasis(int n_sites, Boundary boundary)
    : n_sites_(n_sites), boundary_(boundary) {
    if (n_sites < 2 || n_sites % 2 != 0) {
        fail(ErrorKind::InvalidArgument, "N must be even and >= 2 (got " + std::to_string(n_sites) + ")");
    }
    if (n_sites > kMaxSites) {
        fail(ErrorKind::TooLarge, "N > " + std::to_string(kMaxSites) + " does not fit a 64-bit configuration");
    }
    std::vector<Config> open;
    enumerate_open(n_sites - 1, 0, false, open);
    if (boundary == Boundary::Open) {
        states_ = std::move(open);
    } else {
        const Config wrap = Config{1} | (Config{1} << (n_sites - 1));
        states_.reserve(open.size());
        for (Config c : open) {
            if ((c & wrap) != wrap) states_.push_back(c);
        }
        states_.shrink_to_fit();
    }
}

std::optional<std::size_t> ConstrainedBasis::find(Config c) const noexcept {
    auto it = std::lower_bound(states_.begin(), states_.end(), c);
    if (it == states_.end() || *it != c) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
}

std::size_t ConstrainedBasis::index_of(Config c) const {
    auto idx = find(c);
    if (!idx) fail(ErrorKind::InvalidArgument, "configuration is not in the constrained basis");
    return *idx;
}

ConstrainedBasis enumerate_basis(int n_sites, Boundary boundary) { return ConstrainedBasis(n_sites, boundary); }

Config neel_config(int n_sites) {
    Config c = 0;
    for (int i = 0; i < n_sites; i += 2) c |= Config{1} << i;
    return c;
}

Config neel_prime_config(int n_sites) {
    Config c = 0;
    for (int i = 1; i < n_sites; i += 2) c |= Config{1} << i;
    return c;
}

NeelIndices neel_state(const ConstrainedBasis& basis) {
    const int n = basis.n_sites();
    return {basis.index_of(neel_config(n)), basis.index_of(neel_prime_config(n))};
}

Eigen::VectorXd basis_vector(const ConstrainedBasis& basis, std::size_t index) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dim()));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return v;
}

// ---------------------------------------------------------------------------

Config translate(Config c, int n_sites, int shift) {
    shift %= n_sites;
    if (shift < 0) shift += n_sites;
    if (shift == 0) return c;
    const Config mask = low_mask(n_sites);
    return ((c << shift) | (c >> (n_sites - shift))) & mask;
}

Config reflect(Config c, int n_sites) {
    Config r = 0;
    for (int i = 0; i < n_sites; ++i) {
        if ((c >> i) & 1) r |= Config{1} << ((n_sites - i) % n_sites);
    }
    return r;
}

std::string SectorLabel::to_string() const {
    std::string s = "t" + std::to_string(translation_step) + ":k" + std::to_string(momentum);
    if (inversion > 0) s += ",I+";
    if (inversion < 0) s += ",I-";
    return s;
}

SectorLabel SectorLabel::parse(const std::string& text, int default_step) {
    SectorLabel label;
    label.translation_step = default_step;
    std::string rest = text;
    if (rest.size() > 3 && rest[0] == 't' && rest[2] == ':') {
        label.translation_step = rest[1] - '0';
        rest = rest.substr(3);
    }
    if (rest.empty() || rest[0] != 'k') fail(ErrorKind::InvalidArgument, "bad sector label '" + text + "'");
    auto comma = rest.find(',');
    try {
        label.momentum = std::stoi(rest.substr(1, comma == std::string::npos ? std::string::npos : comma - 1));
    } catch (const std::exception&) {
        fail(ErrorKind::InvalidArgument, "bad momentum in sector label '" + text + "'");
    }
    if (comma != std::string::npos) {
        const std::string inv = rest.substr(comma + 1);
        if (inv == "I+") label.inversion = 1;
        else if (inv == "I-") label.inversion = -1;
        else fail(ErrorKind::InvalidArgument, "bad inversion in sector label '" + text + "'");
    }
    if (label.translation_step != 1 && label.translation_step != 2) {
        fail(ErrorKind::InvalidArgument, "translation step must be 1 or 2");
    }
    return label;
}

SymmetrySector::SymmetrySector(int n_sites, SectorLabel label) : n_sites_(n_sites), label_(label) {
    require(n_sites >= 2 && n_sites % 2 == 0, "N must be even");
    require(label.translation_step == 1 || label.translation_step == 2, "translation step must be 1 or 2");
    n_translations_ = n_sites / label.translation_step;
    require(label.momentum >= 0 && label.momentum < n_translations_,
            "momentum label out of range 0.." + std::to_string(n_translations_ - 1));
    require(label.inversion >= -1 && label.inversion <= 1, "inversion must be +1, -1 or 0");
    if (label.inversion != 0) {
        require(label.momentum == 0 || 2 * label.momentum == n_translations_,
                "inversion can only be resolved at momentum 0 or pi");
    }
    group_order_ = n_translations_ * (label.inversion != 0 ? 2 : 1);
}

bool SymmetrySector::is_real() const noexcept {
    return label_.momentum == 0 || 2 * label_.momentum == n_translations_;
}

std::complex<double> SymmetrySector::character(int translation, int reflected) const {
    const double angle = 2.0 * std::numbers::pi * label_.momentum * translation / n_translations_;
    std::complex<double> chi = std::polar(1.0, angle);
    if (is_real()) chi = {std::round(chi.real()), 0.0};
    if (reflected) chi *= static_cast<double>(label_.inversion);
    return chi;
}

SymmetrySector::Canonical SymmetrySector::canonicalize(Config c) const {
    std::array<Config, 2 * kMaxSites> images{};
    const int reflections = label_.inversion != 0 ? 2 : 1;
    Config best = ~Config{0};
    int count = 0;
    for (int p = 0; p < reflections; ++p) {
        Config base = p ? reflect(c, n_sites_) : c;
        for (int j = 0; j < n_translations_; ++j) {
            Config img = translate(base, n_sites_, j * label_.translation_step);
            images[count++] = img;
            best = std::min(best, img);
        }
    }
    std::complex<double> amp = 0.0;
    count = 0;
    for (int p = 0; p < reflections; ++p) {
        for (int j = 0; j < n_translations_; ++j) {
            if (images[count++] == best) amp += std::conj(character(j, p));
        }
    }
    return {best, amp / static_cast<double>(group_order_)};
}

std::optional<std::size_t> SymmetrySector::representative_index(Config rep) const noexcept {
    auto it = std::lower_bound(reps_.begin(), reps_.end(), rep);
    if (it == reps_.end() || *it != rep) return std::nullopt;
    return static_cast<std::size_t>(it - reps_.begin());
}

Eigen::VectorXcd SymmetrySector::project(const ConstrainedBasis& basis, const Eigen::VectorXcd& full) const {
    require(static_cast<std::size_t>(full.size()) == basis.dim(), "vector does not match basis dimension");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim()));
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const auto amp = full(static_cast<Eigen::Index>(i));
        if (amp == 0.0) continue;
        auto can = canonicalize(basis.state(i));
        auto a = representative_index(can.representative);
        if (!a) continue;
        out(static_cast<Eigen::Index>(*a)) += can.amplitude * amp / norms_[*a];
    }
    return out;
}

Eigen::VectorXcd SymmetrySector::lift(const ConstrainedBasis& basis, const Eigen::VectorXcd& reduced) const {
    require(static_cast<std::size_t>(reduced.size()) == dim(), "vector does not match sector dimension");
    Eigen::VectorXcd out(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        auto can = canonicalize(basis.state(i));
        auto a = representative_index(can.representative);
        out(static_cast<Eigen::Index>(i)) =
            a ? reduced(static_cast<Eigen::Index>(*a)) * std::conj(can.amplitude) / norms_[*a]
              : std::complex<double>(0.0);
    }
    return out;
}

Eigen::VectorXcd SymmetrySector::project_config(Config c) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim()));
    const auto can = canonicalize(c);
    if (auto a = representative_index(can.representative))
        out(static_cast<Eigen::Index>(*a)) = can.amplitude / norms_[*a];
    return out;
}

SymmetrySector build_sector(const ConstrainedBasis& basis, SectorLabel label) {
    if (basis.boundary() != Boundary::Periodic) {
        fail(ErrorKind::Unsupported, "symmetry sectors require periodic boundary conditions");
    }
    SymmetrySector sector(basis.n_sites(), label);
    for (Config c : basis.states()) {
        auto can = sector.canonicalize(c);
        if (can.representative != c) continue;
        const double norm2 = can.amplitude.real();
        if (norm2 < 1e-12) continue;
        sector.reps_.push_back(c);
        sector.norms_.push_back(std::sqrt(norm2));
    }
    return sector;
}

std::vector<SectorLabel> all_sector_labels(int n_sites, int translation_step) {
    require(translation_step == 1 || translation_step == 2, "translation step must be 1 or 2");
    const int n_k = n_sites / translation_step;
    std::vector<SectorLabel> labels;
    for (int k = 0; k < n_k; ++k) {
        if (k == 0 || 2 * k == n_k) {
            labels.push_back({translation_step, k, 1});
            labels.push_back({translation_step, k, -1});
        } else {
            labels.push_back({translation_step, k, 0});
        }
    }
    return labels;
}

Eigen::VectorXd apply_translation(const ConstrainedBasis& basis, const Eigen::VectorXd& psi, int shift) {
    require(basis.boundary() == Boundary::Periodic, "translation requires periodic boundary");
    require(static_cast<std::size_t>(psi.size()) == basis.dim(), "vector does not match basis dimension");
    Eigen::VectorXd out(psi.size());
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const auto j = basis.index_of(translate(basis.state(i), basis.n_sites(), shift));
        out(static_cast<Eigen::Index>(j)) = psi(static_cast<Eigen::Index>(i));
    }
    return out;
}

nlohmann::json basis_summary(const ConstrainedBasis& basis, int translation_step) {
    nlohmann::json j;
    j["n_sites"] = basis.n_sites();
    j["boundary"] = to_string(basis.boundary());
    j["dim"] = basis.dim();
    if (translation_step > 0 && basis.boundary() == Boundary::Periodic) {
        nlohmann::json table = nlohmann::json::array();
        std::size_t total = 0;
        for (const auto& label : all_sector_labels(basis.n_sites(), translation_step)) {
            const auto sector = build_sector(basis, label);
            total += sector.dim();
            table.push_back({{"label", label.to_string()},
                             {"momentum", label.momentum},
                             {"inversion", label.inversion},
                             {"dim", sector.dim()}});
        }
        j["translation_step"] = translation_step;
        j["inversion_convention"] = "site-centered reflection i -> (N - i) mod N, 0-based";
        j["sectors"] = table;
        j["sector_dim_total"] = total;
    }
    return j;
}

}  // namespace pxp
