#include "pxpscar/operators.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace pxp {

namespace {

constexpr double kPhi = std::numbers::phi;

inline int z_at(Config c, int site) { return ((c >> site) & 1) ? 1 : -1; }

inline Config even_mask(int n) {
    Config m = 0;
    for (int i = 0; i < n; i += 2) m |= Config{1} << i;
    return m;
}

// Ansatz strength for distance d, without h0.
double ansatz_shape(int d) {
    const double x = std::pow(kPhi, d - 1) - std::pow(kPhi, -(d - 1));
    return 1.0 / (x * x);
}

}  // namespace

std::string to_string(CouplingProvenance p) {
    switch (p) {
        case CouplingProvenance::Ansatz: return "ansatz";
        case CouplingProvenance::Optimized: return "optimized";
        case CouplingProvenance::Manual: return "manual";
    }
    return "manual";
}

CouplingProvenance provenance_from_string(const std::string& s) {
    if (s == "ansatz") return CouplingProvenance::Ansatz;
    if (s == "optimized") return CouplingProvenance::Optimized;
    if (s == "manual") return CouplingProvenance::Manual;
    fail(ErrorKind::InvalidArgument, "unknown coupling provenance '" + s + "'");
}

double CouplingSet::h(int d) const noexcept {
    if (d < 2 || d > range()) return 0.0;
    return values[static_cast<std::size_t>(d - 2)];
}

CouplingSet CouplingSet::manual(std::vector<double> values) {
    CouplingSet c;
    c.values = std::move(values);
    c.provenance = CouplingProvenance::Manual;
    return c;
}

nlohmann::json to_json(const CouplingSet& c) {
    nlohmann::json j;
    j["range"] = c.range();
    j["provenance"] = to_string(c.provenance);
    nlohmann::json h = nlohmann::json::object();
    for (int d = 2; d <= c.range(); ++d) h[std::to_string(d)] = c.h(d);
    j["h"] = h;
    if (c.ansatz_h0) j["h0"] = *c.ansatz_h0;
    return j;
}

CouplingSet couplings_from_json(const nlohmann::json& j) {
    try {
        CouplingSet c;
        c.provenance = provenance_from_string(j.value("provenance", std::string("manual")));
        const int range = j.at("range").get<int>();
        require(range >= 1, "coupling range must be >= 1");
        c.values.assign(static_cast<std::size_t>(range - 1), 0.0);
        for (const auto& [key, value] : j.at("h").items()) {
            const int d = std::stoi(key);
            require(d >= 2 && d <= range, "coupling distance " + key + " outside 2..range");
            c.values[static_cast<std::size_t>(d - 2)] = value.get<double>();
        }
        for (double v : c.values) require(std::isfinite(v), "coupling values must be finite");
        if (j.contains("h0")) c.ansatz_h0 = j.at("h0").get<double>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, std::string("malformed coupling JSON: ") + e.what());
    }
}

double AlgebraConstants::level_spacing() const noexcept { return std::sqrt(2.0 * delta); }

CouplingSet ansatz_couplings(double h0, int range) {
    require(h0 > 0.0, "ansatz amplitude h0 must be positive");
    require(range >= 2, "ansatz range must be >= 2");
    CouplingSet c;
    c.provenance = CouplingProvenance::Ansatz;
    c.ansatz_h0 = h0;
    for (int d = 2; d <= range; ++d) c.values.push_back(h0 * ansatz_shape(d));
    return c;
}

double alternating_sum(const CouplingSet& c) {
    double s = 0.0;
    for (int n = 2; n <= c.range(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * c.h(n);
    return 2.0 * s;
}

namespace {

struct AnsatzSums {
    double h;         // 2 sum (-1)^n h_n
    double even;      // sum h_{2n}
    double even_sq;   // sum h_{2n}^2
};

AnsatzSums ansatz_sums(double h0) {
    AnsatzSums s{0.0, 0.0, 0.0};
    for (int d = 2;; ++d) {
        const double hd = h0 * ansatz_shape(d);
        s.h += 2.0 * (d % 2 == 0 ? hd : -hd);
        if (d % 2 == 0) {
            s.even += hd;
            s.even_sq += hd * hd;
        }
        if (hd < 1e-30) break;
    }
    return s;
}

}  // namespace

double constraint_residual(double h0) {
    const auto s = ansatz_sums(h0);
    return (1.0 - s.h) * (1.0 - s.h - 16.0 * s.even) - 16.0 * s.even_sq;
}

AlgebraConstants solve_constraint() {
    double lo = 0.01, hi = 0.10;
    double f_lo = constraint_residual(lo);
    const double f_hi = constraint_residual(hi);
    if (!(f_lo * f_hi < 0.0)) fail(ErrorKind::NumericFailure, "constraint root is not bracketed by [0.01, 0.10]");
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = constraint_residual(mid);
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if (hi - lo > 1e-12) fail(ErrorKind::NumericFailure, "constraint bisection did not converge");
    AlgebraConstants k{};
    k.h0 = 0.5 * (lo + hi);
    k.h = ansatz_sums(k.h0).h;
    k.delta = (1.0 - k.h) * (1.0 - k.h);
    k.tau = 2.0 * std::numbers::pi / std::sqrt(2.0 * k.delta);
    return k;
}

double optimal_h2_analytic() { return 0.5 - 1.0 / std::sqrt(5.0); }

double range4_residual_error(double h2) { return -32.0 * h2 * h2 * (1.0 - h2); }

bool flippable(Config c, int site, int n_sites, Boundary boundary) noexcept {
    int left = site - 1, right = site + 1;
    if (boundary == Boundary::Periodic) {
        left = (left + n_sites) % n_sites;
        right %= n_sites;
    }
    const bool left_up = left >= 0 && left < n_sites && ((c >> left) & 1);
    const bool right_up = right >= 0 && right < n_sites && ((c >> right) & 1);
    return !left_up && !right_up;
}

double flip_amplitude(Config c, int site, int n_sites, Boundary boundary, const CouplingSet& couplings) {
    double s = 0.0;
    for (int d = 2; d <= couplings.range(); ++d) {
        const double hd = couplings.h(d);
        if (hd == 0.0) continue;
        int zsum = 0;
        if (boundary == Boundary::Periodic) {
            zsum = z_at(c, ((site - d) % n_sites + n_sites) % n_sites) + z_at(c, (site + d) % n_sites);
        } else {
            if (site - d >= 0) zsum += z_at(c, site - d);
            if (site + d < n_sites) zsum += z_at(c, site + d);
        }
        s += hd * zsum;
    }
    return 1.0 - s;
}

void validate_couplings(const CouplingSet& couplings, int n_sites, Boundary boundary) {
    for (double v : couplings.values) require(std::isfinite(v), "coupling values must be finite");
    if (boundary == Boundary::Periodic && couplings.range() > n_sites / 2) {
        fail(ErrorKind::InvalidArgument, "deformation range " + std::to_string(couplings.range()) +
                                             " exceeds N/2 = " + std::to_string(n_sites / 2) +
                                             " on a periodic chain");
    }
}

namespace {

enum class Part { Full, DeformationOnly, Raising, Lowering };

SparseOperator assemble(const ConstrainedBasis& basis, const CouplingSet& couplings, Part part) {
    const int n = basis.n_sites();
    const Boundary bc = basis.boundary();
    using Entry = std::pair<SparseOperator::Index, double>;
    return assemble_rows<double>(basis.dim(), basis.dim(), [&](std::size_t row, std::vector<Entry>& out) {
        const Config c = basis.state(row);
        for (int i = 0; i < n; ++i) {
            if (!flippable(c, i, n, bc)) continue;
            const bool up = (c >> i) & 1;
            // Row config c is the image; the source differs at site i. H+ lowers
            // even sites and raises odd sites of the source.
            if (part == Part::Raising && ((i % 2 == 0) ? up : !up)) continue;
            if (part == Part::Lowering && ((i % 2 == 0) ? !up : up)) continue;
            const double amp = flip_amplitude(c, i, n, bc, couplings);
            const double value = part == Part::DeformationOnly ? amp - 1.0 : amp;
            const Config src = c ^ (Config{1} << i);
            out.emplace_back(static_cast<SparseOperator::Index>(basis.index_of(src)), value);
        }
    });
}

}  // namespace

SparseOperator build_pxp(const ConstrainedBasis& basis) { return assemble(basis, CouplingSet::none(), Part::Full); }

SparseOperator build_deformation(const ConstrainedBasis& basis, const CouplingSet& couplings) {
    validate_couplings(couplings, basis.n_sites(), basis.boundary());
    return assemble(basis, couplings, Part::DeformationOnly);
}

SparseOperator build_hamiltonian(const ConstrainedBasis& basis, const CouplingSet& couplings) {
    validate_couplings(couplings, basis.n_sites(), basis.boundary());
    return assemble(basis, couplings, Part::Full);
}

RaisingLowering split_pm(const ConstrainedBasis& basis, const CouplingSet& couplings) {
    require(basis.n_sites() % 2 == 0, "raising/lowering split requires even N");
    if (basis.boundary() != Boundary::Periodic) {
        fail(ErrorKind::Unsupported, "raising/lowering split is defined for periodic boundary only");
    }
    validate_couplings(couplings, basis.n_sites(), basis.boundary());
    return {assemble(basis, couplings, Part::Raising), assemble(basis, couplings, Part::Lowering)};
}

SparseOperator commutator_hz(const SparseOperator& plus, const SparseOperator& minus) {
    require(plus.rows() == minus.rows() && plus.cols() == minus.cols() && plus.rows() == plus.cols(),
            "commutator requires square conformable operators");
    SparseOperator::EigenType pm = plus.eigen() * minus.eigen();
    SparseOperator::EigenType mp = minus.eigen() * plus.eigen();
    SparseOperator::EigenType hz = (pm - mp).pruned();
    return SparseOperator::from_eigen(hz);
}

ComplexSparseOperator build_sector_hamiltonian(const SymmetrySector& sector, const CouplingSet& couplings) {
    const int n = sector.n_sites();
    validate_couplings(couplings, n, Boundary::Periodic);
    const auto reps = sector.representatives();
    const auto norms = sector.norms();
    using Entry = std::pair<ComplexSparseOperator::Index, std::complex<double>>;
    return assemble_rows<std::complex<double>>(sector.dim(), sector.dim(), [&](std::size_t a, std::vector<Entry>& out) {
        const Config ra = reps[a];
        for (int i = 0; i < n; ++i) {
            if (!flippable(ra, i, n, Boundary::Periodic)) continue;
            const auto can = sector.canonicalize(ra ^ (Config{1} << i));
            const auto b = sector.representative_index(can.representative);
            if (!b) continue;
            const double amp = flip_amplitude(ra, i, n, Boundary::Periodic, couplings);
            out.emplace_back(static_cast<ComplexSparseOperator::Index>(*b),
                             std::conj(can.amplitude) * amp / (norms[a] * norms[*b]));
        }
    });
}

SparseOperator real_part(const ComplexSparseOperator& op) {
    const auto v = op.values();
    std::vector<double> re(v.size());
    for (std::size_t p = 0; p < v.size(); ++p) {
        if (std::abs(v[p].imag()) > 1e-12)
            fail(ErrorKind::InternalInconsistency, "operator has non-negligible imaginary parts");
        re[p] = v[p].real();
    }
    const auto rp = op.row_ptr();
    const auto ci = op.col_index();
    return SparseOperator(op.rows(), op.cols(), {rp.begin(), rp.end()}, {ci.begin(), ci.end()}, std::move(re));
}

int fsa_grade(Config c, int n_sites) noexcept {
    const Config even = even_mask(n_sites);
    const Config odd = neel_prime_config(n_sites);
    return (n_sites / 2 - std::popcount(c & even)) + std::popcount(c & odd);
}

}  // namespace pxp
