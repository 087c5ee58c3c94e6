#include "pxpscar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>

#include "pxpscar/errors.hpp"
#include "pxpscar/linalg.hpp"

namespace pxp {

Eigen::VectorXcd SpectrumRecord::vector(std::size_t i) const {
    const auto c = static_cast<Eigen::Index>(i);
    if (real_vectors.size() > 0) return real_vectors.col(c).cast<std::complex<double>>();
    require(complex_vectors.size() > 0, "eigenvectors were not computed");
    return complex_vectors.col(c);
}

namespace {

Eigen::VectorXcd reference_state(const SymmetrySector& sector) {
    const int n = sector.n_sites();
    if (sector.label().translation_step == 2) return sector.project_config(neel_config(n));
    return (sector.project_config(neel_config(n)) + sector.project_config(neel_prime_config(n))) / std::sqrt(2.0);
}

// Within each degenerate cluster, rotate the eigenvectors so the whole weight
// of psi sits on the first one. Returns |<psi|v_i>|^2.
template <class Matrix>
Eigen::VectorXd concentrate_overlaps(const Eigen::VectorXd& energies, Matrix& vectors, const Eigen::VectorXcd& psi,
                                     double rel_tol) {
    using Scalar = typename Matrix::Scalar;
    const Eigen::Index n = energies.size();
    const double scale = std::max(1.0, energies.cwiseAbs().maxCoeff());
    Eigen::VectorXd w(n);
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && energies(end) - energies(end - 1) <= rel_tol * scale) ++end;
        const Eigen::Index d = end - start;
        if (d == 1) {
            w(start) = std::norm(vectors.col(start).template cast<std::complex<double>>().dot(psi));
        } else {
            auto block = vectors.middleCols(start, d);
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(d);
            if constexpr (std::is_same_v<Scalar, double>) {
                c = (block.transpose() * psi.real()).eval();
            } else {
                c = block.adjoint() * psi;
            }
            const double norm = c.norm();
            if (norm > 0.0) {
                // A unitary whose first column is parallel to c.
                using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
                const Dense column = c;
                Eigen::HouseholderQR<Dense> qr(column);
                const Dense q = qr.householderQ();
                block = (block * q).eval();
            }
            w.segment(start, d).setZero();
            w(start) = norm * norm;
        }
        start = end;
    }
    return w;
}

}  // namespace

SpectrumRecord diagonalize_sector(const SymmetrySector& sector, const CouplingSet& couplings,
                                  const SpectrumOptions& opts) {
    if (sector.dim() > opts.dense_cap)
        fail(ErrorKind::TooLarge, "sector " + sector.label().to_string() + " has dimension " +
                                      std::to_string(sector.dim()) + " above the dense cap " +
                                      std::to_string(opts.dense_cap) + "; reduce N");
    require(!sector.empty(), "sector " + sector.label().to_string() + " is empty");
    SpectrumRecord r;
    r.n_sites = sector.n_sites();
    r.label = sector.label();
    const auto H = build_sector_hamiltonian(sector, couplings);
    const Eigen::VectorXcd psi = reference_state(sector);
    r.reference_weight = psi.squaredNorm();
    if (sector.is_real()) {
        auto e = eigh(real_part(H).dense(), opts.vectors);
        r.energies = std::move(e.values);
        if (opts.vectors) {
            r.real_vectors = std::move(e.vectors);
            r.overlaps = concentrate_overlaps(r.energies, r.real_vectors, psi, opts.degeneracy_tol);
        }
    } else {
        auto e = eigh(H.dense(), opts.vectors);
        r.energies = std::move(e.values);
        if (opts.vectors) {
            r.complex_vectors = std::move(e.vectors);
            r.overlaps = concentrate_overlaps(r.energies, r.complex_vectors, psi, opts.degeneracy_tol);
        }
    }
    return r;
}

SpectrumRecord diagonalize_sector(const ConstrainedBasis& basis, const SectorLabel& label,
                                  const CouplingSet& couplings, const SpectrumOptions& opts) {
    return diagonalize_sector(build_sector(basis, label), couplings, opts);
}

std::vector<double> all_sector_energies(const ConstrainedBasis& basis, const CouplingSet& couplings,
                                        int translation_step, const SpectrumOptions& opts) {
    SpectrumOptions values_only = opts;
    values_only.vectors = false;
    std::vector<double> all;
    for (const auto& label : all_sector_labels(basis.n_sites(), translation_step)) {
        const auto sector = build_sector(basis, label);
        if (sector.empty()) continue;
        const auto r = diagonalize_sector(sector, couplings, values_only);
        all.insert(all.end(), r.energies.data(), r.energies.data() + r.energies.size());
    }
    std::sort(all.begin(), all.end());
    return all;
}

// ---------------------------------------------------------------------------

SpecialBand special_band(const SpectrumRecord& record, int n_sites, double spacing) {
    require(spacing > 0.0, "band spacing must be positive");
    require(record.overlaps.size() == record.energies.size(), "special band needs overlaps");
    const double half = 0.25 * spacing;
    const int centre_m = n_sites / 2;
    std::vector<BandWindow> windows(n_sites + 1);

    auto scan = [&](int m, double centre) {
        BandWindow w;
        w.m = m;
        w.centre = centre;
        for (std::size_t i = 0; i < record.size(); ++i) {
            const double e = record.energies(static_cast<Eigen::Index>(i));
            if (std::abs(e - centre) > half) continue;
            const double o = record.overlaps(static_cast<Eigen::Index>(i));
            if (!w.member || o > w.overlap) {
                w.next_best = w.member ? w.overlap : 0.0;
                w.member = i;
                w.overlap = o;
            } else {
                w.next_best = std::max(w.next_best, o);
            }
        }
        return w;
    };
    auto energy_of = [&](const BandWindow& w) {
        return w.member ? record.energies(static_cast<Eigen::Index>(*w.member)) : w.centre;
    };
    windows[centre_m] = scan(centre_m, 0.0);
    for (int dir : {+1, -1}) {
        double step = spacing;
        for (int m = centre_m + dir; m >= 0 && m <= n_sites; m += dir) {
            const auto& prev = windows[m - dir];
            windows[m] = scan(m, energy_of(prev) + dir * step);
            // Follow the measured ladder, which narrows towards the band edges.
            if (windows[m].member && prev.member) step = std::abs(energy_of(windows[m]) - energy_of(prev));
        }
    }

    SpecialBand band;
    band.windows = windows;
    band.complete = true;
    for (const auto& w : windows) {
        if (!w.member) {
            band.complete = false;
            continue;
        }
        band.members.push_back(*w.member);
        band.captured_weight += w.overlap;
    }
    double min_member = 1.0, max_other = 0.0;
    std::vector<bool> is_member(record.size(), false);
    for (auto i : band.members) {
        is_member[i] = true;
        min_member = std::min(min_member, record.overlaps(static_cast<Eigen::Index>(i)));
    }
    for (std::size_t i = 0; i < record.size(); ++i)
        if (!is_member[i]) max_other = std::max(max_other, record.overlaps(static_cast<Eigen::Index>(i)));
    band.separation = max_other > 0.0 ? min_member / max_other : std::numeric_limits<double>::infinity();
    return band;
}

std::vector<double> band_spacings(const SpectrumRecord& record, const SpecialBand& band) {
    std::vector<double> out;
    for (std::size_t j = 1; j < band.members.size(); ++j)
        out.push_back(record.energies(static_cast<Eigen::Index>(band.members[j])) -
                      record.energies(static_cast<Eigen::Index>(band.members[j - 1])));
    return out;
}

// ---------------------------------------------------------------------------

LevelStats r_statistic(std::vector<double> energies, const LevelStatsOptions& opts) {
    require(opts.discard_fraction >= 0.0 && opts.discard_fraction < 0.5, "discard fraction must lie in [0, 0.5)");
    require(opts.unfold_degree >= 1, "unfolding degree must be at least 1");
    std::sort(energies.begin(), energies.end());
    const std::size_t n = energies.size();
    const auto cut = static_cast<std::size_t>(std::floor(opts.discard_fraction * static_cast<double>(n)));
    const std::size_t kept = n > 2 * cut ? n - 2 * cut : 0;
    if (kept < opts.min_levels || kept < 3)
        fail(ErrorKind::InsufficientData, "level statistics need at least " + std::to_string(opts.min_levels) +
                                              " levels after discarding edges, got " + std::to_string(kept));
    const std::vector<double> e(energies.begin() + static_cast<std::ptrdiff_t>(cut),
                                energies.begin() + static_cast<std::ptrdiff_t>(cut + kept));

    LevelStats s;
    s.levels_used = kept;
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 < kept; ++i) {
        const double a = e[i + 1] - e[i], b = e[i + 2] - e[i + 1];
        const double hi = std::max(a, b);
        if (hi <= 0.0) {
            ++s.skipped_ratios;
            continue;
        }
        s.r.push_back(std::min(a, b) / hi);
        sum += s.r.back();
    }
    if (s.r.empty()) fail(ErrorKind::InsufficientData, "all retained levels are degenerate");
    s.mean_r = sum / static_cast<double>(s.r.size());

    // Unfold: polynomial fit to the staircase on a standardized energy axis.
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(kept);
    double var = 0.0;
    for (double x : e) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(kept));
    require(sd > 0.0, "retained levels are all equal");
    const int deg = opts.unfold_degree;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(kept), deg + 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(kept));
    for (std::size_t i = 0; i < kept; ++i) {
        const double x = (e[i] - mean) / sd;
        double p = 1.0;
        for (int d = 0; d <= deg; ++d, p *= x) A(static_cast<Eigen::Index>(i), d) = p;
        y(static_cast<Eigen::Index>(i)) = static_cast<double>(i);
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd staircase = A * coef;
    for (std::size_t i = 0; i + 1 < kept; ++i)
        s.spacings.push_back(staircase(static_cast<Eigen::Index>(i + 1)) - staircase(static_cast<Eigen::Index>(i)));
    s.mean_spacing =
        std::accumulate(s.spacings.begin(), s.spacings.end(), 0.0) / static_cast<double>(s.spacings.size());

    s.bin_width = opts.histogram_max / opts.histogram_bins;
    s.histogram.assign(static_cast<std::size_t>(opts.histogram_bins), 0.0);
    for (double v : s.spacings) {
        if (v < 0.0 || v >= opts.histogram_max) continue;
        s.histogram[static_cast<std::size_t>(v / s.bin_width)] += 1.0;
    }
    for (double& h : s.histogram) h /= static_cast<double>(s.spacings.size()) * s.bin_width;
    return s;
}

std::vector<double> positive_branch(const Eigen::VectorXd& energies, double zero_tol) {
    std::vector<double> out;
    for (double e : energies)
        if (e > zero_tol) out.push_back(e);
    return out;
}

LevelStats pool(const std::vector<LevelStats>& parts) {
    require(!parts.empty(), "nothing to pool");
    LevelStats s;
    double sum = 0.0;
    for (const auto& p : parts) {
        s.r.insert(s.r.end(), p.r.begin(), p.r.end());
        s.spacings.insert(s.spacings.end(), p.spacings.begin(), p.spacings.end());
        s.levels_used += p.levels_used;
        s.skipped_ratios += p.skipped_ratios;
    }
    for (double r : s.r) sum += r;
    s.mean_r = sum / static_cast<double>(s.r.size());
    s.mean_spacing =
        std::accumulate(s.spacings.begin(), s.spacings.end(), 0.0) / static_cast<double>(s.spacings.size());
    s.bin_width = parts.front().bin_width;
    s.histogram.assign(parts.front().histogram.size(), 0.0);
    for (const auto& p : parts)
        for (std::size_t b = 0; b < s.histogram.size(); ++b)
            s.histogram[b] += p.histogram[b] * static_cast<double>(p.spacings.size());
    for (double& h : s.histogram) h /= static_cast<double>(s.spacings.size());
    return s;
}

// ---------------------------------------------------------------------------

std::vector<double> eigenstate_entropies(SpectrumRecord& record, const ConstrainedBasis& basis) {
    require(record.has_vectors(), "eigenstate entropies need eigenvectors");
    const auto sector = build_sector(basis, record.label);
    const HalfChainCut cut(basis);
    std::vector<double> out(record.size());
    const bool real = record.real_vectors.size() > 0;
    for (std::size_t i = 0; i < record.size(); ++i) {
        const Eigen::VectorXcd full = sector.lift(basis, record.vector(i));
        out[i] = real ? cut(Eigen::VectorXd(full.real())).entropy : cut(full).entropy;
    }
    record.entropies = out;
    return out;
}

std::vector<SpecialStateEntropy> central_special_states(const SpectrumRecord& record, const SpecialBand& band) {
    require(record.entropies.size() == record.size(), "entropies not computed");
    std::vector<SpecialStateEntropy> positive;
    for (auto i : band.members) {
        const double e = record.energies(static_cast<Eigen::Index>(i));
        if (e > 1e-8) positive.push_back({e, record.entropies[i]});
    }
    std::sort(positive.begin(), positive.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
    if (positive.size() > 2) positive.resize(2);
    return positive;
}

Support lemma_support(const std::vector<double>& overlaps, double threshold, int n_sites) {
    Support s;
    for (double o : overlaps) {
        if (o > threshold) {
            ++s.count;
            s.captured += o;
        }
        s.max_overlap = std::max(s.max_overlap, o);
    }
    s.max_times_n = s.max_overlap * n_sites;
    return s;
}

double linear_fit_residual(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "fit needs matching samples");
    Eigen::MatrixXd A(static_cast<Eigen::Index>(x.size()), 2);
    Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        A.row(static_cast<Eigen::Index>(i)) << 1.0, x[i];
        b(static_cast<Eigen::Index>(i)) = y[i];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    return (A * c - b).norm();
}

// ---------------------------------------------------------------------------

EigenPairs lowest_eigenpairs(const SparseOperator& H, int k, double tol, int max_dim, int max_restarts) {
    const Eigen::Index n = H.rows();
    require(k >= 1 && k <= n, "requested more eigenpairs than the dimension");
    EigenPairs out;
    if (n <= std::max<Eigen::Index>(4 * k, 64)) {
        auto e = eigh(H.dense(), true);
        out.values = e.values.head(k);
        out.vectors = e.vectors.leftCols(k);
        return out;
    }
    const int m = static_cast<int>(std::min<Eigen::Index>(max_dim, n));
    require(m > k, "Lanczos dimension must exceed the number of eigenpairs");

    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd x(n);
    for (auto& v : x) v = gauss(rng);
    x.normalize();

    Eigen::MatrixXd V(n, m);
    for (int restart = 0; restart <= max_restarts; ++restart) {
        std::vector<double> alpha, beta;
        V.col(0) = x;
        Eigen::VectorXd w;
        for (int j = 0; j < m; ++j) {
            w = H * Eigen::VectorXd(V.col(j));
            ++out.iterations;
            alpha.push_back(V.col(j).dot(w));
            for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
            const double b = w.norm();
            const int size = j + 1;
            const bool last = size == m || b < 1e-13;
            if (b < 1e-13 && size < k) fail(ErrorKind::NumericFailure, "Lanczos start vector spans too small a space");
            if (size >= k && (last || size % 10 == 0)) {
                Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), size);
                Eigen::VectorXd off = Eigen::Map<Eigen::VectorXd>(beta.data(), size - 1);
                auto t = eigh_tridiagonal(d, off, true);
                bool converged = true;
                for (int i = 0; i < k; ++i)
                    if (b * std::abs(t.vectors(size - 1, i)) > tol * std::max(1.0, std::abs(t.values(i))))
                        converged = false;
                if (converged || last) {
                    out.values = t.values.head(k);
                    out.vectors = V.leftCols(size) * t.vectors.leftCols(k);
                    if (converged || b < 1e-13) return out;
                    // Restart from the combination of the wanted Ritz vectors.
                    x = out.vectors.rowwise().sum().normalized();
                    break;
                }
            }
            beta.push_back(b);
            V.col(j + 1) = w / b;
        }
    }
    fail(ErrorKind::NumericFailure, "Lanczos did not converge to the requested eigenpairs");
}

LowLying low_lying_proxy(const ConstrainedBasis& open_basis, const CouplingSet& couplings) {
    require(open_basis.boundary() == Boundary::Open, "low-lying proxy uses the open chain");
    const auto H = build_hamiltonian(open_basis, couplings);
    const auto pairs = lowest_eigenpairs(H, 2);
    LowLying l;
    l.e0 = pairs.values(0);
    l.e1 = pairs.values(1);
    l.gap = l.e1 - l.e0;
    const HalfChainCut cut(open_basis);
    const auto ent = cut(Eigen::VectorXd(pairs.vectors.col(0)));
    for (std::size_t i = 0; i < ent.spectrum.size(); ++i) {
        l.schmidt.push_back(std::sqrt(ent.spectrum[i]));
        if (i >= 2) l.tail_weight += ent.spectrum[i];
    }
    return l;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const LevelStats& s, const LevelStatsOptions& opts) {
    return {{"mean_r", s.mean_r},
            {"levels_used", s.levels_used},
            {"ratios", s.r.size()},
            {"skipped_ratios", s.skipped_ratios},
            {"mean_unfolded_spacing", s.mean_spacing},
            {"discard_fraction", opts.discard_fraction},
            {"unfold_degree", opts.unfold_degree},
            {"histogram_bin_width", s.bin_width},
            {"histogram", s.histogram}};
}

nlohmann::json to_json(const SpecialBand& b) {
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : b.windows) {
        nlohmann::json j = {{"m", w.m}, {"centre", w.centre}, {"overlap", w.overlap}, {"next_best", w.next_best}};
        j["member"] = w.member ? nlohmann::json(*w.member) : nlohmann::json(nullptr);
        windows.push_back(j);
    }
    return {{"complete", b.complete},
            {"members", b.members},
            {"captured_weight", b.captured_weight},
            {"separation", std::isfinite(b.separation) ? nlohmann::json(b.separation) : nlohmann::json(nullptr)},
            {"windows", windows}};
}

nlohmann::json to_json(const LowLying& l) {
    return {{"e0", l.e0}, {"e1", l.e1}, {"gap", l.gap}, {"schmidt", l.schmidt}, {"tail_weight", l.tail_weight}};
}

void write_spectrum_csv(std::ostream& os, const SpectrumRecord& r) {
    os << "E (flip amplitude),overlap,S (nats)\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.size(); ++i) {
        os << r.energies(static_cast<Eigen::Index>(i)) << ',';
        if (r.overlaps.size() > 0) os << r.overlaps(static_cast<Eigen::Index>(i));
        os << ',';
        if (r.entropies.size() == r.size()) os << r.entropies[i];
        os << '\n';
    }
}

void write_histogram_csv(std::ostream& os, const LevelStats& s) {
    os << "s_lo (mean spacing),s_hi (mean spacing),density (1/mean spacing)\n" << std::setprecision(17);
    for (std::size_t b = 0; b < s.histogram.size(); ++b)
        os << b * s.bin_width << ',' << (b + 1) * s.bin_width << ',' << s.histogram[b] << '\n';
}

}  // namespace pxp
