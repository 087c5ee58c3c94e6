#include "pxpscar/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "pxpscar/errors.hpp"
#include "pxpscar/linalg.hpp"

namespace pxp {

MatVec as_matvec(const SparseOperator& H) {
    return [&H](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { H.apply(x, y); };
}

MatVec as_matvec(const ComplexSparseOperator& H) {
    return [&H](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { H.apply(x, y); };
}

// ---------------------------------------------------------------------------

KrylovSpace::KrylovSpace(const MatVec& H, const Eigen::VectorXcd& psi, int max_dim, double t_target, double tol,
                         double t_ref) {
    require(max_dim >= 2, "Krylov dimension must be >= 2");
    psi_norm_ = psi.norm();
    if (psi_norm_ == 0.0) {
        invariant_ = true;
        return;
    }
    std::vector<double> alpha, beta;
    basis_.push_back(psi / psi_norm_);
    Eigen::VectorXcd w;
    for (int j = 0; j < max_dim; ++j) {
        H(basis_[j], w);
        ++matvecs_;
        const double a = basis_[j].dot(w).real();
        alpha.push_back(a);
        w -= a * basis_[j];
        if (j > 0) w -= beta.back() * basis_[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : basis_) w -= v.dot(w) * v;
        const double b = w.norm();
        const double scale = std::abs(a) + (beta.empty() ? 0.0 : beta.back()) + 1.0;
        if (b <= 1e-13 * scale) {
            invariant_ = true;
            break;
        }
        next_beta_ = b;
        if (j == max_dim - 1) break;
        if (t_target != 0.0 && j >= 3) {
            diagonalize(alpha, beta);
            if (error_estimate(t_target) <= tol * std::abs(t_target / t_ref)) break;
        }
        beta.push_back(b);
        basis_.push_back(w / b);
    }
    if (invariant_) next_beta_ = 0.0;
    diagonalize(alpha, beta);
}

void KrylovSpace::diagonalize(const std::vector<double>& alpha, const std::vector<double>& beta) {
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e);
    ritz_values_ = es.eigenvalues();
    ritz_vectors_ = es.eigenvectors();
}

Eigen::VectorXcd KrylovSpace::reduced_propagator(double t) const {
    const auto m = ritz_values_.size();
    Eigen::VectorXcd phase(m);
    for (Eigen::Index k = 0; k < m; ++k)
        phase(k) = std::polar(ritz_vectors_(0, k), -ritz_values_(k) * t);
    return ritz_vectors_.cast<std::complex<double>>() * phase;
}

Eigen::VectorXcd KrylovSpace::evolve(double t) const {
    if (basis_.empty()) return Eigen::VectorXcd();
    const Eigen::VectorXcd y = reduced_propagator(t) * psi_norm_;
    Eigen::VectorXcd out = y(0) * basis_[0];
    for (std::size_t k = 1; k < basis_.size(); ++k) out += y(static_cast<Eigen::Index>(k)) * basis_[k];
    return out;
}

double KrylovSpace::error_estimate(double t) const {
    if (invariant_ || basis_.empty()) return 0.0;
    const Eigen::VectorXcd y = reduced_propagator(t);
    return next_beta_ * std::abs(y(y.size() - 1)) * psi_norm_;
}

double KrylovSpace::admissible_step(double t_max, double tol, double t_ref) const {
    if (invariant_) return t_max;
    auto ok = [&](double t) { return error_estimate(t) <= tol * std::abs(t / t_ref); };
    if (ok(t_max)) return t_max;
    double lo = 0.0, hi = t_max;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

Eigen::VectorXcd KrylovSpace::coordinates(const Eigen::VectorXcd& phi) const {
    Eigen::VectorXcd c(static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t k = 0; k < basis_.size(); ++k) c(static_cast<Eigen::Index>(k)) = basis_[k].dot(phi);
    return c;
}

std::complex<double> KrylovSpace::amplitude(const Eigen::VectorXcd& phi_coordinates, double t) const {
    if (basis_.empty()) return 0.0;
    return phi_coordinates.dot(reduced_propagator(t)) * psi_norm_;
}

Eigen::VectorXcd krylov_evolve(const MatVec& H, const Eigen::VectorXcd& psi, double dt, const KrylovOptions& opts,
                               KrylovStats* stats) {
    require(std::isfinite(dt), "time step must be finite");
    require(opts.tol > 0.0, "Krylov tolerance must be positive");
    Eigen::VectorXcd cur = psi;
    double remaining = dt;
    while (remaining != 0.0) {
        KrylovSpace space(H, cur, opts.dim, remaining, opts.tol, dt);
        const double step = space.admissible_step(remaining, opts.tol, dt);
        if (std::abs(step) <= 1e-13 * std::abs(dt))
            fail(ErrorKind::NumericFailure, "Krylov sub-step underflow; increase the Krylov dimension");
        if (stats) {
            ++stats->substeps;
            stats->matvecs += space.matvecs();
            stats->error_estimate += space.error_estimate(step);
        }
        cur = space.evolve(step);
        remaining = (step == remaining) ? 0.0 : remaining - step;
    }
    return cur;
}

Eigen::VectorXcd krylov_evolve(const SparseOperator& H, const Eigen::VectorXcd& psi, double dt,
                               const KrylovOptions& opts, KrylovStats* stats) {
    require(psi.size() == H.cols(), "state does not match operator dimension");
    return krylov_evolve(as_matvec(H), psi, dt, opts, stats);
}

Eigen::VectorXcd krylov_evolve(const ComplexSparseOperator& H, const Eigen::VectorXcd& psi, double dt,
                               const KrylovOptions& opts, KrylovStats* stats) {
    require(psi.size() == H.cols(), "state does not match operator dimension");
    return krylov_evolve(as_matvec(H), psi, dt, opts, stats);
}

// ---------------------------------------------------------------------------

Entanglement entanglement_from_probabilities(std::vector<double> p) {
    for (auto& x : p) x = std::max(x, 0.0);
    std::sort(p.begin(), p.end(), std::greater<>());
    Entanglement e;
    for (double x : p)
        if (x > 0.0) e.entropy -= x * std::log(x);
    e.spectrum = std::move(p);
    return e;
}

namespace {

template <class Scalar>
Entanglement schmidt_of(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Mat rho = M.rows() <= M.cols() ? Mat(M * M.adjoint()) : Mat(M.adjoint() * M);
    auto eig = eigh(std::move(rho), false);
    return entanglement_from_probabilities({eig.values.data(), eig.values.data() + eig.values.size()});
}

std::uint32_t rank_in(const std::vector<Config>& sorted, Config c) {
    return static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
}

}  // namespace

HalfChainCut::HalfChainCut(const ConstrainedBasis& basis) : dim_(basis.dim()) {
    const int h = basis.n_sites() / 2;
    const Config mask = (Config{1} << h) - 1;
    std::vector<Config> lefts, rights;
    for (Config c : basis.states()) {
        lefts.push_back(c & mask);
        rights.push_back(c >> h);
    }
    auto uniq = [](std::vector<Config> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto lu = uniq(lefts), ru = uniq(rights);
    n_left_ = lu.size();
    n_right_ = ru.size();
    left_.resize(dim_);
    right_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        left_[i] = rank_in(lu, lefts[i]);
        right_[i] = rank_in(ru, rights[i]);
    }
}

Entanglement HalfChainCut::operator()(const Eigen::VectorXcd& psi) const {
    require(static_cast<std::size_t>(psi.size()) == dim_,
            "entanglement needs a vector in the full constrained basis (got dimension " + std::to_string(psi.size()) +
                ", expected " + std::to_string(dim_) + ")");
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_left_), static_cast<Eigen::Index>(n_right_));
    for (std::size_t i = 0; i < dim_; ++i) M(left_[i], right_[i]) = psi(static_cast<Eigen::Index>(i));
    return schmidt_of(M);
}

Entanglement HalfChainCut::operator()(const Eigen::VectorXd& psi) const {
    require(static_cast<std::size_t>(psi.size()) == dim_,
            "entanglement needs a vector in the full constrained basis (got dimension " + std::to_string(psi.size()) +
                ", expected " + std::to_string(dim_) + ")");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_left_), static_cast<Eigen::Index>(n_right_));
    for (std::size_t i = 0; i < dim_; ++i) M(left_[i], right_[i]) = psi(static_cast<Eigen::Index>(i));
    return schmidt_of(M);
}

Entanglement entanglement_entropy(const Eigen::VectorXcd& psi, const ConstrainedBasis& basis) {
    return HalfChainCut(basis)(psi);
}

Entanglement product_space_entanglement(const Eigen::VectorXcd& psi, int n_sites) {
    require(n_sites >= 2 && n_sites <= 30, "product-space cut needs 2 <= N <= 30");
    require(psi.size() == (Eigen::Index{1} << n_sites), "vector does not match 2^N");
    const int h = n_sites / 2;
    const Eigen::Index nl = Eigen::Index{1} << h, nr = Eigen::Index{1} << (n_sites - h);
    // Index = left + nl * right, which is column-major storage of M(left, right).
    Eigen::MatrixXcd M = Eigen::Map<const Eigen::MatrixXcd>(psi.data(), nl, nr);
    return schmidt_of(M);
}

// ---------------------------------------------------------------------------

RevivalPeak golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    require(hi > lo, "golden-section bracket must have hi > lo");
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fa = f(a), fb = f(b), fc = f(c), fd = f(d);
    if (std::max(fa, fb) > std::max(fc, fd)) {
        fail(ErrorKind::NonUnimodal, "function is not unimodal on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                         "]; widen the window");
    }
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            fb = fd;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            fa = fc;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    RevivalPeak best = fc >= fd ? RevivalPeak{0, c, fc} : RevivalPeak{0, d, fd};
    // Parabola through (a, x, b).
    const double x = best.t, fx = best.g;
    const double num = (x - a) * (x - a) * (fx - fb) - (x - b) * (x - b) * (fx - fa);
    const double den = (x - a) * (fx - fb) - (x - b) * (fx - fa);
    if (den != 0.0) {
        const double v = x - 0.5 * num / den;
        if (v > a && v < b) {
            const double fv = f(v);
            if (fv >= fx) best = {0, v, fv};
        }
    }
    return best;
}

FidelityProbe::FidelityProbe(MatVec H, Eigen::VectorXcd psi0, Eigen::VectorXcd anchor, double t_anchor,
                             const KrylovOptions& opts)
    : H_(std::move(H)), psi0_(std::move(psi0)), anchor_(std::move(anchor)), t_anchor_(t_anchor), opts_(opts) {}

void FidelityProbe::reanchor(double t) {
    if (t != t_anchor_) {
        anchor_ = krylov_evolve(H_, anchor_, t - t_anchor_, opts_);
        t_anchor_ = t;
    }
    space_.emplace(H_, anchor_, opts_.dim);
    coords_ = space_->coordinates(psi0_);
}

double FidelityProbe::operator()(double t) {
    if (!space_) reanchor(t_anchor_);
    if (space_->error_estimate(t - t_anchor_) > opts_.tol) reanchor(t);
    return std::norm(space_->amplitude(coords_, t - t_anchor_));
}

RevivalPeak revival_peak(const SparseOperator& H, const Eigen::VectorXcd& psi0, double t_guess, double window,
                         const KrylovOptions& opts, double tol) {
    require(window > 0.0, "peak window must be positive");
    const auto mv = as_matvec(H);
    FidelityProbe probe(mv, psi0, krylov_evolve(mv, psi0, t_guess, opts), t_guess, opts);
    return golden_section_max([&](double t) { return probe(t); }, t_guess - window, t_guess + window, tol);
}

QuenchRecord fidelity_series(const SparseOperator& H, const Eigen::VectorXcd& psi0, const QuenchOptions& opts,
                             const ConstrainedBasis* basis) {
    require(opts.dt > 0.0 && std::isfinite(opts.dt), "time step dt must be positive");
    require(opts.t_max >= 0.0, "t_max must be non-negative");
    require(psi0.size() == H.cols(), "initial state does not match operator dimension");
    require(std::abs(psi0.norm() - 1.0) < 1e-10, "initial state must be normalized");
    std::optional<HalfChainCut> cut;
    if (opts.entropy || opts.schmidt_stride > 0) {
        if (!basis || basis->dim() != static_cast<std::size_t>(psi0.size()))
            fail(ErrorKind::InvalidArgument, "entanglement needs the full constrained basis");
        cut.emplace(*basis);
    }
    const auto mv = as_matvec(H);
    const long steps = std::lround(opts.t_max / opts.dt);
    QuenchRecord rec;
    std::map<int, RevivalPeak> best;
    Eigen::VectorXcd cur = psi0, prev;
    for (long j = 0; j <= steps; ++j) {
        const double t = static_cast<double>(j) * opts.dt;
        if (j > 0) {
            prev = cur;
            cur = krylov_evolve(mv, cur, opts.dt, opts.krylov, &rec.stats);
        }
        rec.t.push_back(t);
        rec.g.push_back(std::norm(psi0.dot(cur)));
        rec.max_norm_drift = std::max(rec.max_norm_drift, std::abs(cur.norm() - 1.0));
        const bool want_schmidt = opts.schmidt_stride > 0 && j % opts.schmidt_stride == 0;
        if (opts.entropy || want_schmidt) {
            auto e = (*cut)(cur);
            if (opts.entropy) rec.entropy.push_back(e.entropy);
            if (want_schmidt) rec.schmidt.push_back({t, std::move(e.spectrum)});
        }
        if (opts.period > 0.0 && j >= 2) {
            const auto& g = rec.g;
            const std::size_t k = static_cast<std::size_t>(j - 1);
            if (g[k] > g[k - 1] && g[k] >= g[k + 1]) {
                const double tc = rec.t[k];
                const int m = static_cast<int>(std::lround(tc / opts.period));
                if (m >= 1 && std::abs(tc - m * opts.period) <= opts.window_fraction * opts.period) {
                    FidelityProbe probe(mv, psi0, prev, tc, opts.krylov);
                    RevivalPeak p;
                    try {
                        p = golden_section_max([&](double s) { return probe(s); }, rec.t[k - 1], rec.t[k + 1],
                                               opts.peak_tol);
                    } catch (const Error& e) {
                        if (e.kind() != ErrorKind::NonUnimodal) throw;
                        p = {0, tc, g[k]};
                    }
                    p.m = m;
                    auto it = best.find(m);
                    if (it == best.end() || p.g > it->second.g) best[m] = p;
                }
            }
        }
    }
    for (const auto& [m, p] : best) rec.peaks.push_back(p);
    return rec;
}

double SpectralFidelity::operator()(double t) const {
    const Eigen::ArrayXd phase = energies.array() * t;
    const double re = (weights.array() * phase.cos()).sum();
    const double im = (weights.array() * phase.sin()).sum();
    return re * re + im * im;
}

SpectralFidelity neel_spectral_fidelity(int n_sites, const CouplingSet& couplings) {
    ConstrainedBasis basis(n_sites, Boundary::Periodic);
    const auto sector = build_sector(basis, SectorLabel{2, 0, 1});
    const auto H = real_part(build_sector_hamiltonian(sector, couplings));
    const Eigen::VectorXd psi = sector.project_config(neel_config(n_sites)).real();
    auto eig = eigh(H.dense(), true);
    const Eigen::VectorXd c = eig.vectors.transpose() * psi;
    return {std::move(eig.values), c.array().square().matrix()};
}

std::vector<RevivalPeak> track_revivals(const std::function<double(double)>& g, double period, int m_max,
                                        double window_fraction, double tol) {
    require(period > 0.0, "revival period must be positive");
    require(m_max >= 1, "need at least one revival");
    constexpr int kGrid = 64;
    std::vector<RevivalPeak> peaks;
    const double half = window_fraction * period;
    for (int m = 1; m <= m_max; ++m) {
        double centre = m == 1 ? period : peaks.back().t * m / (m - 1);
        RevivalPeak found;
        for (int attempt = 0; attempt < 4; ++attempt) {
            const double lo = centre - half, step = 2.0 * half / (kGrid - 1);
            int arg = 0;
            double gmax = -1.0;
            for (int i = 0; i < kGrid; ++i) {
                const double v = g(lo + i * step);
                if (v > gmax) {
                    gmax = v;
                    arg = i;
                }
            }
            found = {m, lo + arg * step, gmax};
            if (arg > 0 && arg < kGrid - 1) {
                try {
                    found = golden_section_max(g, found.t - step, found.t + step, tol);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NonUnimodal) throw;
                }
                found.m = m;
                break;
            }
            centre = found.t;
        }
        peaks.push_back(found);
    }
    return peaks;
}

// ---------------------------------------------------------------------------

double decay_rate(double g, int n_sites, int m) {
    require(m >= 1 && n_sites >= 1, "decay rate needs m >= 1 and N >= 1");
    if (g > 1.0 - 1e-14) return 0.0;
    return -std::expm1(std::log(g) / n_sites) / m;
}

namespace {

PowerLawFit fit_window(const std::vector<int>& m, const std::vector<double>& gamma, int lo, int hi, int min_points,
                       const char* name) {
    int in_window = 0;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] < lo || m[i] > hi) continue;
        ++in_window;
        if (gamma[i] > 0.0) {
            x.push_back(std::log(static_cast<double>(m[i])));
            y.push_back(std::log(gamma[i]));
        }
    }
    if (in_window < min_points)
        fail(ErrorKind::WindowTooSmall, std::string(name) + " window [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "] has " + std::to_string(in_window) + " peaks");
    PowerLawFit fit;
    if (x.empty()) return fit;  // rates vanish identically
    if (static_cast<int>(x.size()) < min_points)
        fail(ErrorKind::WindowTooSmall, std::string(name) + " window has too few non-zero rates");
    Eigen::Map<Eigen::VectorXd> X(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(y.size()));
    const double mx = X.mean(), my = Y.mean();
    const double sxx = (X.array() - mx).square().sum();
    const double sxy = ((X.array() - mx) * (Y.array() - my)).sum();
    fit.mu = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.C = std::exp(my - fit.mu * mx);
    fit.points = static_cast<int>(x.size());
    fit.valid = true;
    return fit;
}

}  // namespace

ScalingSeries fit_rates(int n_sites, const std::vector<int>& m, const std::vector<double>& gamma,
                        const ScalingWindows& w) {
    require(m.size() == gamma.size(), "m and rate arrays differ in length");
    ScalingSeries s;
    s.n_sites = n_sites;
    s.m = m;
    s.gamma = gamma;
    s.short_fit = fit_window(m, gamma, w.short_lo, w.short_hi, w.min_points, "short-time");
    s.long_fit = fit_window(m, gamma, w.long_lo, w.long_hi, w.min_points, "long-time");
    if (s.short_fit.valid && s.long_fit.valid && s.short_fit.mu != s.long_fit.mu) {
        s.m_c = std::exp((std::log(s.short_fit.C) - std::log(s.long_fit.C)) / (s.long_fit.mu - s.short_fit.mu));
    }
    return s;
}

ScalingSeries scaling_series(int n_sites, const std::vector<RevivalPeak>& peaks, const ScalingWindows& w) {
    std::vector<int> m;
    std::vector<double> gamma, g, gt;
    for (const auto& p : peaks) {
        m.push_back(p.m);
        g.push_back(p.g);
        gt.push_back(std::pow(p.g, 1.0 / n_sites));
        gamma.push_back(decay_rate(p.g, n_sites, p.m));
    }
    auto s = fit_rates(n_sites, m, gamma, w);
    s.g = std::move(g);
    s.g_tilde = std::move(gt);
    return s;
}

nlohmann::json to_json(const RevivalPeak& p) { return {{"m", p.m}, {"t", p.t}, {"g", p.g}}; }

CollapseReport collapse_spread(const std::vector<ScalingSeries>& series, int m_max) {
    require(series.size() >= 2, "collapse needs at least two system sizes");
    CollapseReport out;
    for (int m = 1; m <= m_max; ++m) {
        std::vector<double> rates;
        for (const auto& s : series) {
            const auto it = std::find(s.m.begin(), s.m.end(), m);
            if (it == s.m.end()) break;
            rates.push_back(s.gamma[static_cast<std::size_t>(it - s.m.begin())]);
        }
        if (rates.size() != series.size()) continue;
        const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
        double mean = 0.0;
        for (double r : rates) mean += r;
        mean /= static_cast<double>(rates.size());
        const double spread = mean > 0.0 ? (*hi - *lo) / mean : 0.0;
        out.m.push_back(m);
        out.spread.push_back(spread);
        if (out.worst_m == 0 || spread > out.max_spread) {
            out.max_spread = spread;
            out.worst_m = m;
        }
    }
    require(!out.m.empty(), "no revival index shared by every system size");
    return out;
}

nlohmann::json to_json(const CollapseReport& c) {
    return {{"m", c.m}, {"spread", c.spread}, {"max_spread", c.max_spread}, {"worst_m", c.worst_m}};
}

nlohmann::json to_json(const ScalingSeries& s) {
    auto fit = [](const PowerLawFit& f) {
        return nlohmann::json{{"C", f.C}, {"mu", f.mu}, {"points", f.points}, {"valid", f.valid}};
    };
    nlohmann::json j;
    j["n_sites"] = s.n_sites;
    j["m"] = s.m;
    j["g"] = s.g;
    j["g_tilde"] = s.g_tilde;
    j["gamma"] = s.gamma;
    j["short_fit"] = fit(s.short_fit);
    j["long_fit"] = fit(s.long_fit);
    j["m_c"] = s.m_c ? nlohmann::json(*s.m_c) : nlohmann::json(nullptr);
    return j;
}

void write_quench_csv(std::ostream& os, const QuenchRecord& r) {
    os.precision(17);
    const bool s = !r.entropy.empty();
    os << "t (1/flip amplitude),g" << (s ? ",S (nats)" : "") << "\n";
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        os << r.t[i] << ',' << r.g[i];
        if (s) os << ',' << r.entropy[i];
        os << '\n';
    }
}

}  // namespace pxp
