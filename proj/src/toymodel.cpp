#include "pxpscar/toymodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "pxpscar/dynamics.hpp"
#include "pxpscar/errors.hpp"
#include "pxpscar/linalg.hpp"

namespace pxp {

namespace {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat16 = Eigen::Matrix<cd, 16, 16>;

// Single-site operators in the index basis (0 = down, 1 = up).
std::array<Mat2, 4> paulis() {
    Mat2 id = Mat2::Identity();
    Mat2 x, y, z;
    x << 0, 1, 1, 0;
    y << 0, cd(0, 1), cd(0, -1), 0;
    z << -1, 0, 0, 1;
    return {id, x, y, z};
}

// Product of single-site operators on k sites; site s is bit s of the local index.
template <int K>
Eigen::Matrix<cd, (1 << K), (1 << K)> local_product(const std::array<Mat2, K>& ops) {
    constexpr int D = 1 << K;
    Eigen::Matrix<cd, D, D> m;
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c) {
            cd v = 1.0;
            for (int s = 0; s < K; ++s) v *= ops[s]((r >> s) & 1, (c >> s) & 1);
            m(r, c) = v;
        }
    return m;
}

// Bond term on sites (a, b, c, d) = (i-1, i, i+1, i+2), local index bits in that order.
Mat16 bond_term(const std::array<double, 9>& J) {
    const auto p = paulis();
    Mat16 V = Mat16::Zero(), P = Mat16::Identity();
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) V += J[3 * mu + nu] * local_product<4>({p[mu + 1], p[0], p[0], p[nu + 1]});
    for (int mu = 1; mu <= 3; ++mu) P -= local_product<4>({p[0], p[mu], p[mu], p[0]});
    P /= 4.0;
    const Mat16 T = (V * P + P * V.adjoint()) / 2.0;
    // Bitwise Hermitian; floating-point addition is commutative.
    return (T + T.adjoint()) / 2.0;
}

std::uint64_t gather(std::uint64_t s, const std::array<int, 4>& sites) {
    std::uint64_t l = 0;
    for (int k = 0; k < 4; ++k) l |= ((s >> sites[k]) & 1u) << k;
    return l;
}

std::uint64_t scatter(std::uint64_t s, const std::array<int, 4>& sites, std::uint64_t l) {
    for (int k = 0; k < 4; ++k) {
        s &= ~(std::uint64_t{1} << sites[k]);
        s |= ((l >> k) & 1u) << sites[k];
    }
    return s;
}

void check_sites(int n) {
    require(n >= 4 && n <= kMaxToySites, "toy model needs 4 <= N <= 16");
}

// In-place Walsh-Hadamard transform, normalized.
void hadamard_all(Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    for (Eigen::Index h = 1; h < n; h <<= 1)
        for (Eigen::Index i = 0; i < n; i += 2 * h)
            for (Eigen::Index j = i; j < i + h; ++j) {
                const double a = v(j), b = v(j + h);
                v(j) = a + b;
                v(j + h) = a - b;
            }
    v /= std::sqrt(static_cast<double>(n));
}

double echo(const std::vector<double>& weights, const std::vector<double>& energies, double t) {
    cd a = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        a += weights[i] * std::exp(cd(0, -2.0 * std::numbers::pi * energies[i] * t));
    return std::norm(a);
}

}  // namespace

ToySpec random_toy_spec(int n_sites, std::uint64_t seed, double omega, double sigma) {
    check_sites(n_sites);
    require(sigma >= 0.0, "coupling spread must be non-negative");
    ToySpec s;
    s.n_sites = n_sites;
    s.omega = omega;
    s.sigma = sigma;
    s.seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    s.couplings.resize(static_cast<std::size_t>(n_sites));
    for (auto& bond : s.couplings)
        for (auto& j : bond) j = g(rng);
    return s;
}

ToySpec free_toy_spec(int n_sites, double omega) {
    check_sites(n_sites);
    ToySpec s;
    s.n_sites = n_sites;
    s.omega = omega;
    s.sigma = 0.0;
    s.seed = 0;
    s.couplings.assign(static_cast<std::size_t>(n_sites), std::array<double, 9>{});
    return s;
}

Eigen::Matrix4cd singlet_projector() {
    const auto p = paulis();
    Eigen::Matrix4cd P = Eigen::Matrix4cd::Identity();
    for (int mu = 1; mu <= 3; ++mu) P -= local_product<2>({p[mu], p[mu]});
    return P / 4.0;
}

ComplexSparseOperator singlet_projector(int n_sites, int i) {
    check_sites(n_sites);
    require(i >= 0 && i < n_sites, "site out of range");
    const auto P = singlet_projector();
    const int a = i, b = (i + 1) % n_sites;
    const std::size_t dim = std::size_t{1} << n_sites;
    return assemble_rows<cd>(dim, dim, [&](std::size_t row, auto& e) {
        const std::uint64_t s = row;
        const int l = static_cast<int>(((s >> a) & 1u) | (((s >> b) & 1u) << 1));
        for (int lc = 0; lc < 4; ++lc) {
            if (P(l, lc) == cd(0)) continue;
            std::uint64_t c = s & ~((std::uint64_t{1} << a) | (std::uint64_t{1} << b));
            c |= (static_cast<std::uint64_t>(lc & 1) << a) | (static_cast<std::uint64_t>(lc >> 1) << b);
            e.emplace_back(static_cast<std::int32_t>(c), P(l, lc));
        }
    });
}

ComplexSparseOperator build_toy(const ToySpec& spec) {
    const int n = spec.n_sites;
    check_sites(n);
    require(spec.couplings.size() == static_cast<std::size_t>(n), "one coupling set per bond is required");
    std::vector<Mat16> terms;
    std::vector<std::array<int, 4>> sites;
    for (int i = 0; i < n; ++i) {
        terms.push_back(bond_term(spec.couplings[static_cast<std::size_t>(i)]));
        sites.push_back({(i - 1 + n) % n, i, (i + 1) % n, (i + 2) % n});
    }
    const std::size_t dim = std::size_t{1} << n;
    const double half = spec.omega / 2.0;
    return assemble_rows<cd>(dim, dim, [&](std::size_t row, auto& e) {
        const std::uint64_t s = row;
        for (int i = 0; i < n; ++i) {
            e.emplace_back(static_cast<std::int32_t>(s ^ (std::uint64_t{1} << i)), cd(half));
            const auto l = gather(s, sites[static_cast<std::size_t>(i)]);
            for (std::uint64_t lc = 0; lc < 16; ++lc) {
                const cd v = terms[static_cast<std::size_t>(i)](static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lc));
                if (v == cd(0)) continue;
                e.emplace_back(static_cast<std::int32_t>(scatter(s, sites[static_cast<std::size_t>(i)], lc)), v);
            }
        }
    });
}

ScarTower scar_tower(int n_sites) {
    check_sites(n_sites);
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    ScarTower t;
    t.n_sites = n_sites;
    for (int j = 0; j <= n_sites; ++j) {
        // The Hadamard maps S^z to -S^x, so S^x = m comes from N/2 - m up spins.
        const int ups = n_sites - j;
        const double amp = 1.0 / std::sqrt(binomial_weight(n_sites, ups) * static_cast<double>(dim));
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        for (Eigen::Index s = 0; s < dim; ++s)
            if (std::popcount(static_cast<std::uint64_t>(s)) == ups) v(s) = amp;
        hadamard_all(v);
        t.states.push_back(std::move(v));
    }
    return t;
}

std::vector<double> tower_residuals(const ComplexSparseOperator& H, const ScarTower& tower, double omega) {
    std::vector<double> out;
    out.reserve(tower.size());
    for (std::size_t j = 0; j < tower.size(); ++j) {
        const Eigen::VectorXcd v = tower.states[j].cast<cd>();
        out.push_back((H * v - omega * tower.m(j) * v).norm());
    }
    return out;
}

double tower_residual(const ComplexSparseOperator& H, const ScarTower& tower, double omega) {
    const auto r = tower_residuals(H, tower, omega);
    return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

Eigen::VectorXcd polarized_state(int n_sites, bool up) {
    check_sites(n_sites);
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(up ? dim - 1 : 0) = 1.0;
    return v;
}

double binomial_weight(int n, int k) {
    require(n >= 0 && n <= 62, "binomial weight needs 0 <= N <= 62");
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
}

ToyDiagnostics toy_diagnostics(const ToySpec& spec, const ToyOptions& opts) {
    require(opts.dt > 0.0 && opts.t_max >= 0.0, "time grid needs dt > 0 and t_max >= 0");
    require(opts.revivals >= 0, "revival count must be non-negative");
    const int n = spec.n_sites;
    const auto H = build_toy(spec);
    const Eigen::VectorXcd psi0 = polarized_state(n, opts.initial_up);

    ToyDiagnostics d;
    d.spec = spec;
    d.initial_up = opts.initial_up;

    // Eigenvectors that carry the initial state, stored column-wise.
    Eigen::MatrixXcd vectors;
    if (n <= opts.dense_max_sites) {
        d.method = "dense";
        auto e = eigh(H.dense(), true);
        const Eigen::VectorXcd c = e.vectors.adjoint() * psi0;
        vectors = std::move(e.vectors);
        for (Eigen::Index i = 0; i < e.values.size(); ++i) {
            d.energies.push_back(e.values(i));
            d.overlaps.push_back(std::norm(c(i)));
        }
    } else {
        // psi0 lies in the tower, so Lanczos closes after N+1 steps and the
        // Ritz pairs are exact eigenpairs.
        d.method = "krylov";
        const int cap = 4 * (n + 1);
        std::vector<Eigen::VectorXcd> q{psi0};
        std::vector<double> alpha, beta;
        const double scale = std::abs(spec.omega) * n + 1.0;
        for (int j = 0; j < cap; ++j) {
            Eigen::VectorXcd w = H * q.back();
            alpha.push_back(q.back().dot(w).real());
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& v : q) w -= v.dot(w) * v;
            const double b = w.norm();
            if (b < 1e-10 * scale) break;
            if (j + 1 == cap) fail(ErrorKind::NumericFailure, "initial state does not close a small invariant subspace");
            beta.push_back(b);
            q.push_back(w / b);
        }
        const auto t = eigh_tridiagonal(Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size())),
                                        Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size())));
        Eigen::MatrixXcd Q(psi0.size(), static_cast<Eigen::Index>(q.size()));
        for (std::size_t j = 0; j < q.size(); ++j) Q.col(static_cast<Eigen::Index>(j)) = q[j];
        vectors = Q * t.vectors.cast<cd>();
        for (Eigen::Index i = 0; i < t.values.size(); ++i) {
            d.energies.push_back(t.values(i));
            d.overlaps.push_back(t.vectors(0, i) * t.vectors(0, i));
        }
    }

    std::vector<double> tower_w, tower_e, bulk_e, bulk_s;
    for (std::size_t i = 0; i < d.energies.size(); ++i) {
        const Eigen::VectorXcd v = vectors.col(static_cast<Eigen::Index>(i));
        d.entropies.push_back(product_space_entanglement(v, n).entropy);
        const bool member = d.overlaps[i] > opts.support_threshold;
        d.tower_member.push_back(member);
        if (member) {
            ++d.support_count;
            d.support_weight += d.overlaps[i];
            d.max_overlap = std::max(d.max_overlap, d.overlaps[i]);
            d.max_eigen_residual = std::max(d.max_eigen_residual, (H * v - d.energies[i] * v).norm());
            tower_w.push_back(d.overlaps[i]);
            tower_e.push_back(d.energies[i]);
        } else {
            bulk_e.push_back(d.energies[i]);
            bulk_s.push_back(d.entropies.back());
        }
    }
    if (d.method == "dense" && !bulk_e.empty()) {
        double sum = 0.0;
        for (double s : bulk_s) sum += s;
        d.bulk_entropy_mean = sum / static_cast<double>(bulk_s.size());
        try {
            d.bulk_r = r_statistic(bulk_e);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientData) throw;
        }
    }

    const auto steps = static_cast<std::size_t>(std::llround(opts.t_max / opts.dt));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * opts.dt;
        d.t.push_back(t);
        d.g.push_back(echo(tower_w, tower_e, t));
    }

    // Integer revivals by direct propagation, independent of the eigenpairs.
    KrylovOptions ko;
    ko.tol = 1e-13;
    Eigen::VectorXcd psi = psi0;
    for (int m = 1; m <= opts.revivals; ++m) {
        psi = krylov_evolve(H, psi, 2.0 * std::numbers::pi, ko);
        const double dev = std::abs(1.0 - std::norm(psi0.dot(psi)));
        d.revival_deviation.push_back(dev);
        d.max_revival_deviation = std::max(d.max_revival_deviation, dev);
    }

    std::mt19937_64 rng(spec.seed + 1);
    std::normal_distribution<double> g;
    Eigen::VectorXcd r(psi0.size());
    for (auto& x : r) x = {g(rng), g(rng)};
    r.normalize();
    d.random_entropy = product_space_entanglement(r, n).entropy;
    return d;
}

nlohmann::json to_json(const ToySpec& s) {
    nlohmann::json j{{"n_sites", s.n_sites}, {"omega", s.omega}, {"sigma", s.sigma}, {"seed", s.seed}};
    j["couplings"] = s.couplings;
    j["coupling_layout"] = "bond i couples sites i-1 and i+2; entries J^{mu nu}, mu,nu in x,y,z, row-major";
    j["time_convention"] = "exp(-2 pi i H t)";
    j["bond_symmetrization"] = "(V P + P V^dagger)/2";
    return j;
}

nlohmann::json to_json(const ToyDiagnostics& d) {
    nlohmann::json j{{"spec", to_json(d.spec)},
                     {"method", d.method},
                     {"initial_state", d.initial_up ? "all up" : "all down"},
                     {"support_count", d.support_count},
                     {"support_weight", d.support_weight},
                     {"max_overlap", d.max_overlap},
                     {"max_overlap_expected", binomial_weight(d.spec.n_sites, d.spec.n_sites / 2)},
                     {"max_eigen_residual", d.max_eigen_residual},
                     {"revivals_checked", d.revival_deviation.size()},
                     {"max_revival_deviation", d.max_revival_deviation},
                     {"random_vector_entropy", d.random_entropy}};
    j["bulk_entropy_mean"] = d.bulk_entropy_mean ? nlohmann::json(*d.bulk_entropy_mean) : nlohmann::json(nullptr);
    if (d.bulk_r) {
        j["bulk_r"] = {{"mean_r", d.bulk_r->mean_r}, {"levels_used", d.bulk_r->levels_used}};
    } else {
        j["bulk_r"] = nullptr;
    }
    return j;
}

void write_toy_csv(std::ostream& os, const ToyDiagnostics& d) {
    os.precision(17);
    os << "E (Omega),overlap,S (nats),tower\n";
    for (std::size_t i = 0; i < d.energies.size(); ++i)
        os << d.energies[i] << ',' << d.overlaps[i] << ',' << d.entropies[i] << ',' << (d.tower_member[i] ? 1 : 0)
           << '\n';
}

void write_toy_echo_csv(std::ostream& os, const ToyDiagnostics& d) {
    os.precision(17);
    os << "t (1/Omega with exp(-2 pi i H t)),g\n";
    for (std::size_t i = 0; i < d.t.size(); ++i) os << d.t[i] << ',' << d.g[i] << '\n';
}

}  // namespace pxp
