#include "pxpscar/fsa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "pxpscar/errors.hpp"
#include "pxpscar/linalg.hpp"

namespace pxp {

Eigen::MatrixXd FsaSubspace::matrix() const {
    if (vectors.empty()) return {};
    Eigen::MatrixXd m(vectors.front().size(), size());
    for (int k = 0; k < size(); ++k) m.col(k) = vectors[k];
    return m;
}

FsaSubspace fsa_basis(const SparseOperator& h_plus, const Eigen::VectorXd& neel, int n_sites) {
    require(n_sites >= 2 && n_sites % 2 == 0, "N must be even");
    require(h_plus.rows() == neel.size() && h_plus.cols() == neel.size(), "H+ and the seed state differ in dimension");
    require(std::abs(neel.norm() - 1.0) < 1e-12, "seed state must be normalized");
    FsaSubspace s;
    s.n_sites = n_sites;
    s.vectors.reserve(n_sites + 1);
    s.vectors.push_back(neel);
    s.step_norm.push_back(0.0);
    s.beta.push_back(1.0);
    s.gamma.push_back(1.0);
    for (int k = 1; k <= n_sites; ++k) {
        Eigen::VectorXd w = h_plus * s.vectors.back();
        const double b = w.norm();
        if (b < 1e-14)
            fail(ErrorKind::DegenerateCoupling,
                 "forward scattering stops at k = " + std::to_string(k) + " before reaching N");
        s.vectors.push_back(w / b);
        s.step_norm.push_back(b);
        s.beta.push_back(1.0 / b);
        s.gamma.push_back(s.gamma.back() / b);
    }
    const double tail = (h_plus * s.vectors.back()).norm();
    if (tail > 1e-10)
        fail(ErrorKind::InternalInconsistency, "H+ does not annihilate the top forward-scattering state");
    return s;
}

FsaSubspace fsa_basis(const ConstrainedBasis& basis, const CouplingSet& couplings) {
    const auto pm = split_pm(basis, couplings);
    return fsa_basis(pm.plus, basis_vector(basis, neel_state(basis).z2), basis.n_sites());
}

namespace {

// Full projected matrix V^T A V.
Eigen::MatrixXd project(const FsaSubspace& s, const std::vector<Eigen::VectorXd>& images) {
    const int n = s.size();
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) m(j, k) = s.vectors[j].dot(images[k]);
    return m;
}

std::vector<Eigen::VectorXd> apply_all(const SparseOperator& op, const std::vector<Eigen::VectorXd>& v) {
    std::vector<Eigen::VectorXd> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = op * v[k];
    return out;
}

}  // namespace

RitzPairs project_tridiagonal(const FsaSubspace& s, const SparseOperator& H) {
    const int n = s.size();
    require(n >= 1, "empty subspace");
    const Eigen::MatrixXd K = project(s, apply_all(H, s.vectors));
    RitzPairs r;
    r.diagonal = K.diagonal();
    r.off_diagonal.resize(n - 1);
    for (int k = 0; k + 1 < n; ++k) r.off_diagonal(k) = 0.5 * (K(k + 1, k) + K(k, k + 1));
    auto e = eigh_tridiagonal(r.diagonal, r.off_diagonal, true);
    r.values = std::move(e.values);
    r.vectors = std::move(e.vectors);
    return r;
}

SubspaceVariance subspace_variance(const FsaSubspace& s, const SparseOperator& H, const SparseOperator& hz) {
    const auto hv = apply_all(H, s.vectors);
    const Eigen::MatrixXd K = project(s, hv);
    SubspaceVariance out;
    double square = 0.0;
    for (const auto& w : hv) square += w.squaredNorm();
    out.from_square = square - K.squaredNorm();
    for (const auto& v : s.vectors) out.from_hz += v.dot(hz * v);
    // Path (i) cancels terms of size `square`, so its rounding floor scales with it.
    const double mismatch = std::abs(out.from_square - out.from_hz);
    if (mismatch > 1e-8 * std::max(std::abs(out.from_square), std::abs(out.from_hz)) + 1e-13 * square)
        fail(ErrorKind::InternalInconsistency,
             "subspace variance paths disagree (" + std::to_string(out.from_square) + " vs " +
                 std::to_string(out.from_hz) + "); the H+/H- split is inconsistent with H");
    out.value = out.from_hz;
    return out;
}

double subspace_variance(const Eigen::MatrixXcd& q, const MatVec& H) {
    require(q.cols() >= 1, "empty subspace");
    Eigen::MatrixXcd hq(q.rows(), q.cols());
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
        Eigen::VectorXcd out;
        H(q.col(k), out);
        hq.col(k) = out;
    }
    return hq.squaredNorm() - (q.adjoint() * hq).squaredNorm();
}

double fsa_error(const FsaSubspace& s, const SparseOperator& h_minus, int k) {
    require(k >= 1 && k < s.size(), "forward-scattering error index out of range");
    const Eigen::VectorXd d = h_minus * s.vectors[k] - s.step_norm[k] * s.vectors[k - 1];
    return d.squaredNorm();
}

double fsa_error3(const FsaSubspace& s, const SparseOperator& h_minus) { return fsa_error(s, h_minus, 3); }

double ritz_anharmonicity(const Eigen::VectorXd& values) {
    const auto n = values.size();
    require(n >= 3, "anharmonicity needs at least three values");
    Eigen::VectorXd v = values;
    std::sort(v.data(), v.data() + n);
    Eigen::MatrixXd A(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) A.row(i) << 1.0, static_cast<double>(i);
    const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(v);
    return std::sqrt((A * coef - v).squaredNorm() / static_cast<double>(n));
}

Su2Report su2_report(const FsaSubspace& s, const SparseOperator& h_plus, const SparseOperator& hz) {
    const int n = s.n_sites;
    require(s.size() == n + 1, "forward-scattering subspace is incomplete");
    Su2Report r;
    r.n_sites = n;
    const auto pv = apply_all(h_plus, s.vectors);
    const auto zv = apply_all(hz, s.vectors);

    double tw = 0.0, ww = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = s.vectors[k + 1].dot(pv[k]);
        const double w = std::sqrt(static_cast<double>((n - k) * (k + 1)));
        r.t.push_back(t);
        r.r.push_back(t / w);
        tw += t * w;
        ww += w * w;
    }
    r.scale = tw / ww;
    for (double x : r.r) r.r_rescaled.push_back(x / r.scale);
    const auto [lo, hi] = std::minmax_element(r.r.begin(), r.r.end());
    r.r_spread = (*hi - *lo) / (std::accumulate(r.r.begin(), r.r.end(), 0.0) / n);

    for (int k = 0; k <= n; ++k) {
        const double m = s.vectors[k].dot(zv[k]);
        r.hz.push_back(m);
        r.hz_var.push_back(std::max(0.0, zv[k].squaredNorm() - m * m));
    }
    for (int k = 0; k < n; ++k) r.delta.push_back(r.hz[k + 1] - r.hz[k]);
    r.delta_mean = std::accumulate(r.delta.begin(), r.delta.end(), 0.0) / n;
    r.delta_mean_interior =
        n > 2 ? std::accumulate(r.delta.begin() + 1, r.delta.end() - 1, 0.0) / (n - 2) : r.delta_mean;
    double dev = 0.0;
    for (double d : r.delta) dev += (d - r.delta_mean) * (d - r.delta_mean);
    r.delta_rms_rel = std::sqrt(dev / n) / std::abs(r.delta_mean);

    // [H^z, H+]|k> = H^z H+|k> - H+ H^z|k>, projected.
    std::vector<Eigen::VectorXd> comm(n + 1);
    for (int k = 0; k <= n; ++k) comm[k] = hz * pv[k] - h_plus * zv[k];
    const Eigen::MatrixXd C = project(s, comm);
    const Eigen::MatrixXd P = project(s, pv);
    r.algebra_residual = (C - r.delta_mean * P).norm() / P.norm();
    return r;
}

Su2Report su2_report(const ConstrainedBasis& basis, const CouplingSet& couplings) {
    const auto pm = split_pm(basis, couplings);
    const auto hz = commutator_hz(pm.plus, pm.minus);
    const auto s = fsa_basis(pm.plus, basis_vector(basis, neel_state(basis).z2), basis.n_sites());
    return su2_report(s, pm.plus, hz);
}

FCoefficients extract_f_coefficients(const ConstrainedBasis& basis, double h2) {
    const int n = basis.n_sites();
    require(n >= 12, "distance classes 2, 4 and >= 6 need N >= 12");
    const auto pm = split_pm(basis, CouplingSet::manual({h2}));
    const auto hz = commutator_hz(pm.plus, pm.minus);
    const auto s = fsa_basis(pm.plus, basis_vector(basis, neel_state(basis).z2), n);
    const Eigen::VectorXd& two = s.vectors[2];
    const Eigen::VectorXd image = hz * two;

    const Config neel = neel_config(n);
    // distance class -> (coefficient in |2>, coefficient in H^z|2>) samples
    std::map<int, std::vector<std::pair<double, double>>> classes;
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const Config c = basis.state(i);
        if (fsa_grade(c, n) != 2) continue;
        const Config lowered = neel & ~c;
        if (std::popcount(lowered) != 2 || (c & ~neel) != 0) continue;
        const int a = std::countr_zero(lowered);
        const int b = 63 - std::countl_zero(lowered);
        const int d = std::min(b - a, n - (b - a));
        classes[std::min(d, 6)].emplace_back(two(i), image(i));
    }
    require(classes.count(2) && classes.count(4) && classes.count(6), "missing distance class");

    FCoefficients f;
    auto ratio = [&](int cls, double denom, double& spread) {
        const auto& v = classes.at(cls);
        const double first = v.front().second / denom;
        for (const auto& [c2, hzv] : v) spread = std::max(spread, std::abs(hzv / denom - first));
        return first;
    };
    const double base = classes.at(2).front().first;
    const double far = classes.at(6).front().first;
    for (const auto& [cls, v] : classes)
        for (const auto& [c2, hzv] : v)
            f.class_spread = std::max(f.class_spread, std::abs(c2 - (cls == 2 ? base : far)));
    f.f2 = ratio(2, base, f.class_spread);
    f.f4 = ratio(4, base, f.class_spread);
    f.f6 = ratio(6, far, f.class_spread);
    return f;
}

double f2_closed_form(double h, int L) { return -L + 3 - 4 * h * (1 - h) * (7 - L); }

double f4_closed_form(double h, int L) {
    return -L + 4 - 2 * h * (4 * (7 - 14 * h + 8 * h * h) - (3 - 6 * h + 4 * h * h) * L);
}

double f6_closed_form(double h, int L) { return -L + 4 - 4 * h * (1 - h) * (12 - L); }

nlohmann::json to_json(const Su2Report& r) {
    return {{"n_sites", r.n_sites},
            {"t", r.t},
            {"r", r.r},
            {"scale", r.scale},
            {"r_rescaled", r.r_rescaled},
            {"r_spread", r.r_spread},
            {"hz", r.hz},
            {"hz_var", r.hz_var},
            {"delta", r.delta},
            {"delta_mean", r.delta_mean},
            {"delta_mean_interior", r.delta_mean_interior},
            {"delta_rms_rel", r.delta_rms_rel},
            {"algebra_residual", r.algebra_residual}};
}

nlohmann::json to_json(const RitzPairs& r) {
    return {{"values", std::vector<double>(r.values.data(), r.values.data() + r.values.size())},
            {"off_diagonal",
             std::vector<double>(r.off_diagonal.data(), r.off_diagonal.data() + r.off_diagonal.size())},
            {"anharmonicity", r.values.size() >= 3 ? ritz_anharmonicity(r.values) : 0.0}};
}

}  // namespace pxp
