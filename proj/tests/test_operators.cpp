#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "pxpscar/errors.hpp"
#include "pxpscar/operators.hpp"

using namespace pxp;

namespace {

using Dense = Eigen::MatrixXd;

// Single-site operator embedded at site i of an n-site register whose
// integer index has site i as bit i. Local basis {down, up}.
Dense embed(const Dense& a, int site, int n) {
    Dense out = Dense::Identity(1, 1);
    for (int j = n - 1; j >= 0; --j) {
        const Dense& f = (j == site) ? a : Dense::Identity(2, 2).eval();
        Dense k(out.rows() * 2, out.cols() * 2);
        for (int r = 0; r < out.rows(); ++r)
            for (int c = 0; c < out.cols(); ++c) k.block(r * 2, c * 2, 2, 2) = out(r, c) * f;
        out = k;
    }
    return out;
}

// Deformed Hamiltonian as an explicit 2^n matrix from Kronecker products,
// restricted to the constrained basis.
Dense kron_hamiltonian(const ConstrainedBasis& basis, const CouplingSet& h) {
    const int n = basis.n_sites();
    Dense sx(2, 2), sz(2, 2), pd(2, 2);
    sx << 0, 1, 1, 0;
    sz << -1, 0, 0, 1;
    pd << 1, 0, 0, 0;
    const int full = 1 << n;
    Dense H = Dense::Zero(full, full);
    const bool pbc = basis.boundary() == Boundary::Periodic;
    for (int i = 0; i < n; ++i) {
        Dense term = embed(sx, i, n);
        if (pbc || i > 0) term = embed(pd, (i - 1 + n) % n, n) * term;
        if (pbc || i < n - 1) term = embed(pd, (i + 1) % n, n) * term;
        Dense dress = Dense::Identity(full, full);
        for (int d = 2; d <= h.range(); ++d) {
            if (pbc || i - d >= 0) dress -= h.h(d) * embed(sz, ((i - d) % n + n) % n, n);
            if (pbc || i + d < n) dress -= h.h(d) * embed(sz, (i + d) % n, n);
        }
        H += term * dress;
    }
    Dense out(basis.dim(), basis.dim());
    for (std::size_t a = 0; a < basis.dim(); ++a)
        for (std::size_t b = 0; b < basis.dim(); ++b) out(a, b) = H(basis.state(a), basis.state(b));
    return out;
}

CouplingSet random_couplings(int range, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    std::vector<double> v;
    for (int d = 2; d <= range; ++d) v.push_back(u(rng));
    return CouplingSet::manual(v);
}

}  // namespace

TEST_CASE("constraint constants") {
    const auto k = solve_constraint();
    CHECK(std::abs(k.h0 - 0.0506656) < 1e-6);
    CHECK(std::abs(k.delta - 0.835845) < 1e-5);
    CHECK(std::abs(k.tau - 4.85962) < 1e-4);
    CHECK(std::abs(k.level_spacing() - 1.29294) < 1e-5);
    CHECK(std::abs(constraint_residual(k.h0)) < 1e-12);
    CHECK(k.delta == doctest::Approx((1 - k.h) * (1 - k.h)));
}

TEST_CASE("optimal range-4 strength") {
    const double x = optimal_h2_analytic();
    CHECK(std::abs(x - 0.0527864) < 1e-7);
    CHECK(std::abs(1.0 - 20.0 * x * (1.0 - x)) < 1e-14);
    CHECK(std::abs(range4_residual_error(x) + 0.0845) < 5e-4);
}

TEST_CASE("ansatz values") {
    const auto c = ansatz_couplings(0.05, 6);
    CHECK(c.h(2) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(c.h(3) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(c.h(4) == doctest::Approx(0.05 / 16).epsilon(1e-14));
    CHECK(c.h(7) == 0.0);
    CHECK(c.range() == 6);
    CHECK(c.provenance == CouplingProvenance::Ansatz);
    auto j = to_json(c);
    auto back = couplings_from_json(j);
    CHECK(back.values == c.values);
    CHECK(back.provenance == CouplingProvenance::Ansatz);
}

TEST_CASE("PXP against Kronecker construction") {
    for (auto bc : {Boundary::Periodic, Boundary::Open}) {
        ConstrainedBasis basis(8, bc);
        const Dense expect = kron_hamiltonian(basis, CouplingSet::none());
        const auto H = build_pxp(basis);
        CHECK((H.dense() - expect).norm() == 0.0);
        CHECK(H.trace() == 0.0);
        CHECK(H.is_hermitian_exact());
        Eigen::SelfAdjointEigenSolver<Dense> es(expect);
        Eigen::SelfAdjointEigenSolver<Dense> got(H.dense());
        CHECK((es.eigenvalues() - got.eigenvalues()).norm() < 1e-12);
    }
}

TEST_CASE("deformed Hamiltonian against Kronecker construction") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        ConstrainedBasis pbc(8, Boundary::Periodic);
        const auto c = random_couplings(4, rng);
        CHECK((build_hamiltonian(pbc, c).dense() - kron_hamiltonian(pbc, c)).norm() < 1e-14);
        ConstrainedBasis obc(8, Boundary::Open);
        const auto co = random_couplings(6, rng);
        CHECK((build_hamiltonian(obc, co).dense() - kron_hamiltonian(obc, co)).norm() < 1e-14);
        const auto H = build_hamiltonian(pbc, c);
        const auto D = build_deformation(pbc, c);
        CHECK((H.dense() - build_pxp(pbc).dense() - D.dense()).norm() < 1e-14);
        CHECK(H.is_hermitian_exact());
        CHECK(H.trace() == 0.0);
    }
}

TEST_CASE("zero couplings give the bare model") {
    ConstrainedBasis basis(10, Boundary::Periodic);
    const auto zero = CouplingSet::manual({0.0, 0.0, 0.0});
    CHECK(build_deformation(basis, zero).nnz() == 0);
    CHECK((build_hamiltonian(basis, zero).dense() - build_pxp(basis).dense()).norm() == 0.0);
}

TEST_CASE("range limit on periodic chains") {
    ConstrainedBasis basis(8, Boundary::Periodic);
    CHECK_THROWS_AS(build_hamiltonian(basis, CouplingSet::manual({0.1, 0.1, 0.1, 0.1})), Error);
    CHECK_NOTHROW(build_hamiltonian(ConstrainedBasis(8, Boundary::Open), CouplingSet::manual({0.1, 0.1, 0.1, 0.1})));
}

TEST_CASE("open boundary drops missing sigma-z factors") {
    const int n = 8;
    const auto c = CouplingSet::manual({0.1, 0.03});
    // Site 0 flips with only right-hand partners at distances 2 and 3.
    const Config cfg = 0b00100000;  // site 5 up
    const double amp = flip_amplitude(cfg, 0, n, Boundary::Open, c);
    CHECK(amp == doctest::Approx(1.0 - 0.1 * (-1) - 0.03 * (-1)));
    const Config cfg2 = 0b00001100 & 0b00000100;  // site 2 up
    CHECK(flip_amplitude(cfg2, 0, n, Boundary::Open, c) == doctest::Approx(1.0 - 0.1 * 1 - 0.03 * (-1)));
}

TEST_CASE("Neel flip element and bare second moment") {
    for (int n : {8, 12, 16}) {
        ConstrainedBasis basis(n, Boundary::Periodic);
        const auto idx = neel_state(basis);
        const auto H0 = build_pxp(basis);
        Eigen::VectorXd z2 = basis_vector(basis, idx.z2);
        Eigen::VectorXd v = H0 * z2;
        CHECK(v.squaredNorm() == doctest::Approx(n / 2.0));

        const double h2 = 0.07;
        const auto H = build_hamiltonian(basis, CouplingSet::manual({h2}));
        const Config z = neel_config(n);
        for (int i = 0; i < n; i += 2) {
            const auto j = basis.index_of(z ^ (Config{1} << i));
            CHECK(H.coeff(static_cast<int>(j), static_cast<int>(idx.z2)) == doctest::Approx(1 - 2 * h2).epsilon(1e-15));
        }
    }
}

TEST_CASE("raising and lowering split") {
    std::mt19937_64 rng(9);
    for (int n : {8, 12}) {
        ConstrainedBasis basis(n, Boundary::Periodic);
        const auto c = random_couplings(n / 2, rng);
        const auto pm = split_pm(basis, c);
        const auto H = build_hamiltonian(basis, c);
        CHECK((pm.plus.dense() + pm.minus.dense() - H.dense()).norm() == 0.0);
        CHECK((pm.plus.dense().transpose() - pm.minus.dense()).norm() == 0.0);
        const auto idx = neel_state(basis);
        Eigen::VectorXd z2 = basis_vector(basis, idx.z2);
        CHECK((pm.minus * z2).norm() == 0.0);
        // Every H+ entry advances the grade by one.
        for (int r = 0; r < pm.plus.rows(); ++r)
            for (int p = pm.plus.row_ptr()[r]; p < pm.plus.row_ptr()[r + 1]; ++p)
                CHECK(fsa_grade(basis.state(r), n) == fsa_grade(basis.state(pm.plus.col_index()[p]), n) + 1);
    }
    CHECK_THROWS_AS(split_pm(ConstrainedBasis(8, Boundary::Open), CouplingSet::none()), Error);
}

TEST_CASE("grade extremes") {
    CHECK(fsa_grade(neel_config(10), 10) == 0);
    CHECK(fsa_grade(neel_prime_config(10), 10) == 10);
    CHECK(fsa_grade(0, 10) == 5);
}

TEST_CASE("first FSA step norm for range-4") {
    for (int n : {8, 12, 16}) {
        const int L = n / 2;
        ConstrainedBasis basis(n, Boundary::Periodic);
        const double h2 = 0.0527864;
        const auto pm = split_pm(basis, CouplingSet::manual({h2}));
        Eigen::VectorXd z2 = basis_vector(basis, neel_state(basis).z2);
        CHECK((pm.plus * z2).squaredNorm() == doctest::Approx(L * (1 - 2 * h2) * (1 - 2 * h2)).epsilon(1e-13));
    }
}

TEST_CASE("commutator on the Neel state") {
    const auto k = solve_constraint();
    for (int n : {8, 12, 16}) {
        const int L = n / 2;
        ConstrainedBasis basis(n, Boundary::Periodic);
        Eigen::VectorXd z2 = basis_vector(basis, neel_state(basis).z2);

        auto pm0 = split_pm(basis, CouplingSet::none());
        auto hz0 = commutator_hz(pm0.plus, pm0.minus);
        CHECK(((hz0 * z2) + L * z2).norm() < 1e-13);

        const auto c = ansatz_couplings(k.h0, L);
        auto pm = split_pm(basis, c);
        auto hz = commutator_hz(pm.plus, pm.minus);
        const double h = alternating_sum(c);
        CHECK(((hz * z2) + L * (1 - h) * (1 - h) * z2).norm() < 1e-12);
        CHECK(hz.is_hermitian_exact());
        CHECK((hz.dense() - (pm.plus.dense() * pm.minus.dense() - pm.minus.dense() * pm.plus.dense())).norm() < 1e-12);
    }
}

TEST_CASE("first-step H^z expectation for range-4") {
    for (int n : {12, 16, 20}) {
        const int L = n / 2;
        ConstrainedBasis basis(n, Boundary::Periodic);
        for (double h2 : {0.0, 0.03, 0.0527864, 0.11}) {
            auto pm = split_pm(basis, CouplingSet::manual({h2}));
            auto hz = commutator_hz(pm.plus, pm.minus);
            Eigen::VectorXd v = pm.plus * basis_vector(basis, neel_state(basis).z2);
            v.normalize();
            const double got = v.dot(hz * v);
            CHECK(got == doctest::Approx(-L + 2 - 4 * h2 * (1 - h2) * (6 - L)).epsilon(1e-12));
        }
    }
}

TEST_CASE("operators commute with two-site translation") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    for (int n : {8, 10, 12}) {
        ConstrainedBasis basis(n, Boundary::Periodic);
        const auto c = random_couplings(n / 2, rng);
        const auto H = build_hamiltonian(basis, c);
        Eigen::VectorXd x(basis.dim());
        for (auto& v : x) v = g(rng);
        Eigen::VectorXd a = H * apply_translation(basis, x, 2);
        Eigen::VectorXd b = apply_translation(basis, H * x, 2);
        CHECK((a - b).norm() < 1e-12);
    }
}

TEST_CASE("coordinate export") {
    ConstrainedBasis basis(4, Boundary::Periodic);
    std::ostringstream os;
    build_pxp(basis).write_coordinates(os);
    CHECK(os.str().rfind("# rows 7 cols 7 nnz 16", 0) == 0);
}
