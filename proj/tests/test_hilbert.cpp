#include <doctest.h>

#include <random>
#include <set>

#include "pxpscar/errors.hpp"
#include "pxpscar/hilbert.hpp"

using namespace pxp;

namespace {

// Exhaustive filter over all 2^n bit strings.
std::vector<Config> brute_force_states(int n, Boundary b) {
    std::vector<Config> out;
    for (Config c = 0; c < (Config{1} << n); ++c) {
        bool ok = true;
        for (int i = 0; i + 1 < n; ++i)
            if (((c >> i) & 1) && ((c >> (i + 1)) & 1)) ok = false;
        if (b == Boundary::Periodic && n > 1 && (c & 1) && ((c >> (n - 1)) & 1)) ok = false;
        if (ok) out.push_back(c);
    }
    return out;
}

long lucas(int n) {
    long a = 2, b = 1;
    for (int i = 0; i < n; ++i) {
        long t = a + b;
        a = b;
        b = t;
    }
    return a;
}

long fibonacci(int n) {
    long a = 0, b = 1;
    for (int i = 0; i < n; ++i) {
        long t = a + b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

TEST_CASE("small periodic dimensions") {
    ConstrainedBasis b2(2, Boundary::Periodic);
    CHECK(b2.dim() == 3);
    CHECK(b2.state(0) == 0b00);
    CHECK(b2.state(1) == 0b01);
    CHECK(b2.state(2) == 0b10);
    CHECK(ConstrainedBasis(8, Boundary::Periodic).dim() == 47);
    CHECK(ConstrainedBasis(12, Boundary::Periodic).dim() == 322);
    CHECK(ConstrainedBasis(8, Boundary::Open).dim() == 55);
}

TEST_CASE("enumeration matches exhaustive filter and dimension law") {
    for (int n = 2; n <= 20; n += 2) {
        for (auto bc : {Boundary::Periodic, Boundary::Open}) {
            ConstrainedBasis basis(n, bc);
            const auto expect = brute_force_states(n, bc);
            REQUIRE(basis.dim() == expect.size());
            CHECK(std::equal(expect.begin(), expect.end(), basis.states().begin()));
            const long law = bc == Boundary::Periodic ? lucas(n) : fibonacci(n + 2);
            CHECK(static_cast<long>(basis.dim()) == law);
        }
    }
}

TEST_CASE("index round trip and rejection of invalid patterns") {
    ConstrainedBasis basis(16, Boundary::Periodic);
    for (std::size_t j = 0; j < basis.dim(); ++j) CHECK(basis.index_of(basis.state(j)) == j);
    std::mt19937_64 rng(3);
    int rejected = 0;
    for (int t = 0; t < 2000; ++t) {
        const Config c = rng();
        if (!is_blockade_valid(c, 16, Boundary::Periodic)) {
            ++rejected;
            CHECK_FALSE(basis.contains(c));
        }
    }
    CHECK(rejected > 0);
    CHECK_THROWS_AS(basis.index_of(0b11), Error);
}

TEST_CASE("invalid sizes") {
    CHECK_THROWS_AS(ConstrainedBasis(7, Boundary::Periodic), Error);
    CHECK_THROWS_AS(ConstrainedBasis(0, Boundary::Periodic), Error);
    try {
        ConstrainedBasis(7, Boundary::Periodic);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
        CHECK(std::string(e.what()).find("N must be even") != std::string::npos);
    }
}

TEST_CASE("Neel states") {
    ConstrainedBasis b4(4, Boundary::Periodic);
    CHECK(neel_config(4) == 0b0101);
    CHECK(neel_prime_config(4) == 0b1010);
    CHECK(neel_config(2) == 0b01);
    for (int n = 2; n <= 16; n += 2) {
        ConstrainedBasis b(n, Boundary::Periodic);
        auto idx = neel_state(b);
        CHECK(idx.z2 != idx.z2_prime);
        CHECK(b.state(idx.z2) == neel_config(n));
    }
}

TEST_CASE("sector dimensions partition the space") {
    for (int n : {8, 10, 12, 14}) {
        ConstrainedBasis basis(n, Boundary::Periodic);
        for (int step : {1, 2}) {
            std::size_t total = 0;
            for (const auto& label : all_sector_labels(n, step)) total += build_sector(basis, label).dim();
            CHECK(total == basis.dim());
        }
    }
}

TEST_CASE("sector dimension matches brute-force orbit counting") {
    // Count orbits under translation by two and reflection at k=0 whose
    // symmetric combination does not vanish, with an independent implementation.
    const int n = 12;
    const auto states = brute_force_states(n, Boundary::Periodic);
    auto rot = [&](Config c, int s) {
        return ((c << s) | (c >> (n - s))) & ((Config{1} << n) - 1);
    };
    auto refl = [&](Config c) {
        Config r = 0;
        for (int i = 0; i < n; ++i)
            if ((c >> i) & 1) r |= Config{1} << ((n - i) % n);
        return r;
    };
    std::size_t plus = 0, minus = 0;
    std::set<Config> seen;
    for (Config c : states) {
        if (seen.count(c)) continue;
        std::vector<Config> images;
        for (int s = 0; s < n; s += 2) {
            images.push_back(s == 0 ? c : rot(c, s));
            images.push_back(refl(s == 0 ? c : rot(c, s)));
        }
        for (Config g : images) seen.insert(g);
        // Symmetric sum survives always; antisymmetric survives unless the
        // orbit is closed under reflection at zero momentum.
        ++plus;
        std::set<Config> trans;
        for (int s = 0; s < n; s += 2) trans.insert(s == 0 ? c : rot(c, s));
        if (!trans.count(refl(c))) ++minus;
    }
    ConstrainedBasis basis(n, Boundary::Periodic);
    CHECK(build_sector(basis, {2, 0, 1}).dim() == plus);
    CHECK(build_sector(basis, {2, 0, -1}).dim() == minus);
}

TEST_CASE("Neel combination is symmetry pure") {
    const int n = 8;
    ConstrainedBasis basis(n, Boundary::Periodic);
    auto idx = neel_state(basis);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.dim());
    psi(idx.z2) = psi(idx.z2_prime) = 1.0 / std::sqrt(2.0);
    for (int step : {1, 2}) {
        double captured = 0.0;
        for (const auto& label : all_sector_labels(n, step)) {
            auto sector = build_sector(basis, label);
            if (sector.empty()) continue;
            const double w = sector.project(basis, psi).squaredNorm();
            const bool target = label.momentum == 0 && label.inversion == 1;
            if (target) {
                CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
            } else {
                CHECK(w < 1e-24);
            }
            captured += w;
        }
        CHECK(captured == doctest::Approx(1.0).epsilon(1e-12));
    }
    // With two-site translations the bare Neel state is already pure.
    Eigen::VectorXcd z2 = Eigen::VectorXcd::Zero(basis.dim());
    z2(idx.z2) = 1.0;
    auto sector = build_sector(basis, {2, 0, 1});
    CHECK(sector.project(basis, z2).squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project and lift are adjoint isometries") {
    const int n = 10;
    ConstrainedBasis basis(n, Boundary::Periodic);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (const auto& label : all_sector_labels(n, 1)) {
        auto sector = build_sector(basis, label);
        if (sector.empty()) continue;
        Eigen::VectorXcd x(sector.dim());
        for (auto& v : x) v = {g(rng), g(rng)};
        Eigen::VectorXcd full = sector.lift(basis, x);
        CHECK(full.norm() == doctest::Approx(x.norm()).epsilon(1e-12));
        CHECK((sector.project(basis, full) - x).norm() < 1e-12);
    }
}

TEST_CASE("open boundary has no sectors") {
    ConstrainedBasis basis(8, Boundary::Open);
    try {
        build_sector(basis, {});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Unsupported);
    }
}

TEST_CASE("invalid momentum labels") {
    ConstrainedBasis basis(8, Boundary::Periodic);
    CHECK_THROWS_AS(build_sector(basis, {2, 4, 0}), Error);
    CHECK_THROWS_AS(build_sector(basis, {2, 1, 1}), Error);
    CHECK_THROWS_AS(build_sector(basis, {3, 0, 0}), Error);
    CHECK(SectorLabel::parse("k0,I+") == SectorLabel{2, 0, 1});
    CHECK(SectorLabel::parse("t1:k4,I-") == SectorLabel{1, 4, -1});
}

TEST_CASE("basis summary json") {
    auto j = basis_summary(ConstrainedBasis(12, Boundary::Periodic), 2);
    CHECK(j["dim"] == 322);
    CHECK(j["sector_dim_total"] == 322);
}
