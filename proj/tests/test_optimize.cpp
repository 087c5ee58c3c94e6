#include <doctest.h>

#include <cmath>
#include <limits>

#include "pxpscar/errors.hpp"
#include "pxpscar/dynamics.hpp"
#include "pxpscar/optimize.hpp"

using namespace pxp;

namespace {

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double rosenbrock(const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
}

void check_monotone(const OptimizationTrace& t) {
    for (std::size_t i = 1; i < t.iterates.size(); ++i) CHECK(t.iterates[i].cost <= t.iterates[i - 1].cost);
}

}  // namespace

TEST_CASE("Nelder-Mead on the sphere") {
    const auto t = nelder_mead(sphere, Eigen::Vector3d(1, 1, 1));
    CHECK(t.converged);
    CHECK(Eigen::Map<const Eigen::VectorXd>(t.best_x.data(), 3).norm() < 1e-4);
    CHECK(t.best_cost == t.iterates.back().cost);
    check_monotone(t);
}

TEST_CASE("Nelder-Mead on the Rosenbrock valley") {
    const auto t = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0));
    MESSAGE("Rosenbrock: " << t.best_x[0] << ", " << t.best_x[1] << " after " << t.iterates.size() << " iterations ("
                           << t.termination << ")");
    CHECK(t.converged);
    CHECK(std::abs(t.best_x[0] - 1.0) < 1e-3);
    CHECK(std::abs(t.best_x[1] - 1.0) < 1e-3);
    check_monotone(t);
}

TEST_CASE("Nelder-Mead determinism and limits") {
    NelderMeadOptions o;
    o.seed = 9;
    const auto a = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
    const auto b = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
    REQUIRE(a.iterates.size() == b.iterates.size());
    for (std::size_t i = 0; i < a.iterates.size(); ++i) {
        CHECK(a.iterates[i].x == b.iterates[i].x);
        CHECK(a.iterates[i].cost == b.iterates[i].cost);
    }
    CHECK(to_json(a, false).dump() == to_json(b, false).dump());
    CHECK(a.seed == 9);

    o.max_iterations = 5;
    const auto c = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
    CHECK(!c.converged);
    CHECK(c.termination == "max_iterations");
    CHECK(c.iterates.size() == 6);

    // A zero coordinate gets an absolute initial step.
    int calls = 0;
    Eigen::VectorXd seen;
    nelder_mead(
        [&](const Eigen::VectorXd& x) {
            if (++calls == 2) seen = x;
            return x.squaredNorm();
        },
        Eigen::Vector2d(0.0, 1.0));
    CHECK(seen(0) == 0.00025);
    CHECK(seen(1) == 1.0);
}

TEST_CASE("Nelder-Mead aborts on a non-finite cost") {
    auto wall = [](const Eigen::VectorXd& x) {
        return x(0) < 0.5 ? std::numeric_limits<double>::infinity() : (x(0) - 0.2) * (x(0) - 0.2) + x(1) * x(1);
    };
    const auto t = nelder_mead(wall, Eigen::Vector2d(1.0, 1.0));
    CHECK(t.aborted);
    CHECK(!t.converged);
    CHECK(t.termination == "non-finite cost");
    CHECK(std::isfinite(t.best_cost));
    CHECK(!t.iterates.empty());
    check_monotone(t);
    CHECK_THROWS_AS(nelder_mead(wall, Eigen::Vector2d(0.0, 0.0)), Error);
}

TEST_CASE("cost kinds and error handling") {
    for (auto k : all_cost_kinds()) CHECK(parse_cost_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_cost_kind("fidelity"), Error);
    CostSpec s;
    s.range = 9;
    CHECK_THROWS_AS(make_cost(s), Error);

    // h2 = 1/2 kills the forward-scattering chain: +inf with a logged reason.
    s.range = 2;
    s.n_sites = 12;
    const auto cost = make_cost(s);
    Eigen::VectorXd h(1);
    h << 0.5;
    CHECK(std::isinf(cost(h)));
    REQUIRE(cost.failures().size() == 1);
    CHECK(cost.failures()[0].find("degenerate-coupling") != std::string::npos);
}

TEST_CASE("every cost improves from the bare chain to the ansatz") {
    for (auto k : all_cost_kinds()) {
        CostSpec s;
        s.kind = k;
        s.n_sites = 14;
        s.range = 4;
        const auto cost = make_cost(s);
        const double bare = cost(Eigen::VectorXd::Zero(3)), ansatz = cost(ansatz_vector(4));
        MESSAGE(std::string(to_string(k)) << ": bare " << bare << " ansatz " << ansatz);
        CHECK(std::isfinite(ansatz));
        CHECK(ansatz < bare);
        CHECK(ansatz >= 0.0);
    }
}

TEST_CASE("fsa cost at range 2 is minimized near the analytic h2") {
    CostSpec s;
    s.kind = CostKind::Fsa;
    s.n_sites = 16;
    s.range = 2;
    const auto r = optimize_couplings(s);
    MESSAGE("h2 = " << r.trace.best_x[0] << " after " << r.trace.evaluations << " evaluations");
    CHECK(r.trace.converged);
    CHECK(std::abs(r.trace.best_x[0] - optimal_h2_analytic()) <= 0.05 * optimal_h2_analytic());
    CHECK(r.negative_d.empty());
    check_monotone(r.trace);
}

TEST_CASE("fid cost matches a direct peak search") {
    CostSpec s;
    s.kind = CostKind::Fid;
    s.n_sites = 12;
    s.range = 6;
    const auto cost = make_cost(s);
    const auto h = ansatz_vector(6);
    const double v = cost(h);
    const auto sf = neel_spectral_fidelity(12, to_couplings(h));
    const auto k = solve_constraint();
    const auto peak = golden_section_max([&](double t) { return sf(t); }, 0.9 * k.tau, 1.1 * k.tau, 1e-10);
    CHECK(std::abs(v - (1.0 - peak.g)) < 1e-9);
}
