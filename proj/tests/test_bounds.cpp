#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "grushin/bounds.hpp"
#include "grushin/evolution.hpp"

using namespace grushin;
using std::numbers::pi;

TEST_CASE("hat bound closed form at gamma = 1") {
    CHECK(hat_constant(1.0) == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
    for (int n : {4, 32, 256}) {
        const HatBound hb = hat_bound(n, 1.0);
        CHECK_FALSE(hb.clamped);
        CHECK(hb.bound == doctest::Approx(6.0 * pi * n / std::sqrt(30.0)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(hat_bound(0, 1.0), Error);
}

TEST_CASE("hat bound dominates the ground eigenvalue") {
    for (double gamma : {0.5, 1.0, 2.0}) {
        const Grid1D g = make_grid(required_nx(gamma, 256));
        std::vector<int> ns;
        for (int n = 4; n <= 256; n *= 2) ns.push_back(n);
        const auto pairs = ground_eigenpairs(gamma, ns, g);
        for (const auto& p : pairs) {
            const HatBound hb = hat_bound(p.n, gamma);
            CHECK(hb.k_bar > 1.0);
            CHECK(p.lambda <= hb.bound);
            if (gamma == 1.0 && p.n >= 32) {
                CHECK(hb.bound / p.lambda >= 1.05);
                CHECK(hb.bound / p.lambda <= 1.15);
            }
        }
    }
}

TEST_CASE("supersolution comparison at gamma = 2") {
    const int n = 64;
    const Grid1D g = make_grid(comparison_nx(n));
    const EigenPair p = ground_eigenpair(assemble_mode_operator(n, 2.0, g));
    const Supersolution s = supersolution_params(p);
    CHECK(s.x_n == doctest::Approx(std::pow(p.lambda / std::pow(n * pi, 2.0), 0.25)));
    const ComparisonReport r = comparison_check(p, s, g, 0.3);
    CHECK(r.applicable);
    CHECK(r.holds);
    CHECK(r.derivative_check);
    CHECK(r.derivative <= std::sqrt(s.x_n) * p.lambda);
    CHECK_THROWS_AS(comparison_check(p, s, make_grid(401), 0.3), Error);
    CHECK_THROWS_AS(supersolution_params(ground_eigenpair(assemble_mode_operator(4, 0.5, make_grid(401)))), Error);
}

TEST_CASE("comparison is not applicable while x_n > a") {
    const Grid1D g = make_grid(comparison_nx(2));
    const EigenPair p = ground_eigenpair(assemble_mode_operator(2, 1.0, g));
    const Supersolution s = supersolution_params(p);
    REQUIRE(s.x_n > 0.3);
    CHECK_FALSE(comparison_check(p, s, g, 0.3).applicable);
}

TEST_CASE("discrete test ratio equals the time-stepped trajectory ratio") {
    ProblemConfig cfg = ProblemConfig::with_default_strip({});
    cfg.gamma = 2.0;
    cfg.T = 0.5;
    const Grid1D g = make_grid(201);
    const ModeOperator op = assemble_mode_operator(8, 2.0, g);
    const EigenPair p = ground_eigenpair(op);
    const TimeGrid tg = make_time_grid(cfg.T, 300);
    const RhoSample s = rho_functional_discrete(p, g, cfg, tg);
    const ModeTrajectory tr = solve_adjoint_mode(op, p.v, tg);
    const auto strip = strip_mask(g, cfg.a, cfg.b);
    double observed = 0.0;
    for (int k = 0; k <= tg.steps; ++k) observed += tg.weight(k) * tg.dt * strip_energy(tr.states.row(k), strip, g);
    const double terminal = std::pow(interior_norm(tr.states.row(tg.steps), g), 2.0);
    CHECK(s.log_cost_lower == doctest::Approx(std::log(terminal / observed)).epsilon(1e-9));
    // the continuum form
    const RhoSample c = rho_functional(p, g, cfg);
    CHECK(c.log_rho == doctest::Approx(2 * p.lambda * cfg.T - std::log(p.lambda) + std::log(c.strip_mass)));
    CHECK_THROWS_AS(rho_from_mass(1, 1.0, 0.0, 1.0), Error);
}

TEST_CASE("gamma = 1 crossover estimate") {
    ProblemConfig cfg = ProblemConfig::with_default_strip({});
    std::vector<int> ns;
    for (int n = 32; n <= 256; n += 16) ns.push_back(n);
    const Grid1D g = make_grid(required_nx(1.0, 256));
    const CrossoverReport r = crossover_estimate(cfg, ns, g);
    CHECK(r.t_asymptotic == doctest::Approx(0.045));
    CHECK(r.t_hat >= 0.0405);
    CHECK(r.t_hat <= 0.0495);
    CHECK_FALSE(r.flagged);
    const CrossoverReport s = crossover_estimate(cfg, ns, g, Execution::serial);
    CHECK(s.t_hat == r.t_hat);
    cfg.gamma = 2.0;
    CHECK_THROWS_AS(crossover_estimate(cfg, ns, g), Error);
}
