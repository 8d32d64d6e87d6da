#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "grushin/carleman.hpp"

using namespace grushin;

namespace {

ProblemConfig carleman_config(double gamma, double T, int nx, int nt) {
    ProblemConfig cfg;
    cfg.gamma = gamma;
    cfg.T = T;
    cfg.nx = nx;
    cfg.nt = nt;
    return ProblemConfig::with_default_strip(cfg);
}

struct Run {
    CarlemanCheckReport integrated;
    CaccioppoliReport cacc;
};

Run run_checks(double gamma, int n, int nx, int nt) {
    const ProblemConfig cfg = carleman_config(gamma, 1.0, nx, nt);
    const Grid1D g = make_grid(nx);
    const WeightProfile p = build_weight(gamma, cfg.a_prime, cfg.b_prime, g);
    const CarlemanConstants c = extract_constants(p, cfg, n);
    const ModeOperator op = assemble_mode_operator(n, gamma, g);
    const EigenPair pair = ground_eigenpair(op);
    const TimeGrid tg = make_time_grid(cfg.T, nt);
    return {integrated_check(p, c, op, pair.v, cfg, tg), caccioppoli_check(op, pair.v, cfg, tg)};
}

}  // namespace

TEST_CASE("regular weight satisfies the hypotheses") {
    const Grid1D g = make_grid(401);
    const WeightProfile p = build_weight(0.75, 0.4, 0.7, g);
    CHECK(p.regime == WeightRegime::regular);
    CHECK(weight_violation(p).empty());
    double lo = 1e300;
    for (std::size_t i = 1; i + 1 < p.x.size(); ++i) lo = std::min(lo, p.beta[i]);
    CHECK(lo >= 1.0 + kBetaFloorGap);
    CHECK(lo <= 1.0 + kBetaFloorGap + 1e-4);
    CHECK(p.d1(1.0) == doctest::Approx(p.slope));
    CHECK(p.d2(-0.9) == doctest::Approx(-p.eta));
}

TEST_CASE("singular weight identities near the origin") {
    const Grid1D g = make_grid(401);
    const WeightProfile p = build_weight(0.25, 0.4, 0.7, g);
    CHECK(p.regime == WeightRegime::singular);
    CHECK(weight_violation(p).empty());
    for (double x : {-0.8 * p.epsilon_nbhd, -0.01, 0.003, 0.5 * p.epsilon_nbhd}) {
        const double s = (x < 0 ? -1.0 : 1.0) * std::pow(std::abs(x), 0.5);
        CHECK(p.d1(x) * p.d1(x) == doctest::Approx(s + p.c1).epsilon(1e-13));
        CHECK(p.d2(x) * p.d1(x) == doctest::Approx(0.25 * std::pow(std::abs(x), -0.5)).epsilon(1e-12));
    }
    // beta is C^1 across the edges of the neighbourhood
    const double e = p.epsilon_nbhd, d = 1e-7;
    CHECK(std::abs(p.value(e + d) - p.value(e - d)) <= 2.0 * d * std::abs(p.d1(e)) * 1.01);
    CHECK(std::abs(p.value(-e - d) - p.value(-e + d)) <= 2.0 * d * std::abs(p.d1(-e)) * 1.01);
    CHECK(p.d1(e + d) == doctest::Approx(p.d1(e - d)).epsilon(1e-5));
    CHECK(p.d1(-e - d) == doctest::Approx(p.d1(-e + d)).epsilon(1e-5));
}

TEST_CASE("weights reject unsupported input") {
    const Grid1D g = make_grid(101);
    CHECK_THROWS_AS(build_weight(1.5, 0.4, 0.7, g), Error);
    CHECK_THROWS_AS(build_weight(0.75, 0.7, 0.4, g), Error);
}

TEST_CASE("alpha") {
    const Grid1D g = make_grid(101);
    const WeightProfile p = build_weight(1.0, 0.4, 0.7, g);
    const double M = 3.0, T = 2.0;
    CHECK(alpha_eval(p, M, T, T / 2, 0.1) == doctest::Approx(4.0 * M * p.value(0.1) / (T * T)));
    CHECK(alpha_eval(p, M, T, 0.3, -0.2) == doctest::Approx(alpha_eval(p, M, T, T - 0.3, -0.2)));
    CHECK_THROWS_AS(alpha_eval(p, M, T, 0.0, 0.1), Error);
    CHECK_THROWS_AS(alpha_eval(p, M, T, T, 0.1), Error);
}

TEST_CASE("bracket agrees with nested finite differences") {
    const double M = 1.7, T = 1.0, t0 = 0.3, x0 = 0.4;
    auto beta = [](double x) { return 2.0 + 0.5 * std::sin(x) + 0.2 * x * x; };
    auto a = [&](double t, double x) { return M * beta(x) / (t * (T - t)); };
    const double h1 = 1e-4, h2 = 1e-3;
    auto ax = [&](double t, double x) { return (a(t, x + h1) - a(t, x - h1)) / (2 * h1); };
    auto at = [&](double t, double x) { return (a(t + h1, x) - a(t - h1, x)) / (2 * h1); };
    auto q = [&](double t, double x) { return at(t, x) - ax(t, x) * ax(t, x); };
    auto axx = [&](double t, double x) { return (ax(t, x + h2) - ax(t, x - h2)) / (2 * h2); };
    const double term1 = -0.5 * (q(t0 + h2, x0) - q(t0 - h2, x0)) / (2 * h2);
    const double term2 =
        (q(t0, x0 + h2) * ax(t0, x0 + h2) - q(t0, x0 - h2) * ax(t0, x0 - h2)) / (2 * h2);
    const double term3 = -0.5 * axx(t0, x0) * axx(t0, x0);
    const double fd = term1 + term2 + term3;
    const double b1 = 0.5 * std::cos(x0) + 0.4 * x0, b2 = -0.5 * std::sin(x0) + 0.4;
    CHECK(carleman_bracket(beta(x0), b1, b2, M, t0, T) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("constants scale with the mode index") {
    const Grid1D g = make_grid(201);
    for (double gamma : {0.25, 0.75}) {
        const ProblemConfig cfg = carleman_config(gamma, 1.0, 201, 200);
        const WeightProfile p = build_weight(gamma, cfg.a_prime, cfg.b_prime, g);
        const CarlemanConstants c8 = extract_constants(p, cfg, 8), c16 = extract_constants(p, cfg, 16);
        CHECK(c16.M2 / c8.M2 == doctest::Approx(2.0));
        CHECK(c16.M1 == c8.M1);
        CHECK(c8.M >= std::max(c8.M1, c8.M2));
        CHECK(c8.C12 == doctest::Approx(2.0 * (c8.C9 + c8.C10 * c8.C11)));
        CHECK(pointwise_check(p, c8, cfg).pass());
    }
}

TEST_CASE("sharp time is finite for gamma = 1") {
    const Grid1D g = make_grid(201);
    const ProblemConfig cfg = carleman_config(1.0, 1.0, 201, 200);
    const WeightProfile p = build_weight(1.0, cfg.a_prime, cfg.b_prime, g);
    const CarlemanConstants c = extract_constants(p, cfg, 8);
    CHECK(c.c_star > 0.0);
    CHECK(std::isfinite(c.T_sharp));
    CHECK(c.T_sharp == doctest::Approx(27.0 * c.c3 * c.calC / c.c_star));
}

TEST_CASE("integrated and Caccioppoli checks pass with stable margins") {
    const Run coarse = run_checks(0.75, 16, 201, 400);
    const Run fine = run_checks(0.75, 16, 401, 800);
    for (const Run* r : {&coarse, &fine}) {
        CHECK(r->integrated.pointwise_pass);
        CHECK(r->integrated.integrated_pass);
        CHECK(r->cacc.holds);
    }
    CHECK(std::abs(fine.integrated.log_margin - coarse.integrated.log_margin) <=
          0.1 * std::abs(coarse.integrated.log_margin));
    const double ratio = fine.cacc.margin / coarse.cacc.margin;
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
}

TEST_CASE("integrated check on zero and random data") {
    const ProblemConfig cfg = carleman_config(1.0, 1.0, 201, 400);
    const Grid1D g = make_grid(cfg.nx);
    const WeightProfile p = build_weight(1.0, cfg.a_prime, cfg.b_prime, g);
    const CarlemanConstants c = extract_constants(p, cfg, 8);
    const ModeOperator op = assemble_mode_operator(8, 1.0, g);
    const TimeGrid tg = make_time_grid(cfg.T, cfg.nt);
    std::vector<double> zero(op.size(), 0.0);
    CHECK(integrated_check(p, c, op, zero, cfg, tg).integrated_pass);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> g0(op.size());
    for (double& v : g0) v = normal(rng);
    CHECK(integrated_check(p, c, op, g0, cfg, tg).integrated_pass);
}
