#include <cmath>
#include <vector>

#include "doctest.h"
#include "grushin/control.hpp"

using namespace grushin;

namespace {

ProblemConfig control_config() {
    ProblemConfig cfg;
    cfg.gamma = 0.5;
    cfg.T = 0.3;
    cfg.nx = 61;
    cfg.nt = 80;
    return ProblemConfig::with_default_strip(cfg);
}

}  // namespace

TEST_CASE("HUM identities hold for one mode") {
    const ProblemConfig cfg = control_config();
    const Grid1D g = make_grid(cfg.nx);
    const ModeOperator op = assemble_mode_operator(2, cfg.gamma, g);
    const TimeGrid tg = make_time_grid(cfg.T, cfg.nt);
    const auto f0 = random_initial_modes(g, 2, 5)[1];
    const double eps = 1e-6;
    const HumResult r = hum_solve_mode(op, f0, tg, cfg, eps);
    REQUIRE(r.converged);
    double scale = 0.0;
    for (double v : r.terminal) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < r.terminal.size(); ++i)
        CHECK(std::abs(r.terminal[i] + eps * r.g0_opt[i]) <= 1e-8 * scale);
    CHECK(r.control_energy <= r.hum_quadratic * (1.0 + 1e-10));

    // the control vanishes off the strip
    const auto strip = strip_mask(g, cfg.a, cfg.b);
    for (std::size_t k = 0; k < r.control.rows; ++k)
        for (std::size_t i = 0; i < r.control.cols; ++i)
            if (!strip[i]) CHECK(r.control(k, i) == 0.0);

    const HumResult tighter = hum_solve_mode(op, f0, tg, cfg, eps / 10.0);
    CHECK(tighter.residual < r.residual);
}

TEST_CASE("full control: parallel equals serial and residual falls with epsilon") {
    const ProblemConfig cfg = control_config();
    const Grid1D g = make_grid(cfg.nx);
    const auto f0 = random_initial_modes(g, 3, 11);
    const ControlResult par = control_full(cfg, f0, 1e-6, Execution::parallel);
    const ControlResult ser = control_full(cfg, f0, 1e-6, Execution::serial);
    CHECK(par.all_converged);
    CHECK(par.total_residual == ser.total_residual);
    CHECK(par.total_energy == ser.total_energy);
    const ControlResult tighter = control_full(cfg, f0, 1e-7, Execution::serial);
    CHECK(tighter.total_residual < ser.total_residual);
}

TEST_CASE("seeded initial data is deterministic") {
    const Grid1D g = make_grid(31);
    const auto a = random_initial_modes(g, 4, 42), b = random_initial_modes(g, 4, 42), c = random_initial_modes(g, 4, 43);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 4);
    CHECK(a[0].size() == g.interior_size());
}
