#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "grushin/evolution.hpp"

using namespace grushin;
using std::numbers::pi;

namespace {

std::vector<double> random_vector(std::size_t m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(m);
    for (double& x : v) x = normal(rng);
    return v;
}

}  // namespace

TEST_CASE("Crank-Nicolson is non-expansive") {
    const Grid1D g = make_grid(101);
    const ModeOperator op = assemble_mode_operator(3, 0.5, g);
    const TimeGrid tg = make_time_grid(0.2, 50);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g0 = random_vector(op.size(), rng);
        const ModeTrajectory tr = solve_adjoint_mode(op, g0, tg);
        double prev = interior_norm(g0, g);
        for (int k = 1; k <= tg.steps; ++k) {
            const double cur = interior_norm(tr.states.row(k), g);
            CHECK(cur <= prev * (1.0 + 1e-14));
            prev = cur;
        }
    }
}

TEST_CASE("scheme is linear") {
    const Grid1D g = make_grid(101);
    const ModeOperator op = assemble_mode_operator(5, 1.0, g);
    const TimeGrid tg = make_time_grid(0.1, 40);
    std::mt19937_64 rng(7);
    const auto u = random_vector(op.size(), rng), v = random_vector(op.size(), rng);
    std::vector<double> w(op.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 2.0 * u[i] - 3.0 * v[i];
    const auto tu = solve_adjoint_mode(op, u, tg), tv = solve_adjoint_mode(op, v, tg), tw = solve_adjoint_mode(op, w, tg);
    double err = 0.0, scale = 0.0;
    for (std::size_t q = 0; q < tw.states.data.size(); ++q) {
        err = std::max(err, std::abs(tw.states.data[q] - 2.0 * tu.states.data[q] + 3.0 * tv.states.data[q]));
        scale = std::max(scale, std::abs(tw.states.data[q]));
    }
    CHECK(err <= 1e-12 * scale);
}

TEST_CASE("eigenvector decays by the amplification factor") {
    const Grid1D g = make_grid(301);
    const ModeOperator op = assemble_mode_operator(4, 1.0, g);
    const EigenPair p = ground_eigenpair(op);
    const TimeGrid tg = make_time_grid(0.5, 200);
    const ModeTrajectory tr = solve_adjoint_mode(op, p.v, tg);
    const double r = cn_factor(p.lambda, tg.dt);
    for (std::size_t i = 0; i < p.v.size(); i += 37)
        CHECK(tr.states(tg.steps, i) == doctest::Approx(std::pow(r, tg.steps) * p.v[i]).epsilon(1e-8));
}

TEST_CASE("constant source reaches the steady state A f = s") {
    const Grid1D g = make_grid(41);
    const ModeOperator op = assemble_mode_operator(1, 1.0, g);
    const CrankNicolsonStepper st(op, 0.05);
    std::vector<double> s(op.size(), 1.0), f(op.size(), 0.0);
    for (int k = 0; k < 4000; ++k) st.step(f, s, s);
    const auto af = op.apply(f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(af[i] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("stiff-resolving step count") {
    const Grid1D g = make_grid(201);
    const ModeOperator op = assemble_mode_operator(8, 1.0, g);
    const double T = 0.3;
    const int K = cn_resolving_steps(op, T, 10);
    const double lmax = tridiag::gershgorin(op.matrix).second;
    const double l1 = tridiag::bisect_eigenvalue(op.matrix, 0, 1e-6).first;
    auto gap = [&](int k) {
        const double dt = T / k;
        return k * (std::log(std::abs(cn_factor(lmax, dt))) - std::log(cn_factor(l1, dt)));
    };
    CHECK(K >= 10);
    CHECK(gap(K) <= -10.0);
    CHECK(gap(10) > -10.0);
    CHECK(cn_resolving_steps(op, T, 100000) == 100000);
}

TEST_CASE("control off the strip is rejected") {
    const Grid1D g = make_grid(21);
    const ModeOperator op = assemble_mode_operator(1, 1.0, g);
    const TimeGrid tg = make_time_grid(0.1, 4);
    Matrix u(tg.steps + 1, op.size());
    u(2, 0) = 1.0;
    const auto strip = strip_mask(g, 0.3, 0.8);
    std::vector<double> f0(op.size(), 1.0);
    CHECK_THROWS_AS(solve_controlled_mode(op, f0, u, tg, strip), Error);
}

TEST_CASE("2D direct solve agrees with mode synthesis") {
    ProblemConfig cfg = ProblemConfig::with_default_strip({});
    cfg.gamma = 1.0;
    cfg.T = 0.1;
    const Grid1D g = make_grid(15);
    const int ny = 999, nt = 200, modes = 5;
    const TimeGrid tg = make_time_grid(cfg.T, nt);
    const std::size_t m = g.interior_size();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> f(modes, std::vector<double>(m));
    for (auto& fn : f) {
        double c[4];
        for (double& q : c) q = normal(rng);
        for (std::size_t i = 0; i < m; ++i)
            for (int k = 0; k < 4; ++k) fn[i] += c[k] * std::sin((k + 1) * pi * (g.x(i) + 1) / 2);
    }
    std::vector<double> f2(m * ny, 0.0);
    const double hy = y_spacing(ny);
    for (int n = 0; n < modes; ++n)
        for (std::size_t i = 0; i < m; ++i)
            for (int j = 0; j < ny; ++j) f2[i * ny + j] += f[n][i] * sine_mode(n + 1, (j + 1) * hy);
    const Field2D direct = solve_2d_direct(cfg, g, ny, tg, f2);
    std::vector<ModeTrajectory> tr;
    for (int n = 0; n < modes; ++n) tr.push_back(solve_adjoint_mode(assemble_mode_operator(n + 1, 1.0, g), f[n], tg));
    const int last = nt;
    const Field2D syn = synthesize_2d(tr, g, ny, std::span<const int>(&last, 1));
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < direct.values.size(); ++q) {
        num += std::pow(direct.values[q] - syn.values[q], 2);
        den += direct.values[q] * direct.values[q];
    }
    CHECK(std::sqrt(num / den) <= 1e-4);

    // discrete Parseval at the y-nodes
    double modal = 0.0;
    for (const auto& t : tr) modal += std::pow(interior_norm(t.states.row(nt), g), 2.0);
    CHECK(field_norm(syn, 0, g, ny) == doctest::Approx(std::sqrt(modal)).epsilon(1e-12));

    // projection recovers the modes
    std::vector<double> flat(m * ny);
    for (std::size_t i = 0; i < m; ++i)
        for (int j = 0; j < ny; ++j) flat[i * ny + j] = syn.at(0, i + 1, j + 1);
    const auto back = project_modes(flat, m, ny, modes);
    for (int n = 0; n < modes; ++n)
        for (std::size_t i = 0; i < m; ++i)
            CHECK(back[n][i] == doctest::Approx(tr[n].states(nt, i)).epsilon(1e-10).scale(1e-12));
}

TEST_CASE("mode count bounds the neglected tail") {
    const Grid1D g = make_grid(201);
    const double T = 0.05, tol = 1e-10;
    const int N = choose_mode_count(1.0, T, g, tol);
    auto term = [&](int n) { return std::exp(-2.0 * ground_eigenpair(assemble_mode_operator(n, 1.0, g)).lambda * T); };
    double tail = 0.0;
    for (int n = N + 1; n <= N + 200; ++n) tail += term(n);
    CHECK(tail < tol);
    if (N > 1) CHECK(tail + term(N) >= tol);
}

TEST_CASE("trajectory CSV has a header and 17 digits") {
    const Grid1D g = make_grid(5);
    const ModeOperator op = assemble_mode_operator(1, 1.0, g);
    std::vector<double> g0(op.size(), 1.0 / 3.0);
    const ModeTrajectory tr = solve_adjoint_mode(op, g0, make_time_grid(0.1, 2));
    const auto path = std::filesystem::temp_directory_path() / "grushin_traj_test.csv";
    write_trajectory_csv(path.string(), tr, g);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "t,x,value");
    CHECK(row.find("0.33333333333333331") != std::string::npos);
    std::filesystem::remove(path);
}
