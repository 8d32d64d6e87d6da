#include "grushin/control.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace grushin {

HumResult hum_solve_mode(const ModeOperator& op, std::span<const double> f0, const TimeGrid& tg,
                         const ProblemConfig& cfg, double epsilon, double cg_tol, int cg_max) {
    if (!(epsilon > 0.0)) throw Error("control", "require epsilon > 0");
    if (f0.size() != op.size()) throw Error("control", "initial datum size does not match operator");
    const Grid1D& grid = op.grid;
    const std::size_t m = op.size();
    const std::vector<char> strip = strip_mask(grid, cfg.a, cfg.b);
    const Gramian G(op, tg, strip);

    HumResult res;
    res.n = op.n;
    res.epsilon = epsilon;
    res.f0_norm = interior_norm(f0, grid);

    const std::vector<double> y = G.terminal(f0);
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = -y[i];
    auto normal = [&](std::span<const double> v) {
        std::vector<double> out = G.apply(v);
        for (std::size_t i = 0; i < m; ++i) out[i] += epsilon * v[i];
        return out;
    };
    const CgResult cg = conjugate_gradient(normal, rhs, {}, grid, cg_tol, cg_max);
    res.g0_opt = cg.x;
    res.cg_iters = cg.iterations;
    res.cg_residual = cg.relative_residual;
    res.converged = cg.converged;
    res.hum_quadratic = -interior_dot(res.g0_opt, y, grid);

    // Control u_j = chi g_{K-j}, with g the free trajectory from g0_opt.
    const ModeTrajectory adj = solve_adjoint_mode(op, res.g0_opt, tg);
    res.control = Matrix(tg.steps + 1, m);
    for (int j = 0; j <= tg.steps; ++j) {
        const auto g = adj.states.row(tg.steps - j);
        for (std::size_t i = 0; i < m; ++i) res.control(j, i) = strip[i] ? g[i] : 0.0;
    }
    for (int j = 0; j <= tg.steps; ++j)
        res.control_energy += tg.weight(j) * tg.dt * interior_dot(res.control.row(j), res.control.row(j), grid);

    const ModeTrajectory fwd = solve_controlled_mode(op, f0, res.control, tg, strip);
    const auto fT = fwd.states.row(tg.steps);
    res.terminal.assign(fT.begin(), fT.end());
    res.residual = res.f0_norm > 0.0 ? interior_norm(res.terminal, grid) / res.f0_norm : 0.0;
    return res;
}

ControlResult control_full(const ProblemConfig& cfg, const std::vector<std::vector<double>>& f0_modes,
                           double epsilon, Execution exec, double cg_tol) {
    cfg.validate();
    const Grid1D grid = make_grid(cfg.nx);
    const TimeGrid tg = make_time_grid(cfg.T, cfg.nt);
    ControlResult out;
    out.modes.resize(f0_modes.size());
    for_each_index(static_cast<long>(f0_modes.size()), exec, [&](long k) {
        const ModeOperator op = assemble_mode_operator(static_cast<int>(k) + 1, cfg.gamma, grid);
        out.modes[k] = hum_solve_mode(op, f0_modes[k], tg, cfg, epsilon, cg_tol);
    });
    double num = 0.0, den = 0.0;
    for (const auto& r : out.modes) {
        num += interior_dot(r.terminal, r.terminal, grid);
        den += r.f0_norm * r.f0_norm;
        out.total_energy += r.control_energy;
        out.all_converged = out.all_converged && r.converged;
    }
    out.total_residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return out;
}

Field2D synthesize_control_2d(const ControlResult& res, const Grid1D& grid, const TimeGrid& tg, int ny,
                              std::span<const int> time_indices) {
    std::vector<ModeTrajectory> parts(res.modes.size());
    for (std::size_t k = 0; k < res.modes.size(); ++k) {
        parts[k].n = res.modes[k].n;
        parts[k].times = tg;
        parts[k].states = res.modes[k].control;
    }
    return synthesize_2d(parts, grid, ny, time_indices);
}

Field2D synthesize_terminal_2d(const ControlResult& res, const Grid1D& grid, const TimeGrid& tg, int ny) {
    std::vector<ModeTrajectory> parts(res.modes.size());
    for (std::size_t k = 0; k < res.modes.size(); ++k) {
        parts[k].n = res.modes[k].n;
        parts[k].times = TimeGrid{0, tg.T, tg.T};
        parts[k].states = Matrix(1, res.modes[k].terminal.size());
        std::copy(res.modes[k].terminal.begin(), res.modes[k].terminal.end(), parts[k].states.row(0).begin());
    }
    return synthesize_2d(parts, grid, ny);
}

void write_control_csv(const std::string& path, const ControlResult& res, const Grid1D& grid, const TimeGrid& tg) {
    std::ofstream out(path);
    if (!out) throw Error("control", "cannot open " + path + " for writing");
    out << "t,x,n,value\n";
    char buf[128];
    for (const auto& r : res.modes)
        for (std::size_t k = 0; k < r.control.rows; ++k)
            for (std::size_t i = 0; i < r.control.cols; ++i) {
                if (r.control(k, i) == 0.0) continue;
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g\n", tg.time(static_cast<int>(k)), grid.x(i), r.n,
                              r.control(k, i));
                out << buf;
            }
}

std::vector<std::vector<double>> random_initial_modes(const Grid1D& grid, int count, std::uint64_t seed) {
    if (count < 1) throw Error("control", "require at least one mode");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> out(count, std::vector<double>(grid.interior_size(), 0.0));
    for (auto& f : out) {
        double c[6];
        for (double& q : c) q = normal(rng);
        for (std::size_t i = 0; i < f.size(); ++i)
            for (int k = 0; k < 6; ++k)
                f[i] += c[k] * std::sin((k + 1) * std::numbers::pi * (grid.x(i) + 1.0) / 2.0) / (k + 1);
    }
    return out;
}

}  // namespace grushin
