#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grushin/core.hpp"
#include "grushin/evolution.hpp"
#include "grushin/observability.hpp"

namespace grushin {

struct HumResult {
    int n = 0;
    double epsilon = 0.0;
    std::vector<double> g0_opt;
    Matrix control;  // (nt+1) x interior nodes, zero off the strip
    std::vector<double> terminal;  // simulated f(T)
    double f0_norm = 0.0;
    double residual = 0.0;        // ||f(T)|| / ||f0||
    double control_energy = 0.0;  // sum_k w_k dt ||u_k||^2
    double hum_quadratic = 0.0;   // <(G + eps)^-1 S f0, S f0>
    int cg_iters = 0;
    double cg_residual = 0.0;
    bool converged = false;
};

/// Penalized HUM: solve (G + eps I) g = -S f0 by CG and set u_j = chi g_{K-j}.
/// The discrete identities f(T) = -eps g and energy <= hum_quadratic hold exactly.
HumResult hum_solve_mode(const ModeOperator& op, std::span<const double> f0, const TimeGrid& tg,
                         const ProblemConfig& cfg, double epsilon, double cg_tol = 1e-12, int cg_max = 4000);

struct ControlResult {
    std::vector<HumResult> modes;  // modes[k] is index k+1
    double total_residual = 0.0;   // ||f(T)|| / ||f0|| by Parseval
    double total_energy = 0.0;
    bool all_converged = true;
};

ControlResult control_full(const ProblemConfig& cfg, const std::vector<std::vector<double>>& f0_modes,
                           double epsilon, Execution exec = Execution::parallel, double cg_tol = 1e-12);

/// u(t,x,y) = sum_n u_n(t,x) sqrt(2) sin(n pi y) at the chosen time indices.
Field2D synthesize_control_2d(const ControlResult& res, const Grid1D& grid, const TimeGrid& tg, int ny, std::span<const int> time_indices);

/// Terminal states as a 2D field (one snapshot).
Field2D synthesize_terminal_2d(const ControlResult& res, const Grid1D& grid, const TimeGrid& tg, int ny);

/// Seeded smooth initial data, one vector per mode: sum_{k=1}^{6} c_k sin(k pi (x+1)/2) / k
/// with c_k standard normal from a mt19937_64 stream.
std::vector<std::vector<double>> random_initial_modes(const Grid1D& grid, int count, std::uint64_t seed);

void write_control_csv(const std::string& path, const ControlResult& res, const Grid1D& grid, const TimeGrid& tg);

}  // namespace grushin
