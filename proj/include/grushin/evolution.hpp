#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grushin/core.hpp"
#include "grushin/spectral.hpp"
#include "grushin/tridiagonal.hpp"

namespace grushin {

/// Crank-Nicolson propagator R = (I + dt/2 A)^-1 (I - dt/2 A) with the
/// factorization kept for repeated steps.
class CrankNicolsonStepper {
public:
    CrankNicolsonStepper(const ModeOperator& op, double dt);

    /// state <- R state.
    void propagate(std::span<double> state) const;

    /// One step with the trapezoid split source:
    /// next = R (state + dt/2 s_now) + dt/2 s_next. Empty spans mean zero source.
    void step(std::span<double> state, std::span<const double> s_now, std::span<const double> s_next) const;

    double dt() const noexcept { return dt_; }
    std::size_t size() const noexcept { return matrix_.size(); }

private:
    tridiag::SymTridiagonal matrix_;
    double dt_;
    tridiag::ThomasFactor factor_;
    mutable std::vector<double> work_;
};

/// Smallest step count K for horizon T such that Crank-Nicolson damps the
/// stiffest grid mode at least e^{margin} more than the ground mode over [0,T]:
/// K (log|r(lambda_max)| - log r(lambda_1)) <= -margin, never below `at_least`.
int cn_resolving_steps(const ModeOperator& op, double T, int at_least = 1, double margin = 10.0);

/// One step of state' = -A state + source with the source held constant over the step.
std::vector<double> step_crank_nicolson(const ModeOperator& op, std::span<const double> state, double dt,
                                        std::span<const double> source);

struct ModeTrajectory {
    int n = 0;
    TimeGrid times;
    Matrix states;                 // (steps+1) x interior nodes
    std::optional<Matrix> control; // same shape, zero off the strip
};

ModeTrajectory solve_adjoint_mode(const ModeOperator& op, std::span<const double> g0, const TimeGrid& tg);

/// Source = control restricted to the strip. Throws when the control is nonzero
/// at a node outside `strip`.
ModeTrajectory solve_controlled_mode(const ModeOperator& op, std::span<const double> f0, const Matrix& control,
                                     const TimeGrid& tg, std::span<const char> strip);

/// Values on the full tensor grid (endpoints included) at selected times.
struct Field2D {
    std::vector<double> times;
    std::size_t x_nodes = 0;  // nx + 2
    std::size_t y_nodes = 0;  // ny + 2
    int y_modes = 0;
    std::vector<double> values;  // [time][x][y]

    double& at(std::size_t k, std::size_t i, std::size_t j) { return values[(k * x_nodes + i) * y_nodes + j]; }
    double at(std::size_t k, std::size_t i, std::size_t j) const { return values[(k * x_nodes + i) * y_nodes + j]; }
};

/// y-grid with ny interior nodes y_j = j/(ny+1).
double y_spacing(int ny);

/// sqrt(2) sin(n pi y).
double sine_mode(int n, double y);

/// g(t,x,y) = sum_n g_n(t,x) sqrt(2) sin(n pi y); modes[k] holds index k+1.
/// `time_indices` selects snapshots (empty = all).
Field2D synthesize_2d(std::span<const ModeTrajectory> modes, const Grid1D& grid, int ny,
                      std::span<const int> time_indices = {});

/// Trapezoid L2 norm of snapshot k.
double field_norm(const Field2D& f, std::size_t k, const Grid1D& grid, int ny);

/// Discrete sine coefficients of an interior 2D field (x-major, nx*ny) for n = 1..count.
std::vector<std::vector<double>> project_modes(std::span<const double> field, std::size_t nx, int ny, int count);

/// Finite differences in x and y with Crank-Nicolson in time; sparse LDLT per
/// step. Fields are interior, x-major (nx*ny). Returns the terminal snapshot.
/// Capped at nx*ny <= 16000 unknowns.
Field2D solve_2d_direct(const ProblemConfig& cfg, const Grid1D& grid, int ny, const TimeGrid& tg,
                        std::span<const double> f0, const std::vector<std::vector<double>>& control = {});

/// Smallest N with sum_{n>N} e^{-2 lambda_n T_min} < tol.
int choose_mode_count(double gamma, double T_min, const Grid1D& grid, double tol = 1e-10, int n_cap = 4096);

void write_trajectory_csv(const std::string& path, const ModeTrajectory& traj, const Grid1D& grid);
void write_field_csv(const std::string& path, const Field2D& field, const Grid1D& grid, int ny);

}  // namespace grushin
