#pragma once

#include <functional>
#include <span>
#include <vector>

#include "grushin/core.hpp"
#include "grushin/evolution.hpp"
#include "grushin/spectral.hpp"

namespace grushin {

/// Observation Gramian of one mode on the strip: G g0 = sum_k w_k dt R^k chi R^k g0,
/// the operator of the quadratic form g0 -> sum_k w_k dt ||chi g_k||^2.
/// Self-adjoint and positive semidefinite in the trapezoid inner product.
class Gramian {
public:
    Gramian(const ModeOperator& op, const TimeGrid& tg, std::span<const char> strip);

    /// Forward sweep, then reverse Horner accumulation acc <- R acc + w_k dt chi g_k.
    std::vector<double> apply(std::span<const double> g0) const;

    /// Strip energy integrated directly along the forward trajectory.
    double quadratic_form_direct(std::span<const double> g0) const;

    /// Terminal map S = R^K.
    std::vector<double> terminal(std::span<const double> g0) const;

    /// S g0 with periodic rescaling: returns v and sets log_scale so that
    /// S g0 = v * e^{log_scale}; stays finite when S g0 underflows.
    std::vector<double> terminal_scaled(std::span<const double> g0, double& log_scale) const;

    const Grid1D& grid() const noexcept { return grid_; }
    const TimeGrid& times() const noexcept { return tg_; }
    std::span<const char> strip() const noexcept { return strip_; }
    std::size_t size() const noexcept { return strip_.size(); }

private:
    CrankNicolsonStepper stepper_;
    Grid1D grid_;
    TimeGrid tg_;
    std::vector<char> strip_;
};

std::vector<double> gramian_apply(const ModeOperator& op, std::span<const double> g0, const TimeGrid& tg,
                                  std::span<const char> strip);

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Conjugate gradient for a self-adjoint positive operator in the trapezoid
/// inner product of `grid`. Returns the iterate with the smallest residual.
CgResult conjugate_gradient(const std::function<std::vector<double>(std::span<const double>)>& apply,
                            std::span<const double> rhs, std::span<const double> x0, const Grid1D& grid,
                            double tol, int max_iter);

struct ObservabilityReport {
    int n = 0;
    double T = 0.0;
    double cost = 0.0;  // +inf when the pencil is numerically singular
    double log_cost = 0.0;
    double lower_bound = 0.0;  // test-function ratio of the scheme (closed form)
    double log_lower_bound = 0.0;
    double lower_bound_continuum = 0.0;  // same ratio with exact exponentials
    double log_test_ratio = 0.0;         // measured ratio of the ground eigenvector
    int ritz_dim = 0;
    int iterations = 0;
    bool converged = false;
};

/// Largest generalized Rayleigh quotient ||S g||^2 / <G g, g>. A Ritz vector
/// of the pencil restricted to the lowest `ritz_dim` eigenvectors (where S is
/// diagonal and G has a closed form) seeds a matrix-free power iteration
/// g <- G^-1 S^2 g (at most 500 steps, CG inner solves). Quotients are
/// measured with the directly integrated strip energy, in the log domain.
/// Throws if the result falls below the certified lower bound.
ObservabilityReport observability_cost(const ModeOperator& op, const TimeGrid& tg, const ProblemConfig& cfg,
                                       double tol = 1e-6, int ritz_dim = 24);

/// Only the closed-form bound, for sweeps where the power iteration is not needed.
ObservabilityReport observability_lower_bound(const ModeOperator& op, const ProblemConfig& cfg);

struct SweepReport {
    std::vector<ObservabilityReport> reports;
    std::vector<double> lower_envelope;  // running max of lower_bound over the sweep
    double sup_cost = 0.0;
    int argmax_n = 0;
};

/// Per-mode costs with cfg.nt raised per n to cn_resolving_steps.
SweepReport uniform_sweep(const ProblemConfig& cfg, std::span<const int> n_list, bool lower_bound_only = false,
                          Execution exec = Execution::parallel, double tol = 1e-6);

void write_sweep_csv(const std::string& path, const SweepReport& sweep);

}  // namespace grushin
