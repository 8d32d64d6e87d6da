#pragma once

#include <string>
#include <utility>
#include <vector>

#include "grushin/core.hpp"
#include "grushin/spectral.hpp"

namespace grushin {

/// Upper bound on the ground eigenvalue from the hat trial function (1-k|x|)^+.
struct HatBound {
    double gamma = 1.0;
    int n = 1;
    double c_gamma = 0.0;
    double k_bar = 0.0;
    double bound = 0.0;
    bool clamped = false;  // minimizer fell at or below 1; evaluated at 1 + 1e-6
};

/// 1/(2g+1) - 1/(g+1) + 1/(2g+3).
double hat_constant(double gamma);

/// 3 [k^2 + (pi n)^2 c(gamma) k^(-2 gamma)].
double hat_objective(int n, double gamma, double k);

HatBound hat_bound(int n, double gamma);

/// Exponential supersolution W(x) = C e^(-mu x^(gamma+1)) valid on [x_n, 1].
struct Supersolution {
    int n = 1;
    double gamma = 1.0;
    double lambda = 0.0;
    double x_n = 0.0;
    double mu_n = 0.0;
    double C_n = 0.0;

    double operator()(double x) const;
};

/// Requires gamma >= 1.
Supersolution supersolution_params(const EigenPair& pair);

struct ComparisonReport {
    bool applicable = false;  // false when x_n > a (index below n_*)
    bool holds = false;
    double worst_gap = 0.0;  // max over nodes in [x_n, 1] of v - W
    bool derivative_check = false;
    double derivative = 0.0;        // |v'(x_n)|
    double derivative_bound = 0.0;  // sqrt(x_n) lambda
    std::string note;
};

/// Smallest odd nx with h * n pi <= 0.1, so the decay rate of the tail
/// (at most n pi on [0,1]) is resolved by the grid.
int comparison_nx(int n);

/// Throws when the grid is coarser than comparison_nx(pair.n).
ComparisonReport comparison_check(const EigenPair& pair, const Supersolution& sup, const Grid1D& grid, double a);

/// Test-function functional of mode n on the strip (a,b). Values that can
/// leave double range are also kept as logarithms.
struct RhoSample {
    int n = 1;
    double T = 0.0;
    double lambda = 0.0;
    double strip_mass = 0.0;
    double log_rho = 0.0;
    double rho = 0.0;  // may be +inf or 0 after exponentiation
    double log_cost_lower = 0.0;
    double cost_lower = 0.0;
};

RhoSample rho_functional(const EigenPair& pair, const Grid1D& grid, const ProblemConfig& cfg);

/// The test-function ratio as attained by the time discretization: e^{-2 lambda T}
/// becomes r^{2K} and (1 - e^{-2 lambda T})/(2 lambda) becomes dt sum_k w_k r^{2k},
/// with r the Crank-Nicolson factor. rho fields keep the continuum form.
RhoSample rho_functional_discrete(const EigenPair& pair, const Grid1D& grid, const ProblemConfig& cfg,
                                  const TimeGrid& tg);

/// Same closed forms from a precomputed strip mass.
RhoSample rho_from_mass(int n, double lambda, double strip_mass, double T);

struct CrossoverReport {
    double gamma = 1.0;
    double a = 0.0;
    std::vector<std::pair<int, double>> samples;  // (n, log(strip_mass)/n)
    std::vector<int> rejected;                    // n outside the harmonic regime
    double slope_hat = 0.0;                       // decay rate s of the strip mass
    double lambda_ratio = 0.0;                    // lambda/(n pi) at the largest n
    double t_hat = 0.0;
    double t_asymptotic = 0.0;  // a^2 / 2
    double slope_spread = 0.0;  // relative spread of successive-difference slopes
    bool flagged = false;
    std::string interpretation;
};

/// gamma = 1 only. Fits log m_n = c0 - s n + c1 log n over the n whose
/// eigenvalue satisfies lambda/(n pi) in [0.99, 1.01].
CrossoverReport crossover_estimate(const ProblemConfig& cfg, std::span<const int> n_list, const Grid1D& grid,
                                   Execution exec = Execution::parallel);

}  // namespace grushin
