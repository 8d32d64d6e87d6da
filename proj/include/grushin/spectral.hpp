#pragma once

#include <span>
#include <vector>

#include "grushin/core.hpp"
#include "grushin/tridiagonal.hpp"

namespace grushin {

/// Finite-difference discretization of -d^2/dx^2 + coupling * |x|^(2 gamma) on
/// the interior nodes of a symmetric grid, Dirichlet rows eliminated. For the
/// Fourier mode n the coupling is (n pi)^2.
struct ModeOperator {
    int n = 0;
    double gamma = 1.0;
    double coupling = 0.0;
    Grid1D grid;
    tridiag::SymTridiagonal matrix;
    std::vector<double> potential;  // coupling * |x_i|^(2 gamma)

    std::size_t size() const noexcept { return matrix.size(); }
    std::vector<double> apply(std::span<const double> v) const;
};

/// Ground (or k-th) eigenpair with a certified bisection bracket.
struct EigenPair {
    int n = 0;
    double gamma = 1.0;
    double lambda = 0.0;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    std::vector<double> v;  // interior nodes, trapezoid-normalized
    double residual = 0.0;  // ||A v - lambda v|| / ||v||
};

struct ScalingFit {
    double gamma = 1.0;
    std::vector<std::pair<int, double>> samples;  // (n, lambda)
    double exponent_hat = 0.0;
    double c_lower_hat = 0.0;  // min over samples of lambda_lo / n^(2/(1+gamma))
    double c_upper_hat = 0.0;  // max over samples of lambda_hi / n^(2/(1+gamma))
};

ModeOperator assemble_mode_operator(int n, double gamma, const Grid1D& grid);

/// Same stencil with an arbitrary potential coupling (0 gives the Dirichlet Laplacian).
ModeOperator assemble_operator_with_coupling(double coupling, double gamma, const Grid1D& grid, int n = 0);

EigenPair ground_eigenpair(const ModeOperator& op, double tol = 1e-13);

/// The k smallest eigenpairs, orthonormal in the trapezoid inner product.
std::vector<EigenPair> first_k_eigenpairs(const ModeOperator& op, int k, double tol = 1e-13);

/// (v, A v) / (v, v) in the trapezoid inner product.
double rayleigh_quotient(const ModeOperator& op, std::span<const double> v);

/// Smallest odd nx for which the ground-state width (n pi)^(-1/(1+gamma))
/// spans at least `nodes_per_width` grid spacings.
int required_nx(double gamma, int n_max, double nodes_per_width = 20.0);

ScalingFit eigen_scaling_sweep(double gamma, std::span<const int> n_list, const Grid1D& grid,
                               Execution exec = Execution::parallel);

/// Ground eigenpairs for every n, computed independently.
std::vector<EigenPair> ground_eigenpairs(double gamma, std::span<const int> n_list, const Grid1D& grid,
                                         Execution exec = Execution::parallel);

}  // namespace grushin
