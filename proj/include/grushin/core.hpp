#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grushin {

/// Error raised by every module; carries the module name so front ends can
/// report "module: clause".
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Selects between the OpenMP kernel and its serial reference.
enum class Execution { serial, parallel };

/// Runs body(j) for j in [0, count). The parallel path is an OpenMP loop with
/// dynamic scheduling; the serial path is the reference ordering. Each index
/// must write only its own outputs, so both paths produce identical results.
/// The first exception raised by any index is rethrown after the loop.
template <class Body>
void for_each_index(long count, Execution exec, Body&& body) {
    if (exec == Execution::serial) {
        for (long j = 0; j < count; ++j) body(j);
        return;
    }
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < count; ++j) {
        try {
            body(j);
        } catch (...) {
#pragma omp critical(grushin_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Experiment identity: degeneracy exponent, control strip (a,b), interior
/// Carleman strip (a',b'), horizon and discretization sizes.
struct ProblemConfig {
    double gamma = 1.0;
    double a = 0.3;
    double b = 0.8;
    double a_prime = 0.0;
    double b_prime = 0.0;
    double T = 1.0;
    int nx = 401;
    int nt = 1000;
    int n_max = 64;

    /// Throws Error("core", ...) naming the violated inequality.
    void validate() const;

    /// Fills a', b' with the default trisection of (a,b).
    static ProblemConfig with_default_strip(ProblemConfig cfg);
};

/// Uniform grid on [-1,1] with `nx` interior nodes plus both endpoints.
struct Grid1D {
    std::vector<double> nodes;
    double h = 0.0;

    std::size_t interior_size() const noexcept { return nodes.size() - 2; }
    /// x-coordinate of interior node i (0-based over interior nodes).
    double x(std::size_t i) const noexcept { return nodes[i + 1]; }
    /// Interior index of x = 0.
    std::size_t center() const noexcept { return interior_size() / 2; }
};

struct TimeGrid {
    int steps = 1;
    double dt = 1.0;
    double T = 1.0;

    double time(int k) const noexcept { return k == steps ? T : k * dt; }
    /// Trapezoid weight of node k (without dt).
    double weight(int k) const noexcept { return (k == 0 || k == steps) ? 0.5 : 1.0; }
};

Grid1D make_grid(int nx);
TimeGrid make_time_grid(double T, int steps);

/// Row-major dense matrix, used for trajectories (time x nodes).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t k) { return {data.data() + k * cols, cols}; }
    std::span<const double> row(std::size_t k) const { return {data.data() + k * cols, cols}; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Trapezoid (integral of v^2)^(1/2) over [-1,1]; `values` holds one entry per grid node.
double l2_norm(std::span<const double> values, const Grid1D& grid);

// Interior vectors carry homogeneous Dirichlet endpoints, so the trapezoid
// rule reduces to h * sum.
double interior_dot(std::span<const double> u, std::span<const double> v, const Grid1D& grid);
double interior_norm(std::span<const double> v, const Grid1D& grid);

/// Extends an interior vector with zero endpoint values.
std::vector<double> with_boundary(std::span<const double> interior);

/// (2^order * fine - coarse) / (2^order - 1).
double richardson_pair(double coarse_value, double fine_value, int order);

/// Closed nodal indicator of [lo, hi] over interior nodes; nodes that sit on
/// lo or hi (up to rounding) are included.
std::vector<char> strip_mask(const Grid1D& grid, double lo, double hi);

/// h * sum over masked nodes of v^2.
double strip_energy(std::span<const double> v, std::span<const char> mask, const Grid1D& grid);

/// Crank-Nicolson amplification (1 - lambda dt/2) / (1 + lambda dt/2).
double cn_factor(double lambda, double dt);

/// sum_{k=0}^{K} w_k q^k with trapezoid weights (1/2 at both ends), |q| <= 1.
double trapezoid_geometric_sum(double q, int K);

/// log of (h * sum v_i^2)^(1/2) without underflow; -inf for the zero vector.
double log_interior_norm(std::span<const double> v, const Grid1D& grid);

/// Smallest odd nx >= `at_least`.
int odd_at_least(double at_least);

}  // namespace grushin
