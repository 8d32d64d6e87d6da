#include "grushin/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grushin {

void ProblemConfig::validate() const {
    auto require = [](bool ok, const char* clause) {
        if (!ok) throw Error("core", std::string("require ") + clause);
    };
    require(std::isfinite(gamma) && gamma > 0.0, "gamma > 0");
    require(a > 0.0, "a > 0");
    require(a < b, "a < b");
    require(b < 1.0, "b < 1");
    require(a < a_prime, "a < a_prime");
    require(a_prime < b_prime, "a_prime < b_prime");
    require(b_prime < b, "b_prime < b");
    require(std::isfinite(T) && T > 0.0, "T > 0");
    require(nx >= 3, "nx >= 3");
    require(nx % 2 == 1, "nx odd (grid must place a node at x=0)");
    require(nt >= 1, "nt >= 1");
    require(n_max >= 1, "n_max >= 1");
}

ProblemConfig ProblemConfig::with_default_strip(ProblemConfig cfg) {
    cfg.a_prime = (2.0 * cfg.a + cfg.b) / 3.0;
    cfg.b_prime = (cfg.a + 2.0 * cfg.b) / 3.0;
    return cfg;
}

Grid1D make_grid(int nx) {
    if (nx < 3) throw Error("core", "grid needs nx >= 3 interior nodes");
    if (nx % 2 == 0) throw Error("core", "grid must place a node at x=0");
    Grid1D g;
    const int cells = nx + 1;
    g.h = 2.0 / cells;
    g.nodes.resize(static_cast<std::size_t>(nx) + 2);
    const int half = cells / 2;
    // Built outward from the center so that nodes[i] == -nodes[last-i] exactly.
    for (int i = 0; i <= half; ++i) {
        const double x = (i == half) ? 1.0 : i * g.h;
        g.nodes[half + i] = x;
        g.nodes[half - i] = -x;
    }
    return g;
}

TimeGrid make_time_grid(double T, int steps) {
    if (!(T > 0.0)) throw Error("core", "require T > 0");
    if (steps < 1) throw Error("core", "require nt >= 1");
    return TimeGrid{steps, T / steps, T};
}

double l2_norm(std::span<const double> values, const Grid1D& grid) {
    if (values.size() != grid.nodes.size())
        throw Error("core", "l2_norm size mismatch: expected one value per grid node");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
        sum += w * values[i] * values[i];
    }
    return std::sqrt(grid.h * sum);
}

double interior_dot(std::span<const double> u, std::span<const double> v, const Grid1D& grid) {
    if (u.size() != grid.interior_size() || v.size() != grid.interior_size())
        throw Error("core", "interior vector size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return grid.h * s;
}

double interior_norm(std::span<const double> v, const Grid1D& grid) {
    return std::sqrt(interior_dot(v, v, grid));
}

std::vector<double> with_boundary(std::span<const double> interior) {
    std::vector<double> full(interior.size() + 2, 0.0);
    std::copy(interior.begin(), interior.end(), full.begin() + 1);
    return full;
}

double richardson_pair(double coarse_value, double fine_value, int order) {
    if (order <= 0) throw Error("core", "richardson order must be positive");
    const double f = std::ldexp(1.0, order);
    return (f * fine_value - coarse_value) / (f - 1.0);
}

std::vector<char> strip_mask(const Grid1D& grid, double lo, double hi) {
    const double slack = 1e-12;
    std::vector<char> mask(grid.interior_size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double x = grid.x(i);
        mask[i] = (x >= lo - slack && x <= hi + slack) ? 1 : 0;
    }
    return mask;
}

double strip_energy(std::span<const double> v, std::span<const char> mask, const Grid1D& grid) {
    if (v.size() != mask.size()) throw Error("core", "strip mask size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask[i]) s += v[i] * v[i];
    return grid.h * s;
}

double cn_factor(double lambda, double dt) {
    const double z = 0.5 * lambda * dt;
    return (1.0 - z) / (1.0 + z);
}

double trapezoid_geometric_sum(double q, int K) {
    if (std::abs(q) > 1.0) throw Error("core", "geometric ratio must satisfy |q| <= 1");
    if (q == 1.0) return static_cast<double>(K);
    // sum_{k=0}^{K} q^k, via expm1 when q is close to 1.
    const double full = q > 0.0 ? -std::expm1((K + 1.0) * std::log(q)) / (1.0 - q)
                                : (1.0 - std::pow(q, K + 1)) / (1.0 - q);
    return full - 0.5 * (1.0 + std::pow(q, K));
}

double log_interior_norm(std::span<const double> v, const Grid1D& grid) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    if (peak == 0.0) return -std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double x : v) s += (x / peak) * (x / peak);
    return std::log(peak) + 0.5 * std::log(grid.h * s);
}

int odd_at_least(double at_least) {
    int n = static_cast<int>(std::ceil(at_least));
    if (n < 3) n = 3;
    if (n % 2 == 0) ++n;
    return n;
}

}  // namespace grushin
