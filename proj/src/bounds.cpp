#include "grushin/bounds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace grushin {

using std::numbers::pi;

double hat_constant(double gamma) {
    return 1.0 / (2.0 * gamma + 1.0) - 1.0 / (gamma + 1.0) + 1.0 / (2.0 * gamma + 3.0);
}

double hat_objective(int n, double gamma, double k) {
    const double npi = pi * n;
    return 3.0 * (k * k + npi * npi * hat_constant(gamma) * std::pow(k, -2.0 * gamma));
}

HatBound hat_bound(int n, double gamma) {
    if (n < 1) throw Error("bounds", "require n >= 1");
    if (!(gamma > 0.0)) throw Error("bounds", "require gamma > 0");
    HatBound hb;
    hb.gamma = gamma;
    hb.n = n;
    hb.c_gamma = hat_constant(gamma);
    const double npi = pi * n;
    hb.k_bar = std::pow(gamma * npi * npi * hb.c_gamma, 1.0 / (2.0 * gamma + 2.0));
    double k = hb.k_bar;
    if (k <= 1.0) {
        k = 1.0 + 1e-6;
        hb.clamped = true;
    }
    hb.bound = hat_objective(n, gamma, k);
    return hb;
}

double Supersolution::operator()(double x) const {
    return C_n * std::exp(-mu_n * std::pow(std::abs(x), gamma + 1.0));
}

Supersolution supersolution_params(const EigenPair& pair) {
    if (pair.gamma < 1.0) throw Error("bounds", "supersolution requires gamma >= 1");
    Supersolution s;
    s.n = pair.n;
    s.gamma = pair.gamma;
    s.lambda = pair.lambda;
    const double g = pair.gamma;
    const double npi2 = std::pow(pair.n * pi, 2.0);
    s.x_n = std::pow(pair.lambda / npi2, 1.0 / (2.0 * g));
    s.mu_n = std::min(pair.n * pi / (g + 1.0),
                      g / (g + 1.0) * std::pow(npi2 / pair.lambda, 0.5 + 1.0 / (2.0 * g)));
    s.C_n = 2.0 * pair.lambda * std::exp(s.mu_n * std::pow(s.x_n, g + 1.0)) /
            ((g + 1.0) * s.mu_n * std::pow(s.x_n, g - 0.5));
    return s;
}

int comparison_nx(int n) { return odd_at_least(2.0 * n * pi / 0.1 - 1.0); }

ComparisonReport comparison_check(const EigenPair& pair, const Supersolution& sup, const Grid1D& grid, double a) {
    if (pair.v.size() != grid.interior_size()) throw Error("bounds", "eigenvector does not match grid");
    if (static_cast<int>(grid.interior_size()) < comparison_nx(pair.n))
        throw Error("bounds", "grid does not resolve the tail decay on [x_n, 1]; require nx >= " +
                                  std::to_string(comparison_nx(pair.n)));
    ComparisonReport r;
    r.derivative_bound = std::sqrt(sup.x_n) * sup.lambda;
    if (sup.x_n > a) {
        r.note = "below n_*, comparison not applicable (x_n > a)";
        return r;
    }
    r.applicable = true;
    const std::vector<double> v = with_boundary(pair.v);
    const std::size_t last = v.size() - 1;

    r.worst_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= last; ++i) {
        const double x = grid.nodes[i];
        if (x < sup.x_n) continue;
        r.worst_gap = std::max(r.worst_gap, v[i] - sup(x));
    }
    r.holds = r.worst_gap <= 0.0;

    // Centered differences at the two nodes bracketing x_n, interpolated
    // linearly; one-sided at the grid edge.
    auto slope = [&](std::size_t i) {
        if (i == 0) return (v[1] - v[0]) / grid.h;
        if (i == last) return (v[last] - v[last - 1]) / grid.h;
        return (v[i + 1] - v[i - 1]) / (2.0 * grid.h);
    };
    const auto it = std::upper_bound(grid.nodes.begin(), grid.nodes.end(), sup.x_n);
    const std::size_t right = std::min<std::size_t>(static_cast<std::size_t>(it - grid.nodes.begin()), last);
    const std::size_t left = right - 1;
    const double w = (sup.x_n - grid.nodes[left]) / grid.h;
    r.derivative = std::abs((1.0 - w) * slope(left) + w * slope(right));
    r.derivative_check = r.derivative <= r.derivative_bound;
    return r;
}

RhoSample rho_from_mass(int n, double lambda, double strip_mass, double T) {
    if (!(strip_mass > 0.0)) throw Error("bounds", "strip mass underflowed to zero; strip too far from the ground-state support");
    RhoSample s;
    s.n = n;
    s.T = T;
    s.lambda = lambda;
    s.strip_mass = strip_mass;
    const double two_lt = 2.0 * lambda * T;
    const double log_mass = std::log(strip_mass);
    s.log_rho = two_lt - std::log(lambda) + log_mass;
    // 1 - e^{-2 lambda T} via expm1 for small horizons.
    const double one_minus = -std::expm1(-two_lt);
    s.log_cost_lower = std::log(2.0 * lambda) - two_lt - std::log(one_minus) - log_mass;
    s.rho = std::exp(s.log_rho);
    s.cost_lower = std::exp(s.log_cost_lower);
    return s;
}

RhoSample rho_functional(const EigenPair& pair, const Grid1D& grid, const ProblemConfig& cfg) {
    if (!(cfg.a > 0.0 && cfg.a < cfg.b && cfg.b < 1.0)) throw Error("bounds", "require 0 < a < b < 1");
    const double mass = strip_energy(pair.v, strip_mask(grid, cfg.a, cfg.b), grid);
    return rho_from_mass(pair.n, pair.lambda, mass, cfg.T);
}

RhoSample rho_functional_discrete(const EigenPair& pair, const Grid1D& grid, const ProblemConfig& cfg,
                                  const TimeGrid& tg) {
    RhoSample s = rho_functional(pair, grid, cfg);
    const double r = cn_factor(pair.lambda, tg.dt);
    const double log_decay = 2.0 * tg.steps * std::log(std::abs(r));
    const double observed = tg.dt * trapezoid_geometric_sum(r * r, tg.steps);
    s.log_cost_lower = log_decay - std::log(observed) - std::log(s.strip_mass);
    s.cost_lower = std::exp(s.log_cost_lower);
    return s;
}

CrossoverReport crossover_estimate(const ProblemConfig& cfg, std::span<const int> n_list, const Grid1D& grid,
                                   Execution exec) {
    if (cfg.gamma != 1.0) throw Error("bounds", "crossover estimate requires gamma = 1");
    CrossoverReport rep;
    rep.gamma = 1.0;
    rep.a = cfg.a;
    rep.t_asymptotic = 0.5 * cfg.a * cfg.a;
    rep.interpretation =
        "t_hat is where log(rho_n)/n changes sign for the test-function functional; it is a lower "
        "estimate for the minimal control time, which is only bracketed here and not reproduced";

    const std::vector<EigenPair> pairs = ground_eigenpairs(1.0, n_list, grid, exec);
    const std::vector<char> mask = strip_mask(grid, cfg.a, cfg.b);
    std::vector<double> ns, logm;
    for (const auto& p : pairs) {
        const double ratio = p.lambda / (p.n * pi);
        if (ratio < 0.99 || ratio > 1.01) {
            rep.rejected.push_back(p.n);
            continue;
        }
        const double mass = strip_energy(p.v, mask, grid);
        if (!(mass > 0.0)) throw Error("bounds", "strip mass underflowed at n=" + std::to_string(p.n));
        ns.push_back(p.n);
        logm.push_back(std::log(mass));
        rep.samples.emplace_back(p.n, std::log(mass) / p.n);
        rep.lambda_ratio = ratio;
    }
    if (ns.size() < 4) throw Error("bounds", "crossover fit needs at least 4 samples in the harmonic regime");

    Eigen::MatrixXd X(ns.size(), 3);
    Eigen::VectorXd y(ns.size());
    for (std::size_t j = 0; j < ns.size(); ++j) {
        X(j, 0) = 1.0;
        X(j, 1) = -ns[j];
        X(j, 2) = std::log(ns[j]);
        y(j) = logm[j];
    }
    const Eigen::VectorXd coef = X.colPivHouseholderQr().solve(y);
    rep.slope_hat = coef(1);
    const double c1 = coef(2);
    rep.t_hat = rep.slope_hat / (2.0 * pi * rep.lambda_ratio);

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t j = 0; j + 1 < ns.size(); ++j) {
        const double d0 = logm[j] - c1 * std::log(ns[j]);
        const double d1 = logm[j + 1] - c1 * std::log(ns[j + 1]);
        const double s = -(d1 - d0) / (ns[j + 1] - ns[j]);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    rep.slope_spread = (hi - lo) / std::abs(rep.slope_hat);
    rep.flagged = !(rep.t_hat > 0.0) || rep.slope_spread > 0.10;
    return rep;
}

}  // namespace grushin
