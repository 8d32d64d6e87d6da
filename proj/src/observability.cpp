#include "grushin/observability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "grushin/bounds.hpp"

namespace grushin {

Gramian::Gramian(const ModeOperator& op, const TimeGrid& tg, std::span<const char> strip)
    : stepper_(op, tg.dt), grid_(op.grid), tg_(tg), strip_(strip.begin(), strip.end()) {
    if (strip.size() != op.size()) throw Error("observability", "strip mask size does not match operator");
}

std::vector<double> Gramian::apply(std::span<const double> g0) const {
    const std::size_t m = size();
    if (g0.size() != m) throw Error("observability", "vector size does not match operator");
    Matrix traj(tg_.steps + 1, m);
    std::copy(g0.begin(), g0.end(), traj.row(0).begin());
    for (int k = 0; k < tg_.steps; ++k) {
        auto next = traj.row(k + 1);
        std::copy(traj.row(k).begin(), traj.row(k).end(), next.begin());
        stepper_.propagate(next);
    }
    std::vector<double> acc(m, 0.0);
    for (int k = tg_.steps; k >= 0; --k) {
        if (k < tg_.steps) stepper_.propagate(acc);
        const double w = tg_.weight(k) * tg_.dt;
        const auto g = traj.row(k);
        for (std::size_t i = 0; i < m; ++i)
            if (strip_[i]) acc[i] += w * g[i];
    }
    return acc;
}

double Gramian::quadratic_form_direct(std::span<const double> g0) const {
    std::vector<double> g(g0.begin(), g0.end());
    double total = 0.0;
    for (int k = 0; k <= tg_.steps; ++k) {
        if (k > 0) stepper_.propagate(g);
        total += tg_.weight(k) * tg_.dt * strip_energy(g, strip_, grid_);
    }
    return total;
}

std::vector<double> Gramian::terminal(std::span<const double> g0) const {
    std::vector<double> g(g0.begin(), g0.end());
    for (int k = 0; k < tg_.steps; ++k) stepper_.propagate(g);
    return g;
}

std::vector<double> Gramian::terminal_scaled(std::span<const double> g0, double& log_scale) const {
    std::vector<double> g(g0.begin(), g0.end());
    log_scale = 0.0;
    for (int k = 0; k < tg_.steps; ++k) {
        stepper_.propagate(g);
        double peak = 0.0;
        for (double v : g) peak = std::max(peak, std::abs(v));
        if (peak > 0.0 && peak < 1e-150) {
            for (double& v : g) v *= 1e150;
            log_scale -= 150.0 * std::log(10.0);
        }
    }
    return g;
}

std::vector<double> gramian_apply(const ModeOperator& op, std::span<const double> g0, const TimeGrid& tg,
                                  std::span<const char> strip) {
    return Gramian(op, tg, strip).apply(g0);
}

CgResult conjugate_gradient(const std::function<std::vector<double>(std::span<const double>)>& apply,
                            std::span<const double> rhs, std::span<const double> x0, const Grid1D& grid,
                            double tol, int max_iter) {
    const std::size_t m = rhs.size();
    CgResult res;
    res.x.assign(x0.begin(), x0.end());
    if (res.x.empty()) res.x.assign(m, 0.0);
    const double bnorm = interior_norm(rhs, grid);
    if (bnorm == 0.0) {
        std::fill(res.x.begin(), res.x.end(), 0.0);
        res.converged = true;
        return res;
    }
    std::vector<double> r(rhs.begin(), rhs.end());
    {
        const std::vector<double> ax = apply(res.x);
        for (std::size_t i = 0; i < m; ++i) r[i] -= ax[i];
    }
    std::vector<double> p = r;
    double rr = interior_dot(r, r, grid);
    std::vector<double> best = res.x;
    double best_res = std::sqrt(rr) / bnorm;
    for (int it = 0; it < max_iter && best_res > tol; ++it) {
        const std::vector<double> ap = apply(p);
        const double pap = interior_dot(p, ap, grid);
        if (!(pap > 0.0)) break;
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < m; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = interior_dot(r, r, grid);
        res.iterations = it + 1;
        const double rel = std::sqrt(rr_new) / bnorm;
        if (rel < best_res) {
            best_res = rel;
            best = res.x;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
    }
    res.x = std::move(best);
    res.relative_residual = best_res;
    res.converged = best_res <= tol;
    return res;
}

ObservabilityReport observability_lower_bound(const ModeOperator& op, const ProblemConfig& cfg) {
    const EigenPair pair = ground_eigenpair(op);
    const RhoSample rs = rho_functional(pair, op.grid, cfg);
    ObservabilityReport rep;
    rep.n = op.n;
    rep.T = cfg.T;
    rep.lower_bound = rep.lower_bound_continuum = rs.cost_lower;
    rep.log_lower_bound = rs.log_cost_lower;
    return rep;
}

namespace {

// Top generalized eigenvector of (S^2, G) restricted to span{e_j}. Returns the
// coefficients' image in the full space, or an empty vector on failure.
std::vector<double> ritz_start(const ModeOperator& op, const TimeGrid& tg, std::span<const char> strip, int k) {
    const Grid1D& grid = op.grid;
    const int dim = std::min<int>(k, static_cast<int>(op.size()) - 1);
    if (dim < 2) return {};
    const std::vector<EigenPair> basis = first_k_eigenpairs(op, dim);
    std::vector<double> r(dim), mass(dim);
    std::vector<int> keep;
    for (int j = 0; j < dim; ++j) {
        r[j] = cn_factor(basis[j].lambda, tg.dt);
        mass[j] = strip_energy(basis[j].v, strip, grid);
        if (mass[j] > 0.0 && r[j] != 0.0) keep.push_back(j);
    }
    const int d = static_cast<int>(keep.size());
    if (d < 1) return {};
    const double log_r0 = std::log(std::abs(r[keep[0]]));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d), B(d, d);
    for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
            const int i = keep[p], j = keep[q];
            double chi = 0.0;
            for (std::size_t x = 0; x < op.size(); ++x)
                if (strip[x]) chi += basis[i].v[x] * basis[j].v[x];
            B(p, q) = tg.dt * grid.h * chi * trapezoid_geometric_sum(r[i] * r[j], tg.steps);
        }
    Eigen::VectorXd scale(d);
    for (int p = 0; p < d; ++p) {
        if (!(B(p, p) > 0.0)) return {};
        scale(p) = 1.0 / std::sqrt(B(p, p));
        A(p, p) = std::exp(2.0 * tg.steps * (std::log(std::abs(r[keep[p]])) - log_r0));
    }
    const Eigen::MatrixXd Bs = scale.asDiagonal() * B * scale.asDiagonal();
    const Eigen::MatrixXd As = scale.asDiagonal() * A * scale.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(As, Bs);
    if (ges.info() != Eigen::Success) return {};
    const Eigen::VectorXd c = scale.asDiagonal() * ges.eigenvectors().col(d - 1);
    std::vector<double> x(op.size(), 0.0);
    for (int p = 0; p < d; ++p)
        for (std::size_t i = 0; i < op.size(); ++i) x[i] += c(p) * basis[keep[p]].v[i];
    return x;
}

}  // namespace

ObservabilityReport observability_cost(const ModeOperator& op, const TimeGrid& tg, const ProblemConfig& cfg,
                                       double tol, int ritz_dim) {
    if (std::abs(tg.T - cfg.T) > 1e-12 * cfg.T) throw Error("observability", "time grid horizon differs from cfg.T");
    const EigenPair pair = ground_eigenpair(op);
    const Grid1D& grid = op.grid;
    const std::vector<char> strip = strip_mask(grid, cfg.a, cfg.b);
    const Gramian G(op, tg, strip);
    constexpr double inf = std::numeric_limits<double>::infinity();

    ObservabilityReport rep;
    rep.n = op.n;
    rep.T = cfg.T;
    const RhoSample discrete = rho_functional_discrete(pair, grid, cfg, tg);
    rep.lower_bound = discrete.cost_lower;
    rep.log_lower_bound = discrete.log_cost_lower;
    rep.lower_bound_continuum = rho_functional(pair, grid, cfg).cost_lower;

    // log of ||S x||^2 / <G x, x>; +inf marks a numerically unobservable vector.
    auto log_quotient = [&](std::span<const double> x) {
        const double xx = interior_dot(x, x, grid);
        const double q = G.quadratic_form_direct(x);
        if (q < 1e-280 * xx) return inf;
        double ls = 0.0;
        const std::vector<double> sx = G.terminal_scaled(x, ls);
        return 2.0 * (log_interior_norm(sx, grid) + ls) - std::log(q);
    };

    rep.log_test_ratio = log_quotient(pair.v);
    if (rep.log_test_ratio == inf) {
        rep.cost = rep.log_cost = inf;
        return rep;
    }

    // Nested Ritz subspaces; the Gramian is Cauchy-like in the eigenbasis, so
    // large subspaces can lose accuracy. Every candidate is scored by its
    // measured quotient and the best one seeds the power iteration.
    std::vector<double> x = pair.v;
    double best = rep.log_test_ratio;
    const int max_dim = std::min<int>(ritz_dim, static_cast<int>(op.size()) - 1);
    for (int dim = 4;; dim *= 2) {
        const int d = std::min(dim, max_dim);
        std::vector<double> cand = ritz_start(op, tg, strip, d);
        if (!cand.empty()) {
            const double lq = log_quotient(cand);
            if (lq != inf && lq > best) {
                best = lq;
                x = std::move(cand);
                rep.ritz_dim = d;
            }
        }
        if (d >= max_dim) break;
    }

    constexpr int max_outer = 500;
    auto gapply = [&G](std::span<const double> v) { return G.apply(v); };
    double prev = -inf;
    for (int it = 0; it < max_outer; ++it) {
        const double nrm = interior_norm(x, grid);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
        for (double& v : x) v /= nrm;
        const double lq = log_quotient(x);
        rep.iterations = it + 1;
        if (lq == inf) break;
        best = std::max(best, lq);
        if (it > 0 && std::abs(lq - prev) <= tol) {
            rep.converged = true;
            break;
        }
        // Inexact inner solves can lose monotonicity; stop once the quotient drops.
        if (it > 0 && lq < prev - tol) break;
        prev = lq;

        // Solve G z = S^2 x, warm-started at z = quotient * x (exact at a fixed point).
        double ls1 = 0.0, ls2 = 0.0;
        const std::vector<double> sx = G.terminal_scaled(x, ls1);
        const std::vector<double> y = G.terminal_scaled(sx, ls2);
        const double factor = std::exp(lq - ls1 - ls2);
        std::vector<double> guess;
        if (std::isfinite(factor)) {
            guess = x;
            for (double& v : guess) v *= factor;
        }
        const CgResult cg = conjugate_gradient(gapply, y, guess, grid, 1e-12, 200);
        x = cg.x;
    }
    rep.log_cost = best;
    rep.cost = std::exp(best);
    if (rep.log_cost < rep.log_lower_bound - 1e-8)
        throw Error("observability", "estimated cost fell below the certified lower bound at n=" +
                                         std::to_string(op.n));
    return rep;
}

SweepReport uniform_sweep(const ProblemConfig& cfg, std::span<const int> n_list, bool lower_bound_only,
                          Execution exec, double tol) {
    SweepReport sw;
    if (n_list.empty()) return sw;
    cfg.validate();
    const Grid1D grid = make_grid(cfg.nx);
    sw.reports.resize(n_list.size());
    for_each_index(static_cast<long>(n_list.size()), exec, [&](long j) {
        const ModeOperator op = assemble_mode_operator(n_list[j], cfg.gamma, grid);
        if (lower_bound_only) {
            sw.reports[j] = observability_lower_bound(op, cfg);
            return;
        }
        // cfg.nt is a floor; stiff modes must be damped or they dominate the quotient
        const TimeGrid tg = make_time_grid(cfg.T, cn_resolving_steps(op, cfg.T, cfg.nt));
        sw.reports[j] = observability_cost(op, tg, cfg, tol);
    });
    double env = 0.0;
    for (const auto& r : sw.reports) {
        env = std::max(env, r.lower_bound);
        sw.lower_envelope.push_back(env);
        const double c = lower_bound_only ? r.lower_bound : r.cost;
        if (c > sw.sup_cost || sw.argmax_n == 0) {
            sw.sup_cost = c;
            sw.argmax_n = r.n;
        }
    }
    return sw;
}

void write_sweep_csv(const std::string& path, const SweepReport& sweep) {
    std::ofstream out(path);
    if (!out) throw Error("observability", "cannot open " + path + " for writing");
    out << "n,T,cost,lower_bound,converged\n";
    char buf[160];
    for (const auto& r : sweep.reports) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n", r.n, r.T, r.cost, r.lower_bound,
                      r.converged ? 1 : 0);
        out << buf;
    }
}

}  // namespace grushin
