#include "grushin/carleman.hpp"

#include <algorithm>
#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "json.hpp"

namespace grushin {

using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn_pow(double x, double p) { return x < 0.0 ? -std::pow(-x, p) : std::pow(x, p); }

// Primitives of the normalized bump: Phi(xi) = xi - sin(2 pi xi)/(2 pi) for the
// derivative, Psi for its integral over x (width w).
double bump_phi(double xi) { return xi - std::sin(2.0 * pi * xi) / (2.0 * pi); }

double bump_density(double x, double lo, double hi, double mass) {
    if (x <= lo || x >= hi) return 0.0;
    const double w = hi - lo;
    const double s = std::sin(pi * (x - lo) / w);
    return 2.0 * mass / w * s * s;
}

double bump_cdf(double x, double lo, double hi) {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    return bump_phi((x - lo) / (hi - lo));
}

double bump_integral(double x, double lo, double hi) {
    const double w = hi - lo;
    if (x <= lo) return 0.0;
    if (x >= hi) return 0.5 * w + (x - hi);
    const double xi = (x - lo) / w;
    return w * (0.5 * xi * xi + (std::cos(2.0 * pi * xi) - 1.0) / (4.0 * pi * pi));
}

bool outer(const WeightProfile& p, double x) { return x <= p.a_prime || x >= p.b_prime; }

double singular_d1(const WeightProfile& p, double x) {
    return -std::sqrt(sgn_pow(x, 2.0 * p.gamma) + p.c1);
}

double singular_d2(const WeightProfile& p, double x) {
    if (x == 0.0) return -kInf;
    return -p.gamma * std::pow(std::abs(x), 2.0 * p.gamma - 1.0) / std::sqrt(sgn_pow(x, 2.0 * p.gamma) + p.c1);
}

// -integral_0^x sqrt(sign(s)|s|^(2 gamma) + c1) ds
double singular_raw(const WeightProfile& p, double x) {
    if (x == 0.0) return 0.0;
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double s) { return std::sqrt(sgn_pow(s, 2.0 * p.gamma) + p.c1); };
    const double lo = std::min(0.0, x), hi = std::max(0.0, x);
    const double v = integrator.integrate(f, lo, hi);
    return x > 0.0 ? -v : v;
}

double raw_value(const WeightProfile& p, double x) {
    if (p.regime == WeightRegime::regular) {
        const double u = x + 1.0;
        return -p.slope * u - 0.5 * p.eta * u * u + p.bump_mass * bump_integral(x, p.a_prime, p.b_prime);
    }
    const double e = p.epsilon_nbhd;
    if (x <= -e) {
        const double u = x + e;
        return p.raw_left + singular_d1(p, -e) * u - 0.5 * p.eta_left * u * u;
    }
    if (x < e) return singular_raw(p, x);
    const double u = x - e;
    return p.raw_right + singular_d1(p, e) * u - 0.5 * p.eta * u * u +
           p.bump_mass * bump_integral(x, p.a_prime, p.b_prime);
}

}  // namespace

double WeightProfile::value(double xv) const { return raw_value(*this, xv) + shift; }

double WeightProfile::d1(double xv) const {
    if (regime == WeightRegime::regular)
        return -slope - eta * (xv + 1.0) + bump_mass * bump_cdf(xv, a_prime, b_prime);
    const double e = epsilon_nbhd;
    if (xv <= -e) return singular_d1(*this, -e) - eta_left * (xv + e);
    if (xv < e) return singular_d1(*this, xv);
    return singular_d1(*this, e) - eta * (xv - e) + bump_mass * bump_cdf(xv, a_prime, b_prime);
}

double WeightProfile::d2(double xv) const {
    if (regime == WeightRegime::regular) return -eta + bump_density(xv, a_prime, b_prime, bump_mass);
    const double e = epsilon_nbhd;
    if (xv <= -e) return -eta_left;
    if (xv < e) return singular_d2(*this, xv);
    return -eta + bump_density(xv, a_prime, b_prime, bump_mass);
}

std::string weight_violation(const WeightProfile& p) {
    const std::size_t N = p.x.size();
    char buf[160];
    for (std::size_t i = 0; i < N; ++i) {
        const double x = p.x[i];
        if (i > 0 && i + 1 < N && !(p.beta[i] >= 1.0)) {
            std::snprintf(buf, sizeof buf, "beta >= 1 fails at x = %.6g", x);
            return buf;
        }
        if (outer(p, x) && !(std::abs(p.beta1[i]) > 0.0)) {
            std::snprintf(buf, sizeof buf, "|beta'| > 0 on the outer set fails at x = %.6g", x);
            return buf;
        }
        if (outer(p, x) && !(p.regime == WeightRegime::singular && x == 0.0) && !(p.beta2[i] < 0.0)) {
            std::snprintf(buf, sizeof buf, "beta'' < 0 on the outer set fails at x = %.6g", x);
            return buf;
        }
        if (p.regime == WeightRegime::singular && std::abs(x) < p.epsilon_nbhd) {
            const double target = sgn_pow(x, 2.0 * p.gamma) + p.c1;
            if (std::abs(p.beta1[i] * p.beta1[i] - target) > 1e-13 * target) {
                std::snprintf(buf, sizeof buf, "beta'^2 = sign(x)|x|^(2 gamma) + c1 fails at x = %.6g", x);
                return buf;
            }
            if (!(p.beta1[i] < 0.0)) {
                std::snprintf(buf, sizeof buf, "beta' < 0 near 0 fails at x = %.6g", x);
                return buf;
            }
            if (x != 0.0) {
                const double id = std::pow(std::abs(x), 2.0 * p.gamma - 1.0) * p.gamma;
                if (std::abs(p.beta2[i] * p.beta1[i] - id) > 1e-12 * id) {
                    std::snprintf(buf, sizeof buf, "beta'' beta' = gamma |x|^(2 gamma - 1) fails at x = %.6g", x);
                    return buf;
                }
            }
        }
    }
    if (!(p.beta1.front() < 0.0)) return "beta'(-1) < 0 fails";
    if (!(p.beta1.back() > 0.0)) return "beta'(1) > 0 fails";
    return {};
}

WeightProfile build_weight(double gamma, double a_prime, double b_prime, const Grid1D& grid) {
    if (!(gamma > 0.0) || gamma > 1.0) throw Error("carleman", "weights cover 0 < gamma <= 1 only");
    if (!(a_prime < b_prime) || !(a_prime > 0.0) || !(b_prime < 1.0))
        throw Error("carleman", "require 0 < a' < b' < 1");
    WeightProfile p;
    p.gamma = gamma;
    p.a_prime = a_prime;
    p.b_prime = b_prime;
    p.regime = gamma >= 0.5 ? WeightRegime::regular : WeightRegime::singular;
    p.slope = 1.0;
    if (p.regime == WeightRegime::regular) {
        p.eta = 1.0;
        // beta'(1) - beta'(-1) = 2 slope = -2 eta + bump mass
        p.bump_mass = 2.0 * p.slope + 2.0 * p.eta;
    } else {
        const double e = std::min(0.1, 0.5 * a_prime);
        const double e2g = std::pow(e, 2.0 * gamma);
        const double e2g1 = std::pow(e, 2.0 * gamma - 1.0);
        p.epsilon_nbhd = e;
        // keeps beta' < 0 through [-1, eps) while the left branch stays concave
        p.c1 = 2.0 * e2g + 2.0 * gamma * e2g1;
        p.eta_left = gamma * e2g1 / std::sqrt(p.c1 - e2g);
        p.eta = gamma * e2g1 / std::sqrt(p.c1 + e2g);
        p.bump_mass = p.slope - singular_d1(p, e) + p.eta * (1.0 - e);
        p.raw_left = singular_raw(p, -e);
        p.raw_right = singular_raw(p, e);
    }

    double lowest = kInf;
    for (double xv : grid.nodes) lowest = std::min(lowest, raw_value(p, xv));
    const int scan = 20000;
    for (int k = 0; k <= scan; ++k) lowest = std::min(lowest, raw_value(p, -1.0 + 2.0 * k / scan));
    p.shift = 1.0 + kBetaFloorGap - lowest;
    p.c0 = p.value(0.0);

    p.x = grid.nodes;
    const std::size_t N = p.x.size();
    p.beta.resize(N);
    p.beta1.resize(N);
    p.beta2.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        p.beta[i] = p.value(p.x[i]);
        p.beta1[i] = p.d1(p.x[i]);
        p.beta2[i] = p.d2(p.x[i]);
    }
    if (const std::string v = weight_violation(p); !v.empty()) throw Error("carleman", "weight construction: " + v);
    return p;
}

double alpha_eval(const WeightProfile& profile, double M, double T, double t, double x) {
    if (!(t > 0.0 && t < T)) throw Error("carleman", "alpha requires 0 < t < T");
    return M * profile.value(x) / (t * (T - t));
}

namespace {

std::vector<double> time_samples(double T) {
    std::vector<double> ts;
    for (int k = 0; k <= 8; ++k) ts.push_back(T * k / 8.0);
    return ts;
}

// E theta^3 / M^3 = A / M^2 + B / M + C with theta = t(T - t).
struct BorneZTerms {
    double A, B, C;
};

BorneZTerms borne_z_terms(double b, double b1, double b2, double t, double T) {
    const double th = t * (T - t);
    const double s = 2.0 * t - T;
    return {b * (3.0 * T * t - T * T - 3.0 * t * t), 2.0 * s * b1 * b1 + s * b * b2 - 0.5 * th * b2 * b2,
            -3.0 * b2 * b1 * b1};
}

}  // namespace

double carleman_bracket(double beta, double beta1, double beta2, double M, double t, double T) {
    const auto tz = borne_z_terms(beta, beta1, beta2, t, T);
    const double th = t * (T - t);
    return M * M * M / (th * th * th) * (tz.A / (M * M) + tz.B / M + tz.C);
}

namespace {

// (|x|^(2 gamma) beta')' = 2 gamma sign(x)|x|^(2 gamma - 1) beta' + |x|^(2 gamma) beta''
double potential_factor(double gamma, double x, double b1, double b2) {
    const double ax = std::abs(x);
    const double s = x < 0.0 ? -1.0 : 1.0;
    return 2.0 * gamma * s * std::pow(ax, 2.0 * gamma - 1.0) * b1 + std::pow(ax, 2.0 * gamma) * b2;
}

double dominance_weight(const WeightProfile& p, std::size_t i) {
    return p.regime == WeightRegime::regular ? 1.0 : std::abs(p.beta2[i]) * p.beta1[i] * p.beta1[i];
}

bool skip_node(const WeightProfile& p, std::size_t i) {
    return p.regime == WeightRegime::singular && p.x[i] == 0.0;
}

using boost::math::differentiation::make_fvar;

template <class X>
X transition(X u) {
    using std::exp;
    const X f = exp(-1.0 / u);
    const X g = exp(-1.0 / (1.0 - u));
    return f / (f + g);
}

double transition_d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const auto d = transition(make_fvar<double, 2>(u));
    return d.derivative(2);
}

}  // namespace

double Cutoff::operator()(double x) const {
    if (x <= a || x >= b) return 0.0;
    if (x >= a_prime && x <= b_prime) return 1.0;
    if (x < a_prime) return transition((x - a) / (a_prime - a));
    return transition((b - x) / (b - b_prime));
}

double Cutoff::second_derivative(double x) const {
    if (x <= a || x >= b || (x >= a_prime && x <= b_prime)) return 0.0;
    if (x < a_prime) return transition_d2((x - a) / (a_prime - a)) / ((a_prime - a) * (a_prime - a));
    return transition_d2((b - x) / (b - b_prime)) / ((b - b_prime) * (b - b_prime));
}

double sandwich_lower_constant(double gamma, int n_max) {
    std::vector<int> ns;
    for (int n = 1; n <= n_max; n *= 2) ns.push_back(n);
    const Grid1D grid = make_grid(required_nx(gamma, n_max));
    return eigen_scaling_sweep(gamma, ns, grid, Execution::serial).c_lower_hat;
}

CarlemanConstants extract_constants(const WeightProfile& p, const ProblemConfig& cfg, int n, double c_star) {
    if (n < 1) throw Error("carleman", "require n >= 1");
    if (std::abs(cfg.gamma - p.gamma) > 0.0) throw Error("carleman", "profile gamma differs from config gamma");
    if (p.a_prime != cfg.a_prime || p.b_prime != cfg.b_prime)
        throw Error("carleman", "profile strip differs from config (a', b')");
    CarlemanConstants c;
    c.regime = p.regime;
    c.n = n;
    c.T = cfg.T;
    const double T = cfg.T;
    const double g = p.gamma;
    const std::size_t N = p.x.size();
    const auto ts = time_samples(T);

    c.C1 = kInf;
    c.C2 = 0.0;
    c.c3 = 0.0;
    double min_weight = kInf;
    double c5 = 0.0;
    double inner_b1sq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double x = p.x[i];
        if (outer(p, x)) {
            if (!skip_node(p, i)) c.C1 = std::min(c.C1, -p.beta2[i]);
            c.c3 = std::max(c.c3, p.beta[i]);
            if (!skip_node(p, i)) min_weight = std::min(min_weight, dominance_weight(p, i));
        }
        if (x >= p.a_prime && x <= p.b_prime) {
            c.C2 = std::max(c.C2, std::abs(p.beta2[i]));
            inner_b1sq = std::max(inner_b1sq, p.beta1[i] * p.beta1[i]);
        }
        if (!skip_node(p, i)) {
            const double ax = std::abs(x);
            c5 = std::max(c5, 2.0 * g * std::pow(ax, 2.0 * g - 1.0) * std::abs(p.beta1[i]) +
                                  std::pow(ax, 2.0 * g) * std::abs(p.beta2[i]));
        }
    }
    c.C5 = p.regime == WeightRegime::regular ? pi * pi * c5 : pi * pi * (2.0 * g + 1.0);

    // Largest |A| and |B| over the time samples, per node.
    std::vector<double> amax(N, 0.0), bmax(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        if (skip_node(p, i)) continue;
        for (double t : ts) {
            const auto tz = borne_z_terms(p.beta[i], p.beta1[i], p.beta2[i], t, T);
            amax[i] = std::max(amax[i], std::abs(tz.A));
            bmax[i] = std::max(bmax[i], std::abs(tz.B));
        }
    }
    // Double M1 until the cubic term keeps at least half of itself on the outer set.
    double floor_ratio = kInf;
    for (std::size_t i = 0; i < N; ++i)
        if (outer(p, p.x[i]) && !skip_node(p, i))
            floor_ratio = std::min(floor_ratio, -3.0 * p.beta2[i] * p.beta1[i] * p.beta1[i] / dominance_weight(p, i));
    double M1 = 1.0;
    double C3 = 0.0;
    for (int it = 0; it < 200; ++it, M1 *= 2.0) {
        C3 = kInf;
        for (std::size_t i = 0; i < N; ++i) {
            if (!outer(p, p.x[i]) || skip_node(p, i)) continue;
            const double Cc = -3.0 * p.beta2[i] * p.beta1[i] * p.beta1[i];
            C3 = std::min(C3, (Cc - amax[i] / (M1 * M1) - bmax[i] / M1) / dominance_weight(p, i));
        }
        if (C3 >= 0.5 * floor_ratio) break;
    }
    if (!(C3 >= 0.5 * floor_ratio)) throw Error("carleman", "no M1 below 2^200 makes the cubic term dominate");
    c.M1 = M1;
    c.C3 = C3;
    c.C4 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double x = p.x[i];
        if (x < p.a_prime || x > p.b_prime) continue;
        const double Cc = std::abs(3.0 * p.beta2[i] * p.beta1[i] * p.beta1[i]);
        c.C4 = std::max(c.C4, amax[i] / (M1 * M1) + bmax[i] / M1 + Cc);
    }

    if (p.regime == WeightRegime::regular) {
        c.C3_eff = c.C3;
        c.M2 = std::sqrt(2.0 * c.C5 / c.C3) * n * (T / 2.0) * (T / 2.0);
        c.calC = 0.5 * std::sqrt(c.C5 / (2.0 * c.C3));
        c.C6 = c.C4 + c.C3 / 2.0;
    } else {
        c.C_pot = c.C5 / 16.0;
        c.C3_eff = c.C3 * min_weight;
        double lam = 1.0;
        std::string failing;
        for (; lam > 1e-8; lam *= 0.5) {
            failing.clear();
            for (std::size_t i = 0; i < N && failing.empty(); ++i) {
                const double x = p.x[i];
                if (!outer(p, x) || x == 0.0) continue;
                const double ax = std::abs(x);
                char buf[120];
                if (c.C_pot * lam * lam * std::pow(ax, 2.0 * g - 1.0) >
                    c.C3 / 4.0 * std::abs(p.beta2[i]) * std::abs(p.beta1[i])) {
                    std::snprintf(buf, sizeof buf, "first smallness clause at x = %.6g", x);
                    failing = buf;
                } else if (c.C_pot * lam * lam * std::pow(ax, 2.0 * g) > c.C3 / 4.0 * p.beta1[i] * p.beta1[i]) {
                    std::snprintf(buf, sizeof buf, "second smallness clause at x = %.6g", x);
                    failing = buf;
                }
            }
            if (failing.empty()) break;
        }
        if (!failing.empty()) throw Error("carleman", "no lambda_small > 1e-8 passes: " + failing);
        c.lambda_small = lam;
        c.M2 = n * T * T / lam;
        c.calC = 1.0 / lam;
        double inner_pot = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double x = p.x[i];
            if (x < p.a_prime || x > p.b_prime) continue;
            const double ax = std::abs(x);
            inner_pot = std::max(inner_pot, std::pow(ax, 2.0 * g - 1.0) * std::abs(p.beta1[i]) +
                                                std::pow(ax, 2.0 * g) * std::abs(p.beta2[i]));
        }
        c.C6 = c.C4 + c.C_pot * lam * lam * inner_pot;
    }
    c.M = std::max({1.0, c.M1, c.M2});
    c.C7 = c.C6 + 2.0 * c.C2 * inner_b1sq;
    c.C8 = 2.0 * c.C2;
    c.C9 = c.C7 * 27.0 / 8.0 * std::exp(-3.0);  // sup x^3 e^{-2x} at x = 3/2
    c.C10 = c.C8 * std::exp(-2.0);              // sup x^2 e^{-2x} at x = 1

    const Cutoff rho{cfg.a, cfg.a_prime, cfg.b_prime, cfg.b};
    c.rho_sup = 1.0;
    const int scan = 100000;
    for (int k = 1; k < scan; ++k) {
        const double u = static_cast<double>(k) / scan;
        c.rho2_sup = std::max(c.rho2_sup, std::abs(rho.second_derivative(cfg.a + u * (cfg.a_prime - cfg.a))));
        c.rho2_sup = std::max(c.rho2_sup, std::abs(rho.second_derivative(cfg.b_prime + u * (cfg.b - cfg.b_prime))));
    }
    c.C11 = T * c.rho_sup + 0.5 * T * T * c.rho2_sup;
    c.C12 = 2.0 * (c.C9 + c.C10 * c.C11);

    if (g == 1.0) {
        c.c_star = c_star > 0.0 ? c_star : sandwich_lower_constant(1.0);
        c.T_sharp = 27.0 * c.c3 * c.calC / c.c_star;
    }
    return c;
}

PointwiseReport pointwise_check(const WeightProfile& p, const CarlemanConstants& c, const ProblemConfig& cfg) {
    PointwiseReport r;
    r.failure = weight_violation(p);
    r.hypotheses = r.failure.empty();
    r.borne_dz = r.borne_z = r.potential_absorbed = true;
    const double T = cfg.T;
    const double M = c.M;
    const double g = p.gamma;
    const double npi2 = std::pow(c.n * pi, 2.0);
    const auto ts = time_samples(T);
    char buf[160];
    auto fail = [&](bool& flag, const char* what, double x) {
        if (!flag) return;
        flag = false;
        std::snprintf(buf, sizeof buf, "%s fails at x = %.6g", what, x);
        if (r.failure.empty()) r.failure = buf;
    };
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        const double x = p.x[i];
        if (skip_node(p, i)) continue;
        const bool out = outer(p, x);
        const bool inner = x >= p.a_prime && x <= p.b_prime;
        // -alpha_xx theta / M = -beta''
        if (out && !(-p.beta2[i] >= c.C1)) fail(r.borne_dz, "-alpha_xx >= C1 M/(t(T-t))", x);
        if (inner && !(std::abs(p.beta2[i]) <= c.C2)) fail(r.borne_dz, "|alpha_xx| <= C2 M/(t(T-t))", x);
        for (double t : ts) {
            const auto tz = borne_z_terms(p.beta[i], p.beta1[i], p.beta2[i], t, T);
            const double e = tz.A / (M * M) + tz.B / M + tz.C;
            if (out && !(e >= c.C3 * dominance_weight(p, i))) fail(r.borne_z, "cubic lower bound", x);
            if (inner && !(std::abs(e) <= c.C4)) fail(r.borne_z, "cubic upper bound", x);
        }
        // |(n pi)^2 [|x|^{2g} alpha_x]_x| <= C3 w M^3 / (2 theta^3), worst at theta = T^2/4
        const double th = T * T / 4.0;
        const double pot = npi2 * std::abs(potential_factor(g, x, p.beta1[i], p.beta2[i])) * th * th / (M * M);
        if (out && !(pot <= 0.5 * c.C3 * dominance_weight(p, i))) fail(r.potential_absorbed, "potential absorption", x);
        if (inner && !(pot <= c.C6 - c.C4)) fail(r.potential_absorbed, "potential bound on [a',b']", x);
        if (p.regime == WeightRegime::singular && out) {
            const double ax = std::abs(x);
            const double l2 = c.lambda_small * c.lambda_small;
            if (!(c.C_pot * l2 * std::pow(ax, 2.0 * g - 1.0) <= c.C3 / 4.0 * std::abs(p.beta2[i] * p.beta1[i])))
                fail(r.cn_clause1, "first smallness clause", x);
            if (!(c.C_pot * l2 * std::pow(ax, 2.0 * g) <= c.C3 / 4.0 * p.beta1[i] * p.beta1[i]))
                fail(r.cn_clause2, "second smallness clause", x);
        }
    }
    return r;
}

namespace {

double log_sum_exp(const std::vector<double>& logs) {
    double m = -kInf;
    for (double v : logs) m = std::max(m, v);
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (double v : logs) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace

CarlemanCheckReport integrated_check(const WeightProfile& p, const CarlemanConstants& c, const ModeOperator& op,
                                     std::span<const double> g0, const ProblemConfig& cfg, const TimeGrid& tg,
                                     double tol) {
    if (p.x.size() != op.grid.nodes.size()) throw Error("carleman", "profile and operator grids differ");
    CarlemanCheckReport r;
    r.n = op.n;
    r.T = tg.T;
    r.M = c.M;
    const auto pw = pointwise_check(p, c, cfg);
    r.pointwise_pass = pw.pass();
    if (!pw.failure.empty()) r.failure = pw.failure;

    const ModeTrajectory traj = solve_adjoint_mode(op, g0, tg);
    const Grid1D& grid = op.grid;
    const std::size_t nx = grid.interior_size();
    const int K = tg.steps;
    const double T = tg.T;
    const double M = c.M;
    const auto strip = strip_mask(grid, cfg.a, cfg.b);
    const auto inner = strip_mask(grid, cfg.a_prime, cfg.b_prime);

    r.z = Matrix(K + 1, nx);
    std::vector<double> row_logs(K + 1, -kInf);
    for (int k = 1; k < K; ++k) {
        const double t = tg.time(k);
        const double th = t * (T - t);
        const auto g = traj.states.row(k);
        auto z = r.z.row(k);
        std::vector<double> logs;
        for (std::size_t i = 0; i < nx; ++i) {
            const double alpha = M * p.beta[i + 1] / th;
            z[i] = g[i] * std::exp(-alpha);
            if (inner[i] || g[i] == 0.0) continue;
            logs.push_back(2.0 * std::log(std::abs(g[i])) - 2.0 * alpha);
        }
        row_logs[k] = log_sum_exp(logs) + std::log(tg.weight(k) * tg.dt * grid.h) - 3.0 * std::log(th);
    }
    r.log_lhs = log_sum_exp(row_logs) + std::log(c.C3_eff) + 3.0 * std::log(M);
    double rhs = 0.0;
    for (int k = 0; k <= K; ++k) rhs += tg.weight(k) * tg.dt * strip_energy(traj.states.row(k), strip, grid);
    r.rhs = c.C12 * rhs;
    r.log_rhs = std::log(r.rhs);
    r.lhs = std::exp(r.log_lhs);
    if (r.log_lhs == -kInf) {
        r.tail_ratio = 0.0;
        r.margin = r.rhs > 0.0 ? kInf : 0.0;
        r.log_margin = r.rhs > 0.0 ? kInf : 0.0;
        r.integrated_pass = true;
        return r;
    }
    const double log_row_sum = log_sum_exp(row_logs);
    r.tail_ratio = K >= 2 ? std::exp(row_logs[1] - log_row_sum) + std::exp(row_logs[K - 1] - log_row_sum) : 1.0;
    r.log_margin = r.log_rhs - r.log_lhs;
    r.margin = std::expm1(r.log_margin);
    r.integrated_pass = r.log_lhs <= r.log_rhs + std::log1p(tol) && r.tail_ratio <= 1e-12;
    if (r.tail_ratio > 1e-12 && r.failure.empty()) r.failure = "time tail above 1e-12 of the weighted integral";
    return r;
}

CaccioppoliReport caccioppoli_check(const ModeOperator& op, std::span<const double> g0, const ProblemConfig& cfg,
                                    const TimeGrid& tg, double tol) {
    const ModeTrajectory traj = solve_adjoint_mode(op, g0, tg);
    const Grid1D& grid = op.grid;
    const std::size_t nx = grid.interior_size();
    const auto strip = strip_mask(grid, cfg.a, cfg.b);
    const auto inner = strip_mask(grid, cfg.a_prime, cfg.b_prime);
    const double T = tg.T;
    const Cutoff rho{cfg.a, cfg.a_prime, cfg.b_prime, cfg.b};
    double rho2 = 0.0;
    const int scan = 100000;
    for (int k = 1; k < scan; ++k) {
        const double u = static_cast<double>(k) / scan;
        rho2 = std::max(rho2, std::abs(rho.second_derivative(cfg.a + u * (cfg.a_prime - cfg.a))));
        rho2 = std::max(rho2, std::abs(rho.second_derivative(cfg.b_prime + u * (cfg.b - cfg.b_prime))));
    }
    CaccioppoliReport r;
    r.C11 = T + 0.5 * T * T * rho2;
    double grad = 0.0, mass = 0.0;
    for (int k = 0; k <= tg.steps; ++k) {
        const double t = tg.time(k);
        const double wk = tg.weight(k) * tg.dt;
        const auto g = with_boundary(traj.states.row(k));
        double gk = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            if (!inner[i]) continue;
            const double d = (g[i + 2] - g[i]) / (2.0 * grid.h);
            gk += d * d;
        }
        grad += wk * t * (T - t) * grid.h * gk;
        mass += wk * strip_energy(traj.states.row(k), strip, grid);
    }
    r.lhs = grad;
    r.rhs = r.C11 * mass;
    r.holds = r.lhs <= r.rhs * (1.0 + tol);
    r.margin = r.lhs > 0.0 ? r.rhs / r.lhs - 1.0 : (r.rhs > 0.0 ? kInf : 0.0);
    return r;
}

std::string carleman_report_json(const WeightProfile& p, const CarlemanConstants& c, const CarlemanCheckReport& r,
                                 const CaccioppoliReport& cacc) {
    auto finite = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    nlohmann::ordered_json j;
    j["gamma"] = p.gamma;
    j["regime"] = p.regime == WeightRegime::regular ? "regular" : "singular";
    j["n"] = r.n;
    j["T"] = r.T;
    j["M"] = r.M;
    nlohmann::ordered_json k;
    const double C[] = {c.C1, c.C2, c.C3, c.C4, c.C5, c.C6, c.C7, c.C8, c.C9, c.C10, c.C11, c.C12};
    for (int i = 0; i < 12; ++i) k["C" + std::to_string(i + 1)] = C[i];
    k["C3_eff"] = c.C3_eff;
    k["c3"] = c.c3;
    k["M1"] = c.M1;
    k["M2"] = c.M2;
    k["M"] = c.M;
    k["lambda_small"] = c.lambda_small;
    k["calC"] = c.calC;
    k["T_sharp"] = c.T_sharp;
    j["constants"] = k;
    j["pointwise_pass"] = r.pointwise_pass;
    j["integrated_pass"] = r.integrated_pass;
    j["margin"] = finite(r.margin);
    j["log_margin"] = finite(r.log_margin);
    j["log_lhs"] = finite(r.log_lhs);
    j["log_rhs"] = finite(r.log_rhs);
    j["caccioppoli"] = {{"lhs", cacc.lhs}, {"rhs", cacc.rhs}, {"holds", cacc.holds}, {"margin", finite(cacc.margin)}};
    return j.dump(2);
}

}  // namespace grushin
