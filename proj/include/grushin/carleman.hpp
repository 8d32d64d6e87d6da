#pragma once

#include <span>
#include <string>
#include <vector>

#include "grushin/core.hpp"
#include "grushin/evolution.hpp"
#include "grushin/spectral.hpp"

namespace grushin {

enum class WeightRegime { regular, singular };

/// Spatial Carleman weight beta on [-1,1]. beta'' is -eta outside a sin^2
/// bump supported in (a',b'); in the singular regime the piece on (-eps,eps)
/// is beta' = -sqrt(sign(x)|x|^(2 gamma) + c1) and beta'' blows up at 0.
struct WeightProfile {
    WeightRegime regime = WeightRegime::regular;
    double gamma = 1.0;
    double a_prime = 0.0;
    double b_prime = 0.0;
    std::vector<double> x;  // grid nodes, endpoints included
    std::vector<double> beta, beta1, beta2;
    double c0 = 0.0;  // beta(0)
    double c1 = 0.0;
    double epsilon_nbhd = 0.0;

    // construction parameters
    double slope = 1.0;     // beta'(1) = slope
    double eta = 1.0;       // -beta'' off the bump (regular), right branch (singular)
    double eta_left = 1.0;  // singular left branch
    double bump_mass = 0.0;
    double shift = 0.0;
    double raw_left = 0.0, raw_right = 0.0;  // unshifted beta at -eps and eps

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;  // +-inf at x = 0 in the singular regime
};

/// Gap kept above the floor beta >= 1.
inline constexpr double kBetaFloorGap = 1e-3;

/// Throws Error("carleman", ...) for gamma outside (0,1], a' >= b', or when a
/// hypothesis clause fails on the grid (the clause is named).
WeightProfile build_weight(double gamma, double a_prime, double b_prime, const Grid1D& grid);

/// Nodewise hypothesis clauses; returns the first violated clause, empty if none.
std::string weight_violation(const WeightProfile& p);

/// M beta(x) / (t (T - t)); throws for t outside (0,T).
double alpha_eval(const WeightProfile& profile, double M, double T, double t, double x);

/// -1/2 (a_t - a_x^2)_t + [(a_t - a_x^2) a_x]_x - 1/2 a_xx^2 for a = M beta/(t(T-t)),
/// from beta, beta', beta'' at one point.
double carleman_bracket(double beta, double beta1, double beta2, double M, double t, double T);

struct CarlemanConstants {
    WeightRegime regime = WeightRegime::regular;
    int n = 1;
    double T = 1.0;
    double C1 = 0, C2 = 0, C3 = 0, C4 = 0, C5 = 0, C6 = 0, C7 = 0, C8 = 0, C9 = 0, C10 = 0, C11 = 0, C12 = 0;
    double C3_eff = 0;  // coefficient on the outer set after absorbing |beta''| beta'^2 (singular), C3 otherwise
    double C_pot = 0;   // singular regime: potential term <= C_pot lambda^2 M^3 / (t(T-t))^3 (...)
    double c3 = 0;      // sup beta on [-1,a'] u [b',1]
    double M1 = 0, M2 = 0, M = 0;
    double lambda_small = 0;  // singular regime only
    double calC = 0;
    double c_star = 0;
    double T_sharp = 0;  // gamma = 1 only
    double rho_sup = 0, rho2_sup = 0;
};

/// Constants for mode n on cfg (uses cfg.T, a, b, a', b').
/// c_star <= 0 means: derive it from the eigenvalue sandwich (gamma = 1 only).
CarlemanConstants extract_constants(const WeightProfile& profile, const ProblemConfig& cfg, int n,
                                    double c_star = 0.0);

/// Lower eigenvalue sandwich constant min_n lambda_lo / n^(2/(1+gamma)) over n = 1, 2, 4, ..., n_max.
double sandwich_lower_constant(double gamma, int n_max = 64);

/// Smooth cutoff: 1 on [a',b'], 0 outside (a,b), built from e^(-1/u) transitions.
struct Cutoff {
    double a, a_prime, b_prime, b;
    double operator()(double x) const;
    double second_derivative(double x) const;
};

struct PointwiseReport {
    bool hypotheses = false;
    bool borne_dz = false;
    bool borne_z = false;
    bool potential_absorbed = false;
    bool cn_clause1 = true;  // singular regime only
    bool cn_clause2 = true;
    std::string failure;

    bool pass() const {
        return hypotheses && borne_dz && borne_z && potential_absorbed && cn_clause1 && cn_clause2;
    }
};

/// Checks the pointwise inequalities at every grid node and at the time
/// samples {0, T/8, ..., T} with the constants' M.
PointwiseReport pointwise_check(const WeightProfile& profile, const CarlemanConstants& c, const ProblemConfig& cfg);

struct CarlemanCheckReport {
    int n = 0;
    double T = 0.0;
    double M = 0.0;
    Matrix z;  // g e^{-alpha} at interior time nodes (endpoints rows are zero)
    double lhs = 0.0, rhs = 0.0;
    double log_lhs = 0.0, log_rhs = 0.0;
    double tail_ratio = 0.0;  // first and last interior time nodes relative to lhs
    bool pointwise_pass = false;
    bool integrated_pass = false;
    double margin = 0.0;      // rhs/lhs - 1, may be +inf
    double log_margin = 0.0;  // log rhs - log lhs
    std::string failure;
};

inline constexpr double kCarlemanTolerance = 0.05;

CarlemanCheckReport integrated_check(const WeightProfile& profile, const CarlemanConstants& c,
                                     const ModeOperator& op, std::span<const double> g0, const ProblemConfig& cfg,
                                     const TimeGrid& tg, double tol = kCarlemanTolerance);

struct CaccioppoliReport {
    double lhs = 0.0, rhs = 0.0;
    double C11 = 0.0;
    bool holds = false;
    double margin = 0.0;  // rhs/lhs - 1
};

CaccioppoliReport caccioppoli_check(const ModeOperator& op, std::span<const double> g0, const ProblemConfig& cfg,
                                    const TimeGrid& tg, double tol = kCarlemanTolerance);

/// {gamma, n, T, M, constants, pointwise_pass, integrated_pass, margin} as JSON text.
std::string carleman_report_json(const WeightProfile& profile, const CarlemanConstants& c,
                                 const CarlemanCheckReport& r, const CaccioppoliReport& cacc);

}  // namespace grushin
