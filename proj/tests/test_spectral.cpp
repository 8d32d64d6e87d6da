#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "grushin/spectral.hpp"

using namespace grushin;
using std::numbers::pi;

namespace {

// Ground eigenvalue of -w'' + |y|^(2 gamma) w on the line, truncated to
// [-L, L] and solved with Eigen's dense tridiagonal QL.
double line_ground_state(double gamma, double L, int N) {
    const double h = 2.0 * L / (N + 1);
    Eigen::VectorXd d(N), e(N - 1);
    for (int i = 0; i < N; ++i) {
        const double y = -L + (i + 1) * h;
        d(i) = 2.0 / (h * h) + std::pow(std::abs(y), 2.0 * gamma);
    }
    e.setConstant(-1.0 / (h * h));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("zero potential anchor after Richardson") {
    const Grid1D g1 = make_grid(199), g2 = make_grid(399);
    const EigenPair p1 = ground_eigenpair(assemble_operator_with_coupling(0.0, 1.0, g1));
    const EigenPair p2 = ground_eigenpair(assemble_operator_with_coupling(0.0, 1.0, g2));
    const double exact = pi * pi / 4.0;
    CHECK(std::abs(richardson_pair(p1.lambda, p2.lambda, 2) - exact) / exact < 1e-8);
    double err = 0.0;
    for (std::size_t i = 0; i < p2.v.size(); ++i) err = std::max(err, std::abs(p2.v[i] - std::cos(pi * g2.x(i) / 2.0)));
    CHECK(err < 1e-6);
    CHECK(p2.lambda_lo <= p2.lambda);
    CHECK(p2.lambda <= p2.lambda_hi);
}

TEST_CASE("harmonic oscillator oracle at gamma = 1") {
    const Grid1D g = make_grid(2001);
    const EigenPair p = ground_eigenpair(assemble_mode_operator(64, 1.0, g));
    CHECK(std::abs(p.lambda / (64 * pi) - 1.0) < 1e-2);
    // Gaussian e^{-n pi x^2 / 2}, L2-normalized on the line
    const double c = std::pow(64.0, 0.25);
    double err = 0.0;
    for (std::size_t i = 0; i < p.v.size(); ++i) {
        const double x = g.x(i);
        if (std::abs(x) > 0.5) continue;
        err = std::max(err, std::abs(p.v[i] - c * std::exp(-64 * pi * x * x / 2.0)));
    }
    CHECK(err < 1e-3);
}

TEST_CASE("first eigenpairs") {
    const Grid1D g = make_grid(399);
    const auto z = first_k_eigenpairs(assemble_operator_with_coupling(0.0, 1.0, g), 3);
    const Grid1D g2 = make_grid(799);
    const auto z2 = first_k_eigenpairs(assemble_operator_with_coupling(0.0, 1.0, g2), 3);
    for (int j = 0; j < 3; ++j) {
        const double exact = std::pow((j + 1) * pi / 2.0, 2.0);
        CHECK(std::abs(richardson_pair(z[j].lambda, z2[j].lambda, 2) - exact) / exact < 1e-6);
    }
    const Grid1D gh = make_grid(2001);
    const auto h = first_k_eigenpairs(assemble_mode_operator(64, 1.0, gh), 2);
    CHECK(h[1].lambda > h[0].lambda);
    CHECK(h[1].lambda / h[0].lambda == doctest::Approx(3.0).epsilon(0.05));
    CHECK(std::abs(interior_dot(h[0].v, h[1].v, gh)) < 1e-8);
    const auto h16 = first_k_eigenpairs(assemble_mode_operator(16, 1.0, make_grid(401)), 2);
    CHECK(h16[1].lambda > h16[0].lambda);
}

TEST_CASE("ground state is even and positive") {
    const Grid1D g = make_grid(601);
    for (double gamma : {0.5, 1.0, 2.0}) {
        const EigenPair p = ground_eigenpair(assemble_mode_operator(8, gamma, g));
        const std::size_t m = p.v.size();
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(p.v[i] > 0.0);
            CHECK(p.v[i] == doctest::Approx(p.v[m - 1 - i]).epsilon(1e-10));
        }
        CHECK(rayleigh_quotient(assemble_mode_operator(8, gamma, g), p.v) == doctest::Approx(p.lambda).epsilon(1e-10));
    }
}

TEST_CASE("scaling exponent against the rescaled line oracle") {
    const std::vector<int> ns = {16, 32, 64, 128, 256};
    for (double gamma : {0.5, 1.0, 2.0}) {
        const Grid1D g = make_grid(required_nx(gamma, 256));
        const ScalingFit fit = eigen_scaling_sweep(gamma, ns, g);
        CHECK(std::abs(fit.exponent_hat - 2.0 / (1.0 + gamma)) < 0.03);
        // lambda_n = (n pi)^(2/(1+gamma)) mu with mu the line ground state
        const double mu = line_ground_state(gamma, 8.0, 4000);
        const double lam = fit.samples.back().second;
        CHECK(lam / std::pow(256 * pi, 2.0 / (1.0 + gamma)) == doctest::Approx(mu).epsilon(0.01));
    }
}

TEST_CASE("scaling sweep refuses an under-resolved grid") {
    const std::vector<int> ns = {16, 256};
    CHECK_THROWS_WITH_AS(eigen_scaling_sweep(1.0, ns, make_grid(201)), doctest::Contains("require nx >="), Error);
}

TEST_CASE("parallel eigen sweep equals the serial reference bitwise") {
    const Grid1D g = make_grid(801);
    std::vector<int> ns;
    for (int n = 1; n <= 24; ++n) ns.push_back(n);
    const auto a = ground_eigenpairs(1.0, ns, g, Execution::serial);
    const auto b = ground_eigenpairs(1.0, ns, g, Execution::parallel);
    for (std::size_t j = 0; j < ns.size(); ++j) {
        CHECK(a[j].lambda == b[j].lambda);
        CHECK(a[j].v == b[j].v);
    }
}
