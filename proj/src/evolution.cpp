#include "grushin/evolution.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace grushin {

using std::numbers::pi;

CrankNicolsonStepper::CrankNicolsonStepper(const ModeOperator& op, double dt)
    : matrix_(op.matrix), dt_(dt), factor_(op.matrix, 1.0, 0.5 * dt), work_(op.size()) {
    if (!(dt > 0.0)) throw Error("evolution", "require dt > 0");
}

void CrankNicolsonStepper::propagate(std::span<double> state) const {
    tridiag::multiply(matrix_, state, work_);
    const double half = 0.5 * dt_;
    for (std::size_t i = 0; i < state.size(); ++i) state[i] -= half * work_[i];
    factor_.solve(state);
}

void CrankNicolsonStepper::step(std::span<double> state, std::span<const double> s_now,
                                std::span<const double> s_next) const {
    const double half = 0.5 * dt_;
    if (!s_now.empty())
        for (std::size_t i = 0; i < state.size(); ++i) state[i] += half * s_now[i];
    propagate(state);
    if (!s_next.empty())
        for (std::size_t i = 0; i < state.size(); ++i) state[i] += half * s_next[i];
}

int cn_resolving_steps(const ModeOperator& op, double T, int at_least, double margin) {
    const double lam_max = tridiag::gershgorin(op.matrix).second;
    const double lam_min = std::max(tridiag::bisect_eigenvalue(op.matrix, 0, 1e-6).first, 0.0);
    auto gap = [&](int K) {
        const double dt = T / K;
        return K * (std::log(std::abs(cn_factor(lam_max, dt))) - std::log(cn_factor(lam_min, dt)));
    };
    // Asymptotic estimate, then walk up to the exact condition.
    int K = std::max(at_least, static_cast<int>(std::ceil(std::sqrt(lam_max * T * (lam_min * T + margin) / 4.0))));
    while (gap(K) > -margin) K = static_cast<int>(std::ceil(K * 1.05)) + 1;
    return K;
}

std::vector<double> step_crank_nicolson(const ModeOperator& op, std::span<const double> state, double dt,
                                        std::span<const double> source) {
    if (state.size() != op.size()) throw Error("evolution", "state size does not match operator");
    CrankNicolsonStepper st(op, dt);
    std::vector<double> out(state.begin(), state.end());
    st.step(out, source, source);
    return out;
}

ModeTrajectory solve_adjoint_mode(const ModeOperator& op, std::span<const double> g0, const TimeGrid& tg) {
    if (g0.size() != op.size()) throw Error("evolution", "initial datum size does not match operator");
    CrankNicolsonStepper st(op, tg.dt);
    ModeTrajectory tr;
    tr.n = op.n;
    tr.times = tg;
    tr.states = Matrix(tg.steps + 1, op.size());
    std::copy(g0.begin(), g0.end(), tr.states.row(0).begin());
    for (int k = 0; k < tg.steps; ++k) {
        auto next = tr.states.row(k + 1);
        std::copy(tr.states.row(k).begin(), tr.states.row(k).end(), next.begin());
        st.propagate(next);
    }
    return tr;
}

ModeTrajectory solve_controlled_mode(const ModeOperator& op, std::span<const double> f0, const Matrix& control,
                                     const TimeGrid& tg, std::span<const char> strip) {
    const std::size_t m = op.size();
    if (f0.size() != m || strip.size() != m) throw Error("evolution", "initial datum or strip size mismatch");
    if (control.rows != static_cast<std::size_t>(tg.steps) + 1 || control.cols != m)
        throw Error("evolution", "control must have shape (nt+1) x interior nodes");
    for (std::size_t k = 0; k < control.rows; ++k)
        for (std::size_t i = 0; i < m; ++i)
            if (!strip[i] && control(k, i) != 0.0)
                throw Error("evolution", "control is nonzero outside the strip [a,b]");

    CrankNicolsonStepper st(op, tg.dt);
    ModeTrajectory tr;
    tr.n = op.n;
    tr.times = tg;
    tr.states = Matrix(tg.steps + 1, m);
    tr.control = control;
    std::copy(f0.begin(), f0.end(), tr.states.row(0).begin());
    for (int k = 0; k < tg.steps; ++k) {
        auto next = tr.states.row(k + 1);
        std::copy(tr.states.row(k).begin(), tr.states.row(k).end(), next.begin());
        st.step(next, control.row(k), control.row(k + 1));
    }
    return tr;
}

double y_spacing(int ny) { return 1.0 / (ny + 1); }

double sine_mode(int n, double y) { return std::numbers::sqrt2 * std::sin(n * pi * y); }

Field2D synthesize_2d(std::span<const ModeTrajectory> modes, const Grid1D& grid, int ny,
                      std::span<const int> time_indices) {
    if (modes.empty()) throw Error("evolution", "no modes to synthesize");
    if (ny < static_cast<int>(modes.size())) throw Error("evolution", "require ny >= number of y-modes");
    const std::size_t steps = modes.front().states.rows;
    for (const auto& md : modes)
        if (md.states.rows != steps || md.states.cols != grid.interior_size())
            throw Error("evolution", "mode trajectories have inconsistent shapes");

    std::vector<int> ks(time_indices.begin(), time_indices.end());
    if (ks.empty())
        for (std::size_t k = 0; k < steps; ++k) ks.push_back(static_cast<int>(k));

    Field2D f;
    f.x_nodes = grid.nodes.size();
    f.y_nodes = static_cast<std::size_t>(ny) + 2;
    f.y_modes = static_cast<int>(modes.size());
    f.values.assign(ks.size() * f.x_nodes * f.y_nodes, 0.0);
    const double hy = y_spacing(ny);

    // Sine table: basis[n][j] for interior y nodes.
    std::vector<std::vector<double>> basis(modes.size(), std::vector<double>(ny));
    for (std::size_t n = 0; n < modes.size(); ++n)
        for (int j = 0; j < ny; ++j) basis[n][j] = sine_mode(static_cast<int>(n) + 1, (j + 1) * hy);

    for (std::size_t q = 0; q < ks.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(ks[q]);
        if (k >= steps) throw Error("evolution", "time index out of range");
        f.times.push_back(modes.front().times.time(static_cast<int>(k)));
        for (std::size_t n = 0; n < modes.size(); ++n) {
            const auto row = modes[n].states.row(k);
            for (std::size_t i = 0; i < row.size(); ++i)
                for (int j = 0; j < ny; ++j) f.at(q, i + 1, j + 1) += row[i] * basis[n][j];
        }
    }
    return f;
}

double field_norm(const Field2D& f, std::size_t k, const Grid1D& grid, int ny) {
    // Boundary values vanish, so the trapezoid rule is h * hy * sum over interior.
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < f.x_nodes; ++i)
        for (std::size_t j = 1; j + 1 < f.y_nodes; ++j) s += f.at(k, i, j) * f.at(k, i, j);
    return std::sqrt(grid.h * y_spacing(ny) * s);
}

std::vector<std::vector<double>> project_modes(std::span<const double> field, std::size_t nx, int ny, int count) {
    if (field.size() != nx * static_cast<std::size_t>(ny)) throw Error("evolution", "field size mismatch");
    if (count > ny) throw Error("evolution", "cannot resolve more sine modes than y nodes");
    const double hy = y_spacing(ny);
    std::vector<std::vector<double>> out(count, std::vector<double>(nx, 0.0));
    for (int n = 1; n <= count; ++n)
        for (int j = 0; j < ny; ++j) {
            const double phi = hy * sine_mode(n, (j + 1) * hy);
            for (std::size_t i = 0; i < nx; ++i) out[n - 1][i] += field[i * ny + j] * phi;
        }
    return out;
}

Field2D solve_2d_direct(const ProblemConfig& cfg, const Grid1D& grid, int ny, const TimeGrid& tg,
                        std::span<const double> f0, const std::vector<std::vector<double>>& control) {
    const std::size_t nx = grid.interior_size();
    const std::size_t N = nx * static_cast<std::size_t>(ny);
    if (N > 16000) throw Error("evolution", "2D oracle limited to nx*ny <= 16000 unknowns");
    if (f0.size() != N) throw Error("evolution", "2D initial datum size mismatch");
    if (!control.empty() && control.size() != static_cast<std::size_t>(tg.steps) + 1)
        throw Error("evolution", "2D control must hold nt+1 snapshots");

    const double hy = y_spacing(ny);
    const double cx = 1.0 / (grid.h * grid.h);
    const double cy = 1.0 / (hy * hy);
    auto idx = [ny](std::size_t i, std::size_t j) { return static_cast<int>(i * ny + j); };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * N);
    for (std::size_t i = 0; i < nx; ++i) {
        const double ax = std::abs(grid.x(i));
        const double wy = ax == 0.0 ? 0.0 : std::pow(ax, 2.0 * cfg.gamma) * cy;
        for (std::size_t j = 0; j < static_cast<std::size_t>(ny); ++j) {
            const int r = idx(i, j);
            trip.emplace_back(r, r, 2.0 * cx + 2.0 * wy);
            if (i > 0) trip.emplace_back(r, idx(i - 1, j), -cx);
            if (i + 1 < nx) trip.emplace_back(r, idx(i + 1, j), -cx);
            if (j > 0 && wy != 0.0) trip.emplace_back(r, idx(i, j - 1), -wy);
            if (j + 1 < static_cast<std::size_t>(ny) && wy != 0.0) trip.emplace_back(r, idx(i, j + 1), -wy);
        }
    }
    Eigen::SparseMatrix<double> L(N, N);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> I(N, N);
    I.setIdentity();
    const double half = 0.5 * tg.dt;
    Eigen::SparseMatrix<double> lhs = I + half * L;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lhs);
    if (solver.info() != Eigen::Success) throw Error("evolution", "2D oracle factorization failed");

    std::vector<char> strip(nx);
    for (std::size_t i = 0; i < nx; ++i) strip[i] = grid.x(i) >= cfg.a - 1e-12 && grid.x(i) <= cfg.b + 1e-12;
    auto source = [&](int k) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(N);
        if (control.empty()) return s;
        if (control[k].size() != N) throw Error("evolution", "2D control snapshot size mismatch");
        for (std::size_t i = 0; i < nx; ++i)
            if (strip[i])
                for (int j = 0; j < ny; ++j) s(idx(i, j)) = control[k][idx(i, j)];
        return s;
    };

    Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(f0.data(), N);
    for (int k = 0; k < tg.steps; ++k) {
        if (!control.empty()) f += half * source(k);
        Eigen::VectorXd rhs = f - half * (L * f);
        f = solver.solve(rhs);
        if (!control.empty()) f += half * source(k + 1);
    }

    Field2D out;
    out.times = {tg.T};
    out.x_nodes = nx + 2;
    out.y_nodes = static_cast<std::size_t>(ny) + 2;
    out.values.assign(out.x_nodes * out.y_nodes, 0.0);
    for (std::size_t i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) out.at(0, i + 1, j + 1) = f(idx(i, j));
    return out;
}

int choose_mode_count(double gamma, double T_min, const Grid1D& grid, double tol, int n_cap) {
    if (!(T_min > 0.0) || !(tol > 0.0)) throw Error("evolution", "require T_min > 0 and tol > 0");
    std::vector<double> terms;
    for (int n = 1;; ++n) {
        if (n > n_cap) throw Error("evolution", "mode tail did not fall below tolerance within the index cap");
        const double lam = ground_eigenpair(assemble_mode_operator(n, gamma, grid)).lambda;
        terms.push_back(std::exp(-2.0 * lam * T_min));
        if (terms.back() < 1e-6 * tol) break;
    }
    double tail = 0.0;
    int N = static_cast<int>(terms.size());
    for (int k = static_cast<int>(terms.size()) - 1; k >= 0; --k) {
        if (tail + terms[k] >= tol) break;
        tail += terms[k];
        N = k;
    }
    return std::max(N, 1);
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("evolution", "cannot open " + path + " for writing");
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const ModeTrajectory& traj, const Grid1D& grid) {
    std::ofstream out = open_csv(path);
    out << "t,x,value\n";
    for (std::size_t k = 0; k < traj.states.rows; ++k) {
        const std::string t = fmt17(traj.times.time(static_cast<int>(k)));
        for (std::size_t i = 0; i < traj.states.cols; ++i)
            out << t << ',' << fmt17(grid.x(i)) << ',' << fmt17(traj.states(k, i)) << '\n';
    }
}

void write_field_csv(const std::string& path, const Field2D& field, const Grid1D& grid, int ny) {
    std::ofstream out = open_csv(path);
    out << "t,x,y,value\n";
    const double hy = y_spacing(ny);
    for (std::size_t k = 0; k < field.times.size(); ++k)
        for (std::size_t i = 0; i < field.x_nodes; ++i)
            for (std::size_t j = 0; j < field.y_nodes; ++j)
                out << fmt17(field.times[k]) << ',' << fmt17(grid.nodes[i]) << ',' << fmt17(j * hy) << ','
                    << fmt17(field.at(k, i, j)) << '\n';
}

}  // namespace grushin
