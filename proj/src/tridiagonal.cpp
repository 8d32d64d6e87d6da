#include "grushin/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grushin/core.hpp"

namespace grushin::tridiag {

void multiply(const SymTridiagonal& t, std::span<const double> x, std::span<double> y) {
    const std::size_t m = t.size();
    for (std::size_t i = 0; i < m; ++i) {
        double s = t.diag[i] * x[i];
        if (i > 0) s += t.off[i - 1] * x[i - 1];
        if (i + 1 < m) s += t.off[i] * x[i + 1];
        y[i] = s;
    }
}

int count_below(const SymTridiagonal& t, double shift) {
    constexpr double tiny = std::numeric_limits<double>::min();
    int count = 0;
    double q = t.diag[0] - shift;
    for (std::size_t i = 0;; ++i) {
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
        if (i + 1 == t.size()) break;
        q = t.diag[i + 1] - shift - t.off[i] * t.off[i] / q;
    }
    return count;
}

std::pair<double, double> gershgorin(const SymTridiagonal& t) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const std::size_t m = t.size();
    for (std::size_t i = 0; i < m; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(t.off[i - 1]);
        if (i + 1 < m) r += std::abs(t.off[i]);
        lo = std::min(lo, t.diag[i] - r);
        hi = std::max(hi, t.diag[i] + r);
    }
    return {lo, hi};
}

std::pair<double, double> bisect_eigenvalue(const SymTridiagonal& t, int k, double rel_tol) {
    if (k < 0 || static_cast<std::size_t>(k) >= t.size())
        throw Error("spectral", "eigenvalue index out of range");
    auto [lo, hi] = gershgorin(t);
    // Widen slightly so the enclosure is strict under rounding.
    const double pad = 1e-14 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
    lo -= pad;
    hi += pad;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (count_below(t, mid) > k)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return {lo, hi};
}

ThomasFactor::ThomasFactor(const SymTridiagonal& t, double scale_diag, double scale_op) {
    const std::size_t m = t.size();
    lower_.assign(m, 0.0);
    pivot_.assign(m, 0.0);
    upper_.assign(m, 0.0);
    pivot_[0] = scale_diag + scale_op * t.diag[0];
    for (std::size_t i = 1; i < m; ++i) {
        const double sub = scale_op * t.off[i - 1];
        upper_[i - 1] = sub;  // symmetric: super-diagonal equals sub-diagonal
        lower_[i] = sub / pivot_[i - 1];
        pivot_[i] = scale_diag + scale_op * t.diag[i] - lower_[i] * upper_[i - 1];
    }
}

void ThomasFactor::solve(std::span<double> rhs) const {
    const std::size_t m = pivot_.size();
    for (std::size_t i = 1; i < m; ++i) rhs[i] -= lower_[i] * rhs[i - 1];
    rhs[m - 1] /= pivot_[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) / pivot_[i];
}

std::vector<double> solve_shifted(const SymTridiagonal& t, double shift, std::span<const double> rhs) {
    // LAPACK dgttrf / dgttrs on (T - shift I).
    const std::size_t m = t.size();
    std::vector<double> dl(t.off), d(m), du(t.off), du2(m > 2 ? m - 2 : 0, 0.0);
    std::vector<char> swapped(m, 0);
    for (std::size_t i = 0; i < m; ++i) d[i] = t.diag[i] - shift;
    const double tiny = 1e-300 + 1e-16 * std::abs(shift);

    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) d[i] = tiny;
            const double fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            const double fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            const double temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if (i + 2 < m) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swapped[i] = 1;
        }
    }
    if (d[m - 1] == 0.0) d[m - 1] = tiny;

    std::vector<double> x(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (!swapped[i]) {
            x[i + 1] -= dl[i] * x[i];
        } else {
            const double temp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = temp - dl[i] * x[i];
        }
    }
    x[m - 1] /= d[m - 1];
    if (m > 1) x[m - 2] = (x[m - 2] - du[m - 2] * x[m - 1]) / d[m - 2];
    for (std::size_t i = m >= 2 ? m - 2 : 0; i-- > 0;)
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    return x;
}

}  // namespace grushin::tridiag
