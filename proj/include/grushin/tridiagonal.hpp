#pragma once

#include <span>
#include <vector>

namespace grushin::tridiag {

/// Symmetric tridiagonal matrix: diag (size m), off (size m-1).
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const noexcept { return diag.size(); }
};

/// y = T x.
void multiply(const SymTridiagonal& t, std::span<const double> x, std::span<double> y);

/// Number of eigenvalues strictly below `shift` (Sturm sequence / LDL^T inertia).
int count_below(const SymTridiagonal& t, double shift);

/// Gershgorin enclosure [lo, hi] of the spectrum.
std::pair<double, double> gershgorin(const SymTridiagonal& t);

/// Bisection bracket [lo, hi] for the k-th smallest eigenvalue (k = 0 is the
/// smallest), stopped at relative width `rel_tol` or at floating-point resolution.
std::pair<double, double> bisect_eigenvalue(const SymTridiagonal& t, int k, double rel_tol);

/// LU factorization of (scale_diag * I + scale_op * T) without pivoting, for
/// diagonally dominant systems solved many times (Thomas algorithm).
class ThomasFactor {
public:
    ThomasFactor() = default;
    ThomasFactor(const SymTridiagonal& t, double scale_diag, double scale_op);

    /// In-place solve.
    void solve(std::span<double> rhs) const;

private:
    std::vector<double> lower_;   // multipliers l_i (i >= 1)
    std::vector<double> pivot_;   // u_ii
    std::vector<double> upper_;   // u_{i,i+1}
};

/// Solves (T - shift I) x = rhs with partial pivoting (gttrf/gttrs style),
/// which stays stable when the shift sits on an eigenvalue. Zero pivots are
/// replaced by a tiny value. Returns x.
std::vector<double> solve_shifted(const SymTridiagonal& t, double shift, std::span<const double> rhs);

}  // namespace grushin::tridiag
