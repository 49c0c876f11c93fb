#pragma once

#include <span>
#include <vector>

#include "copoly/transfer.hpp"

namespace copoly {

/// Result of solving Z(b, lambda, h) = 1 in b.
///
/// b_tilde is the excess free energy: zero when Z(0) <= 1, otherwise the
/// unique root (Z is strictly decreasing in b).  The full free energy is
/// f = lambda*h + b_tilde.
struct FreeEnergyResult {
    double b_tilde = 0.0;
    double f = 0.0;
    double z_at_zero = 0.0;
    bool converged = false;
    double residual = 0.0;  // |Z(b_tilde) - 1| (or |Z(0) - 1| capped at 0 when b_tilde = 0)
};

/// Bisection on b with interval tolerance root_tol.  Bisection is preferred
/// over Newton: each Z evaluation is one small eigenproblem and monotone
/// decrease makes bracketing unconditional, including at the heavy-tailed
/// b -> 0 edge.
FreeEnergyResult solve_b_tilde(const System& sys, const PhasePoint& p,
                               double root_tol = 1e-10, double eig_tol = 1e-13);

/// Grid scan of q(b) = b + log Z(b) / f(b), whose supremum over b > 0
/// equals b_tilde; the maximizer sits at the root of Z(b) = 1 when one
/// exists and drifts to 0 otherwise.
struct VariationalScan {
    double q_max = 0.0;
    double b_argmax = 0.0;
};

VariationalScan variational_check(const System& sys, const PhasePoint& p,
                                  std::span<const double> b_grid,
                                  long long head_cutoff = 10000);

}  // namespace copoly
