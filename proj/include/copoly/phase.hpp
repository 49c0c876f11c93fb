#pragma once

#include <string>
#include <vector>

#include "copoly/free_energy.hpp"
#include "copoly/transfer.hpp"

namespace copoly {

/// A point of the critical curve: Z(0, lambda, h_c) = 1.
struct CriticalPoint {
    double lambda = 0.0;
    double h_c = 0.0;
    double residual = 0.0;  // |Z(0, lambda, h_c) - 1|
};

/// Critical asymmetry at coupling lambda, by bisection on h in [0, 1]
/// (Z(0, lambda, .) is decreasing and stays below 1 at h = 1).
/// At lambda = 0 the defining equation degenerates (Z = 1 identically);
/// h_c(0) = 0 by the continuity convention.
CriticalPoint critical_h(const System& sys, double lambda, double h_tol = 1e-10,
                         double eig_tol = 1e-13);

/// Small-coupling cubic coefficient:
///   m = ((1/2T) sum_{a,b} p_{b-a} xi(a,b)^2)^2,
/// so that h_c(lambda) ~ m * lambda^3.
double m_omega(const System& sys);

/// The expansion bracket (1/T) sum p xi^2 / 2 - C_K sqrt(pi m / 2), whose
/// root in m recovers m_omega; used as a consistency check of the two
/// derivations.
double small_lambda_bracket(const System& sys, double m);

/// Maximal eigenvalue of the large-coupling limit matrix
///   (1/2) p_g + (1/2) K(xh) e^{2 M xh},
/// where the second term is present only when xh = -xi(a,b) is a positive
/// length lying in the class of the pair (an aligned all-minus charge
/// window).  Increasing and unbounded in M.
double z_hat(const System& sys, double M);

/// The root of z_hat(M) = 1; lambda (1 - h_c(lambda)) converges to it.
/// Throws if no root is bracketed below M = 1e6 (impossible for valid
/// sequences).
double m_big_omega(const System& sys, double tol = 1e-12);

enum class Phase { Localized, Delocalized, Critical };

std::string to_string(Phase phase);

/// Three-way classification by Z(0, lambda, h) against 1 with a +-z_tol
/// dead band reported as Critical.
Phase classify(const System& sys, const PhasePoint& p, double z_tol = 1e-9,
               double eig_tol = 1e-13);

std::vector<CriticalPoint> sweep_curve(const System& sys,
                                       const std::vector<double>& lambda_grid,
                                       double h_tol = 1e-10, double eig_tol = 1e-13);

}  // namespace copoly
