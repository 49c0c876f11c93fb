#include "copoly/free_energy.hpp"

#include <cmath>
#include <stdexcept>

namespace copoly {

FreeEnergyResult solve_b_tilde(const System& sys, const PhasePoint& p,
                               double root_tol, double eig_tol) {
    FreeEnergyResult r;
    const double log_z0 = log_perron_z(sys, 0.0, p, eig_tol);
    r.z_at_zero = std::exp(log_z0);

    if (log_z0 <= 0.0) {
        r.b_tilde = 0.0;
        r.f = p.lambda * p.h;
        r.residual = 0.0;
        r.converged = true;
        return r;
    }

    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (log_perron_z(sys, hi, p, eig_tol) >= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 60) throw std::runtime_error("solve_b_tilde: Z(b) never drops below 1");
    }
    // bisect to the interval tolerance, then keep halving until the root
    // residual |Z - 1| itself is small (the slope of Z can exceed 1)
    double mid = 0.5 * (lo + hi), logz = 0.0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        logz = log_perron_z(sys, mid, p, eig_tol);
        (logz >= 0.0 ? lo : hi) = mid;
        if (hi - lo <= root_tol && std::fabs(std::expm1(logz)) <= 5e-11) break;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    r.b_tilde = mid;
    r.f = p.lambda * p.h + r.b_tilde;
    r.residual = std::fabs(std::expm1(logz));
    r.converged = true;
    return r;
}

VariationalScan variational_check(const System& sys, const PhasePoint& p,
                                  std::span<const double> b_grid, long long head_cutoff) {
    if (b_grid.empty()) throw std::invalid_argument("variational_check: empty grid");
    VariationalScan best;
    bool first = true;
    for (double b : b_grid) {
        if (b <= 0) throw std::domain_error("variational_check: grid values must be positive");
        const double log_z = log_perron_z(sys, b, p);
        const double f = mean_excursion(mu_b(sys, b, p, head_cutoff));
        const double q = b + log_z / f;
        if (first || q > best.q_max) {
            best.q_max = q;
            best.b_argmax = b;
            first = false;
        }
    }
    return best;
}

}  // namespace copoly
