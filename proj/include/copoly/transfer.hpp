#pragma once

#include <cstdint>
#include <vector>

#include "copoly/period_model.hpp"
#include "copoly/return_law.hpp"

namespace copoly {

/// A point (lambda, h) of the coupling/asymmetry plane.
struct PhasePoint {
    double lambda = 0.0;
    double h = 0.0;
};

/// Log-weight of an excursion with charge xi_val and length x:
///   phi = log((1 + exp(-2 t)) / 2),  t = lambda*xi_val + lambda*h*x,
/// evaluated on a branch that never exponentiates a positive argument.
double phi(const PhasePoint& p, int xi_val, long long x);

/// The centered variant log cosh(t) - lambda*h*x; differs from phi by
/// exactly lambda*xi_val.
double phi_tilde(const PhasePoint& p, int xi_val, long long x);

/// Everything downstream needs from a charge sequence: the sequence itself,
/// its excursion-charge matrix and the return law mod T.
struct System {
    PeriodicSequence seq;
    XiMatrix xi;
    ReturnLaw law;

    explicit System(PeriodicSequence s, std::size_t n_max = 200000)
        : seq(std::move(s)), xi(xi_matrix(seq)), law(seq.period(), n_max) {}
};

/// T x T transfer matrix held entrywise in log form, so that strongly
/// coupled points (large lambda * xi_star) cannot overflow.
///
/// Entries are assembled exactly: since
///   exp(phi(xi,x)) = 1/2 + (1/2) exp(-2 lambda xi) exp(-2 lambda h x),
/// each entry is a sum of two class-filtered Laplace transforms of K and
/// needs no truncated series at all.
struct TransferMatrix {
    int T = 0;
    std::vector<double> log_entry;  // row-major, size T*T

    double log_at(int a, int b) const { return log_entry[static_cast<std::size_t>(a) * T + b]; }
    double at(int a, int b) const;
};

TransferMatrix a_matrix(const System& sys, double b, const PhasePoint& p);

/// Perron-Frobenius data of a positive matrix: maximal eigenvalue (also in
/// log form), right and left eigenvectors normalized to unit l1 norm, and
/// the stationary law pi of the eigenvector-tilted stochastic chain,
/// pi_a proportional to v_left[a] * v[a].
struct EigenData {
    double z = 0.0;
    double log_z = 0.0;
    std::vector<double> v;
    std::vector<double> v_left;
    std::vector<double> pi;
    int iterations = 0;
};

/// Power iteration from the uniform vector on A and A^T.  Stops when the
/// eigenvalue estimate is stable to eig_tol (relative) and both residuals
/// ||Av - zv||_1 fall below 1e-12 * max(1, z) in the scaled matrix.
/// Throws on non-positive input or if max_iter is exhausted.
EigenData perron(const TransferMatrix& A, double eig_tol = 1e-13, int max_iter = 100000);

/// Convenience: log of the maximal eigenvalue of A(b, lambda, h).
double log_perron_z(const System& sys, double b, const PhasePoint& p,
                    double eig_tol = 1e-13);

/// A probability measure on (class, class, even length) triples with finite
/// head support x <= head_cutoff and one lumped tail bucket per class pair.
/// Buckets carry both their mass and their length-weighted mass, so totals
/// and means are exact, not truncated.
struct ExcursionMeasure {
    int T = 0;
    long long head_cutoff = 0;
    std::vector<std::vector<double>> head;  // pair a*T+b -> values at x0, x0+2T, ...
    std::vector<double> tail_mass;          // per pair
    std::vector<double> tail_mean;          // per pair: sum of x * mass over the tail
    double mean_x = 0.0;                    // total first moment (may be +inf)

    long long first_x(int a, int b) const noexcept {
        const int g = ((b - a) % T + T) % T;
        return g == 0 ? 2LL * T : 2LL * g;
    }
    std::size_t pair_index(int a, int b) const noexcept {
        return static_cast<std::size_t>(a) * T + b;
    }
    double mass(int a, int b, long long x) const;
    double total_mass() const;
    std::vector<double> marginal_first() const;
    std::vector<double> marginal_second() const;
    void scale(double factor);
};

/// The optimizing tilted excursion measure mu_b at tilt b >= 0.  At b = 0
/// the measure itself is well defined but has infinite mean; mean_x is then
/// the +infinity sentinel.
ExcursionMeasure mu_b(const System& sys, double b, const PhasePoint& p,
                      long long head_cutoff = 10000, double eig_tol = 1e-13);

/// The stationary excursion law (1/T) K(x) restricted to class-compatible
/// triples, with its exact tail buckets.
ExcursionMeasure pi_eq(const System& sys, long long head_cutoff = 10000);

/// First moment sum x mu(x), tail included (+inf when the tail has no mean).
double mean_excursion(const ExcursionMeasure& mu);

/// Relative-entropy rate of mu against the Markov-renewal reference
/// mu1(a) K(x) 1[x/2 = b-a]; tail buckets are compared against the lumped
/// reference mass.  Returns +inf if the two class marginals differ.
double rate_I(const System& sys, const ExcursionMeasure& mu);

/// Energy-entropy functional Q(mu) = sum phi * mu - I(mu); -inf if mu is
/// not admissible.  Bucket energy uses phi at the first tail length.
double functional_Q(const System& sys, const ExcursionMeasure& mu, const PhasePoint& p);

}  // namespace copoly
