#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "copoly/period_model.hpp"
#include "copoly/transfer.hpp"

namespace copoly {

/// Exact finite-N reference computations for the weighted walk, sharing
/// nothing with the transfer-matrix route except omega parsing.
///
/// The Hamiltonian weights bond x by exp(lambda (omega_x + h) sigma_x),
/// where sigma_x is the sign of the nonzero endpoint of the bond (the two
/// endpoints are never both zero, and when both are nonzero they agree).

/// (1/N) log Z_N by forward dynamic programming over heights, O(N^2) work
/// and O(N) memory, with per-row renormalization in place of log-domain
/// arithmetic.  n_cap guards against accidental quadratic blowups.
double log_partition_exact(const PeriodicSequence& seq, const PhasePoint& p, long long N,
                           long long n_cap = 30000);

/// Least-squares fit of f_N = f + c log(N)/N over at least three values
/// of N; err_est is the root-mean-square fit residual.
struct FreeEnergyFit {
    double f_est = 0.0;
    double err_est = 0.0;
    double slope = 0.0;  // the fitted c
};

FreeEnergyFit free_energy_estimate(const PeriodicSequence& seq, const PhasePoint& p,
                                   std::span<const long long> n_list, long long n_cap = 30000);

struct PathSample {
    std::vector<int> heights;  // S_0 .. S_N, increments +-1, S_0 = 0
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Exact (non-MCMC) samples from the weighted path law: backward partition
/// values are computed once in log domain with sqrt(N)-block checkpointing,
/// then every path is drawn forward through the shared blocks.  Stream i
/// uses RNG (seed, i), so results are deterministic for any thread count.
std::vector<PathSample> sample_paths(const PeriodicSequence& seq, const PhasePoint& p,
                                     long long N, int count, std::uint64_t seed,
                                     long long n_cap = 30000);

/// Exact marginal P(S_x = s) under the weighted law, indexed by (s + x)/2
/// for s = -x, -x+2, ..., x.  Forward times backward weights; O(N^2) in log
/// domain, intended for moderate N diagnostics.
std::vector<double> height_marginal(const PeriodicSequence& seq, const PhasePoint& p,
                                    long long N, long long x);

struct EmpiricalStats {
    long long n_sites = 0;                      // N per path
    long long n_paths = 0;
    std::vector<long long> returns_per_path;    // ell_N for each path
    std::vector<long long> excursion_lengths;   // pooled over paths
    double mean_excursion = 0.0;                // pooled mean of eta_k - eta_{k-1}
    double returns_per_site = 0.0;              // pooled ell_N / N
    std::map<long long, double> frac_above;     // level L -> fraction of sites with S_x > L
    // pooled empirical measure over (alpha, beta, length) triples, normalized
    std::map<std::array<long long, 3>, double> empirical;
};

/// Decompose paths at their zeros: return counts, excursion lengths and
/// classes mod T, level-exceedance fractions, and the empirical measure.
EmpiricalStats excursion_stats(std::span<const PathSample> samples, int T,
                               std::span<const long long> levels = {});

/// Least-squares exponential decay rate of the mid-chain height histogram
/// (a statistical diagnostic: in the localized phase it should not fall
/// below the excess free energy, up to fit noise).
double tail_decay_rate(std::span<const PathSample> samples);

}  // namespace copoly
