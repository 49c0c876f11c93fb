#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace copoly {

/// First-return-time law of the simple symmetric walk and its residue-class
/// decomposition mod T.
///
/// With eta the first return time to zero,
///   K(2n)    = P(eta = 2n) = Catalan(n-1) 2^{-(2n-1)},
///   P(eta>2n)= binom(2n,n) 2^{-2n},
/// both computed by multiplicative ratio recursions, and the class masses
///   p_g = P(eta/2 = g mod T)
/// computed exactly through the generating function E[z^{eta/2}] = 1-sqrt(1-z)
/// with a roots-of-unity filter.  The same filter gives the class-restricted
/// Laplace transforms needed for tail-exact transfer-matrix assembly; the raw
/// series has an x^{-3/2} tail and is kept only as a cross-check.
///
/// Immutable after construction; reads are freely shareable across threads.
class ReturnLaw {
public:
    explicit ReturnLaw(int T, std::size_t n_max = 200000);

    int modulus() const noexcept { return T_; }
    std::size_t cache_size() const noexcept { return k_.size() - 1; }

    /// sqrt(2/pi): the constant in x^{3/2} K(x) -> C_K.
    static constexpr double c_k = 0.79788456080286535588;

    /// K(x) for even x >= 2.  Values beyond the cache are recomputed by
    /// extending the recursion on the fly (O(x), exact up to x ~ 1e6).
    double k_exact(long long x) const;

    /// P(eta > x) for even x >= 0.
    double survival(long long x) const;

    /// p_g = P(eta/2 = g mod T).
    double class_mass(int gamma) const;

    /// K(x) / p_g, defined when x/2 = g mod T.
    double conditional_k(int gamma, long long x) const;

    /// sum_{x : x/2 = g mod T} K(x) e^{-b x}; equals class_mass at b = 0.
    double laplace_class(int gamma, double b) const;
    double log_laplace_class(int gamma, double b) const;

    /// sum_{x : x/2 = g mod T} x K(x) e^{-b x}; +infinity at b = 0.
    double laplace_class_mean(int gamma, double b) const;
    double log_laplace_class_mean(int gamma, double b) const;

    /// Smallest even x >= 2 with x/2 = g mod T.
    long long first_support_point(int gamma) const noexcept {
        return gamma == 0 ? 2LL * T_ : 2LL * gamma;
    }

private:
    void check_gamma(int gamma) const;

    // Filtered transform (1/T) sum_j u^{-j g} G(z u^j), u = exp(2 pi i / T),
    // z = e^{-2b}; `mean` switches G(z) = 1 - sqrt(1-z) to 2 z G'(z).
    double filter_transform(int gamma, double b, bool mean) const;

    // Direct class series in log form; valid when e^{-2bT} is small enough
    // that a few dozen terms reach machine precision.
    double log_series_transform(int gamma, double b, bool mean) const;

    bool series_regime(double b) const noexcept { return 2.0 * b * T_ >= 0.5; }

    int T_;
    std::vector<double> k_;     // k_[n] = K(2n), n >= 1 (k_[0] unused)
    std::vector<double> surv_;  // surv_[n] = P(eta > 2n)
    std::vector<double> p_;     // class masses
};

}  // namespace copoly
