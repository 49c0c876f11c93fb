#include "copoly/return_law.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace copoly {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// 1 - sqrt(1-z) without cancellation for small z.
std::complex<double> g_return(std::complex<double> z) {
    return z / (1.0 + std::sqrt(1.0 - z));
}

// 2 z G'(z) = z / sqrt(1-z): generating function of x K(x) in z^{x/2}.
std::complex<double> g_return_mean(std::complex<double> z) {
    return z / std::sqrt(1.0 - z);
}

void check_even(long long x, long long min, const char* who) {
    if (x < min || x % 2 != 0)
        throw std::domain_error(std::string(who) + ": need even x >= " +
                                std::to_string(min) + ", got " + std::to_string(x));
}

}  // namespace

ReturnLaw::ReturnLaw(int T, std::size_t n_max) : T_(T) {
    if (T < 1) throw std::invalid_argument("ReturnLaw: modulus must be >= 1");
    if (n_max < 2) n_max = 2;

    k_.resize(n_max + 1);
    surv_.resize(n_max + 1);
    k_[1] = 0.5;
    surv_[0] = 1.0;
    surv_[1] = 0.5;
    for (std::size_t n = 1; n < n_max; ++n) {
        const double dn = static_cast<double>(n);
        k_[n + 1] = k_[n] * (2.0 * dn - 1.0) / (2.0 * dn + 2.0);
        surv_[n + 1] = surv_[n] * (2.0 * dn + 1.0) / (2.0 * dn + 2.0);
    }

    p_.resize(static_cast<std::size_t>(T_));
    for (int g = 0; g < T_; ++g) p_[static_cast<std::size_t>(g)] = filter_transform(g, 0.0, false);
}

double ReturnLaw::k_exact(long long x) const {
    check_even(x, 2, "k_exact");
    const long long n = x / 2;
    if (n <= static_cast<long long>(cache_size())) return k_[static_cast<std::size_t>(n)];
    double v = k_.back();
    for (long long m = static_cast<long long>(cache_size()); m < n; ++m) {
        const double dm = static_cast<double>(m);
        v *= (2.0 * dm - 1.0) / (2.0 * dm + 2.0);
    }
    return v;
}

double ReturnLaw::survival(long long x) const {
    check_even(x, 0, "survival");
    const long long n = x / 2;
    if (n <= static_cast<long long>(cache_size())) return surv_[static_cast<std::size_t>(n)];
    double v = surv_.back();
    for (long long m = static_cast<long long>(cache_size()); m < n; ++m) {
        const double dm = static_cast<double>(m);
        v *= (2.0 * dm + 1.0) / (2.0 * dm + 2.0);
    }
    return v;
}

void ReturnLaw::check_gamma(int gamma) const {
    if (gamma < 0 || gamma >= T_)
        throw std::domain_error("residue class " + std::to_string(gamma) +
                                " out of range for modulus " + std::to_string(T_));
}

double ReturnLaw::class_mass(int gamma) const {
    check_gamma(gamma);
    return p_[static_cast<std::size_t>(gamma)];
}

double ReturnLaw::conditional_k(int gamma, long long x) const {
    check_gamma(gamma);
    check_even(x, 2, "conditional_k");
    if ((x / 2) % T_ != gamma)
        throw std::domain_error("conditional_k: x/2 = " + std::to_string(x / 2) +
                                " is not in class " + std::to_string(gamma) +
                                " mod " + std::to_string(T_));
    return k_exact(x) / p_[static_cast<std::size_t>(gamma)];
}

double ReturnLaw::filter_transform(int gamma, double b, bool mean) const {
    const double z0 = std::exp(-2.0 * b);
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < T_; ++j) {
        const auto root = [&](int e) {  // exp(2 pi i e / T) with e reduced mod T
            const double phase = 2.0 * kPi * static_cast<double>(e % T_) / T_;
            return std::complex<double>(std::cos(phase), std::sin(phase));
        };
        const std::complex<double> z = z0 * root(j);
        acc += std::conj(root(j * gamma)) * (mean ? g_return_mean(z) : g_return(z));
    }
    // the filter of a real sequence: only roundoff may leave an imaginary part
    if (std::fabs(acc.imag()) / T_ > 1e-12 * std::max(1.0, std::fabs(acc.real()) / T_))
        throw std::runtime_error("class filter: imaginary residue above 1e-12");
    return acc.real() / T_;
}

double ReturnLaw::log_series_transform(int gamma, double b, bool mean) const {
    const long long x0 = first_support_point(gamma);
    const long long step = 2LL * T_;
    const double lead = (mean ? static_cast<double>(x0) : 1.0) * k_exact(x0);
    double rest = 0.0;  // sum of term ratios against the leading term
    double prev_k = k_exact(x0);
    for (long long x = x0 + step;; x += step) {
        // extend K by ratios so no cache lookups are needed past the lead
        for (long long n = (x - step) / 2; n < x / 2; ++n) {
            const double dn = static_cast<double>(n);
            prev_k *= (2.0 * dn - 1.0) / (2.0 * dn + 2.0);
        }
        const double term = (mean ? static_cast<double>(x) : 1.0) * prev_k *
                            std::exp(-b * static_cast<double>(x - x0));
        rest += term / lead;
        if (term < 1e-18 * lead * (1.0 + rest)) break;
    }
    return std::log(lead) - b * static_cast<double>(x0) + std::log1p(rest);
}

double ReturnLaw::laplace_class(int gamma, double b) const {
    check_gamma(gamma);
    if (b < 0) throw std::domain_error("laplace_class: b must be >= 0");
    if (b == 0.0) return p_[static_cast<std::size_t>(gamma)];
    if (series_regime(b)) return std::exp(log_series_transform(gamma, b, false));
    return filter_transform(gamma, b, false);
}

double ReturnLaw::log_laplace_class(int gamma, double b) const {
    check_gamma(gamma);
    if (b < 0) throw std::domain_error("laplace_class: b must be >= 0");
    if (b == 0.0) return std::log(p_[static_cast<std::size_t>(gamma)]);
    if (series_regime(b)) return log_series_transform(gamma, b, false);
    return std::log(filter_transform(gamma, b, false));
}

double ReturnLaw::laplace_class_mean(int gamma, double b) const {
    check_gamma(gamma);
    if (b < 0) throw std::domain_error("laplace_class_mean: b must be >= 0");
    if (b == 0.0) return kInf;
    if (series_regime(b)) return std::exp(log_series_transform(gamma, b, true));
    return filter_transform(gamma, b, true);
}

double ReturnLaw::log_laplace_class_mean(int gamma, double b) const {
    check_gamma(gamma);
    if (b < 0) throw std::domain_error("laplace_class_mean: b must be >= 0");
    if (b == 0.0) return kInf;
    if (series_regime(b)) return log_series_transform(gamma, b, true);
    return std::log(filter_transform(gamma, b, true));
}

}  // namespace copoly
