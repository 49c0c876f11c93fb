#include "copoly/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace copoly {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2 = 0.69314718055994530942;

double log_sum_exp(double a, double b) {
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

CriticalPoint critical_h(const System& sys, double lambda, double h_tol, double eig_tol) {
    if (lambda < 0) throw std::domain_error("critical_h: lambda must be >= 0");
    CriticalPoint cp;
    cp.lambda = lambda;
    if (lambda == 0.0) return cp;  // h_c(0) = 0 by convention

    const double log_z_at0 = log_perron_z(sys, 0.0, {lambda, 0.0}, eig_tol);
    if (log_z_at0 <= 0.0) {
        cp.h_c = 0.0;
        cp.residual = std::fabs(std::expm1(log_z_at0));
        return cp;
    }
    if (log_perron_z(sys, 0.0, {lambda, 1.0}, eig_tol) >= 0.0)
        throw std::runtime_error("critical_h: Z(0, lambda, 1) >= 1, which contradicts h_c < 1");

    // interval tolerance first, then drive the residual |Z - 1| itself down
    double lo = 0.0, hi = 1.0, mid = 0.5, logz = 0.0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        logz = log_perron_z(sys, 0.0, {lambda, mid}, eig_tol);
        (logz >= 0.0 ? lo : hi) = mid;
        if (hi - lo <= h_tol && std::fabs(std::expm1(logz)) <= 5e-11) break;
        if (hi - lo <= 1e-15) break;
    }
    cp.h_c = mid;
    cp.residual = std::fabs(std::expm1(logz));
    return cp;
}

double m_omega(const System& sys) {
    const int T = sys.xi.T;
    double s = 0.0;
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b) {
            const int g = ((b - a) % T + T) % T;
            const double xi = sys.xi(a, b);
            s += sys.law.class_mass(g) * xi * xi;
        }
    s /= 2.0 * T;
    return s * s;
}

double small_lambda_bracket(const System& sys, double m) {
    const int T = sys.xi.T;
    double s = 0.0;
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b) {
            const int g = ((b - a) % T + T) % T;
            const double xi = sys.xi(a, b);
            s += sys.law.class_mass(g) * xi * xi / 2.0;
        }
    s /= T;
    return s - ReturnLaw::c_k * std::sqrt(kPi * m / 2.0);
}

namespace {

double log_z_hat(const System& sys, double M) {
    const int T = sys.xi.T;
    TransferMatrix A;
    A.T = T;
    A.log_entry.resize(static_cast<std::size_t>(T) * T);
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b) {
            const int g = ((b - a) % T + T) % T;
            double le = std::log(0.5 * sys.law.class_mass(g));
            const long long xh = -static_cast<long long>(sys.xi(a, b));
            if (xh > 0 && xh % 2 == 0 && (xh / 2) % T == g) {
                // the all-minus window survives the large-coupling limit
                le = log_sum_exp(le, std::log(0.5 * sys.law.k_exact(xh)) +
                                         2.0 * M * static_cast<double>(xh));
            }
            A.log_entry[static_cast<std::size_t>(a) * T + b] = le;
        }
    return perron(A).log_z;
}

}  // namespace

double z_hat(const System& sys, double M) { return std::exp(log_z_hat(sys, M)); }

double m_big_omega(const System& sys, double tol) {
    if (log_z_hat(sys, 0.0) >= 0.0)
        throw std::runtime_error("m_big_omega: z_hat(0) >= 1 signals a malformed xi matrix");
    double lo = 0.0, hi = 1.0;
    while (log_z_hat(sys, hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6)
            throw std::runtime_error("m_big_omega: z_hat never reaches 1 below M = 1e6");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (log_z_hat(sys, mid) <= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Localized: return "Localized";
        case Phase::Delocalized: return "Delocalized";
        case Phase::Critical: return "Critical";
    }
    return "?";
}

Phase classify(const System& sys, const PhasePoint& p, double z_tol, double eig_tol) {
    const double log_z0 = log_perron_z(sys, 0.0, p, eig_tol);
    if (log_z0 > std::log1p(z_tol)) return Phase::Localized;
    if (log_z0 < std::log1p(-z_tol)) return Phase::Delocalized;
    return Phase::Critical;
}

std::vector<CriticalPoint> sweep_curve(const System& sys,
                                       const std::vector<double>& lambda_grid,
                                       double h_tol, double eig_tol) {
    std::vector<CriticalPoint> out;
    out.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) out.push_back(critical_h(sys, lambda, h_tol, eig_tol));
    return out;
}

}  // namespace copoly
