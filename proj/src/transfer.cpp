#include "copoly/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace copoly {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

double phi(const PhasePoint& p, int xi_val, long long x) {
    const double t = p.lambda * xi_val + p.lambda * p.h * static_cast<double>(x);
    if (t >= 0.0) return std::log1p(std::exp(-2.0 * t)) - kLog2;
    return -2.0 * t + std::log1p(std::exp(2.0 * t)) - kLog2;
}

double phi_tilde(const PhasePoint& p, int xi_val, long long x) {
    const double t = p.lambda * xi_val + p.lambda * p.h * static_cast<double>(x);
    const double log_cosh = std::fabs(t) + std::log1p(std::exp(-2.0 * std::fabs(t))) - kLog2;
    return log_cosh - p.lambda * p.h * static_cast<double>(x);
}

double TransferMatrix::at(int a, int b) const { return std::exp(log_at(a, b)); }

TransferMatrix a_matrix(const System& sys, double b, const PhasePoint& p) {
    if (b < 0) throw std::domain_error("a_matrix: b must be >= 0");
    if (p.lambda < 0 || p.h < 0)
        throw std::domain_error("a_matrix: lambda and h must be >= 0");
    const int T = sys.xi.T;
    const double c2 = b + 2.0 * p.lambda * p.h;

    TransferMatrix A;
    A.T = T;
    A.log_entry.resize(static_cast<std::size_t>(T) * T);

    // One Laplace transform per residue class and rate.
    std::vector<double> l1(static_cast<std::size_t>(T)), l2(static_cast<std::size_t>(T));
    for (int g = 0; g < T; ++g) {
        l1[static_cast<std::size_t>(g)] = sys.law.log_laplace_class(g, b);
        l2[static_cast<std::size_t>(g)] =
            (c2 == b) ? l1[static_cast<std::size_t>(g)] : sys.law.log_laplace_class(g, c2);
    }

    for (int a = 0; a < T; ++a)
        for (int bb = 0; bb < T; ++bb) {
            const int g = ((bb - a) % T + T) % T;
            const double xi = sys.xi(a, bb);
            A.log_entry[static_cast<std::size_t>(a) * T + bb] =
                log_sum_exp(l1[static_cast<std::size_t>(g)],
                            -2.0 * p.lambda * xi + l2[static_cast<std::size_t>(g)]) -
                kLog2;
        }
    return A;
}

EigenData perron(const TransferMatrix& A, double eig_tol, int max_iter) {
    const int T = A.T;
    if (T < 1) throw std::invalid_argument("perron: empty matrix");

    double shift = -kInf;
    for (double le : A.log_entry) {
        if (std::isnan(le)) throw std::invalid_argument("perron: NaN entry");
        shift = std::max(shift, le);
    }
    if (shift == -kInf) throw std::invalid_argument("perron: non-positive matrix");

    std::vector<double> W(A.log_entry.size());
    for (std::size_t i = 0; i < W.size(); ++i) {
        W[i] = std::exp(A.log_entry[i] - shift);
        if (!(W[i] > 0.0))
            throw std::invalid_argument("perron: matrix entry underflows to zero");
    }

    const double uniform = 1.0 / T;
    std::vector<double> v(static_cast<std::size_t>(T), uniform);
    std::vector<double> u(static_cast<std::size_t>(T), uniform);
    std::vector<double> vn(static_cast<std::size_t>(T)), un(static_cast<std::size_t>(T));

    // Iterate on W + cI with c tracking the eigenvalue estimate: same
    // eigenvectors for every c, but the shift separates the dominant
    // eigenvalue from subdominant ones of nearly equal magnitude (a strong
    // tilt makes W almost antidiagonal, hence almost 2-periodic, where the
    // subdominant eigenvalue is close to -z).  The eigenvalue itself is
    // always read off W, so no shift is subtracted back.
    double z = 0.0, z_raw = 0.0, z_left = 0.0, c = 0.0;
    int iter = 0;
    const double resid_tol = 1e-12;
    for (; iter < max_iter; ++iter) {
        for (int a = 0; a < T; ++a) {
            double sr = 0.0, sl = 0.0;
            for (int bb = 0; bb < T; ++bb) {
                sr += W[static_cast<std::size_t>(a) * T + bb] * v[static_cast<std::size_t>(bb)];
                sl += W[static_cast<std::size_t>(bb) * T + a] * u[static_cast<std::size_t>(bb)];
            }
            vn[static_cast<std::size_t>(a)] = sr;
            un[static_cast<std::size_t>(a)] = sl;
        }
        const double zr_new = std::accumulate(vn.begin(), vn.end(), 0.0);
        const double zl_new = std::accumulate(un.begin(), un.end(), 0.0);
        for (int a = 0; a < T; ++a) {
            vn[static_cast<std::size_t>(a)] =
                (vn[static_cast<std::size_t>(a)] + c * v[static_cast<std::size_t>(a)]) /
                (zr_new + c);
            un[static_cast<std::size_t>(a)] =
                (un[static_cast<std::size_t>(a)] + c * u[static_cast<std::size_t>(a)]) /
                (zl_new + c);
        }
        const bool z_stable = std::fabs(zr_new - z_raw) <= eig_tol * zr_new &&
                              std::fabs(zl_new - z_left) <= eig_tol * zl_new;
        z_raw = zr_new;
        z_left = zl_new;
        c = zr_new;
        v.swap(vn);
        u.swap(un);
        if (z_stable) {
            // eigenvalue and residuals ||Wv - zv||_1, ||W^T u - z u||_1 on W
            double zw = 0.0;
            for (int a = 0; a < T; ++a)
                for (int bb = 0; bb < T; ++bb)
                    zw += W[static_cast<std::size_t>(a) * T + bb] * v[static_cast<std::size_t>(bb)];
            double rr = 0.0, rl = 0.0;
            for (int a = 0; a < T; ++a) {
                double sr = 0.0, sl = 0.0;
                for (int bb = 0; bb < T; ++bb) {
                    sr += W[static_cast<std::size_t>(a) * T + bb] * v[static_cast<std::size_t>(bb)];
                    sl += W[static_cast<std::size_t>(bb) * T + a] * u[static_cast<std::size_t>(bb)];
                }
                rr += std::fabs(sr - zw * v[static_cast<std::size_t>(a)]);
                rl += std::fabs(sl - zw * u[static_cast<std::size_t>(a)]);
            }
            z = zw;
            if (rr <= resid_tol * std::max(1.0, zw) && rl <= resid_tol * std::max(1.0, zw)) break;
        }
    }
    if (iter >= max_iter)
        throw std::runtime_error("perron: power iteration failed to converge");

    EigenData e;
    e.log_z = shift + std::log(z);
    e.z = std::exp(e.log_z);
    e.v = std::move(v);
    e.v_left = std::move(u);
    e.pi.resize(static_cast<std::size_t>(T));
    double pn = 0.0;
    for (int a = 0; a < T; ++a) {
        e.pi[static_cast<std::size_t>(a)] =
            e.v_left[static_cast<std::size_t>(a)] * e.v[static_cast<std::size_t>(a)];
        pn += e.pi[static_cast<std::size_t>(a)];
    }
    for (double& x : e.pi) x /= pn;
    e.iterations = iter + 1;
    return e;
}

double log_perron_z(const System& sys, double b, const PhasePoint& p, double eig_tol) {
    return perron(a_matrix(sys, b, p), eig_tol).log_z;
}

double ExcursionMeasure::mass(int a, int b, long long x) const {
    const long long x0 = first_x(a, b);
    if (x < x0 || (x - x0) % (2 * T) != 0) return 0.0;
    const auto& row = head[pair_index(a, b)];
    const std::size_t idx = static_cast<std::size_t>((x - x0) / (2 * T));
    return idx < row.size() ? row[idx] : 0.0;
}

double ExcursionMeasure::total_mass() const {
    double s = 0.0;
    for (const auto& row : head)
        for (double v : row) s += v;
    for (double v : tail_mass) s += v;
    return s;
}

std::vector<double> ExcursionMeasure::marginal_first() const {
    std::vector<double> m(static_cast<std::size_t>(T), 0.0);
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b) {
            const auto& row = head[pair_index(a, b)];
            double s = tail_mass[pair_index(a, b)];
            for (double v : row) s += v;
            m[static_cast<std::size_t>(a)] += s;
        }
    return m;
}

std::vector<double> ExcursionMeasure::marginal_second() const {
    std::vector<double> m(static_cast<std::size_t>(T), 0.0);
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b) {
            const auto& row = head[pair_index(a, b)];
            double s = tail_mass[pair_index(a, b)];
            for (double v : row) s += v;
            m[static_cast<std::size_t>(b)] += s;
        }
    return m;
}

void ExcursionMeasure::scale(double factor) {
    for (auto& row : head)
        for (double& v : row) v *= factor;
    for (double& v : tail_mass) v *= factor;
    for (double& v : tail_mean) v *= factor;
    mean_x *= factor;
}

ExcursionMeasure mu_b(const System& sys, double b, const PhasePoint& p,
                      long long head_cutoff, double eig_tol) {
    if (b < 0) throw std::domain_error("mu_b: b must be >= 0");
    const int T = sys.xi.T;
    if (head_cutoff < 2 || head_cutoff % 2 != 0)
        throw std::invalid_argument("mu_b: head cutoff must be even and >= 2");
    if (head_cutoff > 2 * static_cast<long long>(sys.law.cache_size()))
        throw std::invalid_argument("mu_b: head cutoff exceeds the K cache");

    const TransferMatrix A = a_matrix(sys, b, p);
    const EigenData e = perron(A, eig_tol);
    const double c2 = b + 2.0 * p.lambda * p.h;

    ExcursionMeasure mu;
    mu.T = T;
    mu.head_cutoff = head_cutoff;
    mu.head.resize(static_cast<std::size_t>(T) * T);
    mu.tail_mass.assign(static_cast<std::size_t>(T) * T, 0.0);
    mu.tail_mean.assign(static_cast<std::size_t>(T) * T, 0.0);

    double mean = 0.0;
    for (int a = 0; a < T; ++a) {
        const double log_pi_a = std::log(e.pi[static_cast<std::size_t>(a)]);
        for (int bb = 0; bb < T; ++bb) {
            const std::size_t pair = mu.pair_index(a, bb);
            const int g = ((bb - a) % T + T) % T;
            const int xi = sys.xi(a, bb);
            const double log_ratio = std::log(e.v[static_cast<std::size_t>(bb)]) -
                                     std::log(e.v[static_cast<std::size_t>(a)]);
            const double log_scale = log_pi_a + log_ratio - e.log_z;
            const double log_A = A.log_at(a, bb);
            // length-weighted entry sum_x x K(x) exp(phi - b x) over the class
            const double log_Ax =
                log_sum_exp(sys.law.log_laplace_class_mean(g, b),
                            -2.0 * p.lambda * xi + sys.law.log_laplace_class_mean(g, c2)) -
                kLog2;

            auto& row = mu.head[pair];
            const long long x0 = mu.first_x(a, bb);
            double head_frac = 0.0;       // head kernel mass relative to the full entry
            double head_frac_mean = 0.0;  // same, length-weighted
            for (long long x = x0; x <= head_cutoff; x += 2 * T) {
                const double log_kernel =
                    std::log(sys.law.k_exact(x)) + phi(p, xi, x) - b * static_cast<double>(x);
                row.push_back(std::exp(log_scale + log_kernel));
                head_frac += std::exp(log_kernel - log_A);
                if (log_Ax < kInf) head_frac_mean += std::exp(log_kernel - log_Ax) * x;
                mean += row.back() * static_cast<double>(x);
            }
            const double pair_mass = std::exp(log_scale + log_A);
            mu.tail_mass[pair] = pair_mass * std::max(0.0, 1.0 - head_frac);
            if (log_Ax == kInf) {
                mu.tail_mean[pair] = kInf;
                mean = kInf;
            } else {
                mu.tail_mean[pair] =
                    std::exp(log_scale + log_Ax) * std::max(0.0, 1.0 - head_frac_mean);
                mean += mu.tail_mean[pair];
            }
        }
    }
    mu.mean_x = mean;
    return mu;
}

ExcursionMeasure pi_eq(const System& sys, long long head_cutoff) {
    const int T = sys.xi.T;
    if (head_cutoff < 2 || head_cutoff % 2 != 0)
        throw std::invalid_argument("pi_eq: head cutoff must be even and >= 2");
    if (head_cutoff > 2 * static_cast<long long>(sys.law.cache_size()))
        throw std::invalid_argument("pi_eq: head cutoff exceeds the K cache");

    ExcursionMeasure mu;
    mu.T = T;
    mu.head_cutoff = head_cutoff;
    mu.head.resize(static_cast<std::size_t>(T) * T);
    mu.tail_mass.assign(static_cast<std::size_t>(T) * T, 0.0);
    mu.tail_mean.assign(static_cast<std::size_t>(T) * T, kInf);

    const double w = 1.0 / T;
    for (int a = 0; a < T; ++a)
        for (int bb = 0; bb < T; ++bb) {
            const std::size_t pair = mu.pair_index(a, bb);
            const int g = ((bb - a) % T + T) % T;
            auto& row = mu.head[pair];
            double head_class = 0.0;
            for (long long x = mu.first_x(a, bb); x <= head_cutoff; x += 2 * T) {
                const double k = sys.law.k_exact(x);
                row.push_back(w * k);
                head_class += k;
            }
            mu.tail_mass[pair] = w * std::max(0.0, sys.law.class_mass(g) - head_class);
        }
    mu.mean_x = kInf;
    return mu;
}

double mean_excursion(const ExcursionMeasure& mu) { return mu.mean_x; }

namespace {

// Reference tail mass per class: p_g minus the head part of the class series.
std::vector<double> class_tail_reference(const System& sys, long long head_cutoff) {
    const int T = sys.xi.T;
    std::vector<double> tail(static_cast<std::size_t>(T));
    for (int g = 0; g < T; ++g) {
        const long long x0 = g == 0 ? 2LL * T : 2LL * g;
        double head = 0.0;
        for (long long x = x0; x <= head_cutoff; x += 2 * T) head += sys.law.k_exact(x);
        tail[static_cast<std::size_t>(g)] = std::max(0.0, sys.law.class_mass(g) - head);
    }
    return tail;
}

}  // namespace

double rate_I(const System& sys, const ExcursionMeasure& mu) {
    const int T = sys.xi.T;
    const std::vector<double> m1 = mu.marginal_first();
    const std::vector<double> m2 = mu.marginal_second();
    for (int a = 0; a < T; ++a)
        if (std::fabs(m1[static_cast<std::size_t>(a)] - m2[static_cast<std::size_t>(a)]) > 1e-9)
            return kInf;

    const std::vector<double> tail_ref = class_tail_reference(sys, mu.head_cutoff);

    double I = 0.0;
    for (int a = 0; a < T; ++a)
        for (int bb = 0; bb < T; ++bb) {
            const std::size_t pair = mu.pair_index(a, bb);
            const int g = ((bb - a) % T + T) % T;
            const auto& row = mu.head[pair];
            long long x = mu.first_x(a, bb);
            for (double v : row) {
                if (v > 0.0) {
                    const double ref = m1[static_cast<std::size_t>(a)] * sys.law.k_exact(x);
                    I += v * std::log(v / ref);
                }
                x += 2 * T;
            }
            const double tb = mu.tail_mass[pair];
            if (tb > 0.0) {
                const double ref =
                    m1[static_cast<std::size_t>(a)] * tail_ref[static_cast<std::size_t>(g)];
                if (ref > 0.0) {
                    I += tb * std::log(tb / ref);
                } else if (tb > 1e-12) {
                    return kInf;  // genuine mass outside the reference support
                }
                // else: the reference tail vanished to roundoff and the bucket
                // carries comparable noise; both are zero in exact arithmetic
            }
        }
    return I;
}

double functional_Q(const System& sys, const ExcursionMeasure& mu, const PhasePoint& p) {
    const double I = rate_I(sys, mu);
    if (I == kInf) return -kInf;

    double energy = 0.0;
    const int T = sys.xi.T;
    for (int a = 0; a < T; ++a)
        for (int bb = 0; bb < T; ++bb) {
            const std::size_t pair = mu.pair_index(a, bb);
            const int xi = sys.xi(a, bb);
            const auto& row = mu.head[pair];
            long long x = mu.first_x(a, bb);
            for (double v : row) {
                if (v > 0.0) energy += v * phi(p, xi, x);
                x += 2 * T;
            }
            if (mu.tail_mass[pair] > 0.0) {
                // first support point beyond the head stands in for the bucket
                long long xr = mu.first_x(a, bb);
                while (xr <= mu.head_cutoff) xr += 2 * T;
                energy += mu.tail_mass[pair] * phi(p, xi, xr);
            }
        }
    return energy - I;
}

}  // namespace copoly
