// Acceptance suite: end-to-end checks of the analytic machinery against
// closed forms, independent finite-N computations, and the exact sampler.
// Prints one PASS/FAIL line per criterion and exits with the number of
// failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "copoly/free_energy.hpp"
#include "copoly/oracle_sim.hpp"
#include "copoly/phase.hpp"

using namespace copoly;

namespace {

int failures = 0;
std::chrono::steady_clock::time_point t_start;

void begin() { t_start = std::chrono::steady_clock::now(); }

void report(const std::string& name, bool pass, const std::string& detail) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::printf("%s  %-20s (%6.1fs)  %s\n", pass ? "PASS" : "FAIL", name.c_str(), secs,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1. Closed-form eigenvalue of the freely tilted walk.
void criterion_closed_form(const System& sys) {
    begin();
    double worst = 0.0;
    for (double b : {0.01, 0.1, 0.5, 1.0, 5.0}) {
        const double z = std::exp(log_perron_z(sys, b, {0.0, 0.0}));
        worst = std::max(worst, std::fabs(z - (1.0 - std::sqrt(1.0 - std::exp(-2.0 * b)))));
    }
    report("closed_form_z", worst <= 1e-12, "max |Z(b,0,h) - closed form| = " + num(worst));
}

// 2. Derivative identity: d/db log Z(b) = -sum x mu_b(x).
void criterion_derivative(const System& sys) {
    begin();
    const PhasePoint p{0.7, 0.1};
    const double step = 1e-5;
    double worst = 0.0;
    for (double b : {0.1, 0.5, 1.0}) {
        const double diff =
            (log_perron_z(sys, b + step, p) - log_perron_z(sys, b - step, p)) / (2.0 * step);
        const double mean = mean_excursion(mu_b(sys, b, p));
        worst = std::max(worst, std::fabs(diff + mean) / mean);
    }
    report("derivative_identity", worst <= 1e-6, "max relative deviation = " + num(worst));
}

// 3. Variational identity: Q(mu_b) = b f(b) + log Z(b).
void criterion_q_identity(const System& sys) {
    begin();
    const PhasePoint p{0.7, 0.1};
    const double b = 0.5;
    const auto mu = mu_b(sys, b, p, 10000);
    const double dev =
        std::fabs(functional_Q(sys, mu, p) - (b * mean_excursion(mu) + log_perron_z(sys, b, p)));
    report("q_identity", dev <= 1e-8, "|Q(mu_b) - (b f + log Z)| = " + num(dev));
}

// 4. Oracle agreement: extrapolated (1/N) log Z_N vs lambda h + b~.
void criterion_oracle(const System& sys) {
    begin();
    const std::vector<long long> ns{4000, 10000, 20000};
    double worst = 0.0;
    for (auto [lambda, h] : {std::pair{1.0, 0.0}, {0.8, 0.2}, {0.5, 0.6}}) {
        const auto fit = free_energy_estimate(sys.seq, {lambda, h}, ns);
        const auto r = solve_b_tilde(sys, {lambda, h});
        worst = std::max(worst, std::fabs(fit.f_est - r.f));
    }
    report("oracle_agreement", worst <= 5e-3, "max |f_est - (lambda h + b~)| = " + num(worst));
}

// 5. Small-coupling asymptotics: h_c(lambda) ~ m lambda^3 with m = 2.
void criterion_small_lambda(const System& sys) {
    begin();
    const double m = m_omega(sys);
    const double r002 = critical_h(sys, 0.02).h_c / (0.02 * 0.02 * 0.02);
    const double r010 = critical_h(sys, 0.10).h_c / (0.10 * 0.10 * 0.10);
    const bool pass = std::fabs(m - 2.0) <= 1e-12 && r002 >= 1.5 && r002 <= 2.5 &&
                      std::fabs(r002 - 2.0) < std::fabs(r010 - 2.0);
    report("small_lambda", pass,
           "m = " + num(m) + ", h_c/l^3 at 0.02 = " + num(r002) + ", at 0.1 = " + num(r010));
}

// 6. Large-coupling asymptotics: lambda (1 - h_c) -> M via the capped limit
//    matrix, plus the stated value of z_hat at M = 0.
void criterion_large_lambda(const System& sys) {
    begin();
    const double M = m_big_omega(sys);
    const auto cp = critical_h(sys, 10.0);
    const double dev = std::fabs(10.0 * (1.0 - cp.h_c) - M);
    const double z0 = z_hat(sys, 0.0);
    const double z0_dev = std::fabs(z0 - 0.5);
    const bool pass = dev <= 1e-4 && z0_dev <= 1e-12;
    std::string detail = "|lambda (1 - h_c) - M| = " + num(dev) + ", z_hat(0) = " + num(z0) +
                         " vs stated 0.5 (dev " + num(z0_dev) + ")";
    if (z0_dev > 1e-12)
        detail +=
            "; note: a centered nontrivial sequence always contains an aligned '--' pair, so "
            "the limit matrix keeps one K(2) e^{4M} entry and z_hat(0) = "
            "PF((p + K(2) E_pair)/2) > 1/2 necessarily; dropping that entry at M = 0 would "
            "shift the root M by ~0.034 and break the asymptote above";
    report("large_lambda", pass, detail);
}

// 7. Diblock scaling of m and the switched-alternating family.
void criterion_scaling() {
    begin();
    std::vector<double> lt, lm;
    for (int T : {8, 16, 32, 64}) {
        const System s(PeriodicSequence::diblock(T));
        lt.push_back(std::log(static_cast<double>(T)));
        lm.push_back(std::log(m_omega(s)));
    }
    const double slope = (lm.back() - lm.front()) / (lt.back() - lt.front());
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int k : {2, 4, 8, 16}) {
        const System s(PeriodicSequence::switched_alternating(k));
        const double m = m_omega(s);
        decreasing = decreasing && m < prev;
        prev = m;
    }
    report("diblock_scaling", slope >= 2.5 && slope <= 3.5 && decreasing,
           "log-log slope = " + num(slope) +
               (decreasing ? ", switched family decreasing" : ", switched family NOT decreasing"));
}

// 8. Monotonicity suite across the phase plane.
void criterion_monotonicity(const System& sys) {
    begin();
    bool pass = true;
    std::string what;
    auto fail = [&](const std::string& tag) {
        pass = false;
        if (!what.empty()) what += ", ";
        what += tag;
    };

    // Z strictly decreasing in b at a generic point
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20; ++i) {
        const double z = std::exp(log_perron_z(sys, 0.05 * i, {0.7, 0.1}));
        if (z >= prev) {
            fail("Z not decreasing in b");
            break;
        }
        prev = z;
    }

    // Z nonincreasing in h
    for (double lambda : {0.0, 0.5, 1.0}) {
        prev = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= 10; ++j) {
            const double z = std::exp(log_perron_z(sys, 0.0, {lambda, 0.1 * j}));
            if (z > prev + 1e-12) {
                fail("Z not nonincreasing in h");
                break;
            }
            prev = z;
        }
    }

    // critical curve: nondecreasing, valued in [0,1), incremental slope bound
    std::vector<CriticalPoint> pts;
    for (int i = 1; i <= 20; ++i) pts.push_back(critical_h(sys, 0.25 * i));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].h_c < 0.0 || pts[i].h_c >= 1.0) fail("h_c out of [0,1)");
        if (i > 0) {
            if (pts[i].h_c < pts[i - 1].h_c - 1e-12) fail("h_c decreasing");
            const double dl = pts[i].lambda - pts[i - 1].lambda;
            const double ratio = (pts[i].h_c - pts[i - 1].h_c) / dl;
            const double bound = (1.0 - pts[i - 1].h_c) / pts[i - 1].lambda;
            if (ratio > bound + 1e-8) fail("slope bound violated");
        }
    }

    // excess free energy: convex in lambda, nonincreasing in h
    for (double h : {0.0, 0.2, 0.4}) {
        std::vector<double> phi_l;
        for (int i = 0; i <= 12; ++i)
            phi_l.push_back(solve_b_tilde(sys, {0.25 * i, h}).b_tilde);
        for (std::size_t i = 1; i + 1 < phi_l.size(); ++i)
            if (phi_l[i + 1] - 2 * phi_l[i] + phi_l[i - 1] < -1e-8) fail("phi not convex");
    }
    for (double lambda : {0.5, 1.0, 2.0}) {
        prev = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= 12; ++j) {
            const double phi_h = solve_b_tilde(sys, {lambda, 0.1 * j}).b_tilde;
            if (phi_h > prev + 1e-10) fail("phi increasing in h");
            prev = phi_h;
        }
    }

    // 20 x 20 grid: phi >= 0, f >= lambda h, classification consistent
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const PhasePoint p{i * (3.0 / 19), j * (1.2 / 19)};
            const auto r = solve_b_tilde(sys, p);
            if (r.b_tilde < 0.0 || r.f < p.lambda * p.h - 1e-15) fail("phi or f bound");
            const auto cls = classify(sys, p);
            if (cls == Phase::Localized && r.b_tilde <= 1e-9) fail("classify vs root");
            if (cls == Phase::Delocalized && r.b_tilde > 1e-9) fail("classify vs root");
        }

    report("monotonicity", pass, pass ? "all monotone relations hold" : what);
}

// 9. Pathwise checks: sampler law, renewal mean, delocalized exceedance.
void criterion_pathwise(const System& sys) {
    begin();
    bool pass = true;
    std::string what;

    // exact sampler vs full path enumeration at N = 12
    const PhasePoint loc{1.0, 0.0};
    {
        const auto law = copoly_test::brute_path_law(sys.seq, loc, 12);
        const auto samples = sample_paths(sys.seq, loc, 12, 100000, 12345);
        std::vector<double> freq(law.size(), 0.0);
        const double w = 1.0 / static_cast<double>(samples.size());
        for (const auto& s : samples) freq[copoly_test::increment_word(s.heights)] += w;
        double tv = 0.0;
        for (std::size_t i = 0; i < law.size(); ++i) tv += std::fabs(freq[i] - law[i]);
        tv /= 2.0;
        what += "TV = " + num(tv);
        pass = pass && tv < 0.02;
    }

    // mean excursion at a localized point matches the tilted law within 10%
    {
        const auto r = solve_b_tilde(sys, loc);
        const double theory = mean_excursion(mu_b(sys, r.b_tilde, loc));
        const auto samples = sample_paths(sys.seq, loc, 10000, 200, 777);
        const auto st = excursion_stats(samples, sys.xi.T);
        const double rel = std::fabs(st.mean_excursion - theory) / theory;
        what += ", mean-excursion rel = " + num(rel);
        pass = pass && rel < 0.10;
    }

    // deep delocalized point: interface escape fractions grow toward 1
    {
        const PhasePoint del{0.5, 0.6};
        const double z0 = std::exp(log_perron_z(sys, 0.0, del));
        const auto s1 = excursion_stats(sample_paths(sys.seq, del, 1000, 200, 2024), sys.xi.T);
        const auto s2 = excursion_stats(sample_paths(sys.seq, del, 10000, 200, 2024), sys.xi.T);
        const double f1 = s1.frac_above.at(10), f2 = s2.frac_above.at(10);
        what += ", Z(0) = " + num(z0) + ", frac(S>10) = " + num(f1) + " -> " + num(f2);
        pass = pass && z0 <= 0.9 && f2 >= 0.75 && f2 > f1;
    }

    report("pathwise", pass, what);
}

// 10. The two small-coupling routes are mutually consistent.
void criterion_m_routes(const System& sys) {
    begin();
    const double bracket = small_lambda_bracket(sys, m_omega(sys));
    report("m_routes", std::fabs(bracket) < 1e-10,
           "expansion bracket at m = " + num(bracket));
}

}  // namespace

int main() {
    const System sys(PeriodicSequence::parse("++--"));
    criterion_closed_form(sys);
    criterion_derivative(sys);
    criterion_q_identity(sys);
    criterion_oracle(sys);
    criterion_small_lambda(sys);
    criterion_large_lambda(sys);
    criterion_scaling();
    criterion_monotonicity(sys);
    criterion_pathwise(sys);
    criterion_m_routes(sys);
    if (failures > 0) std::printf("acceptance: %d criterion(s) failed\n", failures);
    else std::printf("acceptance: all criteria passed\n");
    return failures;
}
