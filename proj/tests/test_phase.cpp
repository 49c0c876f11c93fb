#include <doctest.h>

#include <cmath>
#include <vector>

#include "copoly/phase.hpp"

using namespace copoly;
using doctest::Approx;

namespace {
System diblock2() { return System(PeriodicSequence::parse("++--")); }
}

TEST_CASE("critical_h: convention at 0, monotonicity, range") {
    const auto sys = diblock2();
    CHECK(critical_h(sys, 0.0).h_c == 0.0);
    CHECK_THROWS(critical_h(sys, -1.0));

    double prev = 0.0;
    for (double lambda : {0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0}) {
        const auto cp = critical_h(sys, lambda);
        CHECK(cp.h_c >= prev - 1e-12);
        CHECK(cp.h_c >= 0.0);
        CHECK(cp.h_c < 1.0);
        CHECK(cp.residual <= 1e-9);
        prev = cp.h_c;
    }
}

TEST_CASE("critical_h: small-coupling cubic law") {
    const auto sys = diblock2();
    const auto cp = critical_h(sys, 0.05);
    const double ratio = cp.h_c / (0.05 * 0.05 * 0.05);
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);
}

TEST_CASE("m_omega: diblock value and the expansion-bracket consistency") {
    const auto sys = diblock2();
    CHECK(m_omega(sys) == Approx(2.0).epsilon(1e-13));
    CHECK(std::fabs(small_lambda_bracket(sys, m_omega(sys))) < 1e-10);

    for (int T : {3, 4, 8}) {
        const System s(PeriodicSequence::diblock(T));
        CHECK(std::fabs(small_lambda_bracket(s, m_omega(s))) < 1e-10);
        CHECK(m_omega(s) > 0.0);
    }
}

TEST_CASE("m_omega: diblock growth near T^3, switched family decreasing") {
    std::vector<double> logs_t, logs_m;
    for (int T : {8, 16, 32, 64}) {
        const System s(PeriodicSequence::diblock(T));
        logs_t.push_back(std::log(static_cast<double>(T)));
        logs_m.push_back(std::log(m_omega(s)));
    }
    const double slope = (logs_m.back() - logs_m.front()) / (logs_t.back() - logs_t.front());
    CHECK(slope > 2.5);
    CHECK(slope < 3.5);

    double prev = std::numeric_limits<double>::infinity();
    for (int k : {2, 4, 8, 16}) {
        const System s(PeriodicSequence::switched_alternating(k));
        const double m = m_omega(s);
        CHECK(m < prev);
        prev = m;
    }
}

TEST_CASE("z_hat and m_big_omega: closed 2x2 values") {
    const auto sys = diblock2();

    // at M = 0 the matrix is (1/2)p plus the one surviving minus-window
    // entry; for the diblock the eigenvalue has the closed form below
    const double p1 = std::sqrt(2.0) / 2.0;
    const double zhat0 = 0.5 * (1.0 - p1) + std::sqrt((p1 / 2.0) * (p1 / 2.0 + 0.25));
    CHECK(z_hat(sys, 0.0) == Approx(zhat0).epsilon(1e-12));

    // golden fixture from the explicit 2x2 root: e^{4M} = 4 + 2 sqrt(2)
    const double m_closed = std::log(4.0 + 2.0 * std::sqrt(2.0)) / 4.0;
    CHECK(m_big_omega(sys) == Approx(m_closed).epsilon(1e-10));

    // z_hat is increasing in M
    CHECK(z_hat(sys, 0.5) > z_hat(sys, 0.2));
    CHECK(z_hat(sys, 2.0) > 1.0);
}

TEST_CASE("large-coupling asymptote: lambda (1 - h_c) -> M_omega") {
    const auto sys = diblock2();
    const double M = m_big_omega(sys);
    const auto cp5 = critical_h(sys, 5.0);
    const auto cp10 = critical_h(sys, 10.0);
    CHECK(std::fabs(5.0 * (1.0 - cp5.h_c) - M) < 1e-4);
    CHECK(std::fabs(10.0 * (1.0 - cp10.h_c) - M) < 1e-4);
}

TEST_CASE("classify: axes, deep phases, agreement with the solver") {
    const auto sys = diblock2();
    CHECK(classify(sys, {0.0, 0.3}) == Phase::Critical);  // Z = 1 identically at lambda = 0
    CHECK(classify(sys, {1.0, 0.0}) == Phase::Localized);
    CHECK(classify(sys, {0.5, 0.6}) == Phase::Delocalized);
    CHECK(classify(sys, {2.0, 1.0}) == Phase::Delocalized);
    CHECK(classify(sys, {2.0, 1.5}) == Phase::Delocalized);
    CHECK(to_string(Phase::Localized) == "Localized");

    // classify matches the sign of b~ away from the dead band
    for (double lambda : {0.3, 0.8, 1.5})
        for (double h : {0.0, 0.3, 0.8}) {
            const auto r = solve_b_tilde(sys, {lambda, h});
            const auto ph = classify(sys, {lambda, h});
            if (ph == Phase::Localized) CHECK(r.b_tilde > 1e-9);
            if (ph == Phase::Delocalized) CHECK(r.b_tilde <= 1e-9);
        }
}

TEST_CASE("classify near the curve is Critical within tolerance") {
    const auto sys = diblock2();
    const auto cp = critical_h(sys, 1.0);
    CHECK(classify(sys, {1.0, cp.h_c}) == Phase::Critical);
    CHECK(classify(sys, {1.0, cp.h_c - 1e-4}) == Phase::Localized);
    CHECK(classify(sys, {1.0, cp.h_c + 1e-4}) == Phase::Delocalized);
}

TEST_CASE("sweep_curve: monotone, bounded, slope inequality") {
    const auto sys = diblock2();
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.25 * i);
    const auto pts = sweep_curve(sys, grid);
    REQUIRE(pts.size() == grid.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].h_c >= 0.0);
        CHECK(pts[i].h_c < 1.0);
        if (i > 0) {
            CHECK(pts[i].h_c >= pts[i - 1].h_c - 1e-12);
            // incremental ratio bound from the delocalized-cone argument
            const double dl = pts[i].lambda - pts[i - 1].lambda;
            const double lhs = (pts[i].h_c - pts[i - 1].h_c) / dl;
            const double rhs = (1.0 - pts[i - 1].h_c) / pts[i - 1].lambda;
            CHECK(lhs <= rhs + 1e-8);
        }
    }
}
