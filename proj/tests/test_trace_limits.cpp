#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fito/hermite.hpp"
#include "fito/kernels.hpp"
#include "fito/trace_limits.hpp"

using namespace fito;

TEST_CASE("averaged trace factors approach their limits as eps shrinks") {
    const double H = 0.7, t = 0.6;
    const double k3 = 2.06706889084954;
    const double lim1 = H * std::pow(t, 2 * H - 1);
    const double lim3 = 0.5 * H * k3 * std::pow(t, 3 * H - 1);
    double prev1 = INFINITY, prevK = INFINITY, prev3 = INFINITY;
    for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
        const double g1 = std::abs(averaged_fbm_trace(H, t, eps) / lim1 - 1);
        const double gK = std::abs(averaged_K1_trace(H, t, eps) / lim1 - 1);
        const double g3 = std::abs(averaged_K2_trace(H, t, eps) / lim3 - 1);
        // the first-order gap decays like eps^{2H-1}
        if (std::isfinite(prev1)) CHECK(g1 / prev1 == doctest::Approx(std::pow(0.5, 2 * H - 1)).epsilon(0.15));
        CHECK(g1 < prev1);
        CHECK(gK < prevK);
        CHECK(g3 < prev3);
        prev1 = g1;
        prevK = gK;
        prev3 = g3;
    }
    CHECK(prev3 < 0.1);
}

TEST_CASE("fbm and K1 averaged factors coincide") {
    // both equal H(2H-1) int_0^t |s - r|^{2H-2} dr averaged over s in (t, t + eps)
    for (double eps : {0.1, 0.025})
        CHECK(averaged_fbm_trace(0.7, 0.5, eps) == doctest::Approx(averaged_K1_trace(0.7, 0.5, eps)).epsilon(1e-8));
}

TEST_CASE("I2(e) gap second moment is positive and shrinks") {
    double prev = INFINITY;
    for (double eps : {0.2, 0.1, 0.05}) {
        const double e = e_gap_quadrature(0.7, 0.5, eps);
        CHECK(e > 0.0);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("small trace-limit run reports every term and rung") {
    TraceLimitConfig c;
    c.grid.cells = 264;
    c.grid.left_cut = -1e4;
    c.eps = {0.2, 0.1};
    c.replicates = 50;
    c.probe_replicates = 2000;
    c.time_points = 6;
    const auto r = trace_limit_checks(c);
    CHECK(r.gaps.size() == 6);
    CHECK(r.e_gaps.size() == 2);
    for (const auto& e : r.e_gaps) CHECK(e.grid_exact == doctest::Approx(e.quadrature).epsilon(0.05));
}
