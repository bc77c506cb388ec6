#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>

#include "fito/noise_grid.hpp"

using namespace fito;

TEST_CASE("uniform grid covers its interval") {
    const NoiseGrid g = make_grid(-4.0, 1.0, 50);
    CHECK(g.cell_count() == 50);
    CHECK(g.uniform());
    CHECK(g.spacing() == doctest::Approx(0.1));
    const auto w = g.widths();
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(g.locate(0.05) == g.locate(0.0999));
    CHECK(g.lo(g.locate(0.05)) <= 0.05);
    CHECK(g.hi(g.locate(0.05)) > 0.05);
}

TEST_CASE("graded grid keeps the core uniform and grows the tail geometrically") {
    const NoiseGrid g = make_graded_grid(-1.0, 1.2, 220, -1e4, 1.05);
    CHECK(g.left_cut() == -1e4);
    CHECK(g.right_end() == doctest::Approx(1.2));
    CHECK(g.tail_cells() > 0);
    const int first_core = g.tail_cells();
    CHECK(g.lo(first_core) == doctest::Approx(-1.0));
    for (int i = first_core; i < g.cell_count(); ++i) CHECK(g.width(i) == doctest::Approx(0.01).epsilon(1e-10));
    // growth ratio between consecutive tail cells, except the clipped last one
    for (int i = 2; i < first_core; ++i) CHECK(g.width(i) / g.width(i + 1) == doctest::Approx(1.05).epsilon(1e-9));
    const auto w = g.widths();
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1e4 + 1.2).epsilon(1e-12));
}

TEST_CASE("bad grids are rejected") {
    CHECK_THROWS_AS(make_grid(1.0, 2.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(-1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(-INFINITY, 1.0, 10), std::invalid_argument);
}

TEST_CASE("noise is reproducible per replicate and scaled by the cell width") {
    const NoiseGrid g = make_graded_grid(-1.0, 1.0, 40, -100.0, 1.2);
    const auto a = sample_noise(g, 99, 5), b = sample_noise(g, 99, 5), c = sample_noise(g, 99, 6);
    CHECK(a.xi == b.xi);
    CHECK(a.xi != c.xi);

    // xi_i / sqrt(w_i) should be standard normal across replicates
    const int R = 4000;
    double s2 = 0.0, s1 = 0.0;
    const int i = 0;  // widest tail cell
    for (int r = 0; r < R; ++r) {
        const double z = sample_noise(g, 3, r).xi[i] / std::sqrt(g.width(i));
        s1 += z;
        s2 += z * z;
    }
    CHECK(std::abs(s1 / R) < 4.0 / std::sqrt(R));
    CHECK(std::abs(s2 / R - 1.0) < 4.0 * std::sqrt(2.0 / R));
}

TEST_CASE("Wiener integral of an indicator has the interval length as variance") {
    const NoiseGrid g = make_grid(-2.0, 2.0, 40);
    std::vector<double> f(g.cell_count(), 0.0);
    for (int i = 0; i < g.cell_count(); ++i)
        if (g.lo(i) >= 0.0 && g.hi(i) <= 1.0 + 1e-12) f[i] = 1.0;
    double s2 = 0.0;
    const int R = 5000;
    for (int r = 0; r < R; ++r) {
        const double x = wiener_integral(sample_noise(g, 8, r), f);
        s2 += x * x;
    }
    CHECK(std::abs(s2 / R - 1.0) < 4.0 * std::sqrt(2.0 / R));
    std::vector<double> short_f(3, 1.0);
    CHECK_THROWS_AS(wiener_integral(sample_noise(g, 8, 0), short_f), std::length_error);
}
