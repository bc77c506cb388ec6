#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "fito/chaos.hpp"
#include "fito/hermite.hpp"
#include "fito/noise_grid.hpp"

using namespace fito;

namespace {

Tensor random_tensor(std::mt19937_64& rng, int order, int G) {
    std::normal_distribution<double> nd;
    Tensor t = Tensor::zeros(order, G);
    for (double& v : t.data) v = nd(rng);
    return symmetrize(t);
}

ChaosElement random_chaos(std::mt19937_64& rng, const std::vector<double>& w, int order) {
    ChaosElement a(w, 6);
    for (int n = 0; n <= order; ++n) a.add(random_tensor(rng, n, static_cast<int>(w.size())));
    return a;
}

}  // namespace

TEST_CASE("symmetrize averages over permutations") {
    Tensor t = Tensor::zeros(2, 3);
    t.data[0 * 3 + 1] = 2.0;  // (0, 1)
    const Tensor s = symmetrize(t);
    CHECK(s.data[0 * 3 + 1] == doctest::Approx(1.0));
    CHECK(s.data[1 * 3 + 0] == doctest::Approx(1.0));
    CHECK(s.data[0] == 0.0);
}

TEST_CASE("first and second chaos are the Wiener and double integrals") {
    const NoiseGrid g = make_grid(-1.0, 1.0, 4);
    const auto s = sample_noise(g, 8, 2);
    std::vector<double> f = {1.0, -2.0, 0.5, 3.0};
    double lin = 0.0;
    for (int i = 0; i < 4; ++i) lin += f[i] * s.xi[i];
    CHECK(multi_integral(Tensor::vector(f), s) == doctest::Approx(lin).epsilon(1e-13));
    Eigen::MatrixXd K(4, 4);
    K << 1, 2, 0, 1, 2, -1, 3, 0, 0, 3, 2, 1, 1, 0, 1, 4;
    Eigen::Map<const Eigen::VectorXd> xi(s.xi.data(), 4);
    double comp = 0.0;
    for (int i = 0; i < 4; ++i) comp += g.width(i) * K(i, i);
    CHECK(multi_integral(Tensor::matrix(K), s) == doctest::Approx(xi.dot(K * xi) - comp).epsilon(1e-12));
}

TEST_CASE("multiplication formula on random instances") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    for (int inst = 0; inst < 40; ++inst) {
        const int G = 2 + inst % 7;
        const int n = inst % 4;
        const NoiseGrid g = make_grid(-0.4 * G, 0.6 * G, G);
        const Tensor t = random_tensor(rng, n, G);
        std::vector<double> h(G);
        for (double& v : h) v = nd(rng);
        const auto s = sample_noise(g, 40, inst);
        CHECK(multiply_formula_check(t, h, s) < 1e-10 * (1 + t.max_abs()));
    }
}

TEST_CASE("chaos isometry: E[a b] = sum n! <a_n, b_n> by Monte Carlo") {
    std::mt19937_64 rng(4);
    const NoiseGrid g = make_grid(-1.0, 1.0, 3);
    const std::vector<double> w(g.widths().begin(), g.widths().end());
    const ChaosElement a = random_chaos(rng, w, 3), b = random_chaos(rng, w, 3);
    const int R = 100000;
    std::vector<double> p(R);
    for (int r = 0; r < R; ++r) {
        const auto s = sample_noise(g, 6, r);
        p[r] = a.evaluate(s) * b.evaluate(s);
    }
    const Moments m = moments(p);
    CHECK(std::abs(m.mean - a.inner(b)) < 4 * m.se);
}

TEST_CASE("S-transform of a Wick product factorizes") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd;
    for (int inst = 0; inst < 30; ++inst) {
        const int G = 2 + inst % 7;
        const NoiseGrid g = make_grid(-0.5 * G, 0.5 * G, G);
        const std::vector<double> w(g.widths().begin(), g.widths().end());
        const ChaosElement a = random_chaos(rng, w, inst % 4), b = random_chaos(rng, w, (inst + 1) % 4);
        std::vector<double> eta(G);
        for (double& v : eta) v = nd(rng);
        const ChaosElement ab = wick_product(a, b);
        const double lhs = ab.s_transform(eta), rhs = a.s_transform(eta) * b.s_transform(eta);
        CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(rhs)));
    }
}

TEST_CASE("S-transform by Monte Carlo under the translated noise") {
    std::mt19937_64 rng(9);
    const NoiseGrid g = make_grid(-1.0, 1.0, 3);
    const std::vector<double> w(g.widths().begin(), g.widths().end());
    const ChaosElement a = random_chaos(rng, w, 2);
    const std::vector<double> eta = {0.3, -0.6, 0.2};
    const Estimate e = s_transform_mc([&](const WhiteNoiseSample& s) { return a.evaluate(s); }, g, eta, 12, 40000);
    CHECK(std::abs(e.value - a.s_transform(eta)) < 4 * e.se);
}

TEST_CASE("Wick product overflow and oversized grids are refused") {
    const std::vector<double> w = {1.0, 1.0};
    ChaosElement a(w, 3), b(w, 3);
    a.add(Tensor::zeros(2, 2));
    Tensor t = Tensor::zeros(2, 2);
    t.data[0] = 1.0;
    a.add(t);
    b.add(t);
    CHECK_THROWS_AS(wick_product(a, b), std::length_error);
    CHECK_THROWS(ChaosElement(std::vector<double>(kOracleMaxCells + 1, 1.0)));
}

TEST_CASE("chaos gradient is the Malliavin derivative") {
    std::mt19937_64 rng(3);
    const NoiseGrid g = make_grid(-1.0, 1.0, 4);
    const std::vector<double> w(g.widths().begin(), g.widths().end());
    const ChaosElement a = random_chaos(rng, w, 3);
    const auto s = sample_noise(g, 2, 0);
    const SmoothFunctional phi = a.to_smooth_functional(s);
    const double h = 1e-5;
    for (int i = 0; i < 4; ++i) {
        auto up = s, dn = s;
        up.xi[i] += h;
        dn.xi[i] -= h;
        CHECK(phi.grad[i] == doctest::Approx((a.evaluate(up) - a.evaluate(dn)) / (2 * h)).epsilon(1e-6));
    }
}
