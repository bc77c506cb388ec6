#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <memory>

#include "fito/kernels.hpp"
#include "fito/processes.hpp"
#include "fito/stats.hpp"
#include "fito/studies.hpp"

using namespace fito;

namespace {

struct Small {
    NoiseGrid grid = make_graded_grid(-1.0, 1.2, 44, -200.0, 1.3);
    TimeMesh mesh = make_time_mesh(grid, 1.2);
    ProcessRep fbm = make_fbm_rep(std::make_shared<FbmKernelTable>(fbm_kernel_table(0.7, grid, mesh)));
    ProcessRep ros = make_rosenblatt_rep(
        std::make_shared<RosenblattKernelTable>(rosenblatt_kernel_table(0.7, grid, mesh, 3)));
};

const Small& small() {
    static const Small s;
    return s;
}

}  // namespace

TEST_CASE("paths start at zero and batched paths equal single paths") {
    const Small& s = small();
    const Eigen::MatrixXd xi = noise_batch(s.grid, 5, 10, 3);
    const Eigen::MatrixXd bf = fbm_paths(s.fbm, xi), br = rosenblatt_paths(s.ros, xi);
    for (int r = 0; r < 3; ++r) {
        const auto sample = sample_noise(s.grid, 5, 10 + r);
        const auto pf = fbm_path(s.fbm, sample), pr = rosenblatt_path(s.ros, sample);
        CHECK(pf[0] == 0.0);
        CHECK(pr[0] == 0.0);
        for (int j = 0; j < s.mesh.size(); ++j) {
            CHECK(bf(j, r) == doctest::Approx(pf[j]).epsilon(1e-12).scale(1e-12));
            CHECK(br(j, r) == doctest::Approx(pr[j]).epsilon(1e-12).scale(1e-12));
        }
    }
}

TEST_CASE("Rosenblatt path equals the compensated quadratic form") {
    const Small& s = small();
    const auto sample = sample_noise(s.grid, 17, 0);
    const auto path = rosenblatt_path(s.ros, sample);
    Eigen::Map<const Eigen::VectorXd> xi(sample.xi.data(), sample.xi.size());
    for (int j : {s.mesh.index_of(0.5), s.mesh.index_of(1.0)}) {
        const Eigen::MatrixXd Q = s.ros.rosenblatt->dense(j);
        double comp = 0.0;
        for (int i = 0; i < s.grid.cell_count(); ++i) comp += s.grid.width(i) * Q(i, i);
        CHECK(path[j] == doctest::Approx(xi.dot(Q * xi) - comp).epsilon(1e-10));
    }
}

TEST_CASE("sample moments of the discretized processes match their exact moments") {
    // Isserlis: for the Gaussian path E[B^4] = 3 Var^2; for the quadratic form
    // the exact variance and third cumulant come from traces of Q W.
    const Small& s = small();
    const int R = 20000;
    const int j = s.mesh.index_of(1.0);
    const std::vector<double> times = {1.0};
    std::vector<double> b, x;
    for (int first = 0; first < R; first += 1000) {
        const Eigen::MatrixXd fb = sample_at_times(s.fbm, s.grid, times, 77, first, 1000);
        const Eigen::MatrixXd xr = sample_at_times(s.ros, s.grid, times, 77, first, 1000);
        for (int r = 0; r < 1000; ++r) {
            b.push_back(fb(0, r));
            x.push_back(xr(0, r));
        }
    }
    double var_b = 0.0;
    for (int i = 0; i < s.grid.cell_count(); ++i) var_b += s.grid.width(i) * std::pow(s.fbm.fbm->c(j, i), 2);
    const Estimate vb = sample_variance(b);
    CHECK(std::abs(vb.value - var_b) < 4 * vb.se);
    std::vector<double> b4(R);
    for (int r = 0; r < R; ++r) b4[r] = std::pow(b[r], 4);
    const Moments m4 = moments(b4);
    CHECK(std::abs(m4.mean - 3 * var_b * var_b) < 4 * m4.se);

    const Estimate vx = sample_variance(x);
    CHECK(std::abs(vx.value - s.ros.rosenblatt->variance(j)) < 4 * vx.se);
    const Estimate k3 = sample_third_cumulant(x);
    CHECK(std::abs(k3.value - s.ros.rosenblatt->third_cumulant(j)) < 4 * k3.se);
    CHECK(std::abs(moments(x).mean) < 4 * moments(x).se);
}

TEST_CASE("exact oracle has the fbm covariance") {
    const double H = 0.7;
    const std::vector<double> times = {0.0, 0.3, 1.0};
    FbmExactOracle o(H, times);
    const int R = 20000;
    std::vector<double> a, b;
    for (int r = 0; r < R; ++r) {
        const auto v = o.sample(4, r);
        CHECK(v[0] == 0.0);
        a.push_back(v[1]);
        b.push_back(v[2]);
    }
    const double target = 0.5 * (std::pow(0.3, 2 * H) + 1.0 - std::pow(0.7, 2 * H));
    const Estimate c = sample_covariance(a, b);
    CHECK(std::abs(c.value - target) < 4 * c.se);
    CHECK_THROWS_AS(FbmExactOracle(1.2, times), std::domain_error);
}

TEST_CASE("Hoelder probe on a linear path") {
    const std::vector<double> t = {0.0, 0.25, 0.5, 1.0};
    const std::vector<double> x = {0.0, 0.5, 1.0, 2.0};
    const std::vector<double> eta = {1.0, 0.5};
    const auto h = holder_probe(t, x, eta);
    CHECK(h[0].max_ratio == doctest::Approx(2.0));
    CHECK(h[1].max_ratio == doctest::Approx(2.0));  // |dx| / |dt|^0.5 peaks at the full span
}

TEST_CASE("noise batches are the per-replicate samples") {
    const Small& s = small();
    const Eigen::MatrixXd xi = noise_batch(s.grid, 1, 7, 2);
    const auto s8 = sample_noise(s.grid, 1, 8);
    for (int i = 0; i < s.grid.cell_count(); ++i) CHECK(xi(i, 1) == s8.xi[i]);
}
