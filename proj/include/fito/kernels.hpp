#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "fito/noise_grid.hpp"

namespace fito {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Time points 0 = t_0 < t_1 < ... < t_M = T made of 0, every cell boundary in
// (0, T) and T. Pieces [t_j, t_{j+1}) never straddle a cell boundary, so the
// cell-averaged kernels are smooth inside each piece.
struct TimeMesh {
    std::vector<double> t;
    int size() const { return static_cast<int>(t.size()); }
    // Index j with t[j] == x up to rel_tol * spacing; -1 if x is not a mesh point.
    int index_of(double x, double rel_tol = 1e-8) const;
    std::uint64_t hash() const;
};

TimeMesh make_time_mesh(const NoiseGrid& grid, double T);

// |s - r|^{H-1}
double K0(double H, double s, double r);
// int_0^t |s-u|^{H-1} |r-u|^{H-1} du
double K1(double H, double t, double s, double r, double tol = 1e-12);
// int_0^t int_0^t |s-u|^{H-1} |u-v|^{H-1} |r-v|^{H-1} du dv
double K2(double H, double t, double s, double r, double tol = 1e-9);

// H * int_{[0,1]^3} |x1-x2|^{H-1} |x2-x3|^{H-1} |x3-x1|^{H-1} dx by nested quadrature.
double K2_unit_triple(double H, double tol = 1e-9);

// (8/H) (H(2H-1)/2)^{3/2} K_1^2(1,1); cached per H.
double kappa3(double H);

// fBm kernel table: row j holds cell averages of
// g_{0,t_j}(x) = A/Gamma(H-1/2) int_0^{t_j} (s-x)_+^{H-3/2} ds.
struct FbmKernelTable {
    double H = 0.0;
    TimeMesh mesh;
    RowMatrix c;  // mesh.size() x cells
    std::uint64_t grid_hash = 0;
};

FbmKernelTable fbm_kernel_table(double H, const NoiseGrid& grid, const TimeMesh& mesh);

// One row of the fBm table, for an arbitrary t inside the grid.
std::vector<double> fbm_kernel_row(double H, const NoiseGrid& grid, double t);

// Rosenblatt kernel in factored form. With v_s the cell averages of
// (s - x)_+^{H/2-1}/Gamma(H/2) and time nodes s_k of weight w_k,
//   Q_t = d(H) sum_{s_k < t} w_k v_{s_k} v_{s_k}^T,
// a quadrature of d int_0^t v_s v_s^T ds. Nodes per mesh piece follow
// s = t_j + (t_{j+1} - t_j) u^3 with Gauss-Legendre u, which absorbs the
// (s - x_lo)^{H/2} onset at the left end of each piece.
struct RosenblattKernelTable {
    double H = 0.0;
    double d = 0.0;
    TimeMesh mesh;
    std::vector<double> node_t;
    std::vector<double> node_w;
    std::vector<int> piece_begin;  // nodes of piece j: [piece_begin[j], piece_begin[j+1])
    RowMatrix v;                   // nodes x cells
    std::vector<double> cell_w;
    std::uint64_t grid_hash = 0;

    int nodes() const { return static_cast<int>(node_t.size()); }
    int cells() const { return static_cast<int>(v.cols()); }
    // Number of nodes strictly before mesh point j.
    int nodes_before(int j) const { return piece_begin[j]; }

    double entry(int j, int a, int b) const;
    Eigen::MatrixXd dense(int j) const;  // tiny grids only
    // sum_i w_i Q_ii, the compensator of the quadratic form at mesh point j.
    double compensator(int j) const;
    // 2 sum_{ab} w_a w_b Q_ab^2 = Var(X_{t_j}) of the discrete process.
    double variance(int j) const;
    // 8 tr((D^{1/2} Q D^{1/2})^3), the discrete third cumulant.
    double third_cumulant(int j) const;
};

RosenblattKernelTable rosenblatt_kernel_table(double H, const NoiseGrid& grid, const TimeMesh& mesh,
                                              int nodes_per_piece = 3);

// Cell averages of l_{s,t}(x) = int_0^t (u-x)_+^{H/2-1} |s-u|^{H-1} du.
std::vector<double> l_kernel(double H, double s, double t, const NoiseGrid& grid);

// e_{t,t}(x1, x2) = l_{t,t}(x1) l_{t,t}(x2), kept as its rank-one factor.
struct RankOneKernel {
    std::vector<double> left;
    std::vector<double> right;
    double operator()(int i, int j) const { return left[i] * right[j]; }
};
RankOneKernel e_kernel_diag(double H, double t, const NoiseGrid& grid);

// Analytic truncation bounds: variance of the process at time t carried by
// noise left of the cut L.
double fbm_tail_bound(double H, double t, double left_cut);
double rosenblatt_tail_bound(double H, double t, double left_cut);

}  // namespace fito
