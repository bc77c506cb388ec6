#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fito/kernels.hpp"
#include "fito/noise_grid.hpp"

namespace fito {

enum class ProcessKind { fbm, rosenblatt };

struct ProcessRep {
    ProcessKind kind = ProcessKind::fbm;
    std::shared_ptr<const FbmKernelTable> fbm;
    std::shared_ptr<const RosenblattKernelTable> rosenblatt;
    std::vector<double> node_var;  // sum_i w_i v_{s_k}(i)^2 per Rosenblatt node

    const TimeMesh& mesh() const { return kind == ProcessKind::fbm ? fbm->mesh : rosenblatt->mesh; }
    int cells() const { return kind == ProcessKind::fbm ? int(fbm->c.cols()) : rosenblatt->cells(); }
};

ProcessRep make_fbm_rep(std::shared_ptr<const FbmKernelTable> table);
ProcessRep make_rosenblatt_rep(std::shared_ptr<const RosenblattKernelTable> table);

// B_{t_j} = sum_i c_{t_j}(i) xi_i on the mesh.
std::vector<double> fbm_path(const ProcessRep& rep, const WhiteNoiseSample& sample);

// X_{t_j} = xi^T Q_{t_j} xi - sum_i w_i Q_{t_j,ii}, evaluated through the node
// factors as d sum_{s_k < t_j} w_k (W_k^2 - E W_k^2) with W_k = v_{s_k} . xi.
std::vector<double> rosenblatt_path(const ProcessRep& rep, const WhiteNoiseSample& sample);

// Path of either kind.
std::vector<double> process_path(const ProcessRep& rep, const WhiteNoiseSample& sample);

// Batched versions: column r of `xi` is one replicate's noise (cells x R).
// Returned matrices are mesh.size() x R.
Eigen::MatrixXd fbm_paths(const ProcessRep& rep, const Eigen::MatrixXd& xi);
Eigen::MatrixXd rosenblatt_paths(const ProcessRep& rep, const Eigen::MatrixXd& xi,
                                 Eigen::MatrixXd* node_noise = nullptr);

// Noise matrix for replicates [first, first + count): column r holds
// sample_noise(grid, seed, first + r).xi.
Eigen::MatrixXd noise_batch(const NoiseGrid& grid, std::uint64_t master_seed, std::uint64_t first,
                            int count);

// Exact-covariance fBm on arbitrary times via Cholesky of
// (s^{2H} + t^{2H} - |t-s|^{2H})/2. Times equal to 0 map to 0.
class FbmExactOracle {
public:
    FbmExactOracle(double H, std::vector<double> times);
    std::vector<double> sample(std::uint64_t master_seed, std::uint64_t replicate) const;
    const std::vector<double>& times() const { return times_; }

private:
    double H_;
    std::vector<double> times_;
    std::vector<int> active_;
    Eigen::MatrixXd L_;
};

std::vector<double> fbm_exact_oracle(double H, const std::vector<double>& times,
                                     std::uint64_t master_seed, std::uint64_t replicate = 0);

// max_{s<t} |X_t - X_s| / |t - s|^eta over all pairs of path points.
struct HolderStats {
    double eta = 0.0;
    double max_ratio = 0.0;
};
std::vector<HolderStats> holder_probe(std::span<const double> times, std::span<const double> path,
                                      std::span<const double> exponents);

}  // namespace fito
