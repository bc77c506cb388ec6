#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fito/ito_engine.hpp"
#include "fito/stats.hpp"

namespace fito {

// Grid refinement ladder for the normalization study: the literal uniform
// grid on [-50, 1.2] with 2048 cells, then graded grids that refine the core
// spacing and push the left cut out together.
std::vector<GridSpec> grid_ladder();
GridSpec desk_grid();  // last rung of the ladder

struct NormalizationRung {
    GridSpec grid;
    int cells = 0;
    double tail_bound = 0.0;     // analytic variance lost left of the cut
    double grid_variance = 0.0;  // exact variance of the discretized process
    Estimate mc_variance;        // sample variance over the replicates
    double bias() const { return grid_variance - 1.0; }
    double z() const { return mc_variance.se > 0 ? (mc_variance.value - 1.0) / mc_variance.se : 0.0; }
};

// Var(X_t) at t = 1 on one grid.
NormalizationRung normalization_rung(ProcessKind kind, double H, const GridSpec& grid, int replicates,
                                     std::uint64_t seed);

struct CovarianceCell {
    double s = 0.0, t = 0.0;
    Estimate sample;
    double grid_value = 0.0;
    double target = 0.0;  // (s^{2H} + t^{2H} - |t-s|^{2H}) / 2
    bool within(double se_mult, double rel_bias) const;
};

// Pairs s <= t from `times`.
std::vector<CovarianceCell> covariance_study(ProcessKind kind, double H, const GridSpec& grid,
                                             const std::vector<double>& times, int replicates, std::uint64_t seed);

struct CumulantStudy {
    double quadrature = 0.0;   // kappa3 of X_1 from the kernel constants
    double grid_value = 0.0;   // exact third cumulant of the discretized X_1
    Estimate sample;           // sample third cumulant
    Estimate sample_variance;  // of X_1, same replicates
    double z() const { return sample.se > 0 ? (sample.value - quadrature) / sample.se : 0.0; }
};

CumulantStudy kappa3_study(double H, const GridSpec& grid, int replicates, std::uint64_t seed);

// Samples of the process at the given mesh times, replicates in columns.
Eigen::MatrixXd sample_at_times(const ProcessRep& rep, const NoiseGrid& grid, const std::vector<double>& times,
                                std::uint64_t seed, std::uint64_t first, int count);

}  // namespace fito

namespace fito {

// Names of the normalization checks that fail on a ladder: the first and last
// rungs must sample Var(X_1) within 3 SE of 1, the last rung must carry less
// than 2% grid bias, and the bias must shrink rung by rung.
std::vector<std::string> normalization_failures(const std::vector<NormalizationRung>& ladder);

}  // namespace fito
