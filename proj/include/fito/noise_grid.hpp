#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fito {

// Partition of [left_cut, right_end] into cells. The uniform core
// [core_left, right_end] has spacing h; an optional geometric far-field tail
// covers [left_cut, core_left] with widths h*r, h*r^2, ... growing leftwards.
class NoiseGrid {
public:
    NoiseGrid() = default;

    double left_cut() const { return bounds_.front(); }
    double right_end() const { return bounds_.back(); }
    double core_left() const { return core_left_; }
    double spacing() const { return h_; }
    double tail_ratio() const { return ratio_; }
    int cell_count() const { return static_cast<int>(bounds_.size()) - 1; }
    int tail_cells() const { return tail_cells_; }
    bool uniform() const { return tail_cells_ == 0; }

    std::span<const double> bounds() const { return bounds_; }
    std::span<const double> widths() const { return widths_; }
    double lo(int i) const { return bounds_[i]; }
    double hi(int i) const { return bounds_[i + 1]; }
    double width(int i) const { return widths_[i]; }
    double center(int i) const { return 0.5 * (bounds_[i] + bounds_[i + 1]); }
    std::vector<double> centers() const;

    // Index of the cell containing x (cells are half-open [lo, hi)).
    int locate(double x) const;

    // Stable 64-bit fingerprint of the boundaries, used as a cache key.
    std::uint64_t hash() const;

    std::string describe() const;

    friend NoiseGrid make_grid(double, double, int);
    friend NoiseGrid make_graded_grid(double, double, int, double, double);

private:
    std::vector<double> bounds_;
    std::vector<double> widths_;
    double core_left_ = 0.0;
    double h_ = 0.0;
    double ratio_ = 1.0;
    int tail_cells_ = 0;
    void finish();
};

// Uniform grid with cell_count cells on [left_cut, right_end].
NoiseGrid make_grid(double left_cut, double right_end, int cell_count);

// Uniform core of core_cells cells on [core_left, right_end], extended to
// left_cut by cells whose widths grow by `ratio` per step. The last tail cell
// is clipped to land on left_cut (and merged into its neighbour if the clipped
// sliver would be thinner than half the neighbour).
NoiseGrid make_graded_grid(double core_left, double right_end, int core_cells,
                           double left_cut, double ratio);

struct WhiteNoiseSample {
    const NoiseGrid* grid = nullptr;
    std::vector<double> xi;  // xi[i] ~ N(0, width(i)), independent
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
};

// Seed for replicate r derived by hashing (master_seed, r); replicate r never
// depends on the draws of other replicates.
std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t replicate);

WhiteNoiseSample sample_noise(const NoiseGrid& grid, std::uint64_t master_seed,
                              std::uint64_t replicate);

// Standard normals for the same lineage; sample_noise scales these by sqrt(width).
void standard_normals(std::uint64_t master_seed, std::uint64_t replicate, std::span<double> out);

// sum_i f_i xi_i for cell-averaged f.
double wiener_integral(const WhiteNoiseSample& sample, std::span<const double> f);

}  // namespace fito
