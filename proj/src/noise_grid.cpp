#include "fito/noise_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fito {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

void NoiseGrid::finish() {
    widths_.resize(bounds_.size() - 1);
    for (std::size_t i = 0; i + 1 < bounds_.size(); ++i) {
        widths_[i] = bounds_[i + 1] - bounds_[i];
        if (!(widths_[i] > 0.0)) throw std::invalid_argument("grid boundaries must increase strictly");
    }
}

std::vector<double> NoiseGrid::centers() const {
    std::vector<double> c(widths_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (bounds_[i] + bounds_[i + 1]);
    return c;
}

int NoiseGrid::locate(double x) const {
    if (x < bounds_.front() || x > bounds_.back()) return -1;
    auto it = std::upper_bound(bounds_.begin(), bounds_.end(), x);
    int i = static_cast<int>(it - bounds_.begin()) - 1;
    return std::min(i, cell_count() - 1);
}

std::uint64_t NoiseGrid::hash() const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (double b : bounds_) {
        std::uint64_t bits;
        std::memcpy(&bits, &b, sizeof bits);
        h = splitmix64(h ^ bits);
    }
    return h;
}

std::string NoiseGrid::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "cells=" << cell_count() << " core=[" << core_left_ << "," << right_end() << "] h=" << h_
       << " left_cut=" << left_cut() << " tail_cells=" << tail_cells_ << " ratio=" << ratio_;
    return os.str();
}

NoiseGrid make_grid(double left_cut, double right_end, int cell_count) {
    if (!std::isfinite(left_cut) || !std::isfinite(right_end))
        throw std::invalid_argument("grid bounds must be finite");
    if (!(left_cut < 0.0)) throw std::invalid_argument("left_cut must be negative");
    if (!(right_end > 0.0)) throw std::invalid_argument("right_end must be positive");
    if (cell_count < 2) throw std::invalid_argument("cell_count must be at least 2");
    NoiseGrid g;
    g.h_ = (right_end - left_cut) / cell_count;
    g.core_left_ = left_cut;
    g.bounds_.resize(cell_count + 1);
    // When 0 falls on a boundary, lay the cells out as integer multiples of h
    // so that time points j*h coincide with boundaries bit-for-bit.
    const double k0 = -left_cut / g.h_;
    const double k0r = std::round(k0);
    const bool zero_aligned = std::abs(k0 - k0r) < 1e-9;
    for (int i = 0; i <= cell_count; ++i)
        g.bounds_[i] = zero_aligned ? (i - k0r) * g.h_ : left_cut + i * g.h_;
    g.bounds_.front() = left_cut;
    g.bounds_.back() = right_end;
    g.finish();
    return g;
}

NoiseGrid make_graded_grid(double core_left, double right_end, int core_cells, double left_cut,
                           double ratio) {
    if (!std::isfinite(left_cut) || !std::isfinite(right_end) || !std::isfinite(core_left))
        throw std::invalid_argument("grid bounds must be finite");
    if (!(left_cut <= core_left)) throw std::invalid_argument("left_cut must not exceed core_left");
    if (!(ratio >= 1.0)) throw std::invalid_argument("tail ratio must be >= 1");
    NoiseGrid g = make_grid(core_left, right_end, core_cells);
    if (left_cut == core_left) return g;
    std::vector<double> tail;
    double x = core_left, w = g.h_;
    while (x > left_cut) {
        w *= ratio;
        x -= w;
        tail.push_back(std::max(x, left_cut));
    }
    if (tail.size() >= 2) {
        const double last = tail[tail.size() - 2] - tail.back();
        const double prev = (tail.size() >= 3 ? tail[tail.size() - 3] : core_left) - tail[tail.size() - 2];
        if (last < 0.5 * prev) {
            tail.pop_back();
            tail.back() = left_cut;
        }
    }
    std::vector<double> b(tail.rbegin(), tail.rend());
    b.insert(b.end(), g.bounds_.begin(), g.bounds_.end());
    g.bounds_ = std::move(b);
    g.tail_cells_ = static_cast<int>(tail.size());
    g.ratio_ = ratio;
    g.finish();
    return g;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t replicate) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(replicate + 0x632be59bd9b4e019ULL));
}

void standard_normals(std::uint64_t master_seed, std::uint64_t replicate, std::span<double> out) {
    std::mt19937_64 eng(replicate_seed(master_seed, replicate));
    std::normal_distribution<double> nd(0.0, 1.0);
    for (double& v : out) v = nd(eng);
}

WhiteNoiseSample sample_noise(const NoiseGrid& grid, std::uint64_t master_seed, std::uint64_t replicate) {
    WhiteNoiseSample s;
    s.grid = &grid;
    s.master_seed = master_seed;
    s.replicate = replicate;
    s.xi.resize(grid.cell_count());
    standard_normals(master_seed, replicate, s.xi);
    for (int i = 0; i < grid.cell_count(); ++i) s.xi[i] *= std::sqrt(grid.width(i));
    return s;
}

double wiener_integral(const WhiteNoiseSample& sample, std::span<const double> f) {
    if (f.size() != sample.xi.size()) throw std::length_error("wiener_integral: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * sample.xi[i];
    return acc;
}

}  // namespace fito
