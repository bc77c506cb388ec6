#pragma once

#include <filesystem>
#include <memory>

#include "fito/kernels.hpp"

namespace fito {

// On-disk cache of kernel tables. One file per (kind, H, grid, mesh, q):
//   magic "FITOTAB1", u32 kind, f64 H, u64 grid hash, u64 mesh hash, u32 q,
//   then the table arrays as u64 length + raw little-endian f64 (or i32) data.
// Files whose header does not match the request are ignored and rebuilt.
class TableCache {
public:
    // An empty directory disables the cache.
    explicit TableCache(std::filesystem::path dir = {});

    std::shared_ptr<const FbmKernelTable> fbm(double H, const NoiseGrid& grid, const TimeMesh& mesh) const;
    std::shared_ptr<const RosenblattKernelTable> rosenblatt(double H, const NoiseGrid& grid, const TimeMesh& mesh,
                                                            int nodes_per_piece = 3) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

}  // namespace fito
