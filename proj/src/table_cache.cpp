#include "fito/table_cache.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fito {

namespace {

constexpr char kMagic[8] = {'F', 'I', 'T', 'O', 'T', 'A', 'B', '1'};

struct Header {
    std::uint32_t kind;
    double H;
    std::uint64_t grid_hash;
    std::uint64_t mesh_hash;
    std::uint32_t q;
};

template <class T>
void put(std::ostream& os, const T& x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

template <class T>
bool get(std::istream& is, T& x) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&x), sizeof x));
}

template <class T>
void put_array(std::ostream& os, const T* data, std::uint64_t n) {
    put(os, n);
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
}

template <class T>
bool get_array(std::istream& is, std::vector<T>& out) {
    std::uint64_t n = 0;
    if (!get(is, n) || n > (1ULL << 34)) return false;
    out.resize(n);
    return static_cast<bool>(is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n * sizeof(T))));
}

void put_header(std::ostream& os, const Header& h) {
    os.write(kMagic, sizeof kMagic);
    put(os, h.kind);
    put(os, h.H);
    put(os, h.grid_hash);
    put(os, h.mesh_hash);
    put(os, h.q);
}

bool header_matches(std::istream& is, const Header& want) {
    char magic[8];
    Header h{};
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return false;
    if (!get(is, h.kind) || !get(is, h.H) || !get(is, h.grid_hash) || !get(is, h.mesh_hash) || !get(is, h.q))
        return false;
    return h.kind == want.kind && h.H == want.H && h.grid_hash == want.grid_hash && h.mesh_hash == want.mesh_hash &&
           h.q == want.q;
}

std::filesystem::path file_for(const std::filesystem::path& dir, const Header& h) {
    std::ostringstream name;
    name << (h.kind == 0 ? "fbm" : "rosenblatt") << "_H" << h.H << "_g" << std::hex << h.grid_hash << "_m"
         << h.mesh_hash << std::dec << "_q" << h.q << ".bin";
    return dir / name.str();
}

void write_atomically(const std::filesystem::path& target, const std::string& bytes) {
    std::filesystem::create_directories(target.parent_path());
    const auto tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) return;  // an unwritable cache is not an error
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
}

}  // namespace

TableCache::TableCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::shared_ptr<const FbmKernelTable> TableCache::fbm(double H, const NoiseGrid& grid, const TimeMesh& mesh) const {
    const Header want{0, H, grid.hash(), mesh.hash(), 0};
    if (!dir_.empty()) {
        std::ifstream is(file_for(dir_, want), std::ios::binary);
        std::vector<double> data;
        std::uint64_t rows = 0, cols = 0;
        if (is && header_matches(is, want) && get(is, rows) && get(is, cols) && get_array(is, data) &&
            data.size() == rows * cols && rows == static_cast<std::uint64_t>(mesh.size()) &&
            cols == static_cast<std::uint64_t>(grid.cell_count())) {
            auto t = std::make_shared<FbmKernelTable>();
            t->H = H;
            t->mesh = mesh;
            t->grid_hash = want.grid_hash;
            t->c = Eigen::Map<const RowMatrix>(data.data(), rows, cols);
            return t;
        }
    }
    auto t = std::make_shared<FbmKernelTable>(fbm_kernel_table(H, grid, mesh));
    if (!dir_.empty()) {
        std::ostringstream os(std::ios::binary);
        put_header(os, want);
        put(os, static_cast<std::uint64_t>(t->c.rows()));
        put(os, static_cast<std::uint64_t>(t->c.cols()));
        put_array(os, t->c.data(), static_cast<std::uint64_t>(t->c.size()));
        write_atomically(file_for(dir_, want), os.str());
    }
    return t;
}

std::shared_ptr<const RosenblattKernelTable> TableCache::rosenblatt(double H, const NoiseGrid& grid,
                                                                    const TimeMesh& mesh, int q) const {
    const Header want{1, H, grid.hash(), mesh.hash(), static_cast<std::uint32_t>(q)};
    if (!dir_.empty()) {
        std::ifstream is(file_for(dir_, want), std::ios::binary);
        auto t = std::make_shared<RosenblattKernelTable>();
        std::vector<double> v;
        std::uint64_t rows = 0, cols = 0;
        if (is && header_matches(is, want) && get(is, t->d) && get_array(is, t->node_t) && get_array(is, t->node_w) &&
            get_array(is, t->piece_begin) && get_array(is, t->cell_w) && get(is, rows) && get(is, cols) &&
            get_array(is, v) && v.size() == rows * cols && rows == t->node_t.size() &&
            cols == static_cast<std::uint64_t>(grid.cell_count())) {
            t->H = H;
            t->mesh = mesh;
            t->grid_hash = want.grid_hash;
            t->v = Eigen::Map<const RowMatrix>(v.data(), rows, cols);
            return t;
        }
    }
    auto t = std::make_shared<RosenblattKernelTable>(rosenblatt_kernel_table(H, grid, mesh, q));
    if (!dir_.empty()) {
        std::ostringstream os(std::ios::binary);
        put_header(os, want);
        put(os, t->d);
        put_array(os, t->node_t.data(), t->node_t.size());
        put_array(os, t->node_w.data(), t->node_w.size());
        put_array(os, t->piece_begin.data(), t->piece_begin.size());
        put_array(os, t->cell_w.data(), t->cell_w.size());
        put(os, static_cast<std::uint64_t>(t->v.rows()));
        put(os, static_cast<std::uint64_t>(t->v.cols()));
        put_array(os, t->v.data(), static_cast<std::uint64_t>(t->v.size()));
        write_atomically(file_for(dir_, want), os.str());
    }
    return t;
}

}  // namespace fito
