#include "fito/kernels.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

#include "fito/frac_ops.hpp"
#include "fito/quadrature.hpp"

namespace fito {

namespace {

std::uint64_t mix(std::uint64_t h, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h * 0xff51afd7ed558ccdULL;
}

// |p - u| on a piece [lo, hi] where p may coincide with an end.
inline double dist(double p, double u, double lo, double hi, double dl, double dr) {
    if (p == lo) return dl;
    if (p == hi) return dr;
    return std::abs(p - u);
}

}  // namespace

int TimeMesh::index_of(double x, double rel_tol) const {
    auto it = std::lower_bound(t.begin(), t.end(), x);
    const double scale = t.size() > 1 ? (t.back() - t.front()) / (t.size() - 1) : 1.0;
    int best = -1;
    for (auto c : {it, it == t.begin() ? it : it - 1}) {
        if (c == t.end()) continue;
        if (std::abs(*c - x) <= rel_tol * scale) best = static_cast<int>(c - t.begin());
    }
    return best;
}

std::uint64_t TimeMesh::hash() const {
    std::uint64_t h = 0x13198a2e03707344ULL;
    for (double x : t) h = mix(h, x);
    return h;
}

TimeMesh make_time_mesh(const NoiseGrid& grid, double T) {
    if (!(T > 0.0) || T > grid.right_end()) throw std::invalid_argument("time mesh end outside grid");
    TimeMesh m;
    m.t.push_back(0.0);
    for (double b : grid.bounds())
        if (b > 0.0 && b < T) m.t.push_back(b);
    m.t.push_back(T);
    return m;
}

double K0(double H, double s, double r) { return std::pow(std::abs(s - r), H - 1.0); }

double K1(double H, double t, double s, double r, double tol) {
    if (t <= 0.0) return 0.0;
    const double e = H - 1.0;
    const double br[2] = {s, r};
    QuadResult q;
    std::vector<double> pts{0.0};
    for (double p : br)
        if (p > 0.0 && p < t) pts.push_back(p);
    pts.push_back(t);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double lo = pts[k], hi = pts[k + 1];
        auto f = [&](double u, double dl, double dr) {
            return std::pow(dist(s, u, lo, hi, dl, dr), e) * std::pow(dist(r, u, lo, hi, dl, dr), e);
        };
        total += integrate_de(f, lo, hi, tol).value;
    }
    return total;
}

double K2(double H, double t, double s, double r, double tol) {
    if (t <= 0.0) return 0.0;
    const double e = H - 1.0;
    std::vector<double> pts{0.0};
    for (double p : {s, r})
        if (p > 0.0 && p < t) pts.push_back(p);
    pts.push_back(t);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double lo = pts[k], hi = pts[k + 1];
        auto f = [&](double u, double dl, double dr) {
            return std::pow(dist(s, u, lo, hi, dl, dr), e) * K1(H, t, u, r, 0.1 * tol);
        };
        total += integrate_de(f, lo, hi, tol).value;
    }
    return total;
}

double K2_unit_triple(double H, double tol) {
    // Six orderings contribute equally; integrate over x1 < x2 < x3 with x2
    // outermost so every singular plane sits at an interval end.
    const double e = H - 1.0;
    auto over_x2 = [&](double x2, double, double) {
        auto over_x1 = [&](double, double, double a) {  // a = x2 - x1
            auto over_x3 = [&](double, double c, double) {  // c = x3 - x2
                return std::pow(c, e) * std::pow(a + c, e);
            };
            return std::pow(a, e) * integrate_de(over_x3, x2, 1.0, 0.1 * tol).value;
        };
        return integrate_de(over_x1, 0.0, x2, 0.3 * tol).value;
    };
    return 6.0 * H * integrate_de(over_x2, 0.0, 1.0, tol).value;
}

double kappa3(double H) {
    HurstParam hp(H);
    static std::mutex mu;
    static std::map<double, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(H);
        if (it != cache.end()) return it->second;
    }
    const double k = (8.0 / H) * std::pow(H * (2 * H - 1) / 2, 1.5) * K2_unit_triple(H);
    std::lock_guard<std::mutex> lock(mu);
    cache[H] = k;
    return k;
}

std::vector<double> fbm_kernel_row(double H, const NoiseGrid& grid, double t) {
    if (t < 0.0 || t > grid.right_end()) throw std::invalid_argument("fbm kernel: t outside grid");
    std::vector<double> row(grid.cell_count(), 0.0);
    if (t == 0.0) return row;
    const double scale = fbm_constant(H) / gamma_fn(H + 0.5);
    const double q = H - 0.5;
    for (int i = 0; i < grid.cell_count() && grid.lo(i) < t; ++i) {
        const double a = power_integral(q, grid.lo(i), grid.hi(i), t);
        const double b = power_integral(q, grid.lo(i), grid.hi(i), 0.0);
        row[i] = scale * (a - b) / grid.width(i);
    }
    return row;
}

FbmKernelTable fbm_kernel_table(double H, const NoiseGrid& grid, const TimeMesh& mesh) {
    HurstParam hp(H);
    FbmKernelTable tab;
    tab.H = H;
    tab.mesh = mesh;
    tab.grid_hash = grid.hash();
    tab.c.resize(mesh.size(), grid.cell_count());
    for (int j = 0; j < mesh.size(); ++j) {
        const auto row = fbm_kernel_row(H, grid, mesh.t[j]);
        tab.c.row(j) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), row.size());
    }
    return tab;
}

double RosenblattKernelTable::entry(int j, int a, int b) const {
    double acc = 0.0;
    for (int k = 0; k < nodes_before(j); ++k) acc += node_w[k] * v(k, a) * v(k, b);
    return d * acc;
}

Eigen::MatrixXd RosenblattKernelTable::dense(int j) const {
    const int n = nodes_before(j);
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(node_w.data(), n);
    const auto V = v.topRows(n);
    return d * (V.transpose() * w.asDiagonal() * V);
}

double RosenblattKernelTable::compensator(int j) const {
    double acc = 0.0;
    for (int k = 0; k < nodes_before(j); ++k) {
        double g = 0.0;
        for (int i = 0; i < cells(); ++i) g += cell_w[i] * v(k, i) * v(k, i);
        acc += node_w[k] * g;
    }
    return d * acc;
}

namespace {

// S = Omega^{1/2} (V D V^T) Omega^{1/2} restricted to the first n nodes; the
// nonzero spectrum of D^{1/2} Q D^{1/2} / d.
Eigen::MatrixXd weighted_gram(const RosenblattKernelTable& tab, int n) {
    Eigen::VectorXd cw = Eigen::Map<const Eigen::VectorXd>(tab.cell_w.data(), tab.cells());
    Eigen::VectorXd nw(n);
    for (int k = 0; k < n; ++k) nw[k] = std::sqrt(tab.node_w[k]);
    Eigen::MatrixXd M = nw.asDiagonal() * tab.v.topRows(n) * cw.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd S(n, n);
    S.setZero();
    S.selfadjointView<Eigen::Lower>().rankUpdate(M);
    return S.selfadjointView<Eigen::Lower>();
}

}  // namespace

double RosenblattKernelTable::variance(int j) const {
    const int n = nodes_before(j);
    if (n == 0) return 0.0;
    const Eigen::MatrixXd S = weighted_gram(*this, n);
    return 2.0 * d * d * S.squaredNorm();
}

double RosenblattKernelTable::third_cumulant(int j) const {
    const int n = nodes_before(j);
    if (n == 0) return 0.0;
    const Eigen::MatrixXd S = weighted_gram(*this, n);
    const Eigen::MatrixXd S2 = S * S;
    return 8.0 * d * d * d * (S2.cwiseProduct(S)).sum();
}

RosenblattKernelTable rosenblatt_kernel_table(double H, const NoiseGrid& grid, const TimeMesh& mesh,
                                              int nodes_per_piece) {
    HurstParam hp(H);
    if (nodes_per_piece < 1) throw std::invalid_argument("nodes_per_piece must be positive");
    RosenblattKernelTable tab;
    tab.H = H;
    tab.d = rosenblatt_constant(H);
    tab.mesh = mesh;
    tab.grid_hash = grid.hash();
    tab.cell_w.assign(grid.widths().begin(), grid.widths().end());
    const GaussRule gl = gauss_legendre01(nodes_per_piece);
    for (int j = 0; j + 1 < mesh.size(); ++j) {
        tab.piece_begin.push_back(static_cast<int>(tab.node_t.size()));
        const double t0 = mesh.t[j], dt = mesh.t[j + 1] - mesh.t[j];
        for (int k = 0; k < nodes_per_piece; ++k) {
            const double u = gl.nodes[k];
            tab.node_t.push_back(t0 + dt * u * u * u);
            tab.node_w.push_back(dt * 3.0 * u * u * gl.weights[k]);
        }
    }
    tab.piece_begin.push_back(static_cast<int>(tab.node_t.size()));
    // piece_begin has one entry per mesh point: nodes before t_j.
    const double p = H / 2 - 1.0;
    const double g = gamma_fn(H / 2);
    tab.v.setZero(tab.nodes(), grid.cell_count());
    for (int k = 0; k < tab.nodes(); ++k) {
        const double s = tab.node_t[k];
        for (int i = 0; i < grid.cell_count() && grid.lo(i) < s; ++i)
            tab.v(k, i) = power_integral(p, grid.lo(i), grid.hi(i), s) / (grid.width(i) * g);
    }
    return tab;
}

std::vector<double> l_kernel(double H, double s, double t, const NoiseGrid& grid) {
    HurstParam hp(H);
    std::vector<double> out(grid.cell_count(), 0.0);
    if (t <= 0.0) return out;
    const double a = H / 2 + 1.0, b = H;
    const double Bab = beta_fn(a, b);
    // J(c) = int_{max(0,c)}^t (u - c)^{H/2} |s - u|^{H-1} du
    auto J = [&](double c) -> double {
        if (c >= t) return 0.0;
        const double lo = std::max(0.0, c);
        if (s >= t) {
            const double span = s - c;
            const double z0 = (lo - c) / span, z1 = (t - c) / span;
            const double c0 = z0 <= 0.0 ? 1.0 : boost::math::ibetac(a, b, z0);
            const double c1 = z1 >= 1.0 ? 0.0 : boost::math::ibetac(a, b, z1);
            return std::pow(span, 1.5 * H) * Bab * (c0 - c1);
        }
        auto f = [&](double u, double dl, double dr) {
            return std::pow(u - c, H / 2) * std::pow(std::abs(s - u), H - 1.0) + 0.0 * (dl + dr);
        };
        const double br[1] = {s};
        return integrate_split(f, lo, t, br, 1e-12).value;
    };
    double Jhi_prev = 0.0;
    bool have_prev = false;
    for (int i = 0; i < grid.cell_count() && grid.lo(i) < t; ++i) {
        const double jl = have_prev ? Jhi_prev : J(grid.lo(i));
        const double jh = J(grid.hi(i));
        out[i] = (jl - jh) / ((H / 2) * grid.width(i));
        Jhi_prev = jh;
        have_prev = true;
    }
    return out;
}

RankOneKernel e_kernel_diag(double H, double t, const NoiseGrid& grid) {
    RankOneKernel k;
    k.left = l_kernel(H, t, t, grid);
    k.right = k.left;
    return k;
}

double fbm_tail_bound(double H, double t, double left_cut) {
    HurstParam hp(H);
    if (!(left_cut < 0.0)) throw std::invalid_argument("left_cut must be negative");
    const double A = fbm_constant(H);
    const double L = -left_cut;
    return A * A * t * t * std::pow(L, 2 * H - 2) / (std::pow(gamma_fn(H - 0.5), 2) * (2 - 2 * H));
}

double rosenblatt_tail_bound(double H, double t, double left_cut) {
    HurstParam hp(H);
    if (!(left_cut < 0.0)) throw std::invalid_argument("left_cut must be negative");
    const double L = -left_cut;
    return 4 * (2 * H - 1) * std::pow(t, H + 1) * std::pow(L, H - 1) /
           (beta_fn(H / 2, 1 - H) * (H + 1) * (1 - H));
}

}  // namespace fito
