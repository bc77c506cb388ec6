#include "fito/studies.hpp"

#include <algorithm>
#include <cmath>

#include "fito/frac_ops.hpp"
#include "fito/kernels.hpp"

namespace fito {

std::vector<GridSpec> grid_ladder() {
    std::vector<GridSpec> out;
    GridSpec literal;
    literal.left_cut = -50.0;
    literal.core_left = -50.0;
    literal.tail_ratio = 1.0;
    literal.cells = 2048;
    out.push_back(literal);
    const double cuts[] = {-1e4, -1e6, -1e8};
    const int cells[] = {528, 1056, 2112};
    for (int k = 0; k < 3; ++k) {
        GridSpec g;
        g.left_cut = cuts[k];
        g.cells = cells[k];
        out.push_back(g);
    }
    return out;
}

GridSpec desk_grid() { return grid_ladder().back(); }

namespace {

ProcessRep build_rep(ProcessKind kind, double H, const NoiseGrid& grid, const GridSpec& spec) {
    const TimeMesh mesh = make_time_mesh(grid, grid.right_end());
    if (kind == ProcessKind::fbm) return make_fbm_rep(std::make_shared<FbmKernelTable>(fbm_kernel_table(H, grid, mesh)));
    return make_rosenblatt_rep(
        std::make_shared<RosenblattKernelTable>(rosenblatt_kernel_table(H, grid, mesh, spec.nodes_per_piece)));
}

int mesh_point(const TimeMesh& mesh, double t) {
    const int j = mesh.index_of(t);
    if (j < 0) throw ConfigError("time is not a mesh point of the grid");
    return j;
}

// 2 d^2 sum_{k < n_s} sum_{k' < n_t} w_k w_k' (v_k . D v_k')^2
double rosenblatt_grid_cov(const RosenblattKernelTable& tab, int js, int jt) {
    const int ns = tab.nodes_before(js), nt = tab.nodes_before(jt);
    if (ns == 0 || nt == 0) return 0.0;
    const Eigen::Map<const Eigen::VectorXd> cw(tab.cell_w.data(), tab.cells());
    const Eigen::MatrixXd G = (tab.v.topRows(ns) * cw.asDiagonal()) * tab.v.topRows(nt).transpose();
    const Eigen::Map<const Eigen::VectorXd> ws(tab.node_w.data(), ns), wt(tab.node_w.data(), nt);
    return 2.0 * tab.d * tab.d * ws.dot(G.cwiseAbs2() * wt);
}

double fbm_grid_cov(const FbmKernelTable& tab, const NoiseGrid& grid, int js, int jt) {
    double acc = 0.0;
    for (int i = 0; i < grid.cell_count(); ++i) acc += grid.width(i) * tab.c(js, i) * tab.c(jt, i);
    return acc;
}

}  // namespace

Eigen::MatrixXd sample_at_times(const ProcessRep& rep, const NoiseGrid& grid, const std::vector<double>& times,
                                std::uint64_t seed, std::uint64_t first, int count) {
    const TimeMesh& mesh = rep.mesh();
    std::vector<int> js;
    for (double t : times) js.push_back(mesh_point(mesh, t));
    const Eigen::MatrixXd xi = noise_batch(grid, seed, first, count);
    Eigen::MatrixXd out(times.size(), count);
    if (rep.kind == ProcessKind::fbm) {
        for (std::size_t k = 0; k < js.size(); ++k) out.row(k) = rep.fbm->c.row(js[k]) * xi;
        return out;
    }
    const auto& tab = *rep.rosenblatt;
    const int jmax = *std::max_element(js.begin(), js.end());
    const int n = tab.nodes_before(jmax);
    const Eigen::MatrixXd W = tab.v.topRows(n) * xi;
    for (int r = 0; r < count; ++r) {
        // cumulative sums in node order, read off at each requested time
        std::vector<double> acc(n + 1, 0.0);
        for (int k = 0; k < n; ++k) acc[k + 1] = acc[k] + tab.node_w[k] * (W(k, r) * W(k, r) - rep.node_var[k]);
        for (std::size_t q = 0; q < js.size(); ++q) out(q, r) = tab.d * acc[tab.nodes_before(js[q])];
    }
    return out;
}

NormalizationRung normalization_rung(ProcessKind kind, double H, const GridSpec& spec, int replicates,
                                     std::uint64_t seed) {
    NormalizationRung rung;
    rung.grid = spec;
    const NoiseGrid grid = spec.build();
    rung.cells = grid.cell_count();
    rung.tail_bound = kind == ProcessKind::fbm ? fbm_tail_bound(H, 1.0, spec.left_cut)
                                               : rosenblatt_tail_bound(H, 1.0, spec.left_cut);
    const ProcessRep rep = build_rep(kind, H, grid, spec);
    const int j1 = mesh_point(rep.mesh(), 1.0);
    rung.grid_variance =
        kind == ProcessKind::fbm ? fbm_grid_cov(*rep.fbm, grid, j1, j1) : rep.rosenblatt->variance(j1);
    std::vector<double> x;
    x.reserve(replicates);
    for (int first = 0; first < replicates; first += 512) {
        const int cnt = std::min(512, replicates - first);
        const Eigen::MatrixXd s = sample_at_times(rep, grid, {1.0}, seed, first, cnt);
        for (int r = 0; r < cnt; ++r) x.push_back(s(0, r));
    }
    rung.mc_variance = sample_variance(x);
    return rung;
}

bool CovarianceCell::within(double se_mult, double rel_bias) const {
    return std::abs(sample.value - target) <= se_mult * sample.se + rel_bias * std::abs(target);
}

std::vector<CovarianceCell> covariance_study(ProcessKind kind, double H, const GridSpec& spec,
                                             const std::vector<double>& times, int replicates, std::uint64_t seed) {
    const NoiseGrid grid = spec.build();
    const ProcessRep rep = build_rep(kind, H, grid, spec);
    const int nt = static_cast<int>(times.size());
    std::vector<std::vector<double>> x(nt);
    for (int first = 0; first < replicates; first += 512) {
        const int cnt = std::min(512, replicates - first);
        const Eigen::MatrixXd s = sample_at_times(rep, grid, times, seed, first, cnt);
        for (int q = 0; q < nt; ++q)
            for (int r = 0; r < cnt; ++r) x[q].push_back(s(q, r));
    }
    std::vector<CovarianceCell> out;
    for (int p = 0; p < nt; ++p)
        for (int q = p; q < nt; ++q) {
            CovarianceCell c;
            c.s = times[p];
            c.t = times[q];
            c.sample = sample_covariance(x[p], x[q]);
            const int js = mesh_point(rep.mesh(), c.s), jt = mesh_point(rep.mesh(), c.t);
            c.grid_value = kind == ProcessKind::fbm ? fbm_grid_cov(*rep.fbm, grid, js, jt)
                                                    : rosenblatt_grid_cov(*rep.rosenblatt, js, jt);
            c.target = 0.5 * (std::pow(c.s, 2 * H) + std::pow(c.t, 2 * H) - std::pow(std::abs(c.t - c.s), 2 * H));
            out.push_back(c);
        }
    return out;
}

CumulantStudy kappa3_study(double H, const GridSpec& spec, int replicates, std::uint64_t seed) {
    CumulantStudy st;
    st.quadrature = kappa3(H);
    const NoiseGrid grid = spec.build();
    const ProcessRep rep = build_rep(ProcessKind::rosenblatt, H, grid, spec);
    st.grid_value = rep.rosenblatt->third_cumulant(mesh_point(rep.mesh(), 1.0));
    std::vector<double> x;
    x.reserve(replicates);
    for (int first = 0; first < replicates; first += 512) {
        const int cnt = std::min(512, replicates - first);
        const Eigen::MatrixXd s = sample_at_times(rep, grid, {1.0}, seed, first, cnt);
        for (int r = 0; r < cnt; ++r) x.push_back(s(0, r));
    }
    st.sample = sample_third_cumulant(x);
    st.sample_variance = sample_variance(x);
    return st;
}

}  // namespace fito

namespace fito {

std::vector<std::string> normalization_failures(const std::vector<NormalizationRung>& ladder) {
    std::vector<std::string> out;
    if (ladder.empty()) return {"empty-ladder"};
    if (std::abs(ladder.front().z()) > 3.0) out.push_back("first-rung-variance");
    if (std::abs(ladder.back().z()) > 3.0) out.push_back("last-rung-variance");
    if (std::abs(ladder.back().bias()) >= 0.02) out.push_back("last-rung-bias");
    for (std::size_t k = 1; k < ladder.size(); ++k)
        if (!(std::abs(ladder[k].bias()) < std::abs(ladder[k - 1].bias()))) {
            out.push_back("bias-not-shrinking");
            break;
        }
    return out;
}

}  // namespace fito
