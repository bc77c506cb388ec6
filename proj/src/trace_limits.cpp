#include "fito/trace_limits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fito/frac_ops.hpp"
#include "fito/hermite.hpp"
#include "fito/quadrature.hpp"
#include "fito/table_cache.hpp"

namespace fito {

namespace {

// Nodes and weights for (1/eps) int_t^{t+eps} ds with s = t + eps u^5; the
// substitution smooths the (s - t)^{2H-1} onset of the kernels.
struct SRule {
    std::vector<double> s, w;
};

SRule s_rule(double t, double eps, int n) {
    const GaussRule gl = gauss_legendre01(n);
    SRule r;
    for (int k = 0; k < n; ++k) {
        const double u = gl.nodes[k];
        r.s.push_back(t + eps * std::pow(u, 5));
        r.w.push_back(5.0 * std::pow(u, 4) * gl.weights[k]);
    }
    return r;
}

double rms_of(const std::vector<double>& x) { return moments(x).rms; }

}  // namespace

double averaged_fbm_trace(double H, double t, double eps, int s_nodes) {
    const double A = fbm_constant(H);
    const SRule r = s_rule(t, eps, s_nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.s.size(); ++k) acc += r.w[k] * A * grad_fbm_closed_form(H, t, r.s[k]);
    return acc;
}

double averaged_K1_trace(double H, double t, double eps, int s_nodes) {
    const SRule r = s_rule(t, eps, s_nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.s.size(); ++k) acc += r.w[k] * K1(H, t, r.s[k], r.s[k]);
    return H * (2 * H - 1) * acc;
}

double averaged_K2_trace(double H, double t, double eps, int s_nodes) {
    const SRule r = s_rule(t, eps, s_nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.s.size(); ++k) acc += r.w[k] * K2(H, t, r.s[k], r.s[k]);
    return 4.0 * std::pow(std::sqrt(H * (2 * H - 1) / 2), 3) * acc;
}

double e_gap_quadrature(double H, double t, double eps, int s_nodes) {
    const SRule r = s_rule(t, eps, s_nodes);
    const int n = static_cast<int>(r.s.size());
    const double beta = beta_fn(1 - H, H / 2);
    double dbl = 0.0, cross = 0.0;
    for (int m = 0; m < n; ++m) {
        for (int q = m; q < n; ++q) {
            const double k = K2(H, t, r.s[m], r.s[q]);
            dbl += (m == q ? 1.0 : 2.0) * r.w[m] * r.w[q] * k * k;
        }
        const double k = K2(H, t, t, r.s[m]);
        cross += r.w[m] * k * k;
    }
    const double ktt = K2(H, t, t, t);
    return 2 * beta * beta * (dbl - 2 * cross + ktt * ktt);
}

bool TraceLimitReport::monotone(const std::string& term) const {
    double prev = INFINITY;
    for (const auto& g : gaps) {
        if (g.term != term) continue;
        if (!(g.gap < prev)) return false;
        prev = g.gap;
    }
    return true;
}

double TraceLimitReport::final_gap(const std::string& term) const {
    double last = NAN;
    for (const auto& g : gaps)
        if (g.term == term) last = g.gap;
    return last;
}

bool TraceLimitReport::e_monotone() const {
    for (std::size_t k = 1; k < e_gaps.size(); ++k)
        if (!(e_gaps[k].quadrature < e_gaps[k - 1].quadrature)) return false;
    return true;
}

double TraceLimitReport::worst_e_z() const {
    double z = 0.0;
    for (const auto& e : e_gaps) z = std::max(z, std::abs(e.z));
    return z;
}

TraceLimitReport trace_limit_checks(const TraceLimitConfig& cfg) {
    HurstParam hp(cfg.H);
    const double H = cfg.H;
    if (cfg.time_points < 1 || !(cfg.a > 0.0) || !(cfg.b > cfg.a)) throw ConfigError("trace limits: need 0 < a < b");
    const ScalarFunction f = ScalarFunction::parse(cfg.integrand);
    const NoiseGrid grid = cfg.grid.build();
    const TimeMesh mesh = make_time_mesh(grid, grid.right_end());
    const TableCache cache(cfg.cache_dir);

    // Trapezoid panels on [a, b], every node a mesh point.
    std::vector<int> idx;
    std::vector<double> tw;
    for (int k = 0; k <= cfg.time_points; ++k) {
        const double t = cfg.a + (cfg.b - cfg.a) * k / cfg.time_points;
        const int j = mesh.index_of(t);
        if (j < 0) throw ConfigError("trace limits: time panels do not fall on the mesh");
        idx.push_back(j);
        tw.push_back((cfg.b - cfg.a) / cfg.time_points * ((k == 0 || k == cfg.time_points) ? 0.5 : 1.0));
    }
    const int nt = static_cast<int>(idx.size());

    // Psi samples: f'(B_t), f'(X_t), f''(X_t) at the panel nodes.
    const auto fbm = make_fbm_rep(cache.fbm(H, grid, mesh));
    const auto ros = make_rosenblatt_rep(cache.rosenblatt(H, grid, mesh, cfg.grid.nodes_per_piece));
    const int R = cfg.replicates;
    Eigen::MatrixXd psi_b(nt, R), psi_x1(nt, R), psi_x2(nt, R);
    const int bs = 256;
    for (int first = 0; first < R; first += bs) {
        const int cnt = std::min(bs, R - first);
        const Eigen::MatrixXd xi = noise_batch(grid, cfg.seed, first, cnt);
        const Eigen::MatrixXd B = fbm_paths(fbm, xi);
        const Eigen::MatrixXd X = rosenblatt_paths(ros, xi);
        for (int r = 0; r < cnt; ++r)
            for (int k = 0; k < nt; ++k) {
                psi_b(k, first + r) = f.eval(1, B(idx[k], r));
                psi_x1(k, first + r) = f.eval(1, X(idx[k], r));
                psi_x2(k, first + r) = f.eval(2, X(idx[k], r));
            }
    }

    TraceLimitReport rep;
    struct Term {
        const char* name;
        double (*averaged)(double, double, double, int);
        double (*limit)(double, double);
        const Eigen::MatrixXd* psi;
    };
    auto lim2 = [](double h, double t) { return h * std::pow(t, 2 * h - 1); };
    auto lim3 = [](double h, double t) { return 0.5 * h * kappa3(h) * std::pow(t, 3 * h - 1); };
    const Term terms[] = {{"fbm_trace", averaged_fbm_trace, lim2, &psi_b},
                          {"trace_K1", averaged_K1_trace, lim2, &psi_x1},
                          {"trace_K2", averaged_K2_trace, lim3, &psi_x2}};
    for (const Term& term : terms) {
        std::vector<double> limit(nt);
        for (int k = 0; k < nt; ++k) limit[k] = term.limit(H, mesh.t[idx[k]]);
        std::vector<double> lim_int(R, 0.0);
        for (int r = 0; r < R; ++r)
            for (int k = 0; k < nt; ++k) lim_int[r] += tw[k] * limit[k] * (*term.psi)(k, r);
        for (double eps : cfg.eps) {
            std::vector<double> avg(nt);
            for (int k = 0; k < nt; ++k) avg[k] = term.averaged(H, mesh.t[idx[k]], eps, cfg.s_nodes);
            std::vector<double> diff(R, 0.0), avg_int(R, 0.0);
            for (int r = 0; r < R; ++r)
                for (int k = 0; k < nt; ++k) {
                    diff[r] += tw[k] * (avg[k] - limit[k]) * (*term.psi)(k, r);
                    avg_int[r] += tw[k] * avg[k] * (*term.psi)(k, r);
                }
            TraceGap g;
            g.term = term.name;
            g.eps = eps;
            g.limit_rms = rms_of(lim_int);
            g.averaged_rms = rms_of(avg_int);
            g.gap = g.limit_rms > 0.0 ? rms_of(diff) / g.limit_rms : 0.0;
            g.pointwise_gap_at_b = std::abs(avg[nt - 1] / limit[nt - 1] - 1.0);
            rep.gaps.push_back(g);
        }
    }

    // I_2(e) averaged versus its limit at the probe time.
    const double t = cfg.probe_t;
    const std::vector<double> lt = l_kernel(H, t, t, grid);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(grid.widths().data(), grid.cell_count());
    for (double eps : cfg.eps) {
        const SRule sr = s_rule(t, eps, cfg.s_nodes);
        const int n = static_cast<int>(sr.s.size()) + 1;
        Eigen::MatrixXd Lm(n, grid.cell_count());
        Eigen::VectorXd alpha(n);
        for (int m = 0; m + 1 < n; ++m) {
            const auto lv = l_kernel(H, sr.s[m], t, grid);
            Lm.row(m) = Eigen::Map<const Eigen::RowVectorXd>(lv.data(), lv.size());
            alpha[m] = sr.w[m];
        }
        Lm.row(n - 1) = Eigen::Map<const Eigen::RowVectorXd>(lt.data(), lt.size());
        alpha[n - 1] = -1.0;
        const Eigen::MatrixXd gram = Lm * w.asDiagonal() * Lm.transpose();
        EkernelGap e;
        e.eps = eps;
        e.quadrature = e_gap_quadrature(H, t, eps, cfg.s_nodes);
        e.grid_exact = 2.0 * alpha.dot(gram.cwiseAbs2() * alpha);
        std::vector<double> y2(cfg.probe_replicates);
        for (int first = 0; first < cfg.probe_replicates; first += 1024) {
            const int cnt = std::min(1024, cfg.probe_replicates - first);
            const Eigen::MatrixXd xi = noise_batch(grid, cfg.seed ^ 0x5bd1e995ULL, first, cnt);
            const Eigen::MatrixXd proj = Lm * xi;
            for (int r = 0; r < cnt; ++r) {
                double y = 0.0;
                for (int m = 0; m < n; ++m) y += alpha[m] * (proj(m, r) * proj(m, r) - gram(m, m));
                y2[first + r] = y * y;
            }
        }
        const Moments m = moments(y2);
        e.monte_carlo = m.mean;
        e.mc_se = m.se;
        e.z = m.se > 0.0 ? (m.mean - e.quadrature) / m.se : 0.0;
        rep.e_gaps.push_back(e);
    }

    for (const char* name : {"fbm_trace", "trace_K1", "trace_K2"})
        if (!rep.monotone(name)) rep.failures.push_back(std::string(name) + "-not-decreasing");
    for (const char* name : {"trace_K1", "trace_K2"})
        if (!(rep.final_gap(name) < 0.05)) rep.failures.push_back(std::string(name) + "-final-gap");
    if (!rep.e_monotone()) rep.failures.push_back("e-gap-not-decreasing");
    if (!(rep.worst_e_z() <= 4.0)) rep.failures.push_back("e-gap-mc-vs-quadrature");
    return rep;
}

}  // namespace fito
