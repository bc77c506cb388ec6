#include "fito/ito_engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "fito/frac_ops.hpp"
#include "fito/malliavin.hpp"
#include "fito/table_cache.hpp"

namespace fito {

double GridSpec::spacing() const {
    return graded() ? (right_end - core_left) / cells : (right_end - left_cut) / cells;
}

NoiseGrid GridSpec::build() const {
    try {
        if (graded()) return make_graded_grid(core_left, right_end, cells, left_cut, tail_ratio);
        return make_grid(left_cut, right_end, cells);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

std::string GridSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (graded())
        os << "graded core [" << core_left << ", " << right_end << "] x " << cells << " cells, tail ratio "
           << tail_ratio << " to " << left_cut;
    else
        os << "uniform [" << left_cut << ", " << right_end << "] x " << cells << " cells";
    os << ", " << nodes_per_piece << " nodes per piece";
    return os.str();
}

namespace {

bool is_multiple(double x, double h) {
    const double k = x / h;
    return std::abs(k - std::round(k)) < 1e-8 * std::max(1.0, std::abs(k));
}

int mesh_index(const TimeMesh& mesh, double t, const char* what) {
    const int j = mesh.index_of(t);
    if (j < 0) {
        std::ostringstream os;
        os << what << " = " << t << " is not a point of the time mesh";
        throw ConfigError(os.str());
    }
    return j;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
    if (!(cfg.H > 0.5 && cfg.H < 1.0)) throw ConfigError("H must lie in (1/2, 1)");
    if (!(cfg.a >= 0.0 && cfg.a <= cfg.b)) throw ConfigError("interval must satisfy 0 <= a <= b");
    if (cfg.replicates < 2) throw ConfigError("need at least two replicates");
    if (cfg.batch < 1) throw ConfigError("batch size must be positive");
    if (cfg.grid.cells < 2) throw ConfigError("grid needs at least two cells");
    if (cfg.grid.nodes_per_piece < 1) throw ConfigError("nodes per piece must be positive");
    const double h = cfg.grid.spacing();
    double max_eps = 0.0;
    for (std::size_t k = 0; k < cfg.eps.size(); ++k) {
        const double e = cfg.eps[k];
        if (!(e > 0.0)) throw ConfigError("eps values must be positive");
        if (!is_multiple(e, h)) {
            std::ostringstream os;
            os << "eps = " << e << " is not a multiple of the time step " << h;
            throw ConfigError(os.str());
        }
        if (k > 0 && !(e < cfg.eps[k - 1])) throw ConfigError("eps ladder must be strictly decreasing");
        max_eps = std::max(max_eps, e);
    }
    if (cfg.b + max_eps > cfg.grid.right_end * (1 + 1e-12))
        throw ConfigError("b + max eps exceeds the right end of the grid");
    if (cfg.functions.empty()) throw ConfigError("no function given");
    for (const auto& name : cfg.functions) {
        ScalarFunction F;
        try {
            F = ScalarFunction::parse(name);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        if (F.kind() == ScalarFunction::Kind::expsq) {
            if (cfg.process == ProcessKind::rosenblatt)
                throw ConfigError("the Rosenblatt formula needs F of polynomial growth");
            const double limit = 1.0 / (4.0 * std::pow(cfg.b, 2 * cfg.H));
            if (!(F.lambda() < limit)) {
                std::ostringstream os;
                os << "exp(lambda x^2) needs lambda < 1/(4 b^{2H}) = " << limit;
                throw ConfigError(os.str());
            }
        }
    }
}

double tail_bound(const ExperimentConfig& cfg) {
    if (cfg.b <= 0.0) return 0.0;
    return cfg.process == ProcessKind::fbm ? fbm_tail_bound(cfg.H, cfg.b, cfg.grid.left_cut)
                                           : rosenblatt_tail_bound(cfg.H, cfg.b, cfg.grid.left_cut);
}

double forward_sum(const ScalarFunction& F, std::span<const double> times, std::span<const double> path,
                   double eps, double a, double b) {
    if (times.size() != path.size()) throw std::length_error("forward_sum: times/path length mismatch");
    if (!(eps > 0.0)) throw ConfigError("forward_sum: eps must be positive");
    if (a == b) return 0.0;
    TimeMesh mesh{std::vector<double>(times.begin(), times.end())};
    const int ja = mesh_index(mesh, a, "a"), jb = mesh_index(mesh, b, "b");
    std::vector<double> g(jb - ja + 1);
    for (int j = ja; j <= jb; ++j) {
        const double target = std::min(times[j] + eps, b);
        const int k = mesh.index_of(target);
        if (k < 0) throw ConfigError("forward_sum: eps is not a multiple of the time step");
        g[j - ja] = F(path[j]) * (path[k] - path[j]) / eps;
    }
    double acc = 0.0;
    for (int j = ja; j < jb; ++j) acc += 0.5 * (times[j + 1] - times[j]) * (g[j - ja] + g[j + 1 - ja]);
    return acc;
}

Decomposition decomposition_check_fbm(const ScalarFunction& F, const ProcessRep& rep, double t, double eps,
                                      const WhiteNoiseSample& sample) {
    if (rep.kind != ProcessKind::fbm) throw std::invalid_argument("decomposition_check_fbm needs an fBm table");
    const auto& tab = *rep.fbm;
    const int j = mesh_index(tab.mesh, t, "t"), k = mesh_index(tab.mesh, t + eps, "t + eps");
    const int n = rep.cells();
    std::vector<double> ct(n), g(n);
    for (int i = 0; i < n; ++i) {
        ct[i] = tab.c(j, i);
        g[i] = tab.c(k, i) - tab.c(j, i);
    }
    const SmoothFunctional phi = functional_of_fbm(F, ct, sample);
    DivergenceIntegrand u;
    u.u.resize(n);
    u.du_diag.resize(n);
    double trace = 0.0;
    for (int i = 0; i < n; ++i) {
        u.u[i] = phi.value * g[i];
        u.du_diag[i] = phi.grad[i] * g[i];
        trace += sample.grid->width(i) * phi.grad[i] * g[i];
    }
    Decomposition d;
    d.product = phi.value * wiener_integral(sample, g) / eps;
    d.wick = skorokhod1(u, sample) / eps;
    d.first_trace = trace / eps;
    d.residual = std::abs(d.product - d.wick - d.first_trace);
    d.scale = 1.0 + std::abs(d.product) + std::abs(d.wick) + std::abs(d.first_trace);
    return d;
}

Decomposition decomposition_check_rosenblatt(const ScalarFunction& F, const ProcessRep& rep, double t,
                                             double eps, const WhiteNoiseSample& sample) {
    if (rep.kind != ProcessKind::rosenblatt)
        throw std::invalid_argument("decomposition_check_rosenblatt needs a Rosenblatt table");
    if (rep.cells() > 4096) throw std::length_error("decomposition_check_rosenblatt: grid too large for dense kernels");
    const auto& tab = *rep.rosenblatt;
    const int j = mesh_index(tab.mesh, t, "t"), k = mesh_index(tab.mesh, t + eps, "t + eps");
    auto Qt = std::make_shared<const Eigen::MatrixXd>(tab.dense(j));
    const Eigen::MatrixXd K = tab.dense(k) - *Qt;
    const SmoothFunctional phi = functional_of_rosenblatt(F, Qt, sample);
    const Eigen::VectorXd w = widths_vector(*sample.grid);

    const Eigen::VectorXd uv = K * w.cwiseProduct(phi.grad);
    const Eigen::VectorXd du = phi.diag_K_D_second(K, w);
    DivergenceIntegrand u;
    u.u.assign(uv.data(), uv.data() + uv.size());
    u.du_diag.assign(du.data(), du.data() + du.size());

    Decomposition d;
    d.product = phi.value * double_integral(K, sample) / eps;
    d.wick = skorokhod2(K, phi, sample) / eps;
    d.first_trace = 2.0 * skorokhod1(u, sample) / eps;
    d.second_trace = phi.second_contract(K, w) / eps;
    d.residual = std::abs(d.product - d.wick - d.first_trace - d.second_trace);
    d.scale = 1.0 + std::abs(d.product) + std::abs(d.wick) + std::abs(d.first_trace) + std::abs(d.second_trace);
    return d;
}

double TermBreakdown::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

std::vector<std::string> term_names(ProcessKind kind) {
    if (kind == ProcessKind::fbm) return {"divergence", "trace"};
    return {"double_divergence", "single_divergence", "trace_K1", "trace_kappa3", "trace_e"};
}

TermBreakdown rhs_fbm(const ScalarFunction& f, const ProcessRep& rep, const NoiseGrid& grid, double a, double b,
                           const WhiteNoiseSample& sample) {
    if (rep.kind != ProcessKind::fbm) throw std::invalid_argument("rhs_fbm needs an fBm table");
    const auto& tab = *rep.fbm;
    const double H = tab.H;
    const int n = rep.cells();
    const int ja = mesh_index(tab.mesh, a, "a"), jb = mesh_index(tab.mesh, b, "b");
    const std::vector<double> B = fbm_path(rep, sample);
    const double A = fbm_constant(H);
    DivergenceIntegrand u;
    u.u.assign(n, 0.0);
    u.du_diag.assign(n, 0.0);
    double trace = 0.0;
    std::vector<double> unit(tab.mesh.size() - 1, 0.0);
    for (int j = ja; j < jb; ++j) {
        unit[j] = 1.0;
        const FracIntResult piece = frac_int_minus(H - 0.5, tab.mesh.t, unit, a, b, grid);
        unit[j] = 0.0;
        const double f0 = f.eval(0, B[j]), f1 = f.eval(1, B[j]);
        for (int i = 0; i < n; ++i) {
            u.u[i] += A * f0 * piece.values[i];
            u.du_diag[i] += A * f1 * tab.c(j, i) * piece.values[i];
        }
        const double t0 = tab.mesh.t[j], t1 = tab.mesh.t[j + 1];
        trace += f1 * 0.5 * (std::pow(t1, 2 * H) - std::pow(t0, 2 * H));
    }
    return {term_names(ProcessKind::fbm), {skorokhod1(u, sample), trace}};
}

TermBreakdown rhs_rosenblatt(const ScalarFunction& f, const ProcessRep& rep, const NoiseGrid& grid, double a, double b,
                           const WhiteNoiseSample& sample) {
    if (rep.kind != ProcessKind::rosenblatt) throw std::invalid_argument("rhs_rosenblatt needs a Rosenblatt table");
    const auto& tab = *rep.rosenblatt;
    const double H = tab.H;
    const ConstantSet k = constants(HurstParam(H));
    const double gam = gamma_fn(H / 2);
    const int n = rep.cells();
    const int ja = mesh_index(tab.mesh, a, "a"), jb = mesh_index(tab.mesh, b, "b");
    const Eigen::VectorXd w = widths_vector(grid);
    const auto xi = as_vector(sample);

    double t1 = 0.0, t3 = 0.0, t4 = 0.0, t5 = 0.0;
    DivergenceIntegrand u;
    u.u.assign(n, 0.0);
    u.du_diag.assign(n, 0.0);
    for (int j = ja; j < jb; ++j) {
        auto Q = std::make_shared<const Eigen::MatrixXd>(tab.dense(j));
        const Eigen::MatrixXd dQ = tab.dense(j + 1) - *Q;
        const SmoothFunctional phi = functional_of_rosenblatt(f, Q, sample);
        t1 += skorokhod2(dQ, phi, sample);

        const double X = double_integral(*Q, sample);
        const std::vector<double> lv = l_kernel(H, tab.mesh.t[j], tab.mesh.t[j], grid);
        Eigen::Map<const Eigen::VectorXd> l(lv.data(), n);
        const double L = l.dot(xi);
        Eigen::VectorXd kj = Eigen::VectorXd::Zero(n);
        for (int s = tab.piece_begin[j]; s < tab.piece_begin[j + 1]; ++s) kj += tab.node_w[s] * tab.v.row(s).transpose();
        const Eigen::VectorXd dX = 2.0 * (*Q * xi);
        const double fp = f.eval(1, X), fpp = f.eval(2, X);
        for (int i = 0; i < n; ++i) {
            u.u[i] += k.B * gam * fp * L * kj[i];
            u.du_diag[i] += k.B * gam * kj[i] * (fpp * dX[i] * L + fp * l[i]);
        }

        const double ta = tab.mesh.t[j], tb = tab.mesh.t[j + 1];
        t3 += fp * 0.5 * (std::pow(tb, 2 * H) - std::pow(ta, 2 * H));
        t4 += 0.5 * H * k.kappa3 * fpp * (std::pow(tb, 3 * H) - std::pow(ta, 3 * H)) / (3 * H);
        const Eigen::MatrixXd e = l * l.transpose();
        t5 += k.C * (tb - ta) * fpp * double_integral(e, sample);
    }
    const double t2 = skorokhod1(u, sample);
    return {term_names(ProcessKind::rosenblatt), {t1, t2, t3, t4, t5}};
}

// ---------------------------------------------------------------------------
// Batched engine

struct ItoEngine::Prepared {
    int ja = 0, jb = 0;
    std::vector<double> times;               // mesh points ja..jb
    std::vector<double> half_dt2H;           // (t_{j+1}^{2H} - t_j^{2H}) / 2 per piece
    std::vector<std::vector<int>> fwd_target;  // [rung][j - ja] index of (t_j + eps) ^ b, relative to ja

    // fBm
    RowMatrix c;                // rows ja..jb
    std::vector<double> gamma;  // <c_j, c_{j+1} - c_j>_w

    // Rosenblatt
    int nb = 0, sb = 0, ns = 0;         // nodes before b, first node at a, nodes in [a, b)
    Eigen::MatrixXd gm;                 // masked Gram V_S D V_0^T, ns x nb
    RowMatrix l;                        // l_{t_j,t_j} per piece
    std::vector<double> l_norm2, lambda, tau, kappa_term, e_weight;
    double d = 0.0, B = 0.0, gam = 0.0;
};

ItoEngine::~ItoEngine() = default;

ItoEngine::ItoEngine(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    grid_ = cfg_.grid.build();
    const TimeMesh mesh = make_time_mesh(grid_, grid_.right_end());
    const TableCache cache(cfg_.cache_dir);
    if (cfg_.process == ProcessKind::fbm)
        rep_ = make_fbm_rep(cache.fbm(cfg_.H, grid_, mesh));
    else
        rep_ = make_rosenblatt_rep(cache.rosenblatt(cfg_.H, grid_, mesh, cfg_.grid.nodes_per_piece));

    prep_ = std::make_unique<Prepared>();
    Prepared& p = *prep_;
    const double H = cfg_.H;
    p.ja = mesh_index(mesh, cfg_.a, "a");
    p.jb = mesh_index(mesh, cfg_.b, "b");
    p.times.assign(mesh.t.begin() + p.ja, mesh.t.begin() + p.jb + 1);
    TimeMesh sub{p.times};
    for (double e : cfg_.eps) {
        std::vector<int> tgt(p.times.size());
        for (std::size_t j = 0; j < p.times.size(); ++j) {
            const int k = sub.index_of(std::min(p.times[j] + e, cfg_.b));
            if (k < 0) throw ConfigError("eps is not a multiple of the time step inside (a, b)");
            tgt[j] = k;
        }
        p.fwd_target.push_back(std::move(tgt));
    }
    for (int j = p.ja; j < p.jb; ++j)
        p.half_dt2H.push_back(0.5 * (std::pow(mesh.t[j + 1], 2 * H) - std::pow(mesh.t[j], 2 * H)));

    const Eigen::VectorXd w = widths_vector(grid_);
    if (cfg_.process == ProcessKind::fbm) {
        p.c = rep_.fbm->c.middleRows(p.ja, p.jb - p.ja + 1);
        for (int j = 0; j + 1 < p.c.rows(); ++j)
            p.gamma.push_back((p.c.row(j).transpose().cwiseProduct(w)).dot((p.c.row(j + 1) - p.c.row(j)).transpose()));
        return;
    }

    const auto& tab = *rep_.rosenblatt;
    const ConstantSet k = constants(HurstParam(H));
    p.d = tab.d;
    p.B = k.B;
    p.gam = gamma_fn(H / 2);
    p.nb = tab.piece_begin[p.jb];
    p.sb = tab.piece_begin[p.ja];
    p.ns = p.nb - p.sb;
    const int pieces = p.jb - p.ja;
    if (p.ns > 0) {
        // Gram of node factors: rows are nodes in [a, b), columns every node before b.
        const RowMatrix vs_w = tab.v.middleRows(p.sb, p.ns) * w.asDiagonal();
        p.gm = vs_w * tab.v.topRows(p.nb).transpose();
        for (int j = p.ja; j < p.jb; ++j)
            for (int s = tab.piece_begin[j]; s < tab.piece_begin[j + 1]; ++s)
                p.gm.row(s - p.sb).tail(p.nb - tab.piece_begin[j]).setZero();
    }
    p.l.resize(pieces, grid_.cell_count());
    for (int j = p.ja; j < p.jb; ++j) {
        const std::vector<double> lv = l_kernel(H, mesh.t[j], mesh.t[j], grid_);
        p.l.row(j - p.ja) = Eigen::Map<const Eigen::RowVectorXd>(lv.data(), lv.size());
    }
    for (int j = p.ja; j < p.jb; ++j) {
        const int r = j - p.ja;
        const Eigen::VectorXd lj = p.l.row(r).transpose();
        p.l_norm2.push_back(lj.cwiseProduct(w).dot(lj));
        double lam = 0.0, tau = 0.0;
        for (int s = tab.piece_begin[j]; s < tab.piece_begin[j + 1]; ++s) {
            lam += tab.node_w[s] * tab.v.row(s).dot(w.cwiseProduct(lj));
            double acc = 0.0;
            for (int kk = 0; kk < tab.piece_begin[j]; ++kk) {
                const double g = p.gm(s - p.sb, kk);
                acc += tab.node_w[kk] * g * g;
            }
            tau += tab.node_w[s] * acc;
        }
        p.lambda.push_back(p.gam * lam);
        p.tau.push_back(p.d * p.d * tau);
        const double t0 = mesh.t[j], t1 = mesh.t[j + 1];
        p.kappa_term.push_back(0.5 * H * k.kappa3 * (std::pow(t1, 3 * H) - std::pow(t0, 3 * H)) / (3 * H));
        p.e_weight.push_back(k.C * (t1 - t0));
    }
}

std::vector<ReplicateBatch> ItoEngine::run(std::uint64_t first, int count,
                                           std::span<const ScalarFunction> functions) const {
    const Prepared& p = *prep_;
    const int R = count;
    const int pieces = p.jb - p.ja;
    const int npts = pieces + 1;
    const Eigen::MatrixXd xi = noise_batch(grid_, cfg_.seed, first, R);

    Eigen::MatrixXd X(npts, R);
    Eigen::MatrixXd W, A, L;
    if (cfg_.process == ProcessKind::fbm) {
        X.noalias() = p.c * xi;
    } else {
        const auto& tab = *rep_.rosenblatt;
        W.noalias() = tab.v.topRows(p.nb) * xi;
        for (int r = 0; r < R; ++r) {
            double acc = 0.0;
            int kk = 0;
            for (int j = 0; j <= p.jb; ++j) {
                for (; kk < tab.piece_begin[j]; ++kk) acc += tab.node_w[kk] * (W(kk, r) * W(kk, r) - rep_.node_var[kk]);
                if (j >= p.ja) X(j - p.ja, r) = tab.d * acc;
            }
        }
        if (p.ns > 0) {
            const Eigen::Map<const Eigen::VectorXd> nw(tab.node_w.data(), p.nb);
            A.noalias() = p.gm * (nw.asDiagonal() * W);
            A *= p.d;
        }
        L.noalias() = p.l * xi;
    }

    std::vector<ReplicateBatch> out(functions.size());
    for (std::size_t fi = 0; fi < functions.size(); ++fi) {
        const ScalarFunction& F = functions[fi];
        ReplicateBatch& rb = out[fi];
        rb.lhs.resize(R);
        rb.x_b.resize(R);
        rb.forward.assign(cfg_.eps.size(), std::vector<double>(R));
        const std::size_t nterms = term_names(cfg_.process).size();
        rb.terms.assign(nterms, std::vector<double>(R, 0.0));
        std::vector<double> g(npts);
        for (int r = 0; r < R; ++r) {
            rb.lhs[r] = F(X(pieces, r)) - F(X(0, r));
            rb.x_b[r] = X(pieces, r);
            for (std::size_t e = 0; e < cfg_.eps.size(); ++e) {
                const double eps = cfg_.eps[e];
                for (int j = 0; j < npts; ++j)
                    g[j] = F.eval(1, X(j, r)) * (X(p.fwd_target[e][j], r) - X(j, r)) / eps;
                double acc = 0.0;
                for (int j = 0; j < pieces; ++j) acc += 0.5 * (p.times[j + 1] - p.times[j]) * (g[j] + g[j + 1]);
                rb.forward[e][r] = acc;
            }
            if (cfg_.process == ProcessKind::fbm) {
                double div = 0.0, tr = 0.0;
                for (int j = 0; j < pieces; ++j) {
                    const double x = X(j, r);
                    const double f0 = F.eval(1, x), f1 = F.eval(2, x);
                    div += f0 * (X(j + 1, r) - x) - f1 * p.gamma[j];
                    tr += f1 * p.half_dt2H[j];
                }
                rb.terms[0][r] = div;
                rb.terms[1][r] = tr;
                continue;
            }
            const auto& tab = *rep_.rosenblatt;
            double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0, t5 = 0.0;
            for (int j = 0; j < pieces; ++j) {
                const double x = X(j, r);
                const double f0 = F.eval(1, x), f1 = F.eval(2, x), f2 = F.eval(3, x);
                double P = 0.0, Rq = 0.0, K = 0.0, mu = 0.0;
                for (int s = tab.piece_begin[p.ja + j]; s < tab.piece_begin[p.ja + j + 1]; ++s) {
                    const double ws = tab.node_w[s], Ws = W(s, r), as = A(s - p.sb, r);
                    P += ws * Ws * as;
                    Rq += ws * as * as;
                    K += ws * Ws;
                    mu += ws * as;
                }
                P *= p.d;
                Rq *= p.d;
                K *= p.gam;
                mu *= p.gam;
                const double Lj = L(j, r);
                t1 += f0 * (X(j + 1, r) - x) - 4.0 * f1 * P + 4.0 * f2 * Rq + 2.0 * f1 * p.tau[j];
                t2 += p.B * (f1 * (Lj * K - p.lambda[j]) - 2.0 * f2 * Lj * mu);
                t3 += f1 * p.half_dt2H[j];
                t4 += f2 * p.kappa_term[j];
                t5 += p.e_weight[j] * f2 * (Lj * Lj - p.l_norm2[j]);
            }
            rb.terms[0][r] = t1;
            rb.terms[1][r] = t2;
            rb.terms[2][r] = t3;
            rb.terms[3][r] = t4;
            rb.terms[4][r] = t5;
        }
    }
    return out;
}

namespace {

void append(ReplicateBatch& dst, const ReplicateBatch& src) {
    dst.lhs.insert(dst.lhs.end(), src.lhs.begin(), src.lhs.end());
    dst.x_b.insert(dst.x_b.end(), src.x_b.begin(), src.x_b.end());
    if (dst.forward.empty()) dst.forward.resize(src.forward.size());
    if (dst.terms.empty()) dst.terms.resize(src.terms.size());
    for (std::size_t k = 0; k < src.forward.size(); ++k)
        dst.forward[k].insert(dst.forward[k].end(), src.forward[k].begin(), src.forward[k].end());
    for (std::size_t k = 0; k < src.terms.size(); ++k)
        dst.terms[k].insert(dst.terms[k].end(), src.terms[k].begin(), src.terms[k].end());
}

}  // namespace

std::vector<ReplicateBatch> ItoEngine::run_all(std::span<const ScalarFunction> functions) const {
    const int R = cfg_.replicates, bs = cfg_.batch;
    const int nbatches = (R + bs - 1) / bs;
    std::vector<std::vector<ReplicateBatch>> parts(nbatches);
    int threads = cfg_.threads > 0 ? cfg_.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, std::max(1, nbatches));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int b = next++; b < nbatches; b = next++) {
            try {
                const int first = b * bs;
                parts[b] = run(static_cast<std::uint64_t>(first), std::min(bs, R - first), functions);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<ReplicateBatch> out(functions.size());
    for (int b = 0; b < nbatches; ++b)
        for (std::size_t f = 0; f < functions.size(); ++f) append(out[f], parts[b][f]);
    return out;
}

std::vector<ExperimentReport> summarize(const ItoEngine& engine, std::span<const ScalarFunction> functions,
                                        const std::vector<ReplicateBatch>& batches, double seconds) {
    const ExperimentConfig& cfg = engine.config();
    const auto names = term_names(cfg.process);
    std::vector<ExperimentReport> reports;
    for (std::size_t fi = 0; fi < functions.size(); ++fi) {
        const ReplicateBatch& rb = batches[fi];
        const std::size_t R = rb.lhs.size();
        ExperimentReport rep;
        rep.process = cfg.process == ProcessKind::fbm ? "fbm" : "rosenblatt";
        rep.function = functions[fi].name();
        rep.H = cfg.H;
        rep.a = cfg.a;
        rep.b = cfg.b;
        rep.replicates = static_cast<int>(R);
        rep.grid = cfg.grid.describe();
        rep.tail_bound = tail_bound(cfg);
        rep.seconds = seconds;
        std::vector<double> rhs(R, 0.0), resid(R);
        for (std::size_t k = 0; k < names.size(); ++k) {
            rep.terms.push_back({names[k], moments(rb.terms[k])});
            for (std::size_t r = 0; r < R; ++r) rhs[r] += rb.terms[k][r];
        }
        for (std::size_t r = 0; r < R; ++r) resid[r] = rb.lhs[r] - rhs[r];
        rep.lhs = moments(rb.lhs);
        rep.rhs = moments(rhs);
        rep.ito_residual = moments(resid);
        rep.third_cumulant_b = sample_third_cumulant(rb.x_b);
        std::vector<double> diff(R);
        for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
            for (std::size_t r = 0; r < R; ++r) diff[r] = rb.forward[e][r] - rhs[r];
            RungReport rung;
            rung.eps = cfg.eps[e];
            rung.forward = moments(rb.forward[e]);
            rung.difference = moments(diff);
            rung.relative_rms = rep.lhs.rms > 0.0 ? rung.difference.rms / rep.lhs.rms : 0.0;
            rep.rungs.push_back(rung);
        }
        rep.monotone = true;
        for (std::size_t e = 1; e < rep.rungs.size(); ++e) {
            const double prev = rep.rungs[e - 1].difference.rms, cur = rep.rungs[e].difference.rms;
            if (!(cur < prev || (cur == 0.0 && prev == 0.0))) rep.monotone = false;
        }
        rep.final_within_budget = rep.rungs.empty() || rep.rungs.back().relative_rms < cfg.rms_budget;
        if (!rep.monotone) rep.failures.push_back("rms-not-decreasing");
        if (!rep.final_within_budget) rep.failures.push_back("final-relative-rms");
        rep.passed = rep.failures.empty();
        reports.push_back(std::move(rep));
    }
    return reports;
}

std::vector<ExperimentReport> ito_formula_check(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ItoEngine engine(cfg);
    std::vector<ScalarFunction> fs;
    for (const auto& name : cfg.functions) fs.push_back(ScalarFunction::parse(name));
    const auto batches = engine.run_all(fs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summarize(engine, fs, batches, secs);
}

}  // namespace fito
