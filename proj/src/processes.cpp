#include "fito/processes.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fito {

ProcessRep make_fbm_rep(std::shared_ptr<const FbmKernelTable> table) {
    ProcessRep r;
    r.kind = ProcessKind::fbm;
    r.fbm = std::move(table);
    return r;
}

ProcessRep make_rosenblatt_rep(std::shared_ptr<const RosenblattKernelTable> table) {
    ProcessRep r;
    r.kind = ProcessKind::rosenblatt;
    r.rosenblatt = std::move(table);
    const auto& t = *r.rosenblatt;
    Eigen::Map<const Eigen::VectorXd> cw(t.cell_w.data(), t.cells());
    r.node_var.resize(t.nodes());
    for (int k = 0; k < t.nodes(); ++k) r.node_var[k] = t.v.row(k).cwiseAbs2().dot(cw.transpose());
    return r;
}

namespace {

void check_sample(const ProcessRep& rep, const WhiteNoiseSample& s) {
    if (static_cast<int>(s.xi.size()) != rep.cells())
        throw std::length_error("noise sample does not match the kernel table grid");
}

}  // namespace

std::vector<double> fbm_path(const ProcessRep& rep, const WhiteNoiseSample& sample) {
    if (rep.kind != ProcessKind::fbm) throw std::invalid_argument("fbm_path needs an fBm representation");
    check_sample(rep, sample);
    Eigen::Map<const Eigen::VectorXd> xi(sample.xi.data(), sample.xi.size());
    Eigen::VectorXd b = rep.fbm->c * xi;
    return {b.data(), b.data() + b.size()};
}

std::vector<double> rosenblatt_path(const ProcessRep& rep, const WhiteNoiseSample& sample) {
    if (rep.kind != ProcessKind::rosenblatt)
        throw std::invalid_argument("rosenblatt_path needs a Rosenblatt representation");
    check_sample(rep, sample);
    Eigen::Map<const Eigen::MatrixXd> xi(sample.xi.data(), sample.xi.size(), 1);
    Eigen::MatrixXd x = rosenblatt_paths(rep, xi);
    return {x.data(), x.data() + x.size()};
}

std::vector<double> process_path(const ProcessRep& rep, const WhiteNoiseSample& sample) {
    return rep.kind == ProcessKind::fbm ? fbm_path(rep, sample) : rosenblatt_path(rep, sample);
}

Eigen::MatrixXd fbm_paths(const ProcessRep& rep, const Eigen::MatrixXd& xi) {
    if (xi.rows() != rep.cells()) throw std::length_error("noise batch does not match the grid");
    return rep.fbm->c * xi;
}

Eigen::MatrixXd rosenblatt_paths(const ProcessRep& rep, const Eigen::MatrixXd& xi,
                                 Eigen::MatrixXd* node_noise) {
    if (xi.rows() != rep.cells()) throw std::length_error("noise batch does not match the grid");
    const auto& tab = *rep.rosenblatt;
    Eigen::MatrixXd W = tab.v * xi;
    const int M = tab.mesh.size();
    Eigen::MatrixXd X(M, xi.cols());
    for (int r = 0; r < xi.cols(); ++r) {
        double acc = 0.0;
        int k = 0;
        X(0, r) = 0.0;
        for (int j = 1; j < M; ++j) {
            for (; k < tab.nodes_before(j); ++k) acc += tab.node_w[k] * (W(k, r) * W(k, r) - rep.node_var[k]);
            X(j, r) = tab.d * acc;
        }
    }
    if (node_noise) *node_noise = std::move(W);
    return X;
}

Eigen::MatrixXd noise_batch(const NoiseGrid& grid, std::uint64_t master_seed, std::uint64_t first,
                            int count) {
    Eigen::MatrixXd xi(grid.cell_count(), count);
    for (int r = 0; r < count; ++r) {
        std::span<double> col(xi.col(r).data(), grid.cell_count());
        standard_normals(master_seed, first + r, col);
        for (int i = 0; i < grid.cell_count(); ++i) col[i] *= std::sqrt(grid.width(i));
    }
    return xi;
}

FbmExactOracle::FbmExactOracle(double H, std::vector<double> times) : H_(H), times_(std::move(times)) {
    if (!(H > 0.0 && H < 1.0)) throw std::domain_error("exact oracle: H must lie in (0, 1)");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (times_[i] < 0.0) throw std::invalid_argument("exact oracle: times must be non-negative");
        if (times_[i] > 0.0) active_.push_back(static_cast<int>(i));
    }
    const int n = static_cast<int>(active_.size());
    Eigen::MatrixXd cov(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double s = times_[active_[a]], t = times_[active_[b]];
            cov(a, b) = 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(std::abs(t - s), 2 * H));
        }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
        std::ostringstream os;
        os << "exact oracle: covariance not positive definite (n=" << n
           << ", min eigenvalue=" << es.eigenvalues().minCoeff() << ")";
        throw std::runtime_error(os.str());
    }
    L_ = llt.matrixL();
}

std::vector<double> FbmExactOracle::sample(std::uint64_t master_seed, std::uint64_t replicate) const {
    const int n = static_cast<int>(active_.size());
    Eigen::VectorXd z(n);
    standard_normals(master_seed, replicate, std::span<double>(z.data(), n));
    Eigen::VectorXd x = L_ * z;
    std::vector<double> out(times_.size(), 0.0);
    for (int a = 0; a < n; ++a) out[active_[a]] = x[a];
    return out;
}

std::vector<double> fbm_exact_oracle(double H, const std::vector<double>& times, std::uint64_t master_seed,
                                     std::uint64_t replicate) {
    return FbmExactOracle(H, times).sample(master_seed, replicate);
}

std::vector<HolderStats> holder_probe(std::span<const double> times, std::span<const double> path,
                                      std::span<const double> exponents) {
    if (times.size() != path.size()) throw std::length_error("holder_probe: times/path length mismatch");
    std::vector<HolderStats> out;
    for (double eta : exponents) {
        HolderStats h{eta, 0.0};
        for (std::size_t i = 0; i < times.size(); ++i)
            for (std::size_t j = i + 1; j < times.size(); ++j) {
                const double dt = std::abs(times[j] - times[i]);
                if (dt == 0.0) continue;
                h.max_ratio = std::max(h.max_ratio, std::abs(path[j] - path[i]) / std::pow(dt, eta));
            }
        out.push_back(h);
    }
    return out;
}

}  // namespace fito
