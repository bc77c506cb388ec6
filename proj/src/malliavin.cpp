#include "fito/malliavin.hpp"

#include <stdexcept>

namespace fito {

Eigen::VectorXd widths_vector(const NoiseGrid& grid) {
    return Eigen::Map<const Eigen::VectorXd>(grid.widths().data(), grid.cell_count());
}

Eigen::Map<const Eigen::VectorXd> as_vector(const WhiteNoiseSample& sample) {
    return {sample.xi.data(), static_cast<Eigen::Index>(sample.xi.size())};
}

SmoothFunctional SmoothFunctional::constant(double c, int cells) {
    SmoothFunctional f;
    f.value = c;
    f.grad = Eigen::VectorXd::Zero(cells);
    return f;
}

double SmoothFunctional::second_bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    double acc = 0.0;
    for (const auto& o : outers) acc += o.scale * x.dot(o.u) * o.v.dot(y);
    for (const auto& m : matrices) acc += m.scale * x.dot(*m.m * y);
    return acc;
}

Eigen::VectorXd SmoothFunctional::second_apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cells());
    for (const auto& o : outers) out += o.scale * o.v.dot(x) * o.u;
    for (const auto& m : matrices) out += m.scale * (*m.m * x);
    return out;
}

double SmoothFunctional::second_contract(const Eigen::MatrixXd& K, const Eigen::VectorXd& w) const {
    double acc = 0.0;
    for (const auto& o : outers) {
        const Eigen::VectorXd wu = w.cwiseProduct(o.u), wv = w.cwiseProduct(o.v);
        acc += o.scale * wu.dot(K * wv);
    }
    for (const auto& m : matrices)
        acc += m.scale * (w.asDiagonal() * K * w.asDiagonal()).cwiseProduct(*m.m).sum();
    return acc;
}

Eigen::VectorXd SmoothFunctional::diag_K_D_second(const Eigen::MatrixXd& K, const Eigen::VectorXd& w) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cells());
    // (K D u v^T)_ii = (K D u)_i v_i
    for (const auto& o : outers) out += o.scale * (K * w.cwiseProduct(o.u)).cwiseProduct(o.v);
    for (const auto& m : matrices) out += m.scale * (K * w.asDiagonal() * *m.m).diagonal();
    return out;
}

Eigen::MatrixXd SmoothFunctional::second_dense() const {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(cells(), cells());
    for (const auto& o : outers) S += o.scale * o.u * o.v.transpose();
    for (const auto& m : matrices) S += m.scale * *m.m;
    return S;
}

SmoothFunctional compose(const ScalarFunction& F, const SmoothFunctional& phi) {
    const double f1 = F.eval(1, phi.value), f2 = F.eval(2, phi.value);
    SmoothFunctional out;
    out.value = F.eval(0, phi.value);
    out.grad = f1 * phi.grad;
    if (f2 != 0.0) out.outers.push_back({f2, phi.grad, phi.grad});
    if (f1 != 0.0) {
        for (auto o : phi.outers) {
            o.scale *= f1;
            out.outers.push_back(std::move(o));
        }
        for (auto m : phi.matrices) {
            m.scale *= f1;
            out.matrices.push_back(std::move(m));
        }
    }
    return out;
}

SmoothFunctional functional_of_fbm(const ScalarFunction& F, std::span<const double> c,
                                   const WhiteNoiseSample& sample) {
    if (c.size() != sample.xi.size()) throw std::length_error("functional_of_fbm: length mismatch");
    SmoothFunctional b;
    Eigen::Map<const Eigen::VectorXd> cv(c.data(), c.size());
    b.value = cv.dot(as_vector(sample));
    b.grad = cv;
    return compose(F, b);
}

SmoothFunctional functional_of_rosenblatt(const ScalarFunction& F, std::shared_ptr<const Eigen::MatrixXd> Q,
                                          const WhiteNoiseSample& sample) {
    if (Q->rows() != static_cast<Eigen::Index>(sample.xi.size()) || Q->cols() != Q->rows())
        throw std::length_error("functional_of_rosenblatt: shape mismatch");
    const Eigen::VectorXd w = widths_vector(*sample.grid);
    const auto xi = as_vector(sample);
    const Eigen::VectorXd Qxi = *Q * xi;
    SmoothFunctional x;
    x.value = xi.dot(Qxi) - w.dot(Q->diagonal());
    x.grad = 2.0 * Qxi;
    x.matrices.push_back({2.0, Q});
    return compose(F, x);
}

double skorokhod1(const DivergenceIntegrand& u, const WhiteNoiseSample& sample) {
    const std::size_t n = sample.xi.size();
    if (u.u.size() != n) throw std::length_error("skorokhod1: integrand length mismatch");
    if (!u.deterministic && u.du_diag.size() != n)
        throw std::logic_error("skorokhod1: diagonal derivatives d_i u_i are required");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += u.u[i] * sample.xi[i];
        if (!u.deterministic) acc -= sample.grid->width(static_cast<int>(i)) * u.du_diag[i];
    }
    return acc;
}

double skorokhod2_rank1(std::span<const double> q, const SmoothFunctional& phi, const WhiteNoiseSample& sample) {
    if (q.size() != sample.xi.size() || phi.cells() != static_cast<int>(q.size()))
        throw std::length_error("skorokhod2_rank1: length mismatch");
    const Eigen::VectorXd w = widths_vector(*sample.grid);
    Eigen::Map<const Eigen::VectorXd> qv(q.data(), q.size());
    const double qxi = qv.dot(as_vector(sample));
    const Eigen::VectorXd wq = w.cwiseProduct(qv);
    return phi.value * (qxi * qxi - wq.dot(qv)) - 2.0 * qxi * wq.dot(phi.grad) + phi.second_bilinear(wq, wq);
}

double double_integral(const Eigen::MatrixXd& K, const WhiteNoiseSample& sample) {
    const auto xi = as_vector(sample);
    return xi.dot(K * xi) - widths_vector(*sample.grid).dot(K.diagonal());
}

double skorokhod2(const Eigen::MatrixXd& K, const SmoothFunctional& phi, const WhiteNoiseSample& sample) {
    const Eigen::VectorXd w = widths_vector(*sample.grid);
    const auto xi = as_vector(sample);
    const Eigen::VectorXd Kxi = K * xi;
    return phi.value * double_integral(K, sample) - 2.0 * w.cwiseProduct(Kxi).dot(phi.grad) +
           phi.second_contract(K, w);
}

}  // namespace fito
