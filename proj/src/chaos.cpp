#include "fito/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fito/hermite.hpp"

namespace fito {

namespace {

std::size_t ipow(int G, int n) {
    std::size_t p = 1;
    for (int k = 0; k < n; ++k) p *= static_cast<std::size_t>(G);
    return p;
}

void decode(std::size_t flat, int G, int n, int* idx) {
    for (int k = n - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(flat % G);
        flat /= G;
    }
}

std::size_t encode(const int* idx, int G, int n) {
    std::size_t flat = 0;
    for (int k = 0; k < n; ++k) flat = flat * G + idx[k];
    return flat;
}

void check_size(int G, int n) {
    if (G < 1 || G > kOracleMaxCells) throw std::length_error("chaos oracle: grid too large");
    if (n < 0 || n > 8) throw std::length_error("chaos oracle: order too large");
}

}  // namespace

Tensor Tensor::zeros(int order, int G) {
    check_size(G, order);
    return {order, G, std::vector<double>(ipow(G, order), 0.0)};
}

Tensor Tensor::vector(std::span<const double> v) {
    Tensor t = zeros(1, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), t.data.begin());
    return t;
}

Tensor Tensor::matrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("Tensor::matrix: not square");
    Tensor t = zeros(2, static_cast<int>(m.rows()));
    for (int i = 0; i < t.G; ++i)
        for (int k = 0; k < t.G; ++k) t.data[i * t.G + k] = m(i, k);
    return t;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double x : data) m = std::max(m, std::abs(x));
    return m;
}

Tensor symmetrize(const Tensor& t) {
    if (t.order <= 1) return t;
    // The orbit average equals the mean over the distinct rearrangements of
    // each index tuple, keyed by its sorted form.
    std::map<std::size_t, std::pair<double, int>> orbit;
    std::vector<std::size_t> key(t.size());
    int idx[8];
    for (std::size_t f = 0; f < t.size(); ++f) {
        decode(f, t.G, t.order, idx);
        std::sort(idx, idx + t.order);
        key[f] = encode(idx, t.G, t.order);
        auto& slot = orbit[key[f]];
        slot.first += t.data[f];
        slot.second += 1;
    }
    Tensor out = t;
    for (std::size_t f = 0; f < t.size(); ++f) {
        const auto& slot = orbit[key[f]];
        out.data[f] = slot.first / slot.second;
    }
    return out;
}

Tensor outer(const Tensor& a, const Tensor& b) {
    if (a.G != b.G && a.order > 0 && b.order > 0) throw std::invalid_argument("outer: grid mismatch");
    const int G = a.order > 0 ? a.G : b.G;
    Tensor out = Tensor::zeros(a.order + b.order, G);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k) out.data[i * b.size() + k] = a.data[i] * b.data[k];
    return out;
}

Tensor contract1(const Tensor& t, std::span<const double> g, std::span<const double> w) {
    if (t.order < 1) throw std::invalid_argument("contract1: order-0 tensor");
    if (g.size() != static_cast<std::size_t>(t.G) || w.size() != g.size())
        throw std::length_error("contract1: length mismatch");
    Tensor out = Tensor::zeros(t.order - 1, t.G);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (int k = 0; k < t.G; ++k) acc += w[k] * t.data[i * t.G + k] * g[k];
        out.data[i] = acc;
    }
    return out;
}

Tensor slice(const Tensor& t, std::span<const int> trailing) {
    const int m = static_cast<int>(trailing.size());
    if (m > t.order) throw std::invalid_argument("slice: too many indices");
    Tensor out = Tensor::zeros(t.order - m, t.G);
    const std::size_t stride = ipow(t.G, m);
    const std::size_t offset = encode(trailing.data(), t.G, m);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = t.data[i * stride + offset];
    return out;
}

double weighted_inner(const Tensor& a, const Tensor& b, std::span<const double> w) {
    if (a.order != b.order || a.G != b.G) throw std::invalid_argument("weighted_inner: shape mismatch");
    int idx[8];
    double acc = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        decode(f, a.G, a.order, idx);
        double wt = 1.0;
        for (int k = 0; k < a.order; ++k) wt *= w[idx[k]];
        acc += wt * a.data[f] * b.data[f];
    }
    return acc;
}

double multi_integral(const Tensor& t, const WhiteNoiseSample& sample) {
    if (sample.xi.size() != static_cast<std::size_t>(t.G) && t.order > 0)
        throw std::length_error("multi_integral: grid mismatch");
    if (t.order == 0) return t.data[0];
    const int G = t.G, n = t.order;
    // table[k][m] = H_{m, w_k}(xi_k)
    std::vector<std::vector<double>> table(G);
    for (int k = 0; k < G; ++k) {
        HermiteBasis basis(sample.grid->width(k), n);
        table[k] = basis.eval_all(sample.xi[k]);
    }
    int idx[8];
    int mult[kOracleMaxCells];
    double acc = 0.0;
    for (std::size_t f = 0; f < t.size(); ++f) {
        if (t.data[f] == 0.0) continue;
        decode(f, G, n, idx);
        std::fill(mult, mult + G, 0);
        for (int k = 0; k < n; ++k) ++mult[idx[k]];
        double prod = 1.0;
        for (int k = 0; k < G; ++k) prod *= table[k][mult[k]];
        acc += t.data[f] * prod;
    }
    return acc;
}

double multiply_formula_check(const Tensor& t, std::span<const double> g, const WhiteNoiseSample& sample) {
    const auto w = sample.grid->widths();
    const double lhs = multi_integral(t, sample) * wiener_integral(sample, g);
    double rhs = multi_integral(symmetrize(outer(t, Tensor::vector(g))), sample);
    if (t.order > 0) rhs += t.order * multi_integral(contract1(t, g, w), sample);
    return std::abs(lhs - rhs);
}

ChaosElement::ChaosElement(std::vector<double> weights, int max_order)
    : w_(std::move(weights)), max_order_(max_order) {
    check_size(static_cast<int>(w_.size()), max_order);
    for (int n = 0; n <= max_order_; ++n) phi_.push_back(Tensor::zeros(n, cells()));
}

ChaosElement ChaosElement::constant(double c, std::vector<double> weights, int max_order) {
    ChaosElement e(std::move(weights), max_order);
    e.phi_[0].data[0] = c;
    return e;
}

void ChaosElement::add(const Tensor& t, double scale) {
    if (t.order > max_order_) throw std::length_error("ChaosElement: order exceeds configured maximum");
    if (t.order > 0 && t.G != cells()) throw std::invalid_argument("ChaosElement: grid mismatch");
    const Tensor s = symmetrize(t);
    for (std::size_t i = 0; i < s.size(); ++i) phi_[t.order].data[i] += scale * s.data[i];
}

int ChaosElement::top_order() const {
    for (int n = max_order_; n > 0; --n)
        if (phi_[n].max_abs() > 0.0) return n;
    return 0;
}

double ChaosElement::evaluate(const WhiteNoiseSample& sample) const {
    double acc = 0.0;
    for (int n = 0; n <= top_order(); ++n) acc += multi_integral(phi_[n], sample);
    return acc;
}

double ChaosElement::inner(const ChaosElement& other) const {
    double acc = 0.0, fact = 1.0;
    const int top = std::min(max_order_, other.max_order_);
    for (int n = 0; n <= top; ++n) {
        if (n > 0) fact *= n;
        acc += fact * weighted_inner(phi_[n], other.phi_[n], w_);
    }
    return acc;
}

double ChaosElement::s_transform(std::span<const double> eta) const {
    if (eta.size() != w_.size()) throw std::length_error("s_transform: length mismatch");
    std::vector<double> weta(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) weta[i] = w_[i] * eta[i];
    double acc = phi_[0].data[0];
    Tensor power = Tensor::zeros(0, cells());
    power.data[0] = 1.0;
    const Tensor step = Tensor::vector(weta);
    for (int n = 1; n <= top_order(); ++n) {
        power = outer(power, step);
        double s = 0.0;
        for (std::size_t i = 0; i < power.size(); ++i) s += phi_[n].data[i] * power.data[i];
        acc += s;
    }
    return acc;
}

SmoothFunctional ChaosElement::to_smooth_functional(const WhiteNoiseSample& sample) const {
    const int G = cells();
    SmoothFunctional f;
    f.value = evaluate(sample);
    f.grad = Eigen::VectorXd::Zero(G);
    auto second = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(G, G));
    for (int n = 1; n <= top_order(); ++n) {
        for (int i = 0; i < G; ++i) {
            const int tr[1] = {i};
            f.grad(i) += n * multi_integral(slice(phi_[n], tr), sample);
            if (n < 2) continue;
            for (int k = 0; k < G; ++k) {
                const int tr2[2] = {i, k};
                (*second)(i, k) += n * (n - 1) * multi_integral(slice(phi_[n], tr2), sample);
            }
        }
    }
    f.matrices.push_back({1.0, second});
    return f;
}

ChaosElement wick_product(const ChaosElement& a, const ChaosElement& b) {
    if (a.cells() != b.cells()) throw std::invalid_argument("wick_product: grid mismatch");
    ChaosElement out(a.weights(), std::max(a.max_order(), b.max_order()));
    for (int p = 0; p <= a.top_order(); ++p)
        for (int q = 0; q <= b.top_order(); ++q) {
            if (a.component(p).max_abs() == 0.0 || b.component(q).max_abs() == 0.0) continue;
            if (p + q > out.max_order()) throw std::length_error("wick_product: order exceeds configured maximum");
            out.add(outer(a.component(p), b.component(q)));
        }
    return out;
}

ChaosElement chaos_divergence1(const ChaosElement& a, std::span<const double> q) {
    ChaosElement out(a.weights(), a.max_order());
    const Tensor qt = Tensor::vector(q);
    for (int n = 0; n <= a.top_order(); ++n) {
        if (a.component(n).max_abs() == 0.0) continue;
        out.add(outer(a.component(n), qt));
    }
    return out;
}

ChaosElement chaos_divergence2(const ChaosElement& a, const Eigen::MatrixXd& K) {
    ChaosElement out(a.weights(), a.max_order());
    const Tensor kt = Tensor::matrix(K);
    for (int n = 0; n <= a.top_order(); ++n) {
        if (a.component(n).max_abs() == 0.0) continue;
        out.add(outer(a.component(n), kt));
    }
    return out;
}

Estimate s_transform_mc(const std::function<double(const WhiteNoiseSample&)>& phi, const NoiseGrid& grid,
                        std::span<const double> eta, std::uint64_t seed, int replicates) {
    if (eta.size() != static_cast<std::size_t>(grid.cell_count())) throw std::length_error("s_transform_mc: length mismatch");
    std::vector<double> values(replicates);
    for (int r = 0; r < replicates; ++r) {
        WhiteNoiseSample s = sample_noise(grid, seed, r);
        for (std::size_t i = 0; i < s.xi.size(); ++i) s.xi[i] += grid.width(int(i)) * eta[i];
        values[r] = phi(s);
    }
    const Moments m = moments(values);
    return {m.mean, m.se};
}

}  // namespace fito
