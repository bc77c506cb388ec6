#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fito/malliavin.hpp"
#include "fito/noise_grid.hpp"
#include "fito/stats.hpp"

namespace fito {

// Dense n-fold tensor over a tiny grid, index (i_1, ..., i_n) stored at
// i_1 G^{n-1} + ... + i_n. Order 0 holds one scalar.
struct Tensor {
    int order = 0;
    int G = 0;
    std::vector<double> data;

    static Tensor zeros(int order, int G);
    static Tensor vector(std::span<const double> v);
    static Tensor matrix(const Eigen::MatrixXd& m);
    std::size_t size() const { return data.size(); }
    double max_abs() const;
};

constexpr int kOracleMaxCells = 8;

Tensor symmetrize(const Tensor& t);
Tensor outer(const Tensor& a, const Tensor& b);
// (t (x)_1 g)(i_1..i_{n-1}) = sum_k w_k t(i_1..i_{n-1}, k) g_k
Tensor contract1(const Tensor& t, std::span<const double> g, std::span<const double> w);
// t(., i) or t(., i, k): fix the trailing indices
Tensor slice(const Tensor& t, std::span<const int> trailing);
// sum_i a(i) b(i) prod_j w_{i_j}
double weighted_inner(const Tensor& a, const Tensor& b, std::span<const double> w);

// I_n(t) as the compensated polynomial sum_{i} t(i) prod_k H_{m_k, w_k}(xi_k),
// m_k the multiplicity of cell k in the index tuple i.
double multi_integral(const Tensor& t, const WhiteNoiseSample& sample);

// |I_n(t) I_1(g) - I_{n+1}(t (x)^ g) - n I_{n-1}(t (x)_1 g)| for symmetric t
double multiply_formula_check(const Tensor& t, std::span<const double> g, const WhiteNoiseSample& sample);

// Finite chaos expansion sum_n I_n(phi_n) with symmetric phi_n.
class ChaosElement {
public:
    ChaosElement(std::vector<double> weights, int max_order = 6);
    static ChaosElement constant(double c, std::vector<double> weights, int max_order = 6);

    int cells() const { return static_cast<int>(w_.size()); }
    int max_order() const { return max_order_; }
    const std::vector<double>& weights() const { return w_; }
    // Adds t (symmetrized) to the order-t.order component.
    void add(const Tensor& t, double scale = 1.0);
    const Tensor& component(int n) const { return phi_[n]; }
    int top_order() const;

    double evaluate(const WhiteNoiseSample& sample) const;
    // E[a b] = sum_n n! <a_n, b_n>
    double inner(const ChaosElement& other) const;
    // sum_n <phi_n, eta^{(x) n}>_w
    double s_transform(std::span<const double> eta) const;
    // value, gradient and dense second derivative at the sample
    SmoothFunctional to_smooth_functional(const WhiteNoiseSample& sample) const;

private:
    std::vector<double> w_;
    int max_order_;
    std::vector<Tensor> phi_;
};

// Concatenation without contractions; throws std::length_error past max_order.
ChaosElement wick_product(const ChaosElement& a, const ChaosElement& b);
// delta(a q) and delta^2(a K) on expansions: raise every order by 1 or 2.
ChaosElement chaos_divergence1(const ChaosElement& a, std::span<const double> q);
ChaosElement chaos_divergence2(const ChaosElement& a, const Eigen::MatrixXd& K);

// E[Phi(xi + w eta)] by Monte Carlo under the translated noise.
Estimate s_transform_mc(const std::function<double(const WhiteNoiseSample&)>& phi, const NoiseGrid& grid,
                        std::span<const double> eta, std::uint64_t seed, int replicates);

}  // namespace fito
