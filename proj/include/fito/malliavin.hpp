#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

#include "fito/functions.hpp"
#include "fito/noise_grid.hpp"

namespace fito {

// A random variable evaluated at one noise sample, with its derivatives in
// the increment coordinates xi_i. The continuum Malliavin derivative D_x is
// grad_i on cell i. The second derivative is kept structured:
//   second = sum_k a_k u_k v_k^T + sum_m b_m M_m.
struct SmoothFunctional {
    struct Outer {
        double scale;
        Eigen::VectorXd u, v;
    };
    struct MatrixTerm {
        double scale;
        std::shared_ptr<const Eigen::MatrixXd> m;
    };

    double value = 0.0;
    Eigen::VectorXd grad;
    std::vector<Outer> outers;
    std::vector<MatrixTerm> matrices;

    static SmoothFunctional constant(double c, int cells);

    int cells() const { return static_cast<int>(grad.size()); }
    // x^T second y
    double second_bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    // second * x
    Eigen::VectorXd second_apply(const Eigen::VectorXd& x) const;
    // sum_{ik} K_ik w_i w_k second_ik for symmetric K
    double second_contract(const Eigen::MatrixXd& K, const Eigen::VectorXd& w) const;
    // diag(K D second), i.e. sum_k K_ik w_k second_ki per i
    Eigen::VectorXd diag_K_D_second(const Eigen::MatrixXd& K, const Eigen::VectorXd& w) const;
    Eigen::MatrixXd second_dense() const;
};

// F(Phi) by the chain rule.
SmoothFunctional compose(const ScalarFunction& F, const SmoothFunctional& phi);

// Phi = F(c . xi)
SmoothFunctional functional_of_fbm(const ScalarFunction& F, std::span<const double> c,
                                   const WhiteNoiseSample& sample);

// Phi = F(X) with X = xi^T Q xi - sum_i w_i Q_ii
SmoothFunctional functional_of_rosenblatt(const ScalarFunction& F,
                                          std::shared_ptr<const Eigen::MatrixXd> Q,
                                          const WhiteNoiseSample& sample);

// Integrand for the first divergence: values u_i and the diagonal derivatives
// d u_i / d xi_i. Deterministic integrands may leave du_diag empty.
struct DivergenceIntegrand {
    std::vector<double> u;
    std::vector<double> du_diag;
    bool deterministic = false;
};

// delta(u) = sum_i u_i xi_i - sum_i w_i d_i u_i
double skorokhod1(const DivergenceIntegrand& u, const WhiteNoiseSample& sample);

// delta^2(Phi q (x) q) = Phi (<q,xi>^2 - sum w q^2) - 2 <q,xi> sum w q grad
//                      + sum_{ik} w_i w_k q_i q_k second_ik
double skorokhod2_rank1(std::span<const double> q, const SmoothFunctional& phi,
                        const WhiteNoiseSample& sample);

// delta^2(Phi K) for a symmetric K:
//   Phi (xi^T K xi - sum w K_ii) - 2 sum w_i (K xi)_i grad_i + sum w_i w_k K_ik second_ik
double skorokhod2(const Eigen::MatrixXd& K, const SmoothFunctional& phi, const WhiteNoiseSample& sample);

// I_2(K) = xi^T K xi - sum_i w_i K_ii
double double_integral(const Eigen::MatrixXd& K, const WhiteNoiseSample& sample);

Eigen::VectorXd widths_vector(const NoiseGrid& grid);
Eigen::Map<const Eigen::VectorXd> as_vector(const WhiteNoiseSample& sample);

}  // namespace fito
