#include "fito/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fito/frac_ops.hpp"
#include "fito/quadrature.hpp"

namespace fito {

double hermite_eval(int n, double sigma2, double x) {
    if (n < 0) throw std::invalid_argument("hermite_eval: negative order");
    if (n == 0) return 1.0;
    double hm = 1.0, h = x;
    for (int k = 1; k < n; ++k) {
        const double next = x * h - sigma2 * k * hm;
        hm = h;
        h = next;
    }
    return h;
}

HermiteBasis::HermiteBasis(double sigma2, int max_order) : sigma2_(sigma2), max_order_(max_order) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("HermiteBasis: variance must be positive");
    if (max_order < 0) throw std::invalid_argument("HermiteBasis: negative order");
}

std::vector<double> HermiteBasis::eval_all(double x) const {
    std::vector<double> h(max_order_ + 1);
    h[0] = 1.0;
    if (max_order_ >= 1) h[1] = x;
    for (int k = 1; k < max_order_; ++k) h[k + 1] = x * h[k] - sigma2_ * k * h[k - 1];
    return h;
}

double HermiteBasis::norm2(int n) const { return std::tgamma(n + 1.0) * std::pow(sigma2_, n); }

namespace {

// Coefficients against the orthonormal family H_n / (sqrt(n!) s^n), in the
// standardized variable z = x / s so no power of s is ever formed.
std::vector<double> coeffs_with(const std::function<double(double)>& F, double sigma, int N, int nodes) {
    const GaussRule rule = gauss_hermite_normal(nodes);
    std::vector<double> c(N + 1, 0.0);
    std::vector<double> he(N + 1);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = rule.nodes[k];
        const double fw = F(sigma * z) * rule.weights[k];
        // normalized probabilists' Hermite: he_{n+1} = (z he_n - sqrt(n) he_{n-1}) / sqrt(n+1)
        he[0] = 1.0;
        if (N >= 1) he[1] = z;
        for (int n = 1; n < N; ++n) he[n + 1] = (z * he[n] - std::sqrt(double(n)) * he[n - 1]) / std::sqrt(n + 1.0);
        for (int n = 0; n <= N; ++n) c[n] += fw * he[n];
    }
    return c;
}

}  // namespace

HermiteCoefficients hermite_coeffs(const std::function<double(double)>& F, double sigma2, int N) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("hermite_coeffs: variance must be positive");
    if (N < 0) throw std::invalid_argument("hermite_coeffs: negative order");
    const double sigma = std::sqrt(sigma2);
    constexpr int kMaxNodes = 512;
    HermiteCoefficients out;
    int nodes = std::max(16, 2 * (N + 2));
    std::vector<double> prev = coeffs_with(F, sigma, N, nodes);
    while (nodes < kMaxNodes) {
        const int next_nodes = std::min(2 * nodes, kMaxNodes);
        std::vector<double> next = coeffs_with(F, sigma, N, next_nodes);
        double change = 0.0;
        for (int n = 0; n <= N; ++n) change = std::max(change, std::abs(next[n] - prev[n]));
        prev = std::move(next);
        nodes = next_nodes;
        if (change < 1e-12) {
            out.converged = true;
            break;
        }
    }
    out.c = std::move(prev);
    out.nodes = nodes;
    if (!out.converged) {
        std::ostringstream msg;
        msg << "coefficients still moving at " << nodes << " Gauss-Hermite nodes";
        out.warnings.push_back(msg.str());
    }
    if (N >= 4) {
        const double head = std::max(std::abs(out.c[0]), std::abs(out.c[1]));
        const double tail = std::max(std::abs(out.c[N]), std::abs(out.c[N - 1]));
        if (head > 0.0 && tail > head) out.warnings.push_back("coefficient tail not decaying");
    }
    return out;
}

HermiteCoefficients hermite_coeffs(const ScalarFunction& F, double sigma2, int N) {
    if (F.kind() == ScalarFunction::Kind::expsq && !(F.lambda() < 1.0 / (4.0 * sigma2))) {
        std::ostringstream msg;
        msg << "hermite_coeffs: exp(" << F.lambda() << " x^2) needs lambda < 1/(4 sigma2) = " << 1.0 / (4.0 * sigma2);
        throw std::domain_error(msg.str());
    }
    return hermite_coeffs([&F](double x) { return F(x); }, sigma2, N);
}

double derivative_shift_check(const ScalarFunction& F, double sigma2, int N) {
    const ScalarFunction dF = F.derivative();
    const auto c = hermite_coeffs(F, sigma2, N + 1).c;
    const auto d = hermite_coeffs(dF, sigma2, N).c;
    const double sigma = std::sqrt(sigma2);
    double scale = 0.0, worst = 0.0;
    for (int n = 0; n <= N; ++n) {
        scale = std::max(scale, std::abs(d[n]));
        worst = std::max(worst, std::abs(d[n] - std::sqrt(n + 1.0) * c[n + 1] / sigma));
    }
    return scale > 0.0 ? worst / scale : worst;
}

double grad_fbm_closed_form(double H, double t, double s) {
    const ConstantSet k = constants(HurstParam(H));
    if (!(s > 0.0) || !(t > 0.0)) throw std::domain_error("grad_fbm_closed_form: s and t must be positive");
    const double q = 2.0 * H - 1.0;
    const double time_integral =
        s >= t ? pow_diff(s, s - t, q) / q : (std::pow(s, q) + std::pow(t - s, q)) / q;
    const double g = gamma_fn(H - 0.5);
    return k.A * beta_fn(H - 0.5, 2.0 - 2.0 * H) / (g * g) * time_integral;
}

}  // namespace fito
