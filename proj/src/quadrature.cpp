#include "fito/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fito {

namespace {

constexpr double kTMax = 6.5;
constexpr int kMaxLevel = 12;

// Contribution of the abscissa t of the DE map onto [a, b].
double de_term(const EndpointIntegrand& f, double a, double b, double t, int& evals) {
    const double half_pi = 0.5 * std::numbers::pi;
    const double y = half_pi * std::sinh(t);
    const double len = b - a;
    const double e = std::exp(-2.0 * std::abs(y));
    // (1 + tanh y)/2 and (1 - tanh y)/2 without cancellation.
    const double small = len * e / (1.0 + e);
    const double large = len / (1.0 + e);
    const double dl = (y < 0) ? small : large;
    const double dr = (y < 0) ? large : small;
    if (dl <= 0.0 || dr <= 0.0) return 0.0;
    const double x = (y < 0) ? a + dl : b - dr;
    // 1/cosh^2 y = 4 e / (1 + e)^2
    const double w = 0.5 * len * half_pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
    if (w == 0.0) return 0.0;
    ++evals;
    const double v = f(x, dl, dr);
    return std::isfinite(v) ? w * v : 0.0;
}

}  // namespace

QuadResult integrate_de(const EndpointIntegrand& f, double a, double b, double tol) {
    QuadResult res;
    if (!(a < b)) {
        if (a == b) {
            res.converged = true;
            return res;
        }
        throw std::invalid_argument("integrate_de: need a <= b");
    }
    double h = 0.5;
    double sum = de_term(f, a, b, 0.0, res.evaluations);
    for (int k = 1; k * h <= kTMax; ++k) {
        sum += de_term(f, a, b, k * h, res.evaluations);
        sum += de_term(f, a, b, -k * h, res.evaluations);
    }
    double prev = sum * h;
    for (int level = 1; level <= kMaxLevel; ++level) {
        h *= 0.5;
        for (double t = h; t <= kTMax; t += 2.0 * h) {
            sum += de_term(f, a, b, t, res.evaluations);
            sum += de_term(f, a, b, -t, res.evaluations);
        }
        const double cur = sum * h;
        res.error = std::abs(cur - prev);
        res.value = cur;
        if (level >= 3 && res.error <= tol * std::abs(cur)) {
            res.converged = true;
            return res;
        }
        if (level >= 3 && cur == 0.0 && prev == 0.0) {
            res.converged = true;
            return res;
        }
        prev = cur;
    }
    return res;
}

QuadResult integrate_split(const EndpointIntegrand& f, double a, double b,
                           std::span<const double> breaks, double tol) {
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    QuadResult total;
    total.converged = true;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        QuadResult r = integrate_de(f, pts[i], pts[i + 1], tol);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.converged = total.converged && r.converged;
    }
    return total;
}

double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::span<const double> breaks, double tol) {
    return integrate_split([&](double x, double, double) { return f(x); }, a, b, breaks, tol).value;
}

GaussRule gauss_legendre01(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre01: n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule rule;
    for (int k = 0; k < n; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        rule.nodes.push_back(0.5 * (es.eigenvalues()(k) + 1.0));
        rule.weights.push_back(v0 * v0);  // total mass 2 on [-1,1], halved on [0,1]
    }
    return rule;
}

GaussRule gauss_hermite_normal(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite_normal: n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(double(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule rule;
    for (int k = 0; k < n; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        rule.nodes.push_back(es.eigenvalues()(k));
        rule.weights.push_back(v0 * v0);
    }
    return rule;
}

}  // namespace fito
