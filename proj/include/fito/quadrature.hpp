#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fito {

// Integrand for endpoint-singular rules: f(x, x - a, b - x). The two distances
// are computed without cancellation, so kernels like (b - x)^p stay accurate
// right up to the endpoint.
using EndpointIntegrand = std::function<double(double, double, double)>;

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // difference between the last two refinement levels
    int evaluations = 0;
    bool converged = false;
};

// Double-exponential (tanh-sinh) rule on [a, b] with level doubling until the
// relative change drops below tol. Handles integrable power singularities at
// either endpoint.
QuadResult integrate_de(const EndpointIntegrand& f, double a, double b, double tol = 1e-12);

// Splits [a, b] at every listed point strictly inside it and sums DE rules on
// the pieces, so interior singularities become endpoint singularities.
QuadResult integrate_split(const EndpointIntegrand& f, double a, double b,
                           std::span<const double> breaks, double tol = 1e-12);

// Convenience overload for integrands without endpoint structure.
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       std::span<const double> breaks, double tol = 1e-12);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre on [0, 1] (Golub-Welsch).
GaussRule gauss_legendre01(int n);

// Gauss-Hermite for the standard normal weight: sum w_k f(x_k) ~ E f(Z).
GaussRule gauss_hermite_normal(int n);

}  // namespace fito
