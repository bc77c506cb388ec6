#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fito/functions.hpp"

namespace fito {

// H_{n,s2}: H_0 = 1, H_1 = x, H_{n+1} = x H_n - s2 n H_{n-1}.
double hermite_eval(int n, double sigma2, double x);

class HermiteBasis {
public:
    HermiteBasis(double sigma2, int max_order);
    double variance() const { return sigma2_; }
    int max_order() const { return max_order_; }
    // H_0(x) .. H_N(x)
    std::vector<double> eval_all(double x) const;
    // int H_n^2 dgamma_{s2} = n! s2^n
    double norm2(int n) const;

private:
    double sigma2_;
    int max_order_;
};

struct HermiteCoefficients {
    std::vector<double> c;  // c_n = int F H_n / (sqrt(n!) s^n) dgamma
    int nodes = 0;          // Gauss-Hermite nodes of the accepted rule
    bool converged = false;
    std::vector<std::string> warnings;
};

// Gauss-Hermite nodes doubled until no coefficient moves by more than 1e-12.
HermiteCoefficients hermite_coeffs(const std::function<double(double)>& F, double sigma2, int N);
// Catalogue version; exp(lambda x^2) requires lambda < 1/(4 s2) and throws
// std::domain_error otherwise.
HermiteCoefficients hermite_coeffs(const ScalarFunction& F, double sigma2, int N);

// Coefficients of F' computed directly and through d_n = sqrt(n+1) c_{n+1} / s;
// returns max_n |direct - shifted| / max_n |direct| (0 when F' vanishes).
double derivative_shift_check(const ScalarFunction& F, double sigma2, int N);

// Deterministic factor g with grad^{H-1/2}(F(B_t))(s) = g F'(B_t):
//   A beta(H-1/2, 2-2H) / Gamma(H-1/2)^2 * int_0^t |s-r|^{2H-2} dr.
double grad_fbm_closed_form(double H, double t, double s);

}  // namespace fito
