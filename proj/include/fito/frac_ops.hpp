#pragma once

#include <span>
#include <vector>

#include "fito/noise_grid.hpp"

namespace fito {

// Validated Hurst index, 1/2 < H < 1.
struct HurstParam {
    double H;
    explicit HurstParam(double h);
    double value() const { return H; }
};

double gamma_fn(double x);
double beta_fn(double a, double b);

// Integral of (t - x)_+^p over [x_lo, x_hi], for p in (-1, 0).
double cell_power_integral(double p, double x_lo, double x_hi, double t);

// Same antiderivative difference for any p > -1:
// [(t - x_lo)_+^{p+1} - (t - x_hi)_+^{p+1}] / (p + 1), evaluated without
// cancellation when the cell is far from t.
double power_integral(double p, double x_lo, double x_hi, double t);

// a^q - b^q for a >= b >= 0, accurate when a and b are close.
double pow_diff(double a, double b, double q);

struct FracIntResult {
    std::vector<double> values;
    bool tail_truncated = false;  // the grid support cut off part of the integral
};

// (I_+^alpha f)(s) = Gamma(alpha)^{-1} int (s - x)_+^{alpha-1} f(x) dx for the
// piecewise-constant f given by cell averages, exact for such f.
FracIntResult frac_int_plus(double alpha, const NoiseGrid& grid, std::span<const double> f,
                            std::span<const double> s);

// Time function u, constant on the pieces [t_j, t_{j+1}) of `mesh`, restricted
// to (a, b). Returns cell averages of I_-^alpha(1_{(a,b)} u) on the grid.
FracIntResult frac_int_minus(double alpha, std::span<const double> mesh, std::span<const double> u,
                             double a, double b, const NoiseGrid& grid);

// Pointwise variant: I_-^alpha(1_{(a,b)} u)(x) at the given x.
std::vector<double> frac_int_minus_at(double alpha, std::span<const double> mesh,
                                      std::span<const double> u, double a, double b,
                                      std::span<const double> x);

struct ConstantSet {
    double H = 0.0;
    double A = 0.0;       // fBm normaliser
    double d = 0.0;       // Rosenblatt normaliser
    double B = 0.0;
    double C = 0.0;
    double kappa3 = 0.0;  // third cumulant of X_1
};

ConstantSet constants(const HurstParam& H);

// Relative residuals of A^2 beta(H-1/2, 2-2H) = H(2H-1) Gamma(H-1/2)^2 and
// d beta(1-H, H/2) / Gamma(H/2)^2 = sqrt(H(2H-1)/2).
struct ConstantResiduals {
    double fbm = 0.0;
    double rosenblatt = 0.0;
};
ConstantResiduals constant_identity_residuals(const HurstParam& H);

double fbm_constant(double H);
double rosenblatt_constant(double H);

}  // namespace fito
