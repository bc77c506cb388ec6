#include "fito/frac_ops.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "fito/kernels.hpp"

namespace fito {

HurstParam::HurstParam(double h) : H(h) {
    if (!(h > 0.5 && h < 1.0)) throw std::domain_error("Hurst index must lie in (1/2, 1)");
}

// std::tgamma is accurate to a few ulp on (0, 10], well inside 1e-12.
double gamma_fn(double x) {
    if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
    return std::tgamma(x);
}

double beta_fn(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_fn: arguments must be positive");
    if (a + b > 100.0) return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
}

double pow_diff(double a, double b, double q) {
    if (b <= 0.0) return std::pow(a, q);
    if (a - b < 0.25 * b) return std::pow(b, q) * std::expm1(q * std::log1p((a - b) / b));
    return std::pow(a, q) - std::pow(b, q);
}

double power_integral(double p, double x_lo, double x_hi, double t) {
    if (!(p > -1.0)) throw std::domain_error("power_integral: p must exceed -1");
    if (t <= x_lo) return 0.0;
    const double q = p + 1.0;
    const double a = t - x_lo;
    const double b = t > x_hi ? t - x_hi : 0.0;
    return pow_diff(a, b, q) / q;
}

double cell_power_integral(double p, double x_lo, double x_hi, double t) {
    if (!(p > -1.0 && p < 0.0)) throw std::domain_error("cell_power_integral: p must lie in (-1, 0)");
    if (!(x_lo < x_hi)) throw std::invalid_argument("cell_power_integral: need x_lo < x_hi");
    return power_integral(p, x_lo, x_hi, t);
}

FracIntResult frac_int_plus(double alpha, const NoiseGrid& grid, std::span<const double> f,
                            std::span<const double> s) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("frac_int_plus: alpha in (0,1)");
    if (f.size() != static_cast<std::size_t>(grid.cell_count()))
        throw std::length_error("frac_int_plus: f must have one value per cell");
    FracIntResult r;
    r.values.resize(s.size());
    const double g = gamma_fn(alpha);
    r.tail_truncated = f[0] != 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] > grid.right_end()) r.tail_truncated = true;
        double acc = 0.0;
        for (int i = 0; i < grid.cell_count() && grid.lo(i) < s[k]; ++i)
            if (f[i] != 0.0) acc += f[i] * power_integral(alpha - 1.0, grid.lo(i), grid.hi(i), s[k]);
        r.values[k] = acc / g;
    }
    return r;
}

namespace {

void check_mesh(std::span<const double> mesh, std::span<const double> u) {
    if (mesh.size() < 2 || u.size() + 1 != mesh.size())
        throw std::length_error("frac_int_minus: u needs one value per mesh piece");
}

}  // namespace

FracIntResult frac_int_minus(double alpha, std::span<const double> mesh, std::span<const double> u,
                             double a, double b, const NoiseGrid& grid) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("frac_int_minus: alpha in (0,1)");
    check_mesh(mesh, u);
    FracIntResult r;
    r.values.assign(grid.cell_count(), 0.0);
    const double g1 = gamma_fn(alpha + 1.0);
    for (std::size_t j = 0; j + 1 < mesh.size(); ++j) {
        const double t0 = std::max(mesh[j], a), t1 = std::min(mesh[j + 1], b);
        if (!(t1 > t0) || u[j] == 0.0) continue;
        for (int i = 0; i < grid.cell_count() && grid.lo(i) < t1; ++i) {
            // cell average of [(t1 - x)_+^alpha - (t0 - x)_+^alpha] / Gamma(alpha+1)
            const double hi = power_integral(alpha, grid.lo(i), grid.hi(i), t1);
            const double lo = power_integral(alpha, grid.lo(i), grid.hi(i), t0);
            r.values[i] += u[j] * (hi - lo) / (grid.width(i) * g1);
        }
    }
    r.tail_truncated = b > grid.right_end();
    return r;
}

std::vector<double> frac_int_minus_at(double alpha, std::span<const double> mesh,
                                      std::span<const double> u, double a, double b,
                                      std::span<const double> x) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("frac_int_minus: alpha in (0,1)");
    check_mesh(mesh, u);
    std::vector<double> out(x.size(), 0.0);
    const double g1 = gamma_fn(alpha + 1.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < mesh.size(); ++j) {
            const double t0 = std::max({mesh[j], a, x[k]}), t1 = std::min(mesh[j + 1], b);
            if (!(t1 > t0) || u[j] == 0.0) continue;
            acc += u[j] * pow_diff(t1 - x[k], t0 - x[k], alpha);
        }
        out[k] = acc / g1;
    }
    return out;
}

double fbm_constant(double H) {
    HurstParam hp(H);
    return std::sqrt(gamma_fn(H - 0.5) * H * (2 * H - 1) * gamma_fn(1.5 - H) / gamma_fn(2 - 2 * H));
}

double rosenblatt_constant(double H) {
    HurstParam hp(H);
    const double g = gamma_fn(H / 2);
    return std::sqrt(H * (2 * H - 1) / 2) * g * g / beta_fn(1 - H, H / 2);
}

ConstantSet constants(const HurstParam& hp) {
    const double H = hp.H;
    ConstantSet c;
    c.H = H;
    c.A = fbm_constant(H);
    c.d = rosenblatt_constant(H);
    const double g2 = std::pow(gamma_fn(H / 2), 2);
    c.B = 4 * c.d / g2 * std::sqrt(H * (2 * H - 1) / 2);
    c.C = 2 * c.d / g2 * H * (2 * H - 1);
    c.kappa3 = kappa3(H);
    return c;
}

ConstantResiduals constant_identity_residuals(const HurstParam& hp) {
    const double H = hp.H;
    const double A = fbm_constant(H), d = rosenblatt_constant(H);
    const double lhs1 = A * A * beta_fn(H - 0.5, 2 - 2 * H);
    const double rhs1 = H * (2 * H - 1) * std::pow(gamma_fn(H - 0.5), 2);
    const double lhs2 = d * beta_fn(1 - H, H / 2) / std::pow(gamma_fn(H / 2), 2);
    const double rhs2 = std::sqrt(H * (2 * H - 1) / 2);
    return {std::abs(lhs1 - rhs1) / std::abs(rhs1), std::abs(lhs2 - rhs2) / std::abs(rhs2)};
}

}  // namespace fito
