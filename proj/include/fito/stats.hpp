#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fito {

// Pairwise summation in index order; the result does not depend on how the
// values were produced, only on their order.
inline double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 16) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t m = x.size() / 2;
    return pairwise_sum(x.subspan(0, m)) + pairwise_sum(x.subspan(m));
}

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double var = 0.0;  // unbiased
    double se = 0.0;   // standard error of the mean
    double rms = 0.0;  // sqrt(mean of squares)
};

inline Moments moments(std::span<const double> x) {
    Moments m;
    m.n = x.size();
    if (m.n == 0) return m;
    m.mean = pairwise_sum(x) / m.n;
    std::vector<double> d2(m.n), sq(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        d2[i] = (x[i] - m.mean) * (x[i] - m.mean);
        sq[i] = x[i] * x[i];
    }
    m.var = m.n > 1 ? pairwise_sum(d2) / (m.n - 1) : 0.0;
    m.se = std::sqrt(m.var / m.n);
    m.rms = std::sqrt(pairwise_sum(sq) / m.n);
    return m;
}

// Estimate with a standard error from the influence function.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

inline Estimate sample_variance(std::span<const double> x) {
    const Moments m = moments(x);
    std::vector<double> psi(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) psi[i] = (x[i] - m.mean) * (x[i] - m.mean) - m.var;
    return {m.var, moments(psi).se};
}

inline Estimate sample_covariance(std::span<const double> x, std::span<const double> y) {
    const double mx = pairwise_sum(x) / x.size(), my = pairwise_sum(y) / y.size();
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = (x[i] - mx) * (y[i] - my);
    const Moments m = moments(p);
    return {m.mean * x.size() / (x.size() - 1.0), m.se};
}

inline Estimate sample_third_cumulant(std::span<const double> x) {
    const std::size_t n = x.size();
    const double mu = pairwise_sum(x) / n;
    std::vector<double> c2(n), c3(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mu;
        c2[i] = d * d;
        c3[i] = d * d * d;
    }
    const double m2 = pairwise_sum(c2) / n, m3 = pairwise_sum(c3) / n;
    std::vector<double> psi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mu;
        psi[i] = d * d * d - m3 - 3.0 * m2 * d;
    }
    const double k3 = m3 * n * n / ((n - 1.0) * (n - 2.0));
    return {k3, moments(psi).se};
}

}  // namespace fito
