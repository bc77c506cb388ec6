#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fito/ito_engine.hpp"

namespace fito {

struct TraceLimitConfig {
    double H = 0.7;
    double a = 0.25;
    double b = 1.0;
    std::vector<double> eps = {0.2, 0.1, 0.05, 0.025};
    GridSpec grid;
    std::string integrand = "x3";  // f in the trace terms, which carry f' or f''
    int time_points = 24;          // trapezoid panels on [a, b]
    int replicates = 2000;         // paths for the weighted gaps
    double probe_t = 0.5;          // time of the I_2(e) L^2 check
    int probe_replicates = 100000;
    int s_nodes = 8;  // Gauss-Legendre nodes in u, with s = t + eps u^5
    std::uint64_t seed = 7;
    std::string cache_dir;
};

// One eps rung of a trace term:
//   gap = RMS( int_a^b (averaged(t) - limit(t)) Psi(t) dt ) / RMS( int_a^b limit(t) Psi(t) dt ).
struct TraceGap {
    std::string term;
    double eps = 0.0;
    double gap = 0.0;
    double limit_rms = 0.0;
    double averaged_rms = 0.0;
    double pointwise_gap_at_b = 0.0;  // |averaged(b) / limit(b) - 1|
};

// L^2 distance between the s-averaged I_2(e_{s,t}) and I_2(e_{t,t}) at the probe time.
struct EkernelGap {
    double eps = 0.0;
    double quadrature = 0.0;  // second moment from the K^2 formula
    double monte_carlo = 0.0;
    double mc_se = 0.0;
    double grid_exact = 0.0;  // same quantity from grid inner products, no sampling
    double z = 0.0;           // (monte_carlo - quadrature) / mc_se
};

struct TraceLimitReport {
    std::vector<TraceGap> gaps;  // terms fbm_trace, trace_K1, trace_K2 in rung order
    std::vector<EkernelGap> e_gaps;
    std::vector<std::string> failures;
    bool monotone(const std::string& term) const;
    double final_gap(const std::string& term) const;
    bool e_monotone() const;
    double worst_e_z() const;
};

TraceLimitReport trace_limit_checks(const TraceLimitConfig& cfg);

// Building blocks, exposed for tests.
// eps-averaged factors multiplying f'(X_t) (first two) or f''(X_t) (third).
double averaged_fbm_trace(double H, double t, double eps, int s_nodes = 8);
double averaged_K1_trace(double H, double t, double eps, int s_nodes = 8);
double averaged_K2_trace(double H, double t, double eps, int s_nodes = 8);
// Second moment of the averaged-minus-limit I_2(e) from the K^2 expansion.
double e_gap_quadrature(double H, double t, double eps, int s_nodes = 8);

}  // namespace fito
