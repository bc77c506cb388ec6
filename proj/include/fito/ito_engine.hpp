#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fito/functions.hpp"
#include "fito/kernels.hpp"
#include "fito/noise_grid.hpp"
#include "fito/processes.hpp"
#include "fito/stats.hpp"

namespace fito {

// Invalid experiment parameters (exit code 2 at the command line).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical budget that cannot be met with the requested resources (exit code 3).
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Noise grid recipe. With core_left > left_cut and tail_ratio > 1 the grid is
// graded: `cells` uniform cells on [core_left, right_end] plus a geometric tail
// down to left_cut. Otherwise `cells` uniform cells span [left_cut, right_end].
struct GridSpec {
    double left_cut = -1e8;
    double right_end = 1.2;
    int cells = 2112;
    double core_left = -1.0;
    double tail_ratio = 1.05;
    int nodes_per_piece = 3;

    bool graded() const { return core_left > left_cut && tail_ratio > 1.0; }
    double spacing() const;
    NoiseGrid build() const;
    std::string describe() const;
};

struct ExperimentConfig {
    double H = 0.7;
    ProcessKind process = ProcessKind::fbm;
    std::vector<std::string> functions = {"x2"};  // Ito functions F; integrands are F'
    double a = 0.25;
    double b = 1.0;
    std::vector<double> eps = {0.2, 0.1, 0.05, 0.025};
    GridSpec grid;
    int replicates = 2000;
    std::uint64_t seed = 20240611;
    double rms_budget = 0.10;    // relative RMS allowed at the last rung
    double tail_budget = 0.005;  // variance of X_b carried by noise left of the cut
    int threads = 0;             // 0: hardware concurrency
    int batch = 128;
    std::string cache_dir;
};

// Throws ConfigError on inconsistent settings (interval, eps ladder, growth of F).
void validate(const ExperimentConfig& cfg);

// Analytic variance of X_b lost to the left cut.
double tail_bound(const ExperimentConfig& cfg);

// int_a^b F(X_t) (X_{(t+eps) ^ b} - X_t) / eps dt by the trapezoid rule on the
// sampled times; (t + eps) ^ b must be a sample time for every t in [a, b].
double forward_sum(const ScalarFunction& F, std::span<const double> times, std::span<const double> path,
                   double eps, double a, double b);

// Product = Wick term + trace term at one sample.
struct Decomposition {
    double product = 0.0;
    double wick = 0.0;
    double first_trace = 0.0;   // gradient against the increment kernel (Rosenblatt: 2 delta(u))
    double second_trace = 0.0;  // Hessian against the double kernel (Rosenblatt only)
    double residual = 0.0;
    double scale = 0.0;  // 1 + |product| + |wick| + |first_trace| + |second_trace|
};

// F(B_t) (B_{t+eps} - B_t) / eps = delta(F(B_t) g) / eps + <grad F(B_t), g>_w / eps,
// g the cell-averaged increment kernel. t and t + eps must be mesh points.
Decomposition decomposition_check_fbm(const ScalarFunction& F, const ProcessRep& rep, double t, double eps,
                                      const WhiteNoiseSample& sample);

// F(X_t) I_2(k) = delta^2(F(X_t) k) + 2 delta(u) + <second F(X_t), k>_w (all / eps),
// k = Q_{t+eps} - Q_t dense, u_i = sum_k w_k k_ik grad_k. Small grids only.
Decomposition decomposition_check_rosenblatt(const ScalarFunction& F, const ProcessRep& rep, double t,
                                             double eps, const WhiteNoiseSample& sample);

struct TermBreakdown {
    std::vector<std::string> names;
    std::vector<double> values;
    double total() const;
};

std::vector<std::string> term_names(ProcessKind kind);

// Right-hand side for the integrand f over (a, b), one sample, computed
// directly from the calculus primitives: the divergence through
// frac_int_minus and skorokhod1 (fBm) or dense skorokhod2 (Rosenblatt).
// Reference route for small grids; the engine below is the batched route.
TermBreakdown rhs_fbm(const ScalarFunction& f, const ProcessRep& rep, const NoiseGrid& grid, double a, double b,
                           const WhiteNoiseSample& sample);
TermBreakdown rhs_rosenblatt(const ScalarFunction& f, const ProcessRep& rep, const NoiseGrid& grid, double a, double b,
                           const WhiteNoiseSample& sample);

// Per-replicate outputs of the batched engine for one Ito function F.
struct ReplicateBatch {
    std::vector<double> lhs;                   // F(X_b) - F(X_a)
    std::vector<std::vector<double>> forward;  // [rung][replicate] forward sum of F'
    std::vector<std::vector<double>> terms;    // [term][replicate] right-hand side for F'
    std::vector<double> x_b;                   // X_b
};

// Tables and deterministic per-piece quantities shared by all replicates.
class ItoEngine {
public:
    explicit ItoEngine(ExperimentConfig cfg);
    ~ItoEngine();
    ItoEngine(const ItoEngine&) = delete;
    ItoEngine& operator=(const ItoEngine&) = delete;

    const ExperimentConfig& config() const { return cfg_; }
    const NoiseGrid& grid() const { return grid_; }
    const ProcessRep& rep() const { return rep_; }
    const TimeMesh& mesh() const { return rep_.mesh(); }

    // Replicates [first, first + count) for every function; result[f] per function.
    std::vector<ReplicateBatch> run(std::uint64_t first, int count,
                                    std::span<const ScalarFunction> functions) const;
    // All replicates, split into batches over a worker pool; identical for any thread count.
    std::vector<ReplicateBatch> run_all(std::span<const ScalarFunction> functions) const;

private:
    struct Prepared;
    ExperimentConfig cfg_;
    NoiseGrid grid_;
    ProcessRep rep_;
    std::unique_ptr<Prepared> prep_;
};

struct TermReport {
    std::string name;
    Moments stats;
};

struct RungReport {
    double eps = 0.0;
    Moments forward;     // forward sum of F'
    Moments difference;  // forward sum - RHS
    double relative_rms = 0.0;
};

struct ExperimentReport {
    std::string process;
    std::string function;
    double H = 0.0, a = 0.0, b = 0.0;
    int replicates = 0;
    std::string grid;
    double tail_bound = 0.0;
    Moments lhs;           // F(X_b) - F(X_a)
    Moments rhs;           // right-hand side for F'
    Moments ito_residual;  // lhs - rhs
    std::vector<TermReport> terms;
    std::vector<RungReport> rungs;
    Estimate third_cumulant_b;  // sample third cumulant of X_b
    bool monotone = false;
    bool final_within_budget = false;
    bool passed = false;
    std::vector<std::string> failures;
    double seconds = 0.0;
};

std::vector<ExperimentReport> ito_formula_check(const ExperimentConfig& cfg);
std::vector<ExperimentReport> summarize(const ItoEngine& engine, std::span<const ScalarFunction> functions,
                                        const std::vector<ReplicateBatch>& batches, double seconds);

}  // namespace fito
