#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "fito/functions.hpp"
#include "fito/ito_engine.hpp"

using namespace fito;

namespace {

ExperimentConfig small_config(ProcessKind kind) {
    ExperimentConfig c;
    c.process = kind;
    c.grid.cells = 132;  // h = 1/60
    c.grid.left_cut = -1e3;
    c.grid.tail_ratio = 1.3;
    c.eps = {0.2, 0.1, 0.05};
    c.replicates = 64;
    c.batch = 16;
    c.threads = 1;
    c.functions = {"x2", "x3"};
    return c;
}

}  // namespace

TEST_CASE("forward sum of a linear path") {
    // X_t = t, F = 1: int_a^b ((t + eps) ^ b - t) / eps dt = (b - a) - eps / 2
    std::vector<double> t, x;
    for (int k = 0; k <= 120; ++k) {
        t.push_back(k / 100.0);
        x.push_back(k / 100.0);
    }
    const auto one = ScalarFunction::polynomial({1.0});
    for (double eps : {0.05, 0.1, 0.2})
        CHECK(forward_sum(one, t, x, eps, 0.25, 1.0) == doctest::Approx(0.75 - eps / 2).epsilon(1e-12));
    CHECK(forward_sum(one, t, x, 0.1, 0.5, 0.5) == 0.0);
    CHECK_THROWS_AS(forward_sum(one, t, x, 0.013, 0.25, 1.0), ConfigError);
}

TEST_CASE("configuration errors") {
    auto bad = [](auto mutate) {
        ExperimentConfig c = small_config(ProcessKind::fbm);
        mutate(c);
        return c;
    };
    CHECK_NOTHROW(validate(small_config(ProcessKind::fbm)));
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.H = 0.5; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.a = 1.1; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.eps = {0.013}; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.eps = {0.1, 0.2}; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.b = 1.1; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.functions = {"x7y"}; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& c) { c.functions = {"expsq:0.3"}; })), ConfigError);
    CHECK_NOTHROW(validate(bad([](auto& c) { c.functions = {"expsq:0.2"}; })));
    CHECK_THROWS_AS(validate(bad([](auto& c) {
                        c.process = ProcessKind::rosenblatt;
                        c.functions = {"expsq:0.1"};
                    })),
                    ConfigError);
}

TEST_CASE("batched engine reproduces the reference route") {
    for (ProcessKind kind : {ProcessKind::fbm, ProcessKind::rosenblatt}) {
        const ExperimentConfig cfg = small_config(kind);
        ItoEngine eng(cfg);
        std::vector<ScalarFunction> fs;
        for (const auto& n : cfg.functions) fs.push_back(ScalarFunction::parse(n));
        const auto batch = eng.run(3, 4, fs);
        for (std::size_t k = 0; k < fs.size(); ++k)
            for (int r = 0; r < 4; ++r) {
                const auto sample = sample_noise(eng.grid(), cfg.seed, 3 + r);
                const ScalarFunction f = fs[k].derivative();
                const TermBreakdown ref = kind == ProcessKind::fbm
                                              ? rhs_fbm(f, eng.rep(), eng.grid(), cfg.a, cfg.b, sample)
                                              : rhs_rosenblatt(f, eng.rep(), eng.grid(), cfg.a, cfg.b, sample);
                REQUIRE(ref.names == term_names(kind));
                for (std::size_t m = 0; m < ref.values.size(); ++m)
                    CHECK(batch[k].terms[m][r] ==
                          doctest::Approx(ref.values[m]).epsilon(1e-9).scale(1e-9 * (1 + std::abs(ref.total()))));
            }
    }
}

TEST_CASE("product equals Wick part plus traces, pathwise") {
    for (ProcessKind kind : {ProcessKind::fbm, ProcessKind::rosenblatt}) {
        ItoEngine eng(small_config(kind));
        const auto F = ScalarFunction::parse("poly:0.3,-1,0.5,1");
        std::mt19937_64 rng(kind == ProcessKind::fbm ? 1 : 2);
        const double h = eng.grid().spacing();
        for (int r = 0; r < 20; ++r) {
            const int ti = 3 + static_cast<int>(rng() % 40), ei = 1 + static_cast<int>(rng() % 10);
            const auto sample = sample_noise(eng.grid(), 99, r);
            const Decomposition d = kind == ProcessKind::fbm
                                        ? decomposition_check_fbm(F, eng.rep(), ti * h, ei * h, sample)
                                        : decomposition_check_rosenblatt(F, eng.rep(), ti * h, ei * h, sample);
            if (kind == ProcessKind::fbm)
                CHECK(std::abs(d.residual) < 1e-9 * (1 + std::abs(d.product)));
            else
                CHECK(std::abs(d.residual) < 1e-8 * d.scale);
        }
    }
}

TEST_CASE("results do not depend on the thread count") {
    ExperimentConfig c = small_config(ProcessKind::rosenblatt);
    std::vector<ScalarFunction> fs = {ScalarFunction::parse("x3")};
    ItoEngine one(c);
    c.threads = 3;
    ItoEngine three(c);
    const auto a = one.run_all(fs), b = three.run_all(fs);
    CHECK(a[0].lhs == b[0].lhs);
    CHECK(a[0].terms == b[0].terms);
    CHECK(a[0].forward == b[0].forward);
}

TEST_CASE("deterministic trace terms have their closed forms") {
    const ExperimentConfig cfg = small_config(ProcessKind::rosenblatt);
    const auto reports = ito_formula_check(cfg);
    REQUIRE(reports.size() == 2);
    const double H = cfg.H;
    // F = x^2: the K1 trace is sum f' (t_{j+1}^{2H} - t_j^{2H}) / 2 with f' = 2
    CHECK(reports[0].terms[2].stats.mean == doctest::Approx(std::pow(cfg.b, 2 * H) - std::pow(cfg.a, 2 * H)));
    CHECK(reports[0].terms[2].stats.se < 1e-12);
    // F = x^3: the kappa3 trace is kappa3 (b^{3H} - a^{3H})
    const double k3 = 2.06706889084954;
    CHECK(reports[1].terms[3].name == "trace_kappa3");
    CHECK(reports[1].terms[3].stats.mean ==
          doctest::Approx(k3 * (std::pow(cfg.b, 3 * H) - std::pow(cfg.a, 3 * H))).epsilon(1e-10));
}

TEST_CASE("Ito residual shrinks as the time step is refined") {
    std::vector<double> rel;
    for (int cells : {132, 264, 528}) {
        ExperimentConfig c = small_config(ProcessKind::rosenblatt);
        c.grid.cells = cells;
        c.eps = {0.2};
        c.replicates = 32;
        const auto reports = ito_formula_check(c);
        rel.push_back(reports[1].ito_residual.rms / reports[1].lhs.rms);
    }
    CHECK(rel[1] < rel[0]);
    CHECK(rel[2] < rel[1]);
}

TEST_CASE("empty interval gives an all-zero report that passes") {
    ExperimentConfig c = small_config(ProcessKind::fbm);
    c.a = c.b = 0.5;
    const auto reports = ito_formula_check(c);
    for (const auto& r : reports) {
        CHECK(r.passed);
        CHECK(r.lhs.rms == 0.0);
        for (const auto& rung : r.rungs) CHECK(rung.difference.rms == 0.0);
    }
}

TEST_CASE("ladder verdicts name the failing checks") {
    ExperimentConfig c = small_config(ProcessKind::fbm);
    c.functions = {"x2"};
    c.rms_budget = 1e-6;
    const auto reports = ito_formula_check(c);
    CHECK_FALSE(reports[0].passed);
    CHECK(std::find(reports[0].failures.begin(), reports[0].failures.end(), "final-relative-rms") !=
          reports[0].failures.end());
}
