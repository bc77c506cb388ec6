#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fito/config.hpp"
#include "fito/frac_ops.hpp"
#include "fito/ito_engine.hpp"
#include "fito/kernels.hpp"
#include "fito/processes.hpp"
#include "fito/report.hpp"
#include "fito/stats.hpp"
#include "fito/studies.hpp"

namespace fs = std::filesystem;
using namespace fito;

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kBudget = 3 };

// Flags shared by every subcommand. Values land in `raw` as text and are
// layered over the config file, so flags win.
struct Flags {
    std::string config_file;
    std::string out;
    bool json = false;
    std::map<std::string, std::string> raw;
    std::vector<std::string> functions;
    bool uniform_grid = false;
    bool exact_oracle = false;
};

void add_common(CLI::App* cmd, Flags& fl) {
    cmd->add_option("--config", fl.config_file, "key = value settings file")->check(CLI::ExistingFile);
    cmd->add_option("--out", fl.out, "output directory (default $FITO_OUT or ./fito-out)");
    cmd->add_flag("--json", fl.json, "print JSON instead of CSV on stdout");
    const std::pair<const char*, const char*> opts[] = {
        {"hurst", "Hurst index in (1/2, 1)"},
        {"process", "fbm or rosenblatt"},
        {"a", "left end of the Ito interval"},
        {"b", "right end of the Ito interval"},
        {"eps-ladder", "comma-separated decreasing eps values"},
        {"cells", "core cells of the noise grid"},
        {"left-cut", "left end of the noise grid"},
        {"core-left", "left end of the uniform core of a graded grid"},
        {"tail-ratio", "growth ratio of tail cells"},
        {"nodes-per-piece", "Gauss nodes per mesh interval for the Rosenblatt kernel"},
        {"time-points", "number of equally spaced output times on (0, 1]"},
        {"replicates", "Monte Carlo replicates"},
        {"seed", "master seed"},
        {"threads", "worker threads (0: all cores)"},
        {"cache-dir", "kernel table cache directory"},
        {"rms-budget", "relative RMS allowed at the last eps rung"},
        {"tail-budget", "variance share allowed left of the cut"},
        {"paths", "number of replicate paths to dump"},
    };
    for (const auto& [name, help] : opts) {
        std::string key = name;
        for (char& c : key)
            if (c == '-') c = '_';
        cmd->add_option(std::string("--") + name, fl.raw[key], help);
    }
    cmd->add_option("--f", fl.functions, "function F: x2, x3, poly:<c0,c1,...>, expsq:<lambda>; repeatable");
    cmd->add_flag("--uniform-grid", fl.uniform_grid, "uniform grid on [left-cut, right end] without a graded tail");
}

KeyValueConfig merged(const Flags& fl) {
    KeyValueConfig kv = fl.config_file.empty() ? KeyValueConfig{} : KeyValueConfig::load(fl.config_file);
    for (const auto& [k, v] : fl.raw)
        if (!v.empty()) kv.set(k, v);
    if (!fl.functions.empty()) {
        std::string joined;
        for (const auto& f : fl.functions) joined += (joined.empty() ? "" : ";") + f;
        kv.set("f", joined);
    }
    if (fl.uniform_grid) kv.set("uniform_grid", "1");
    if (fl.exact_oracle) kv.set("exact_oracle", "1");
    return kv;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

ProcessKind process_of(const KeyValueConfig& kv) {
    const std::string p = kv.get_string("process", "fbm");
    if (p == "fbm") return ProcessKind::fbm;
    if (p == "rosenblatt") return ProcessKind::rosenblatt;
    throw ConfigError("unknown process '" + p + "' (expected fbm or rosenblatt)");
}

const char* process_name(ProcessKind k) { return k == ProcessKind::fbm ? "fbm" : "rosenblatt"; }

GridSpec grid_of(const KeyValueConfig& kv) {
    GridSpec g;
    if (kv.get_int("uniform_grid", 0) != 0) {
        g.left_cut = kv.get_double("left_cut", -50.0);
        g.core_left = g.left_cut;
        g.tail_ratio = 1.0;
        g.cells = static_cast<int>(kv.get_int("cells", 2048));
    } else {
        g.left_cut = kv.get_double("left_cut", g.left_cut);
        g.core_left = kv.get_double("core_left", g.core_left);
        g.tail_ratio = kv.get_double("tail_ratio", g.tail_ratio);
        g.cells = static_cast<int>(kv.get_int("cells", g.cells));
    }
    g.right_end = kv.get_double("right_end", g.right_end);
    g.nodes_per_piece = static_cast<int>(kv.get_int("nodes_per_piece", g.nodes_per_piece));
    return g;
}

double hurst_of(const KeyValueConfig& kv) {
    const double H = kv.get_double("hurst", 0.7);
    HurstParam{H};  // throws on out-of-range H
    return H;
}

ExperimentConfig experiment_of(const KeyValueConfig& kv) {
    ExperimentConfig c;
    c.H = hurst_of(kv);
    c.process = process_of(kv);
    if (auto f = kv.get("f")) c.functions = split(*f, ';');
    c.a = kv.get_double("a", c.a);
    c.b = kv.get_double("b", c.b);
    c.eps = kv.get_doubles("eps_ladder", c.eps);
    c.grid = grid_of(kv);
    c.replicates = static_cast<int>(kv.get_int("replicates", c.replicates));
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
    c.rms_budget = kv.get_double("rms_budget", c.process == ProcessKind::fbm ? 0.10 : 0.15);
    c.tail_budget = kv.get_double("tail_budget", c.tail_budget);
    c.threads = static_cast<int>(kv.get_int("threads", c.threads));
    c.cache_dir = kv.get_string("cache_dir", "");
    return c;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << text;
}

struct Output {
    fs::path dir;
    RunManifest manifest;

    Output(const std::string& command, const KeyValueConfig& kv, const std::string& out_flag) {
        dir = default_output_dir(out_flag);
        fs::create_directories(dir);
        manifest.command = command;
        manifest.settings = kv;
        manifest.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
        manifest.started = utc_now();
    }
    void add(const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        manifest.outputs.push_back((dir / name).string());
    }
    void finish() {
        manifest.finished = utc_now();
        write_text(dir / (manifest.command + ".manifest.json"), manifest.to_json());
    }
};

// kernels

int cmd_kernels(const Flags& fl) {
    KeyValueConfig kv = merged(fl);
    const double H = hurst_of(kv);
    RunManifest man;
    man.command = "kernels";
    man.settings = kv;
    const std::string hash = man.hash();
    const ConstantSet cs = constants(HurstParam{H});
    const ConstantResiduals res = constant_identity_residuals(HurstParam{H});
    struct K1Row {
        double t, quadrature, closed, rel;
    };
    std::vector<K1Row> k1;
    for (double t : {0.5, 1.0, 2.0}) {
        const double q = K1(H, t, t, t);
        const double c = std::pow(t, 2 * H - 1) / (2 * H - 1);
        k1.push_back({t, q, c, std::abs(q - c) / c});
    }
    if (fl.json) {
        nlohmann::ordered_json j;
        j["manifest"] = hash;
        j["H"] = H;
        j["constants"] = {{"A", cs.A}, {"d", cs.d}, {"B", cs.B}, {"C", cs.C}, {"kappa3", cs.kappa3}};
        j["identity_residuals"] = {{"fbm", res.fbm}, {"rosenblatt", res.rosenblatt}};
        for (const auto& r : k1)
            j["K1_checks"].push_back(
                {{"t", r.t}, {"quadrature", r.quadrature}, {"closed_form", r.closed}, {"relative_error", r.rel}});
        std::cout << j.dump(2) << "\n";
        return kPass;
    }
    CsvTable tab({"manifest", "H", "quantity", "t", "value"});
    auto row = [&](const std::string& q, const std::string& t, double v) {
        tab.row({hash, fmt17(H), q, t, fmt17(v)});
    };
    row("A", "", cs.A);
    row("d", "", cs.d);
    row("B", "", cs.B);
    row("C", "", cs.C);
    row("kappa3", "", cs.kappa3);
    row("fbm_identity_residual", "", res.fbm);
    row("rosenblatt_identity_residual", "", res.rosenblatt);
    for (const auto& r : k1) {
        row("K1_quadrature", fmt17(r.t), r.quadrature);
        row("K1_closed_form", fmt17(r.t), r.closed);
        row("K1_relative_error", fmt17(r.t), r.rel);
    }
    std::cout << tab.str();
    return kPass;
}

// simulate

struct TimeStats {
    std::vector<double> times;
    std::vector<std::vector<double>> x;  // per time, per replicate
};

void stats_rows(CsvTable& tab, const std::string& hash, const char* proc, const std::string& prefix,
                const TimeStats& ts, double H, ProcessKind kind, const std::vector<double>& grid_var,
                const std::vector<std::vector<double>>& grid_cov, const std::vector<double>& grid_k3) {
    const double k3 = kind == ProcessKind::fbm ? 0.0 : kappa3(H);
    auto add = [&](const std::string& stat, double s, double t, Estimate e, const std::string& grid, double target) {
        const double z = e.se > 0 ? (e.value - target) / e.se : 0.0;
        tab.row({hash, proc, prefix + stat, fmt17(s), fmt17(t), fmt17(e.value), fmt17(e.se), grid, fmt17(target),
                 fmt17(z)});
    };
    const int n = static_cast<int>(ts.times.size());
    for (int p = 0; p < n; ++p) {
        const Moments m = moments(ts.x[p]);
        add("mean", 0.0, ts.times[p], {m.mean, m.se}, "0", 0.0);
    }
    for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q) {
            const double s = ts.times[p], t = ts.times[q];
            const double target = 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(t - s, 2 * H));
            const Estimate e = p == q ? sample_variance(ts.x[p]) : sample_covariance(ts.x[p], ts.x[q]);
            const std::string g = grid_cov.empty() ? "" : fmt17(p == q ? grid_var[p] : grid_cov[p][q]);
            add(p == q ? "variance" : "covariance", s, t, e, g, target);
        }
    for (int p = 0; p < n; ++p) {
        const double t = ts.times[p];
        add("third_cumulant", 0.0, t, sample_third_cumulant(ts.x[p]), grid_k3.empty() ? "" : fmt17(grid_k3[p]),
            k3 * std::pow(t, 3 * H));
    }
}

int cmd_simulate(const Flags& fl) {
    KeyValueConfig kv = merged(fl);
    const double H = hurst_of(kv);
    const ProcessKind kind = process_of(kv);
    const GridSpec spec = grid_of(kv);
    const int R = static_cast<int>(kv.get_int("replicates", 20000));
    const std::uint64_t seed = static_cast<std::uint64_t>(kv.get_int("seed", 20240611));
    const int npts = static_cast<int>(kv.get_int("time_points", 5));
    const int npaths = static_cast<int>(kv.get_int("paths", 0));
    const double tail_budget = kv.get_double("tail_budget", 0.005);
    const bool oracle = kv.get_int("exact_oracle", 0) != 0;
    if (R < 3) throw ConfigError("need at least three replicates");
    if (npts < 1) throw ConfigError("time_points must be positive");
    if (oracle && kind != ProcessKind::fbm) throw ConfigError("the exact oracle exists for fbm only");
    if (spec.right_end < 1.0) throw ConfigError("the grid must reach t = 1");

    std::vector<double> times;
    for (int k = 1; k <= npts; ++k) times.push_back(static_cast<double>(k) / npts);
    const double tail = kind == ProcessKind::fbm ? fbm_tail_bound(H, 1.0, spec.left_cut)
                                                 : rosenblatt_tail_bound(H, 1.0, spec.left_cut);
    if (tail > tail_budget) {
        std::ostringstream os;
        os << "tail bound " << fmt17(tail) << " exceeds budget " << fmt17(tail_budget) << " at t = 1";
        throw BudgetError(os.str());
    }

    Output out("simulate", kv, fl.out);
    const std::string hash = out.manifest.hash();
    const NoiseGrid grid = spec.build();
    const TimeMesh mesh = make_time_mesh(grid, grid.right_end());
    ProcessRep rep = kind == ProcessKind::fbm
                         ? make_fbm_rep(std::make_shared<FbmKernelTable>(fbm_kernel_table(H, grid, mesh)))
                         : make_rosenblatt_rep(std::make_shared<RosenblattKernelTable>(
                               rosenblatt_kernel_table(H, grid, mesh, spec.nodes_per_piece)));

    TimeStats ts{times, std::vector<std::vector<double>>(times.size())};
    for (int first = 0; first < R; first += 512) {
        const int cnt = std::min(512, R - first);
        const Eigen::MatrixXd s = sample_at_times(rep, grid, times, seed, first, cnt);
        for (std::size_t q = 0; q < times.size(); ++q)
            for (int r = 0; r < cnt; ++r) ts.x[q].push_back(s(q, r));
    }

    // Exact moments of the discretized process.
    const int n = static_cast<int>(times.size());
    std::vector<double> gvar(n), gk3;
    std::vector<std::vector<double>> gcov(n, std::vector<double>(n, 0.0));
    std::vector<int> js;
    for (double t : times) js.push_back(mesh.index_of(t));
    for (int j : js)
        if (j < 0) throw ConfigError("output times must lie on the time mesh; change time_points or cells");
    if (kind == ProcessKind::fbm) {
        const auto& c = rep.fbm->c;
        for (int p = 0; p < n; ++p)
            for (int q = p; q < n; ++q) {
                double acc = 0.0;
                for (int i = 0; i < grid.cell_count(); ++i) acc += grid.width(i) * c(js[p], i) * c(js[q], i);
                gcov[p][q] = acc;
            }
    } else {
        const auto& tab = *rep.rosenblatt;
        const Eigen::Map<const Eigen::VectorXd> cw(tab.cell_w.data(), tab.cells());
        const int nmax = tab.nodes_before(js.back());
        const Eigen::MatrixXd G = (tab.v.topRows(nmax) * cw.asDiagonal()) * tab.v.topRows(nmax).transpose();
        const Eigen::MatrixXd G2 = G.cwiseAbs2();
        const Eigen::Map<const Eigen::VectorXd> w(tab.node_w.data(), nmax);
        for (int p = 0; p < n; ++p)
            for (int q = p; q < n; ++q) {
                const int np = tab.nodes_before(js[p]), nq = tab.nodes_before(js[q]);
                gcov[p][q] = np && nq ? 2 * tab.d * tab.d * w.head(np).dot(G2.topLeftCorner(np, nq) * w.head(nq))
                                      : 0.0;
            }
        for (int j : js) gk3.push_back(tab.third_cumulant(j));
    }
    for (int p = 0; p < n; ++p) gvar[p] = gcov[p][p];

    CsvTable tab({"manifest", "process", "statistic", "s", "t", "estimate", "se", "grid_value", "target", "z"});
    const char* proc = process_name(kind);
    tab.row({hash, proc, "tail_bound", "", "1", fmt17(tail), "", "", "", ""});
    stats_rows(tab, hash, proc, "", ts, H, kind, gvar, gcov, gk3);
    if (oracle) {
        FbmExactOracle orc(H, times);
        TimeStats os{times, std::vector<std::vector<double>>(times.size())};
        for (int r = 0; r < R; ++r) {
            const auto v = orc.sample(seed, r);
            for (int q = 0; q < n; ++q) os.x[q].push_back(v[q]);
        }
        stats_rows(tab, hash, proc, "oracle_", os, H, kind, {}, {}, {});
    }
    out.add("simulate.csv", tab.str());
    if (npaths > 0) {
        CsvTable paths({"manifest", "process", "replicate", "t", "value"});
        const int jmax = js.back();
        for (int r = 0; r < std::min(npaths, R); ++r) {
            const auto path = process_path(rep, sample_noise(grid, seed, r));
            for (int j = 0; j <= jmax; ++j)
                paths.row({hash, proc, std::to_string(r), fmt17(mesh.t[j]), fmt17(path[j])});
        }
        out.add("paths.csv", paths.str());
    }
    out.finish();
    std::cout << tab.str();
    return kPass;
}

// verify-ito

int cmd_verify_ito(const Flags& fl) {
    KeyValueConfig kv = merged(fl);
    const ExperimentConfig cfg = experiment_of(kv);
    validate(cfg);
    const double tail = tail_bound(cfg);
    if (tail > cfg.tail_budget) {
        std::ostringstream os;
        os << "tail bound " << fmt17(tail) << " exceeds budget " << fmt17(cfg.tail_budget) << " at t = b";
        throw BudgetError(os.str());
    }
    Output out("verify-ito", kv, fl.out);
    const std::string hash = out.manifest.hash();
    const auto reports = ito_formula_check(cfg);
    const CsvTable csv = experiment_csv(reports, hash);
    out.add("verify-ito.csv", csv.str());
    out.add("verify-ito.json", experiment_json(reports, hash));
    out.finish();
    if (fl.json)
        std::cout << experiment_json(reports, hash);
    else
        std::cout << csv.str();
    bool ok = true;
    for (const auto& r : reports) {
        std::cerr << r.process << " " << r.function << ": " << (r.passed ? "pass" : "FAIL");
        for (std::size_t k = 0; k < r.rungs.size(); ++k)
            std::cerr << (k ? ", " : "  relative rms ") << fmt17(r.rungs[k].relative_rms);
        for (const auto& f : r.failures) std::cerr << "  [" << f << "]";
        std::cerr << "\n";
        ok = ok && r.passed;
    }
    return ok ? kPass : kFail;
}

// convergence

int cmd_convergence(const Flags& fl) {
    KeyValueConfig kv = merged(fl);
    const double H = hurst_of(kv);
    const ProcessKind kind = process_of(kv);
    const int R = static_cast<int>(kv.get_int("replicates", 20000));
    const std::uint64_t seed = static_cast<std::uint64_t>(kv.get_int("seed", 20240611));
    if (R < 3) throw ConfigError("need at least three replicates");
    Output out("convergence", kv, fl.out);
    const std::string hash = out.manifest.hash();
    std::vector<NormalizationRung> ladder;
    for (const GridSpec& g : grid_ladder()) ladder.push_back(normalization_rung(kind, H, g, R, seed));
    CsvTable tab({"manifest", "process", "rung", "grid", "cells", "left_cut", "spacing", "tail_bound",
                  "grid_variance", "grid_bias", "mc_variance", "mc_se", "z"});
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        const auto& r = ladder[k];
        tab.row({hash, process_name(kind), std::to_string(k), r.grid.describe(), std::to_string(r.cells),
                 fmt17(r.grid.left_cut), fmt17(r.grid.spacing()), fmt17(r.tail_bound), fmt17(r.grid_variance),
                 fmt17(r.bias()), fmt17(r.mc_variance.value), fmt17(r.mc_variance.se), fmt17(r.z())});
    }
    out.add("convergence.csv", tab.str());
    out.finish();
    std::cout << tab.str();
    const auto failures = normalization_failures(ladder);
    for (const auto& f : failures) std::cerr << "FAIL " << f << "\n";
    return failures.empty() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ito formulas for fractional Brownian motion and the Rosenblatt process"};
    app.require_subcommand(1);
    Flags kernels, simulate, verify, convergence;
    auto* k = app.add_subcommand("kernels", "constants and kernel closed-form checks");
    add_common(k, kernels);
    auto* s = app.add_subcommand("simulate", "moment, covariance and cumulant tables of simulated paths");
    add_common(s, simulate);
    s->add_flag("--exact-oracle", simulate.exact_oracle, "add exact-covariance fbm statistics");
    auto* v = app.add_subcommand("verify-ito", "Ito formula ladder over eps");
    add_common(v, verify);
    auto* c = app.add_subcommand("convergence", "Var(X_1) over the grid refinement ladder");
    add_common(c, convergence);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }
    try {
        if (*k) return cmd_kernels(kernels);
        if (*s) return cmd_simulate(simulate);
        if (*v) return cmd_verify_ito(verify);
        if (*c) return cmd_convergence(convergence);
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBudget;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFail;
    }
    return kConfig;
}
