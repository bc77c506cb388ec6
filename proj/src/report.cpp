#include "fito/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace fito {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw std::length_error("CsvTable: row width mismatch");
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::str() const {
    auto line = [](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
            if (!quote) {
                s += cells[i];
                continue;
            }
            s += '"';
            for (char c : cells[i]) s += c == '"' ? std::string("\"\"") : std::string(1, c);
            s += '"';
        }
        return s + "\n";
    };
    std::string out = line(columns_);
    for (const auto& r : rows_) out += line(r);
    return out;
}

void CsvTable::write(const std::filesystem::path& file) const {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    os << str();
    if (!os) throw std::runtime_error("cannot write " + file.string());
}

CsvTable experiment_csv(const std::vector<ExperimentReport>& reports, const std::string& manifest) {
    CsvTable t({"manifest", "process", "function", "H", "a", "b", "replicates", "eps", "quantity", "mean", "se", "rms",
                "relative_rms"});
    for (const auto& r : reports) {
        auto add = [&](const std::string& eps, const std::string& q, const Moments& m, const std::string& rel) {
            t.row({manifest, r.process, r.function, fmt17(r.H), fmt17(r.a), fmt17(r.b), std::to_string(r.replicates),
                   eps, q, fmt17(m.mean), fmt17(m.se), fmt17(m.rms), rel});
        };
        add("", "lhs", r.lhs, "");
        add("", "rhs", r.rhs, "");
        add("", "ito_residual", r.ito_residual, r.lhs.rms > 0 ? fmt17(r.ito_residual.rms / r.lhs.rms) : "0");
        for (const auto& rung : r.rungs) {
            const std::string e = fmt17(rung.eps);
            add(e, "forward_sum", rung.forward, "");
            add(e, "difference", rung.difference, fmt17(rung.relative_rms));
            for (const auto& term : r.terms) add(e, term.name, term.stats, "");
        }
    }
    return t;
}

std::string experiment_json(const std::vector<ExperimentReport>& reports, const std::string& manifest) {
    nlohmann::ordered_json j;
    j["manifest"] = manifest;
    bool all = true;
    for (const auto& r : reports) {
        nlohmann::ordered_json e;
        e["process"] = r.process;
        e["function"] = r.function;
        e["grid"] = r.grid;
        e["replicates"] = r.replicates;
        e["tail_bound"] = r.tail_bound;
        e["lhs_mean"] = r.lhs.mean;
        e["lhs_se"] = r.lhs.se;
        e["ito_residual_rms"] = r.ito_residual.rms;
        for (const auto& term : r.terms) e["terms"][term.name] = {{"mean", term.stats.mean}, {"se", term.stats.se}};
        for (const auto& rung : r.rungs)
            e["rungs"].push_back({{"eps", rung.eps},
                                  {"rms", rung.difference.rms},
                                  {"relative_rms", rung.relative_rms}});
        e["third_cumulant_b"] = {{"value", r.third_cumulant_b.value}, {"se", r.third_cumulant_b.se}};
        e["checks"] = {{"rms-decreasing", r.monotone}, {"final-relative-rms", r.final_within_budget}};
        e["passed"] = r.passed;
        e["failures"] = r.failures;
        e["seconds"] = r.seconds;
        all = all && r.passed;
        j["experiments"].push_back(e);
    }
    j["passed"] = all;
    return j.dump(2) + "\n";
}

CsvTable trace_csv(const TraceLimitReport& report, const std::string& manifest) {
    CsvTable t({"manifest", "term", "eps", "gap", "limit_rms", "averaged_rms", "pointwise_gap_at_b", "quadrature",
                "monte_carlo", "mc_se", "grid_exact", "z"});
    for (const auto& g : report.gaps)
        t.row({manifest, g.term, fmt17(g.eps), fmt17(g.gap), fmt17(g.limit_rms), fmt17(g.averaged_rms),
               fmt17(g.pointwise_gap_at_b), "", "", "", "", ""});
    for (const auto& e : report.e_gaps)
        t.row({manifest, "e_kernel", fmt17(e.eps), fmt17(std::sqrt(std::max(0.0, e.quadrature))), "", "", "",
               fmt17(e.quadrature), fmt17(e.monte_carlo), fmt17(e.mc_se), fmt17(e.grid_exact), fmt17(e.z)});
    return t;
}

}  // namespace fito
