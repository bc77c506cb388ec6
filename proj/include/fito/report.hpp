#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fito/ito_engine.hpp"
#include "fito/trace_limits.hpp"

namespace fito {

// 17 significant digits, so a value written and read back is bit-identical.
std::string fmt17(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);
    CsvTable& row(std::vector<std::string> cells);
    std::string str() const;
    void write(const std::filesystem::path& file) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

// Columns: manifest, process, function, H, a, b, replicates, eps, quantity,
// mean, se, rms, relative_rms. One row per rung per quantity: the forward sum,
// its difference to the right-hand side, and every right-hand-side term.
CsvTable experiment_csv(const std::vector<ExperimentReport>& reports, const std::string& manifest);
std::string experiment_json(const std::vector<ExperimentReport>& reports, const std::string& manifest);

// Columns: manifest, term, eps, gap, limit_rms, averaged_rms, pointwise_gap_at_b;
// then the I_2(e) rows with term = e_kernel and quadrature/mc columns.
CsvTable trace_csv(const TraceLimitReport& report, const std::string& manifest);

}  // namespace fito
