#pragma once

#include <array>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "oia/objectives/metrics.hpp"

namespace oia {

// Fixed report column order.
inline constexpr std::array<const char*, 12> kReportColumns = {
    "config", "lambda", "k", "F", "S", "L", "R", "action_mF1", "action_F1all", "expl_mF1", "expl_F1all", "wall_seconds"};

struct ReportRow {
    std::string config;
    double lambda = 1.0;
    std::size_t k = 0;
    MetricsBundle metrics;
    double wall_seconds = 0.0;
};

// "inf" for the explanation-only weight, shortest round-trip text otherwise.
std::string format_lambda(double lambda);
double parse_lambda(const std::string& text);

// Explanation cells read "-" when lambda is 0.
std::vector<std::string> report_cells(const ReportRow& row);

// Cells of several seeds of one configuration as "mean±sd" (sample sd; 0 for
// a single seed). Config, lambda and k are taken from the first row.
std::vector<std::string> aggregate_cells(std::span<const ReportRow> seeds);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string csv_line(std::span<const std::string> cells);

// Plain comma-separated values without quoting. Every row must have the
// header's field count; DataError names the offending line otherwise. Empty
// input yields the report header with no rows.
CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");

// If the header holds exactly the report columns, columns are put in report
// order; any other table keeps its own order.
CsvTable in_report_order(const CsvTable& table);

std::string to_markdown(const CsvTable& table);
std::string to_csv(const CsvTable& table);

}  // namespace oia
