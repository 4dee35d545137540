#include "oia/cli/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "oia/errors.hpp"

namespace oia {

std::string format_lambda(double lambda) {
    if (std::isinf(lambda)) return "inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, lambda);
    return std::string(buf, res.ptr);
}

double parse_lambda(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "∞") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !(v >= 0.0)) {
        throw std::invalid_argument("lambda must be a non-negative number or 'inf', got '" + text + "'");
    }
    return v;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::array<double, 9> metric_values(const ReportRow& r) {
    const MetricsBundle& m = r.metrics;
    return {m.action_f1[0], m.action_f1[1], m.action_f1[2], m.action_f1[3], m.action_mf1,
            m.action_f1_all, m.explanation_mf1, m.explanation_f1_all, r.wall_seconds};
}

}  // namespace

std::vector<std::string> report_cells(const ReportRow& row) {
    std::vector<std::string> c{row.config, format_lambda(row.lambda), std::to_string(row.k)};
    const auto v = metric_values(row);
    for (std::size_t i = 0; i < 8; ++i) c.push_back(fixed(v[i], 4));
    if (row.lambda == 0.0) c[9] = c[10] = "-";
    c.push_back(fixed(v[8], 2));
    return c;
}

std::vector<std::string> aggregate_cells(std::span<const ReportRow> seeds) {
    if (seeds.empty()) throw std::invalid_argument("aggregate: no rows");
    const ReportRow& first = seeds.front();
    std::vector<std::string> c{first.config, format_lambda(first.lambda), std::to_string(first.k)};
    const double n = static_cast<double>(seeds.size());
    for (std::size_t i = 0; i < 9; ++i) {
        double mean = 0.0;
        for (const ReportRow& r : seeds) mean += metric_values(r)[i];
        mean /= n;
        double ss = 0.0;
        for (const ReportRow& r : seeds) ss += (metric_values(r)[i] - mean) * (metric_values(r)[i] - mean);
        const double sd = seeds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        const int digits = i == 8 ? 2 : 4;
        c.push_back(fixed(mean, digits) + "±" + fixed(sd, digits));
    }
    if (first.lambda == 0.0) c[9] = c[10] = "-";
    return c;
}

std::string csv_line(std::span<const std::string> cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
    }
    return s;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> report_header() { return {kReportColumns.begin(), kReportColumns.end()}; }

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.find('"') != std::string::npos) {
            throw DataError(source + ":" + std::to_string(lineno) + ": quoted fields are not supported");
        }
        auto cells = split_commas(line);
        if (t.header.empty()) {
            for (const auto& c : cells) {
                if (c.empty()) throw DataError(source + ":" + std::to_string(lineno) + ": empty column name");
            }
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw DataError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                            " fields, got " + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) t.header = report_header();
    return t;
}

CsvTable in_report_order(const CsvTable& table) {
    const auto want = report_header();
    if (table.header.size() != want.size() || !std::is_permutation(table.header.begin(), table.header.end(), want.begin())) {
        return table;
    }
    std::vector<std::size_t> from;
    for (const auto& name : want) {
        from.push_back(static_cast<std::size_t>(std::find(table.header.begin(), table.header.end(), name) - table.header.begin()));
    }
    CsvTable out{want, {}};
    for (const auto& row : table.rows) {
        std::vector<std::string> r;
        for (std::size_t i : from) r.push_back(row[i]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

std::string to_markdown(const CsvTable& table) {
    auto line = [](const std::vector<std::string>& cells) {
        std::string s = "|";
        for (const auto& c : cells) s += " " + c + " |";
        return s + "\n";
    };
    std::string out = line(table.header) + "|";
    for (std::size_t i = 0; i < table.header.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : table.rows) out += line(r);
    return out;
}

std::string to_csv(const CsvTable& table) {
    std::string out = csv_line(table.header) + "\n";
    for (const auto& r : table.rows) out += csv_line(r) + "\n";
    return out;
}

}  // namespace oia
