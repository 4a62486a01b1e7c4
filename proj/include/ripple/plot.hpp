#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ripple::plot {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Deterministic SVG line chart, one polyline per series.
std::string render_svg(const std::vector<Series>& series, const PlotSpec& spec);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
};

/// Plain comma-separated values without quoting (the toolkit never writes
/// commas inside fields except in provider ids, which it rejects).
CsvTable parse_csv(std::string_view csv);

struct Columns {
    std::string x;
    std::string y;
    std::string series;  // empty: single series
};

/// Picks x/y/series columns for the CSV shapes the toolkit writes (ripple
/// curve, accuracy curve, checkpoint sweep).
Columns infer_columns(const CsvTable& table);

std::string csv_to_svg(std::string_view csv, const std::string& title,
                       const std::optional<Columns>& columns = std::nullopt);

}  // namespace ripple::plot
