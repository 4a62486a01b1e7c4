#include "ripple/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "ripple/error.hpp"

namespace ripple::plot {
namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 50, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    if (std::abs(v - std::round(v)) < 1e-9) std::snprintf(buf, sizeof buf, "%.0f", v);
    else std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

double parse_number(const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ArgumentError("not a number in CSV: '" + s + "'");
    return v;
}

}  // namespace

std::string render_svg(const std::vector<Series>& series, const PlotSpec& spec) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const double pad = (ymax - ymin) * 0.05;
    ymin -= pad;
    ymax += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(kWidth) + "\" height=\"" +
           fmt2(kHeight) + "\" viewBox=\"0 0 " + fmt2(kWidth) + " " + fmt2(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt2(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + escape(spec.title) + "</text>\n";
    svg += "<rect x=\"" + fmt2(kLeft) + "\" y=\"" + fmt2(kTop) + "\" width=\"" + fmt2(pw) + "\" height=\"" +
           fmt2(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        double xv = xmin + (xmax - xmin) * i / 5.0;
        double yv = ymin + (ymax - ymin) * i / 5.0;
        svg += "<line x1=\"" + fmt2(sx(xv)) + "\" y1=\"" + fmt2(kTop + ph) + "\" x2=\"" + fmt2(sx(xv)) +
               "\" y2=\"" + fmt2(kTop + ph + 5) + "\" stroke=\"#333\"/>\n";
        svg += "<text x=\"" + fmt2(sx(xv)) + "\" y=\"" + fmt2(kTop + ph + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(xv) +
               "</text>\n";
        svg += "<line x1=\"" + fmt2(kLeft - 5) + "\" y1=\"" + fmt2(sy(yv)) + "\" x2=\"" + fmt2(kLeft + pw) +
               "\" y2=\"" + fmt2(sy(yv)) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + fmt2(kLeft - 8) + "\" y=\"" + fmt2(sy(yv) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(yv) +
               "</text>\n";
    }
    svg += "<text x=\"" + fmt2(kLeft + pw / 2) + "\" y=\"" + fmt2(kHeight - 15) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(spec.x_label) +
           "</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt2(kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 18 " + fmt2(kTop + ph / 2) + ")\">" + escape(spec.y_label) +
           "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % std::size(kPalette)];
        std::string pts;
        for (auto [x, y] : s.points) {
            if (!pts.empty()) pts += ' ';
            pts += fmt2(sx(x)) + "," + fmt2(sy(y));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.8\" points=\"" +
               pts + "\"/>\n";
        double ly = kTop + 12 + 18.0 * static_cast<double>(i);
        svg += "<line x1=\"" + fmt2(kLeft + pw + 12) + "\" y1=\"" + fmt2(ly) + "\" x2=\"" +
               fmt2(kLeft + pw + 32) + "\" y2=\"" + fmt2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt2(kLeft + pw + 38) + "\" y=\"" + fmt2(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s.name) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

CsvTable parse_csv(std::string_view csv) {
    CsvTable t;
    auto split = [](std::string_view line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            auto comma = line.find(',', start);
            cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return cells;
    };
    std::size_t pos = 0;
    bool first = true;
    while (pos < csv.size()) {
        auto nl = csv.find('\n', pos);
        std::string_view line = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? csv.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (first) {
            t.header = split(line);
            first = false;
        } else {
            auto cells = split(line);
            if (cells.size() != t.header.size())
                throw ArgumentError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                    std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw ArgumentError("CSV has no header");
    return t;
}

Columns infer_columns(const CsvTable& table) {
    if (table.column("mean_delta")) return {"distance", "mean_delta", ""};
    if (table.column("stage") && table.column("requested_distance"))
        return {"stage", "accuracy", "requested_distance"};
    if (table.column("accuracy") && table.column("provider_id")) return {"distance", "accuracy", "provider_id"};
    if (table.header.size() >= 2) return {table.header[0], table.header[1], ""};
    throw ArgumentError("cannot infer plot columns from CSV header");
}

std::string csv_to_svg(std::string_view csv, const std::string& title, const std::optional<Columns>& columns) {
    CsvTable t = parse_csv(csv);
    if (t.rows.empty()) throw ArgumentError("CSV has no data rows");
    Columns c = columns ? *columns : infer_columns(t);
    auto xi = t.column(c.x), yi = t.column(c.y);
    if (!xi || !yi) throw ArgumentError("CSV lacks column '" + (xi ? c.y : c.x) + "'");
    std::optional<std::size_t> si;
    if (!c.series.empty()) {
        si = t.column(c.series);
        if (!si) throw ArgumentError("CSV lacks column '" + c.series + "'");
    }

    std::vector<Series> series;
    std::map<std::string, std::size_t> slot;
    for (const auto& row : t.rows) {
        std::string name = si ? c.series + "=" + row[*si] : c.y;
        if (si && c.series == "provider_id") name = row[*si];
        auto [it, fresh] = slot.emplace(name, series.size());
        if (fresh) series.push_back({name, {}});
        series[it->second].points.emplace_back(parse_number(row[*xi]), parse_number(row[*yi]));
    }
    for (auto& s : series) std::stable_sort(s.points.begin(), s.points.end(),
                                            [](auto& a, auto& b) { return a.first < b.first; });
    return render_svg(series, {title, c.x, c.y});
}

}  // namespace ripple::plot
