#pragma once

#include "adxprobe/metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adxprobe {

struct ChartSeries {
    std::string name;
    std::vector<std::pair<int, double>> points; // (day, value)
};

struct LineChart {
    std::string title;
    std::string y_label;
    int first_day = 1;
    int last_day = 1;
    double y_max = 1.0;
    std::vector<ChartSeries> series;
    std::optional<int> marker_day; // vertical rule, e.g. the interest switch
};

// Self-contained SVG document.
std::string render_line_chart_svg(const LineChart& chart);

// Stacked bars of category share per day.
std::string render_share_chart_svg(const std::string& title, const std::map<int, ShareMap>& shares,
                                   std::optional<int> marker_day);

struct ReportInput {
    std::vector<ScoreRow> scores;
    std::vector<ShareRecord> shares;
    std::map<std::string, int> switch_days; // persona -> first day of its second phase
};

// Writes charts, CSV tables and an index page into `dir`; returns written file names, sorted.
// Throws when there is no scored day.
std::vector<std::string> render_report(const ReportInput& input, const std::filesystem::path& dir);

// Lowercase ASCII letters and digits kept, everything else hex-escaped; stable file stems.
std::string file_stem(std::string_view text);

} // namespace adxprobe
