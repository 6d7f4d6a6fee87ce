#include "adxprobe/report.hpp"

#include "adxprobe/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace adxprobe {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 360;
constexpr double kLeft = 60;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fixed(double v, int digits)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct Frame {
    int first_day;
    int last_day;
    double y_max;

    double x(double day) const
    {
        const double span = std::max(1, last_day - first_day);
        const double plot_w = kWidth - kLeft - kRight;
        if (first_day == last_day)
            return kLeft + plot_w / 2;
        return kLeft + (day - first_day) / span * plot_w;
    }
    double y(double value) const
    {
        const double plot_h = kHeight - kTop - kBottom;
        return kTop + plot_h - (y_max > 0 ? value / y_max : 0.0) * plot_h;
    }
};

void open_svg(std::ostringstream& out, const std::string& title)
{
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
        << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& y_label)
{
    const double x0 = kLeft;
    const double x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom;
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y0)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y0)
        << "\" stroke=\"black\"/>\n";
    for (int d = f.first_day; d <= f.last_day; ++d) {
        out << "<text x=\"" << num(f.x(d)) << "\" y=\"" << num(y0 + 15) << "\" text-anchor=\"middle\">" << d
            << "</text>\n";
    }
    out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">day</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = f.y_max * i / 4.0;
        out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(f.y(v) + 4) << "\" text-anchor=\"end\">"
            << fixed(v, 2) << "</text>\n";
        out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(f.y(v)) << "\" x2=\"" << num(x1) << "\" y2=\""
            << num(f.y(v)) << "\" stroke=\"#dddddd\"/>\n";
    }
    out << "<text x=\"14\" y=\"" << num(kHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << num(kHeight / 2) << ")\">" << xml_escape(y_label) << "</text>\n";
}

void draw_marker(std::ostringstream& out, const Frame& f, std::optional<int> day)
{
    if (!day || *day < f.first_day || *day > f.last_day)
        return;
    out << "<line class=\"switch\" x1=\"" << num(f.x(*day)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(f.x(*day))
        << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"red\" stroke-width=\"2\" stroke-dasharray=\"4 3\"/>\n";
    out << "<text x=\"" << num(f.x(*day) + 4) << "\" y=\"" << num(kTop + 10) << "\" fill=\"red\">switch</text>\n";
}

void draw_legend(std::ostringstream& out, const std::vector<std::string>& names)
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = kTop + 14.0 * static_cast<double>(i);
        const double x = kWidth - kRight + 12;
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"10\" height=\"10\" fill=\""
            << kPalette[i % std::size(kPalette)] << "\"/>\n";
        out << "<text x=\"" << num(x + 14) << "\" y=\"" << num(y + 9) << "\">" << xml_escape(names[i]) << "</text>\n";
    }
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << content;
}

} // namespace

std::string file_stem(std::string_view text)
{
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char c : text) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')
            out += static_cast<char>(c);
        else if (c >= 'A' && c <= 'Z')
            out += static_cast<char>(c - 'A' + 'a');
        else {
            out += '_';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

std::string render_line_chart_svg(const LineChart& chart)
{
    const Frame f{chart.first_day, std::max(chart.first_day, chart.last_day), chart.y_max > 0 ? chart.y_max : 1.0};
    std::ostringstream out;
    open_svg(out, chart.title);
    draw_axes(out, f, chart.y_label);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < chart.series.size(); ++i) {
        const auto& s = chart.series[i];
        names.push_back(s.name);
        const char* color = kPalette[i % std::size(kPalette)];
        if (s.points.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (std::size_t p = 0; p < s.points.size(); ++p)
                out << (p ? " " : "") << num(f.x(s.points[p].first)) << ',' << num(f.y(s.points[p].second));
            out << "\"/>\n";
        }
        for (const auto& [day, value] : s.points)
            out << "<circle cx=\"" << num(f.x(day)) << "\" cy=\"" << num(f.y(value)) << "\" r=\"3\" fill=\"" << color
                << "\"><title>" << xml_escape(s.name) << " day " << day << ": " << fixed(value, 4)
                << "</title></circle>\n";
    }
    draw_marker(out, f, chart.marker_day);
    draw_legend(out, names);
    out << "</svg>\n";
    return out.str();
}

std::string render_share_chart_svg(const std::string& title, const std::map<int, ShareMap>& shares,
                                   std::optional<int> marker_day)
{
    const int first = shares.empty() ? 1 : shares.begin()->first;
    const int last = shares.empty() ? 1 : shares.rbegin()->first;
    const Frame f{first, last, 1.0};
    std::set<std::string> categories;
    for (const auto& [_, m] : shares)
        for (const auto& [c, _v] : m)
            categories.insert(c);
    const std::vector<std::string> names(categories.begin(), categories.end());

    std::ostringstream out;
    open_svg(out, title);
    draw_axes(out, f, "share");
    const double plot_w = kWidth - kLeft - kRight;
    const double bar_w = std::max(4.0, plot_w / std::max(1, last - first + 1) * 0.6);
    for (const auto& [day, m] : shares) {
        double acc = 0.0;
        for (std::size_t i = 0; i < names.size(); ++i) {
            auto it = m.find(names[i]);
            if (it == m.end() || it->second <= 0)
                continue;
            const double top = f.y(acc + it->second);
            const double bottom = f.y(acc);
            out << "<rect x=\"" << num(f.x(day) - bar_w / 2) << "\" y=\"" << num(top) << "\" width=\"" << num(bar_w)
                << "\" height=\"" << num(bottom - top) << "\" fill=\"" << kPalette[i % std::size(kPalette)]
                << "\"><title>" << xml_escape(names[i]) << " day " << day << ": " << fixed(it->second, 4)
                << "</title></rect>\n";
            acc += it->second;
        }
    }
    draw_marker(out, f, marker_day);
    draw_legend(out, names);
    out << "</svg>\n";
    return out.str();
}

std::vector<std::string> render_report(const ReportInput& input, const std::filesystem::path& dir)
{
    if (input.scores.empty())
        throw InputError("report: no scored days");
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;

    auto switch_for = [&](const std::string& persona) -> std::optional<int> {
        auto it = input.switch_days.find(persona);
        return it == input.switch_days.end() ? std::nullopt : std::optional<int>(it->second);
    };

    // One chart per (persona:interest, platform) holding TTK and BAiLP.
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<const ScoreRow*>> groups;
    int first_day = input.scores.front().day;
    int last_day = first_day;
    for (const auto& r : input.scores) {
        groups[{r.persona, r.interest, r.platform}].push_back(&r);
        first_day = std::min(first_day, r.day);
        last_day = std::max(last_day, r.day);
    }
    for (const auto& [key, rows] : groups) {
        const auto& [persona, interest, platform] = key;
        LineChart chart;
        chart.title = persona + ":" + interest + " on " + platform;
        chart.y_label = "score";
        chart.first_day = first_day;
        chart.last_day = last_day;
        chart.marker_day = switch_for(persona);
        ChartSeries ttk_series{"TTK", {}};
        ChartSeries bailp_series{"BAiLP", {}};
        for (const auto* r : rows) {
            ttk_series.points.emplace_back(r->day, r->ttk);
            bailp_series.points.emplace_back(r->day, r->bailp);
        }
        chart.series = {ttk_series, bailp_series};
        const std::string name = "scores_" + file_stem(persona) + "_" + file_stem(interest) + "_" + file_stem(platform) + ".svg";
        write_file(dir / name, render_line_chart_svg(chart));
        files.push_back(name);
    }

    std::map<std::pair<std::string, std::string>, std::map<int, ShareMap>> share_groups;
    for (const auto& s : input.shares)
        share_groups[{s.persona, s.platform}][s.day] = s.shares;
    for (const auto& [key, days] : share_groups) {
        const std::string name = "shares_" + file_stem(key.first) + "_" + file_stem(key.second) + ".svg";
        write_file(dir / name,
                   render_share_chart_svg(key.first + " ad categories on " + key.second, days, switch_for(key.first)));
        files.push_back(name);
    }

    {
        std::ostringstream csv;
        write_scores_csv(csv, input.scores);
        write_file(dir / "scores.csv", csv.str());
        files.push_back("scores.csv");
    }
    {
        std::ostringstream csv;
        csv << "persona,platform,day,category,share\n";
        for (const auto& s : input.shares)
            for (const auto& [cat, v] : s.shares)
                csv << s.persona << ',' << s.platform << ',' << s.day << ',' << cat << ',' << fixed(v, 6) << '\n';
        write_file(dir / "shares.csv", csv.str());
        files.push_back("shares.csv");
    }

    std::sort(files.begin(), files.end());
    std::ostringstream html;
    html << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>adxprobe report</title></head><body>\n"
         << "<h1>Targeting scores</h1>\n";
    for (const auto& f : files)
        if (f.ends_with(".svg"))
            html << "<figure><img src=\"" << xml_escape(f) << "\" alt=\"" << xml_escape(f) << "\"></figure>\n";
    html << "<p><a href=\"scores.csv\">scores.csv</a> <a href=\"shares.csv\">shares.csv</a></p>\n</body></html>\n";
    write_file(dir / "index.html", html.str());
    files.push_back("index.html");
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace adxprobe
