#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adxprobe {

/// One logged request, as written by an OpenWPM-style crawler.
struct HttpRequestRecord {
    std::int64_t id = 0;
    std::int64_t crawl_id = 0;
    std::int64_t visit_id = 0;
    std::string url;
    std::string top_level_url;
    std::string method = "GET";
    std::string referrer;
    std::vector<std::pair<std::string, std::string>> headers;
};

struct AdxRule {
    std::string platform;
    std::vector<std::string> prefixes;
};

/// Exchange id -> ad source URL prefixes. Validated on construction.
class AdxRuleset {
public:
    AdxRuleset() = default;
    explicit AdxRuleset(std::vector<AdxRule> rules);

    static AdxRuleset parse(std::istream& in);
    static AdxRuleset load(const std::filesystem::path& path);

    const std::vector<AdxRule>& rules() const { return rules_; }
    std::vector<std::string> platforms() const;
    bool contains(std::string_view platform) const;
    const AdxRule* find(std::string_view platform) const;

    // Platform owning the first prefix that matches `url`.
    std::optional<std::string> match(std::string_view url) const;

private:
    std::vector<AdxRule> rules_;
};

// Scheme and host compare case-insensitively and must be equal; the prefix's
// path (if any) must be a case-sensitive prefix of the URL's path and query.
bool matches_prefix(std::string_view url, std::string_view prefix);

struct SkipEntry {
    std::size_t line = 0;
    std::string reason;
};

struct ParsedLog {
    std::vector<HttpRequestRecord> records;
    std::vector<SkipEntry> skipped;
};

// One JSON object per line. Blank lines are ignored; bad lines land in `skipped`.
ParsedLog parse_request_log(std::istream& in);
ParsedLog parse_request_log(const std::filesystem::path& path);

std::string to_json_line(const HttpRequestRecord& record);

std::set<std::string> detect_platforms(std::span<const HttpRequestRecord> records, const AdxRuleset& ruleset);

/// Page x platform monitoring relation. Rows are sorted by normalized page URL.
class MonitorMatrix {
public:
    using Cells = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

    MonitorMatrix() = default;
    MonitorMatrix(std::vector<std::string> pages, std::vector<std::string> platforms, Cells cells);

    const std::vector<std::string>& pages() const { return pages_; }
    const std::vector<std::string>& platforms() const { return platforms_; }
    const Cells& cells() const { return cells_; }

    std::optional<Eigen::Index> row(std::string_view page) const;
    std::optional<Eigen::Index> column(std::string_view platform) const;
    bool at(std::string_view page, std::string_view platform) const;

    void write_jsonl(std::ostream& out) const;
    void write_csv(std::ostream& out) const;
    static MonitorMatrix read_csv(std::istream& in);

    bool operator==(const MonitorMatrix& other) const;

private:
    std::vector<std::string> pages_;
    std::vector<std::string> platforms_;
    Cells cells_;
};

MonitorMatrix build_monitor_matrix(std::span<const HttpRequestRecord> records, const AdxRuleset& ruleset);

// Pages monitored by every listed platform, in matrix row order.
std::vector<std::string> intersect_pages(const MonitorMatrix& matrix, const std::set<std::string>& platforms);

struct PageText {
    std::string url;
    std::string text;
};

// Share of CJK codepoints among letter codepoints; 0 when there are no letters.
double cjk_ratio(std::string_view text);

std::vector<PageText> filter_language(std::vector<PageText> pages, double min_cjk_ratio = 0.30);

} // namespace adxprobe
