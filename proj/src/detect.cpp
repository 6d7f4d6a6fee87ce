#include "adxprobe/detect.hpp"

#include "adxprobe/error.hpp"
#include "adxprobe/url.hpp"
#include "adxprobe/utf8.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace adxprobe {

using nlohmann::json;

namespace {

bool is_http_method(std::string_view m)
{
    static constexpr std::string_view methods[] = {
        "GET", "HEAD", "POST", "PUT", "DELETE", "CONNECT", "OPTIONS", "TRACE", "PATCH"};
    return std::find(std::begin(methods), std::end(methods), m) != std::end(methods);
}

std::int64_t integer_field(const json& obj, const char* key)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return 0;
    if (it->is_number_integer())
        return it->get<std::int64_t>();
    if (it->is_string())
        return std::stoll(it->get<std::string>());
    throw std::invalid_argument(std::string(key) + " is not an integer");
}

std::vector<std::pair<std::string, std::string>> parse_headers(const json& value)
{
    std::vector<std::pair<std::string, std::string>> out;
    if (value.is_null())
        return out;
    // OpenWPM stores headers as a JSON-encoded string.
    const json pairs = value.is_string() ? json::parse(value.get<std::string>()) : value;
    if (!pairs.is_array())
        throw std::invalid_argument("headers is not a list of pairs");
    for (const auto& pair : pairs) {
        if (!pair.is_array() || pair.size() != 2)
            throw std::invalid_argument("header entry is not a (name, value) pair");
        out.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
    return out;
}

HttpRequestRecord parse_record(const std::string& line)
{
    const json obj = json::parse(line);
    if (!obj.is_object())
        throw std::invalid_argument("line is not an object");
    for (const char* key : {"url", "top_level_url", "referrer"}) {
        if (!obj.contains(key))
            throw std::invalid_argument(std::string("missing field ") + key);
        if (!obj[key].is_string())
            throw std::invalid_argument(std::string(key) + " is not a string");
    }
    HttpRequestRecord rec;
    rec.id = integer_field(obj, "id");
    rec.crawl_id = integer_field(obj, "crawl_id");
    rec.visit_id = integer_field(obj, "visit_id");
    rec.url = obj["url"].get<std::string>();
    rec.top_level_url = obj["top_level_url"].get<std::string>();
    rec.referrer = obj["referrer"].get<std::string>();
    if (auto m = obj.find("method"); m != obj.end() && !m->is_null())
        rec.method = m->get<std::string>();
    if (auto h = obj.find("headers"); h != obj.end())
        rec.headers = parse_headers(*h);

    if (!is_absolute_url(rec.url))
        throw std::invalid_argument("url is not an absolute URL");
    if (!is_absolute_url(rec.top_level_url))
        throw std::invalid_argument("top_level_url is not an absolute URL");
    if (!is_http_method(rec.method))
        throw std::invalid_argument("method is not an HTTP method: " + rec.method);
    return rec;
}

} // namespace

AdxRuleset::AdxRuleset(std::vector<AdxRule> rules) : rules_(std::move(rules))
{
    std::set<std::string> ids;
    std::map<std::string, std::string> owner;
    for (const auto& rule : rules_) {
        if (rule.platform.empty())
            throw InputError("ruleset: empty platform id");
        if (!ids.insert(rule.platform).second)
            throw InputError("ruleset: duplicate platform id " + rule.platform);
        for (const auto& prefix : rule.prefixes) {
            if (!prefix.starts_with("http://") && !prefix.starts_with("https://"))
                throw InputError("ruleset: prefix without http(s) scheme: " + prefix);
            if (!parse_url(prefix))
                throw InputError("ruleset: malformed prefix: " + prefix);
            auto [it, fresh] = owner.emplace(prefix, rule.platform);
            if (!fresh)
                throw InputError("ruleset: prefix " + prefix + " listed under " + it->second + " and " + rule.platform);
        }
    }
}

AdxRuleset AdxRuleset::parse(std::istream& in)
{
    std::vector<AdxRule> rules;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line.starts_with("#"))
            continue;
        try {
            const json obj = json::parse(line);
            rules.push_back({obj.at("platform").get<std::string>(),
                             obj.at("prefixes").get<std::vector<std::string>>()});
        } catch (const json::exception& e) {
            throw InputError("ruleset line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return AdxRuleset(std::move(rules));
}

AdxRuleset AdxRuleset::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read ruleset " + path.string());
    return parse(in);
}

std::vector<std::string> AdxRuleset::platforms() const
{
    std::vector<std::string> out;
    for (const auto& r : rules_)
        out.push_back(r.platform);
    return out;
}

bool AdxRuleset::contains(std::string_view platform) const { return find(platform) != nullptr; }

const AdxRule* AdxRuleset::find(std::string_view platform) const
{
    for (const auto& r : rules_)
        if (r.platform == platform)
            return &r;
    return nullptr;
}

std::optional<std::string> AdxRuleset::match(std::string_view url) const
{
    for (const auto& rule : rules_)
        for (const auto& prefix : rule.prefixes)
            if (matches_prefix(url, prefix))
                return rule.platform;
    return std::nullopt;
}

bool matches_prefix(std::string_view url, std::string_view prefix)
{
    const auto u = parse_url(url);
    const auto p = parse_url(prefix);
    if (!u || !p)
        return false;
    if (u->scheme != p->scheme || u->host != p->host)
        return false;
    if (!p->port.empty() && p->port != u->port)
        return false;
    return u->target.starts_with(p->target);
}

ParsedLog parse_request_log(std::istream& in)
{
    ParsedLog out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.records.push_back(parse_record(line));
        } catch (const std::exception& e) {
            out.skipped.push_back({lineno, e.what()});
        }
    }
    return out;
}

ParsedLog parse_request_log(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read request log " + path.string());
    return parse_request_log(in);
}

std::string to_json_line(const HttpRequestRecord& r)
{
    json headers = json::array();
    for (const auto& [k, v] : r.headers)
        headers.push_back({k, v});
    json obj = {{"id", r.id},           {"crawl_id", r.crawl_id},
                {"visit_id", r.visit_id}, {"url", r.url},
                {"top_level_url", r.top_level_url}, {"method", r.method},
                {"referrer", r.referrer}, {"headers", headers.dump()}};
    return obj.dump();
}

std::set<std::string> detect_platforms(std::span<const HttpRequestRecord> records, const AdxRuleset& ruleset)
{
    std::set<std::string> found;
    for (const auto& rec : records)
        for (const auto& rule : ruleset.rules())
            if (!found.contains(rule.platform))
                for (const auto& prefix : rule.prefixes)
                    if (matches_prefix(rec.url, prefix)) {
                        found.insert(rule.platform);
                        break;
                    }
    return found;
}

MonitorMatrix::MonitorMatrix(std::vector<std::string> pages, std::vector<std::string> platforms, Cells cells)
    : pages_(std::move(pages)), platforms_(std::move(platforms)), cells_(std::move(cells))
{
    if (cells_.rows() != static_cast<Eigen::Index>(pages_.size())
        || cells_.cols() != static_cast<Eigen::Index>(platforms_.size()))
        throw Error("monitor matrix: cell dimensions do not match pages x platforms");
}

std::optional<Eigen::Index> MonitorMatrix::row(std::string_view page) const
{
    const std::string key = normalize_page_url(page);
    auto it = std::lower_bound(pages_.begin(), pages_.end(), key);
    if (it != pages_.end() && *it == key)
        return it - pages_.begin();
    // Rows read from foreign files may not be sorted.
    it = std::find(pages_.begin(), pages_.end(), key);
    if (it != pages_.end())
        return it - pages_.begin();
    return std::nullopt;
}

std::optional<Eigen::Index> MonitorMatrix::column(std::string_view platform) const
{
    auto it = std::find(platforms_.begin(), platforms_.end(), platform);
    if (it == platforms_.end())
        return std::nullopt;
    return it - platforms_.begin();
}

bool MonitorMatrix::at(std::string_view page, std::string_view platform) const
{
    const auto r = row(page);
    const auto c = column(platform);
    return r && c && cells_(*r, *c);
}

void MonitorMatrix::write_jsonl(std::ostream& out) const
{
    for (std::size_t i = 0; i < pages_.size(); ++i) {
        json ids = json::array();
        for (std::size_t j = 0; j < platforms_.size(); ++j)
            if (cells_(i, j))
                ids.push_back(platforms_[j]);
        out << json{{"page", pages_[i]}, {"platforms", ids}}.dump() << '\n';
    }
}

namespace {

// Quotes a CSV field when it contains a delimiter, quote or newline.
std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void MonitorMatrix::write_csv(std::ostream& out) const
{
    out << "page";
    for (const auto& p : platforms_)
        out << ',' << csv_field(p);
    out << '\n';
    for (std::size_t i = 0; i < pages_.size(); ++i) {
        out << csv_field(pages_[i]);
        for (std::size_t j = 0; j < platforms_.size(); ++j)
            out << ',' << (cells_(i, j) ? '1' : '0');
        out << '\n';
    }
}

MonitorMatrix MonitorMatrix::read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError("matrix csv: missing header");
    auto header = split_csv_line(line);
    if (header.empty() || header.front() != "page")
        throw InputError("matrix csv: header must start with 'page'");
    std::vector<std::string> platforms(header.begin() + 1, header.end());
    std::vector<std::string> pages;
    std::vector<std::vector<bool>> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw InputError("matrix csv: row width mismatch for " + fields.front());
        pages.push_back(fields.front());
        std::vector<bool> row;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            if (fields[j] != "0" && fields[j] != "1")
                throw InputError("matrix csv: cell must be 0 or 1");
            row.push_back(fields[j] == "1");
        }
        rows.push_back(std::move(row));
    }
    Cells cells(static_cast<Eigen::Index>(pages.size()), static_cast<Eigen::Index>(platforms.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < platforms.size(); ++j)
            cells(i, j) = rows[i][j];
    return MonitorMatrix(std::move(pages), std::move(platforms), std::move(cells));
}

bool MonitorMatrix::operator==(const MonitorMatrix& other) const
{
    return pages_ == other.pages_ && platforms_ == other.platforms_
        && cells_.rows() == other.cells_.rows() && cells_.cols() == other.cells_.cols()
        && (cells_ == other.cells_).all();
}

MonitorMatrix build_monitor_matrix(std::span<const HttpRequestRecord> records, const AdxRuleset& ruleset)
{
    std::map<std::string, std::vector<HttpRequestRecord>> by_page;
    for (const auto& rec : records)
        by_page[normalize_page_url(rec.top_level_url)].push_back(rec);

    const auto platforms = ruleset.platforms();
    std::vector<std::string> pages;
    MonitorMatrix::Cells cells = MonitorMatrix::Cells::Constant(
        static_cast<Eigen::Index>(by_page.size()), static_cast<Eigen::Index>(platforms.size()), false);
    Eigen::Index i = 0;
    for (const auto& [page, recs] : by_page) {
        pages.push_back(page);
        const auto found = detect_platforms(recs, ruleset);
        for (std::size_t j = 0; j < platforms.size(); ++j)
            cells(i, static_cast<Eigen::Index>(j)) = found.contains(platforms[j]);
        ++i;
    }
    return MonitorMatrix(std::move(pages), platforms, std::move(cells));
}

std::vector<std::string> intersect_pages(const MonitorMatrix& matrix, const std::set<std::string>& platforms)
{
    if (platforms.empty())
        throw InputError("intersect: platform set is empty");
    std::vector<Eigen::Index> cols;
    for (const auto& p : platforms) {
        auto c = matrix.column(p);
        if (!c)
            throw InputError("intersect: unknown platform '" + p + "'");
        cols.push_back(*c);
    }
    std::vector<std::string> out;
    for (Eigen::Index r = 0; r < matrix.cells().rows(); ++r) {
        bool all = true;
        for (auto c : cols)
            all = all && matrix.cells()(r, c);
        if (all)
            out.push_back(matrix.pages()[static_cast<std::size_t>(r)]);
    }
    return out;
}

double cjk_ratio(std::string_view text)
{
    std::size_t letters = 0;
    std::size_t cjk = 0;
    for (char32_t cp : utf8::decode(text)) {
        if (!utf8::is_letter(cp))
            continue;
        ++letters;
        if (utf8::is_cjk(cp))
            ++cjk;
    }
    return letters == 0 ? 0.0 : static_cast<double>(cjk) / static_cast<double>(letters);
}

std::vector<PageText> filter_language(std::vector<PageText> pages, double min_cjk_ratio)
{
    if (min_cjk_ratio < 0.0 || min_cjk_ratio > 1.0)
        throw InputError("filter_language: ratio must lie in [0, 1]");
    std::erase_if(pages, [&](const PageText& p) { return cjk_ratio(p.text) < min_cjk_ratio; });
    return pages;
}

} // namespace adxprobe
