#include "adxprobe/url.hpp"

#include <algorithm>
#include <cctype>

namespace adxprobe {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool valid_scheme(std::string_view s)
{
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front())))
        return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

bool valid_host(std::string_view h)
{
    if (h.empty())
        return false;
    return std::all_of(h.begin(), h.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '[' || c == ']' || c >= 0x80;
    });
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string Url::origin() const
{
    std::string out = scheme + "://" + host;
    if (!port.empty())
        out += ":" + port;
    return out;
}

std::string Url::str() const
{
    std::string out = origin() + target;
    if (!fragment.empty())
        out += "#" + fragment;
    return out;
}

std::optional<Url> parse_url(std::string_view text)
{
    const auto sep = text.find("://");
    if (sep == std::string_view::npos)
        return std::nullopt;
    Url url;
    if (!valid_scheme(text.substr(0, sep)))
        return std::nullopt;
    url.scheme = lower(text.substr(0, sep));

    std::string_view rest = text.substr(sep + 3);
    const auto authority_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, authority_end);
    rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    if (const auto at = authority.rfind('@'); at != std::string_view::npos)
        authority = authority.substr(at + 1);
    if (const auto colon = authority.rfind(':');
        colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
        url.port = std::string(authority.substr(colon + 1));
        authority = authority.substr(0, colon);
        if (!std::all_of(url.port.begin(), url.port.end(),
                         [](unsigned char c) { return std::isdigit(c); }))
            return std::nullopt;
    }
    if (!valid_host(authority))
        return std::nullopt;
    url.host = lower(authority);

    if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
        url.fragment = std::string(rest.substr(hash + 1));
        rest = rest.substr(0, hash);
    }
    url.target = std::string(rest);
    return url;
}

bool is_absolute_url(std::string_view text)
{
    if (text.find_first_of(" \t\r\n") != std::string_view::npos)
        return false;
    return parse_url(text).has_value();
}

std::string normalize_page_url(std::string_view text)
{
    auto url = parse_url(text);
    if (!url)
        return std::string(text);
    url->fragment.clear();
    return url->str();
}

std::string url_host(std::string_view text)
{
    auto url = parse_url(text);
    return url ? url->host : std::string{};
}

std::string resolve_url(std::string_view base, std::string_view ref)
{
    if (parse_url(ref))
        return std::string(ref);
    auto b = parse_url(base);
    if (!b)
        return std::string(ref);
    if (ref.starts_with("//"))
        return b->scheme + ":" + std::string(ref);
    if (ref.starts_with("/"))
        return b->origin() + std::string(ref);
    std::string dir = b->target.substr(0, b->target.find('?'));
    dir = dir.substr(0, dir.rfind('/') == std::string::npos ? 0 : dir.rfind('/') + 1);
    if (dir.empty())
        dir = "/";
    return b->origin() + dir + std::string(ref);
}

std::string percent_encode(std::string_view text)
{
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += digits[c >> 4];
            out += digits[c & 15];
        }
    }
    return out;
}

std::string percent_decode(std::string_view text)
{
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '%' && i + 2 < text.size()) {
            const int hi = hex_value(text[i + 1]);
            const int lo = hex_value(text[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>(hi * 16 + lo);
                i += 2;
                continue;
            }
        }
        out += text[i] == '+' ? ' ' : text[i];
    }
    return out;
}

std::optional<std::string> query_param(std::string_view url, std::string_view key)
{
    auto q = url.find('?');
    if (q == std::string_view::npos)
        return std::nullopt;
    std::string_view query = url.substr(q + 1);
    query = query.substr(0, query.find('#'));
    while (!query.empty()) {
        const auto amp = query.find('&');
        std::string_view pair = query.substr(0, amp);
        const auto eq = pair.find('=');
        if (pair.substr(0, eq) == key)
            return percent_decode(eq == std::string_view::npos ? std::string_view{} : pair.substr(eq + 1));
        if (amp == std::string_view::npos)
            break;
        query = query.substr(amp + 1);
    }
    return std::nullopt;
}

} // namespace adxprobe
