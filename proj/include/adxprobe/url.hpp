#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace adxprobe {

/// Components of an absolute URL. scheme and host are lowercased.
struct Url {
    std::string scheme;
    std::string host;
    std::string port;     // empty when absent
    std::string target;   // path + query, "" when absent
    std::string fragment; // without '#'

    std::string origin() const;
    std::string str() const;
};

std::optional<Url> parse_url(std::string_view text);

bool is_absolute_url(std::string_view text);

// Strips the fragment, keeps the query, lowercases scheme and host.
// Returns the input unchanged when it does not parse.
std::string normalize_page_url(std::string_view text);

std::string url_host(std::string_view text);

// Resolves `ref` against `base` (absolute refs, scheme-relative, root-relative, relative).
std::string resolve_url(std::string_view base, std::string_view ref);

std::string percent_encode(std::string_view text);
std::string percent_decode(std::string_view text);

// Value of the first `key=` parameter in the query, percent-decoded.
std::optional<std::string> query_param(std::string_view url, std::string_view key);

} // namespace adxprobe
