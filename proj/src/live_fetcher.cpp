#include "adxprobe/live_fetcher.hpp"

#include "adxprobe/url.hpp"

#include <httplib.h>

namespace adxprobe {

FetchResponse LiveFetcher::fetch(const FetchRequest& request)
{
    FetchResponse out;
    std::string url = request.url;
    for (int hop = 0; hop <= options_.max_redirects; ++hop) {
        const auto parsed = parse_url(url);
        if (!parsed || (parsed->scheme != "http" && parsed->scheme != "https")) {
            out.error = "unsupported URL: " + url;
            return out;
        }
        httplib::Client client(parsed->origin());
        const auto secs = static_cast<time_t>(options_.timeout_seconds);
        const auto usecs = static_cast<time_t>((options_.timeout_seconds - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        httplib::Headers headers{{"User-Agent", request.identity.user_agent}};
        if (auto cookies = cookie_header(request.identity.cookie_jar, parsed->host); !cookies.empty())
            headers.emplace("Cookie", cookies);

        auto result = client.Get(parsed->target.empty() ? "/" : parsed->target, headers);
        if (!result) {
            out.error = httplib::to_string(result.error());
            return out;
        }
        const auto [first, last] = result->headers.equal_range("Set-Cookie");
        for (auto it = first; it != last; ++it)
            store_cookie(request.identity.cookie_jar, parsed->host, it->second);

        out.status = result->status;
        out.final_url = url;
        out.body = result->body;
        if (result->status >= 300 && result->status < 400 && result->has_header("Location")) {
            url = resolve_url(url, result->get_header_value("Location"));
            continue;
        }
        return out;
    }
    out.error = "too many redirects";
    return out;
}

std::string LiveFetcher::cookie_header(const std::string& jar, const std::string& host) const
{
    std::lock_guard lock(mu_);
    std::string out;
    auto j = jars_.find(jar);
    if (j == jars_.end())
        return out;
    auto h = j->second.find(host);
    if (h == j->second.end())
        return out;
    for (const auto& [name, value] : h->second) {
        if (!out.empty())
            out += "; ";
        out += name + "=" + value;
    }
    return out;
}

void LiveFetcher::store_cookie(const std::string& jar, const std::string& host, const std::string& set_cookie)
{
    const std::string pair = set_cookie.substr(0, set_cookie.find(';'));
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0)
        return;
    auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(' '));
        s.erase(s.find_last_not_of(' ') + 1);
        return s;
    };
    std::lock_guard lock(mu_);
    jars_[jar][host][trim(pair.substr(0, eq))] = trim(pair.substr(eq + 1));
}

} // namespace adxprobe
