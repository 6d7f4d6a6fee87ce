#pragma once

#include "adxprobe/fetch.hpp"

#include <map>
#include <mutex>
#include <string>

namespace adxprobe {

/// Plain HTTP(S) GETs. Each cookie jar id owns its own host-keyed cookie store,
/// so cookies set for one identity are never sent by another.
class LiveFetcher : public Fetcher {
public:
    struct Options {
        double timeout_seconds = 30.0;
        int max_redirects = 5;
    };

    LiveFetcher() : LiveFetcher(Options{}) {}
    explicit LiveFetcher(Options options) : options_(options) {}

    FetchResponse fetch(const FetchRequest& request) override;

    // "name=value; ..." as it would be sent to `host` for `jar`.
    std::string cookie_header(const std::string& jar, const std::string& host) const;

private:
    void store_cookie(const std::string& jar, const std::string& host, const std::string& set_cookie);

    Options options_;
    mutable std::mutex mu_;
    std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> jars_;
};

} // namespace adxprobe
