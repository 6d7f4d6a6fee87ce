#include "adxprobe/fetch.hpp"

#include <algorithm>
#include <thread>
#include <tuple>

namespace adxprobe {

FetchResponse RecordingFetcher::fetch(const FetchRequest& request)
{
    auto response = inner_.fetch(request);
    std::lock_guard lock(mu_);
    entries_.push_back({request.at, request.identity.cookie_jar, request.identity.user_agent, request.url, response.status});
    return response;
}

std::vector<TranscriptEntry> RecordingFetcher::transcript() const
{
    std::vector<TranscriptEntry> out;
    {
        std::lock_guard lock(mu_);
        out = entries_;
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.at, a.cookie_jar, a.target) < std::tie(b.at, b.cookie_jar, b.target);
    });
    return out;
}

void LogicalClock::wait_until(double t) { now_ = std::max(now_, t); }

double WallClock::now() const
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void WallClock::wait_until(double t)
{
    const double delay = t - now();
    if (delay > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
}

} // namespace adxprobe
