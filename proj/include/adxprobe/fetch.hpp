#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace adxprobe {

/// A browsing identity: what the server sees of the client.
struct Identity {
    std::string user_agent;
    std::string cookie_jar;

    bool operator==(const Identity&) const = default;
};

struct FetchRequest {
    std::string url;
    Identity identity;
    double at = 0.0; // logical time of issue, seconds
};

struct FetchResponse {
    int status = 0;
    std::string final_url;
    std::string body;
    std::string error;             // transport-level failure
    std::optional<double> latency; // simulated fetch duration; unset for live fetches

    bool ok() const { return error.empty() && status >= 200 && status < 400; }
};

class Fetcher {
public:
    virtual ~Fetcher() = default;
    // Must be safe to call from several threads.
    virtual FetchResponse fetch(const FetchRequest& request) = 0;
};

struct TranscriptEntry {
    double at = 0.0;
    std::string cookie_jar;
    std::string user_agent;
    std::string target;
    int status = 0;
};

/// Records every request passing through to the wrapped fetcher.
class RecordingFetcher : public Fetcher {
public:
    explicit RecordingFetcher(Fetcher& inner) : inner_(inner) {}

    FetchResponse fetch(const FetchRequest& request) override;

    // Sorted by (time, jar, target) so concurrent issue order does not matter.
    std::vector<TranscriptEntry> transcript() const;

private:
    Fetcher& inner_;
    mutable std::mutex mu_;
    std::vector<TranscriptEntry> entries_;
};

/// Time source for the visit loop.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() const = 0;
    virtual void wait_until(double t) = 0;
};

/// Jumps straight to the requested time.
class LogicalClock : public Clock {
public:
    double now() const override { return now_; }
    void wait_until(double t) override;

private:
    double now_ = 0.0;
};

/// Seconds since construction; waiting sleeps.
class WallClock : public Clock {
public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    double now() const override;
    void wait_until(double t) override;

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace adxprobe
