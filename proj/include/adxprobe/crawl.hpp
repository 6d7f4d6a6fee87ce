#pragma once

#include "adxprobe/detect.hpp"
#include "adxprobe/fetch.hpp"
#include "adxprobe/persona.hpp"

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace adxprobe {

struct AdLink {
    double discovered_at = 0.0;
    std::string persona;
    std::string control_page;
    std::string platform;
    std::string href;
    std::vector<int> frame_path; // frame index at each nesting level
};

/// What the ad reader captured from a landing page.
struct LandingSnapshot {
    std::string final_url;
    std::string title;
    std::string body_text;
    std::vector<std::string> images;
    std::string html;
};

LandingSnapshot make_snapshot(const FetchResponse& response);

enum class FetchStatus { Ok, Failed, Stale, Dropped };

std::string_view to_string(FetchStatus status);
FetchStatus fetch_status_from_string(std::string_view s);

struct AdObservation {
    std::size_t id = 0;
    AdLink link;
    LandingSnapshot snapshot;
    double fetched_at = 0.0;
    std::string fetch_identity; // reader cookie jar
    int day_index = 1;
    FetchStatus status = FetchStatus::Ok;
    std::string reason;
};

struct VisitOptions {
    int max_frame_depth = 4;
};

struct VisitOutcome {
    bool ok = true;
    std::string error;
    std::string content;
    std::vector<AdLink> links;
};

// Fetches the page (and, on control visits, every nested frame) under the
// persona's identity and collects ad links. Links are never followed here.
VisitOutcome execute_visit(const VisitEvent& event, const PersonaSpec& spec, Fetcher& fetcher,
                           const AdxRuleset& ruleset, const VisitOptions& options = {});

/// Worker pool that fetches landing pages under a dedicated reader identity.
/// Submission never blocks: a full queue yields a Dropped observation.
class AdReaderPool {
public:
    struct Options {
        double freshness_bound = 30.0;
        double day_length = 86400.0;
        std::size_t capacity = 4096;
        std::size_t workers = 4;
    };

    AdReaderPool(Fetcher& fetcher, Identity reader, Options options);
    ~AdReaderPool();

    AdReaderPool(const AdReaderPool&) = delete;
    AdReaderPool& operator=(const AdReaderPool&) = delete;

    // Returns false when the link was dropped because the queue was full.
    bool submit(AdLink link);

    // Waits for outstanding fetches; observations come back in submission order.
    std::vector<AdObservation> finish();

    const Identity& reader() const { return reader_; }

private:
    struct Job {
        std::size_t slot;
        AdLink link;
        std::chrono::steady_clock::time_point queued;
    };

    void work();
    AdObservation fetch_one(const Job& job);

    Fetcher& fetcher_;
    Identity reader_;
    Options options_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Job> queue_;
    std::vector<AdObservation> results_;
    bool closed_ = false;
    std::vector<std::thread> threads_;
};

// Throws when `reader` shares a cookie jar with any persona.
std::vector<AdObservation> dispatch_parallel_fetch(std::span<const AdLink> links, Fetcher& fetcher,
                                                   const Identity& reader, double freshness_bound,
                                                   std::span<const std::string> persona_jars = {},
                                                   double day_length = 86400.0);

} // namespace adxprobe
