#include "adxprobe/crawl.hpp"

#include "adxprobe/error.hpp"
#include "adxprobe/text.hpp"
#include "adxprobe/url.hpp"

#include <algorithm>
#include <optional>

namespace adxprobe {

LandingSnapshot make_snapshot(const FetchResponse& response)
{
    LandingSnapshot snap;
    snap.final_url = response.final_url;
    snap.html = response.body;
    snap.title = extract_title(response.body).value_or("");
    snap.body_text = strip_markup(response.body, true);
    for (const auto& tag : scan_tags(response.body))
        if (tag.name == "img")
            if (auto src = tag.attr("src"); src && !src->empty())
                snap.images.push_back(resolve_url(response.final_url, *src));
    return snap;
}

std::string_view to_string(FetchStatus status)
{
    switch (status) {
    case FetchStatus::Ok: return "ok";
    case FetchStatus::Failed: return "failed";
    case FetchStatus::Stale: return "stale";
    case FetchStatus::Dropped: return "dropped";
    }
    return "failed";
}

FetchStatus fetch_status_from_string(std::string_view s)
{
    if (s == "ok") return FetchStatus::Ok;
    if (s == "failed") return FetchStatus::Failed;
    if (s == "stale") return FetchStatus::Stale;
    if (s == "dropped") return FetchStatus::Dropped;
    throw InputError("unknown fetch status " + std::string(s));
}

namespace {

struct FrameWalker {
    const VisitEvent& event;
    const PersonaSpec& spec;
    Fetcher& fetcher;
    const AdxRuleset& ruleset;
    const VisitOptions& options;
    std::vector<AdLink>& links;

    void walk(const std::string& html, const std::string& base, const std::vector<int>& path,
              const std::optional<std::string>& frame_platform)
    {
        int frame_index = 0;
        for (const auto& tag : scan_tags(html)) {
            if (tag.name == "iframe" || tag.name == "frame") {
                const auto src = tag.attr("src");
                if (!src || src->empty())
                    continue;
                const int index = frame_index++;
                if (static_cast<int>(path.size()) >= options.max_frame_depth)
                    continue;
                const std::string url = resolve_url(base, *src);
                auto response = fetcher.fetch({url, spec.identity, event.at});
                if (!response.ok())
                    continue;
                auto child = path;
                child.push_back(index);
                auto platform = ruleset.match(url);
                walk(response.body, response.final_url.empty() ? url : response.final_url, child,
                     platform ? platform : frame_platform);
            } else if (tag.name == "a") {
                const auto href = tag.attr("href");
                if (!href || href->empty() || href->starts_with("#") || href->starts_with("javascript:"))
                    continue;
                const std::string url = resolve_url(base, *href);
                auto platform = ruleset.match(url);
                if (!platform)
                    platform = frame_platform;
                if (platform)
                    links.push_back({event.at, spec.name, event.page, *platform, url, path});
            }
        }
    }
};

} // namespace

VisitOutcome execute_visit(const VisitEvent& event, const PersonaSpec& spec, Fetcher& fetcher,
                           const AdxRuleset& ruleset, const VisitOptions& options)
{
    VisitOutcome out;
    FetchResponse response;
    try {
        response = fetcher.fetch({event.page, spec.identity, event.at});
    } catch (const std::exception& e) {
        response.error = e.what();
    }
    if (!response.ok()) {
        out.ok = false;
        out.error = response.error.empty() ? "HTTP " + std::to_string(response.status) : response.error;
        return out;
    }
    out.content = response.body;
    if (event.kind == VisitKind::Control) {
        FrameWalker walker{event, spec, fetcher, ruleset, options, out.links};
        walker.walk(response.body, response.final_url.empty() ? event.page : response.final_url, {}, std::nullopt);
    }
    return out;
}

AdReaderPool::AdReaderPool(Fetcher& fetcher, Identity reader, Options options)
    : fetcher_(fetcher), reader_(std::move(reader)), options_(options)
{
    if (options_.freshness_bound <= 0)
        throw InputError("ad reader: freshness bound must be positive");
    for (std::size_t i = 0; i < std::max<std::size_t>(1, options_.workers); ++i)
        threads_.emplace_back([this] { work(); });
}

AdReaderPool::~AdReaderPool()
{
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_)
        if (t.joinable())
            t.join();
}

bool AdReaderPool::submit(AdLink link)
{
    std::unique_lock lock(mu_);
    const std::size_t slot = results_.size();
    results_.emplace_back();
    auto& obs = results_.back();
    obs.id = slot;
    obs.fetch_identity = reader_.cookie_jar;
    obs.day_index = day_index(link.discovered_at, options_.day_length);
    if (queue_.size() >= options_.capacity) {
        obs.link = std::move(link);
        obs.status = FetchStatus::Dropped;
        obs.reason = "reader queue full";
        return false;
    }
    obs.link = link;
    queue_.push_back({slot, std::move(link), std::chrono::steady_clock::now()});
    lock.unlock();
    cv_.notify_one();
    return true;
}

std::vector<AdObservation> AdReaderPool::finish()
{
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_)
        if (t.joinable())
            t.join();
    std::lock_guard lock(mu_);
    return results_;
}

void AdReaderPool::work()
{
    for (;;) {
        Job job;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [this] { return closed_ || !queue_.empty(); });
            if (queue_.empty())
                return;
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        AdObservation obs = fetch_one(job);
        std::lock_guard lock(mu_);
        results_[job.slot] = std::move(obs);
    }
}

AdObservation AdReaderPool::fetch_one(const Job& job)
{
    AdObservation obs;
    obs.id = job.slot;
    obs.link = job.link;
    obs.fetch_identity = reader_.cookie_jar;
    obs.day_index = day_index(job.link.discovered_at, options_.day_length);

    FetchResponse response;
    try {
        response = fetcher_.fetch({job.link.href, reader_, job.link.discovered_at});
    } catch (const std::exception& e) {
        response.error = e.what();
    }
    const double elapsed = response.latency
        ? *response.latency
        : std::chrono::duration<double>(std::chrono::steady_clock::now() - job.queued).count();
    obs.fetched_at = job.link.discovered_at + elapsed;

    if (!response.ok()) {
        obs.status = elapsed > options_.freshness_bound ? FetchStatus::Stale : FetchStatus::Failed;
        obs.reason = response.error.empty() ? "HTTP " + std::to_string(response.status) : response.error;
        return obs;
    }
    obs.snapshot = make_snapshot(response);
    if (obs.snapshot.final_url.empty())
        obs.snapshot.final_url = job.link.href;
    if (elapsed > options_.freshness_bound) {
        obs.status = FetchStatus::Stale;
        obs.reason = "fetched " + std::to_string(elapsed) + "s after discovery";
    }
    return obs;
}

std::vector<AdObservation> dispatch_parallel_fetch(std::span<const AdLink> links, Fetcher& fetcher,
                                                   const Identity& reader, double freshness_bound,
                                                   std::span<const std::string> persona_jars, double day_length)
{
    if (std::find(persona_jars.begin(), persona_jars.end(), reader.cookie_jar) != persona_jars.end())
        throw InputError("ad reader shares cookie jar '" + reader.cookie_jar + "' with a persona");
    AdReaderPool::Options options;
    options.freshness_bound = freshness_bound;
    options.day_length = day_length;
    options.capacity = std::max<std::size_t>(links.size(), 1);
    AdReaderPool pool(fetcher, reader, options);
    for (const auto& link : links)
        pool.submit(link);
    return pool.finish();
}

} // namespace adxprobe
