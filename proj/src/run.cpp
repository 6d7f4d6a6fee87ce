#include "adxprobe/run.hpp"

#include "adxprobe/cluster.hpp"
#include "adxprobe/error.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace adxprobe {

const PersonaSpec& PersonaPlan::spec_for_day(int day) const
{
    const PersonaSpec* out = &phases.front().spec;
    for (const auto& p : phases)
        if (p.start_day <= day)
            out = &p.spec;
    return *out;
}

void PersonaPlan::validate() const
{
    if (phases.empty())
        throw InputError("persona " + name + ": no phases");
    if (phases.front().start_day != 1)
        throw InputError("persona " + name + ": first phase must start on day 1");
    for (std::size_t i = 0; i < phases.size(); ++i) {
        phases[i].spec.validate();
        if (i > 0 && phases[i].start_day <= phases[i - 1].start_day)
            throw InputError("persona " + name + ": phase start days must increase");
        if (!(phases[i].spec.identity == phases.front().spec.identity))
            throw InputError("persona " + name + ": phases must share one identity");
    }
}

std::vector<VisitEvent> plan_schedule(const PersonaPlan& plan, const RunOptions& options)
{
    std::vector<VisitEvent> out;
    for (std::size_t i = 0; i < plan.phases.size(); ++i) {
        const int start = plan.phases[i].start_day;
        if (start > options.horizon_days)
            break;
        const int end = i + 1 < plan.phases.size() ? std::min(plan.phases[i + 1].start_day, options.horizon_days + 1)
                                                   : options.horizon_days + 1;
        ScheduleOptions so;
        so.day_length = options.day_length;
        so.start_at = (start - 1) * options.day_length;
        const std::uint64_t seed = i == 0 ? plan.seed : detail::splitmix64(plan.seed * 31 + i);
        auto events = schedule_visits(plan.phases[i].spec, end - start, options.mean_gap, seed, so);
        out.insert(out.end(), events.begin(), events.end());
    }
    return out;
}

RunResult run_personas(std::span<const PersonaPlan> plans, Fetcher& fetcher, Clock& clock, const AdxRuleset& ruleset,
                       const Identity& reader, const RunOptions& options, const DayHook& on_day)
{
    std::set<std::string> jars;
    for (const auto& plan : plans) {
        plan.validate();
        if (!jars.insert(plan.identity().cookie_jar).second)
            throw InputError("two personas share cookie jar '" + plan.identity().cookie_jar + "'");
    }
    if (jars.contains(reader.cookie_jar))
        throw InputError("ad reader shares cookie jar '" + reader.cookie_jar + "' with a persona");

    struct Pending {
        double at;
        std::size_t plan;
        VisitEvent event;
    };
    std::vector<Pending> queue;
    for (std::size_t i = 0; i < plans.size(); ++i)
        for (auto& e : plan_schedule(plans[i], options))
            queue.push_back({e.at, i, std::move(e)});
    std::stable_sort(queue.begin(), queue.end(),
                     [](const Pending& a, const Pending& b) { return std::tie(a.at, a.plan) < std::tie(b.at, b.plan); });

    AdReaderPool::Options pool_options;
    pool_options.freshness_bound = options.freshness_bound;
    pool_options.day_length = options.day_length;
    pool_options.capacity = options.queue_capacity;
    pool_options.workers = options.reader_threads;
    AdReaderPool pool(fetcher, reader, pool_options);

    RunResult result;
    int current_day = 1;
    for (const auto& item : queue) {
        const int day = day_index(item.at, options.day_length);
        while (current_day < day) {
            ++current_day;
            if (on_day)
                on_day(current_day);
        }
        clock.wait_until(item.at);
        const auto& plan = plans[item.plan];
        const auto& spec = plan.spec_for_day(day);
        auto outcome = execute_visit(item.event, spec, fetcher, ruleset, options.visit);
        result.visits.push_back(
            {plan.name, item.event.page, item.event.kind, item.at, day, outcome.ok, outcome.error, outcome.links.size()});
        for (auto& link : outcome.links) {
            link.persona = plan.name;
            pool.submit(std::move(link));
        }
    }
    result.observations = pool.finish();
    return result;
}

IsolationReport audit_isolation(std::span<const TranscriptEntry> transcript,
                                std::span<const AdObservation> observations,
                                std::span<const std::string> persona_jars, double freshness_bound)
{
    IsolationReport report;
    std::set<std::string> landings;
    for (const auto& o : observations) {
        landings.insert(o.link.href);
        if (!o.snapshot.final_url.empty())
            landings.insert(o.snapshot.final_url);
        switch (o.status) {
        case FetchStatus::Ok: ++report.fresh; break;
        case FetchStatus::Stale: ++report.stale; break;
        case FetchStatus::Failed: ++report.failed; break;
        case FetchStatus::Dropped: ++report.dropped; break;
        }
        if (o.status == FetchStatus::Ok && o.fetched_at - o.link.discovered_at > freshness_bound)
            ++report.unflagged_late;
    }
    const std::set<std::string> jars(persona_jars.begin(), persona_jars.end());
    for (const auto& t : transcript) {
        if (!landings.contains(t.target))
            continue;
        ++report.landing_requests;
        if (jars.contains(t.cookie_jar)) {
            ++report.persona_landing_requests;
            report.violations.push_back(t.cookie_jar + " -> " + t.target);
        }
    }
    return report;
}

} // namespace adxprobe
