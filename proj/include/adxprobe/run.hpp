#pragma once

#include "adxprobe/crawl.hpp"
#include "adxprobe/detect.hpp"
#include "adxprobe/fetch.hpp"
#include "adxprobe/persona.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace adxprobe {

/// Persona behaviour from `start_day` on; later phases replace earlier ones.
struct PersonaPhase {
    int start_day = 1;
    PersonaSpec spec;
};

struct PersonaPlan {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<PersonaPhase> phases;

    const PersonaSpec& spec_for_day(int day) const;
    const Identity& identity() const { return phases.front().spec.identity; }
    // Throws unless phases start on day 1, increase, and share one identity.
    void validate() const;
};

struct RunOptions {
    double mean_gap = 180.0;
    int horizon_days = 10;
    double day_length = 86400.0;
    double freshness_bound = 30.0;
    std::size_t queue_capacity = 4096;
    std::size_t reader_threads = 4;
    VisitOptions visit;
};

struct VisitRecord {
    std::string persona;
    std::string page;
    VisitKind kind = VisitKind::Control;
    double at = 0.0;
    int day = 1;
    bool ok = true;
    std::string error;
    std::size_t links = 0;
};

struct RunResult {
    std::vector<VisitRecord> visits;
    std::vector<AdObservation> observations;
};

// Each phase gets its own stream derived from the plan seed.
std::vector<VisitEvent> plan_schedule(const PersonaPlan& plan, const RunOptions& options);

// Called once per day boundary, with the day being entered.
using DayHook = std::function<void(int day)>;

// Visits every persona's schedule in global time order and hands discovered ad
// links to a reader pool running under `reader`.
RunResult run_personas(std::span<const PersonaPlan> plans, Fetcher& fetcher, Clock& clock, const AdxRuleset& ruleset,
                       const Identity& reader, const RunOptions& options, const DayHook& on_day = {});

struct IsolationReport {
    std::size_t landing_requests = 0;
    std::size_t persona_landing_requests = 0;
    std::vector<std::string> violations;
    std::size_t fresh = 0;
    std::size_t stale = 0;
    std::size_t failed = 0;
    std::size_t dropped = 0;
    std::size_t unflagged_late = 0; // observations past the bound but not marked stale

    bool ok() const { return persona_landing_requests == 0 && unflagged_late == 0; }
};

// Landing URLs are the hrefs of the observations; any transcript entry for one
// of them under a persona jar is a violation.
IsolationReport audit_isolation(std::span<const TranscriptEntry> transcript,
                                std::span<const AdObservation> observations,
                                std::span<const std::string> persona_jars, double freshness_bound);

} // namespace adxprobe
