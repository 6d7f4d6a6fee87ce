#pragma once

#include "adxprobe/fetch.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe {

class Taxonomy;

inline constexpr std::string_view kBlankInterest = "BLANK";
inline constexpr std::size_t kTrainingPages = 10;
inline constexpr std::size_t kControlPages = 5;

enum class VisitKind { Training, Control };

std::string_view to_string(VisitKind kind);
VisitKind visit_kind_from_string(std::string_view s);

/// An interest persona: identity plus the pages it trains on and collects ads from.
struct PersonaSpec {
    std::string name;
    std::string interest; // taxonomy category or kBlankInterest
    Identity identity;
    std::vector<std::string> training_pages;
    std::vector<std::string> control_pages;

    bool is_blank() const { return interest == kBlankInterest; }
    // Training pages followed by control pages.
    std::vector<std::string> pool() const;
    // Throws when an invariant is broken.
    void validate() const;
};

struct VisitEvent {
    double at = 0.0;
    std::string page;
    VisitKind kind = VisitKind::Control;
};

struct LabeledPage {
    std::string url;
    std::string category;
};

struct PersonaBuild {
    PersonaSpec spec;
    std::vector<std::string> warnings;
};

// `labeled` is in ranking order; the first `top_k` pages carrying `interest`
// (and not among the control pages) become training pages.
PersonaBuild make_persona(std::string name, std::string_view interest, std::span<const LabeledPage> labeled,
                          std::vector<std::string> control_pages, Identity identity,
                          const Taxonomy* taxonomy = nullptr, std::size_t top_k = kTrainingPages);

struct ScheduleOptions {
    double day_length = 86400.0;
    double start_at = 0.0;
};

// Exponential gaps (inverse CDF on a seeded generator); each page drawn
// uniformly from the pool. Events end before start_at + horizon_days * day_length.
std::vector<VisitEvent> schedule_visits(const PersonaSpec& spec, int horizon_days, double mean_gap_seconds,
                                        std::uint64_t seed, const ScheduleOptions& options = {});

int day_index(double at, double day_length);

// Uniform double in (0, 1) from 53 random bits.
double open_unit(std::mt19937_64& rng);

// Unbiased integer in [0, n).
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

} // namespace adxprobe
