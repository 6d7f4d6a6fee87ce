#include "adxprobe/persona.hpp"

#include "adxprobe/error.hpp"
#include "adxprobe/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace adxprobe {

std::string_view to_string(VisitKind kind) { return kind == VisitKind::Training ? "TRAINING" : "CONTROL"; }

VisitKind visit_kind_from_string(std::string_view s)
{
    if (s == "TRAINING")
        return VisitKind::Training;
    if (s == "CONTROL")
        return VisitKind::Control;
    throw InputError("unknown visit kind " + std::string(s));
}

std::vector<std::string> PersonaSpec::pool() const
{
    std::vector<std::string> out = training_pages;
    out.insert(out.end(), control_pages.begin(), control_pages.end());
    return out;
}

void PersonaSpec::validate() const
{
    if (is_blank() && !training_pages.empty())
        throw InputError("persona " + name + ": blank persona has training pages");
    if (training_pages.size() > kTrainingPages)
        throw InputError("persona " + name + ": more than 10 training pages");
    if (control_pages.size() != kControlPages)
        throw InputError("persona " + name + ": needs exactly 5 control pages");
    std::set<std::string> controls(control_pages.begin(), control_pages.end());
    for (const auto& p : training_pages)
        if (controls.contains(p))
            throw InputError("persona " + name + ": page is both training and control: " + p);
    if (identity.cookie_jar.empty())
        throw InputError("persona " + name + ": empty cookie jar id");
}

PersonaBuild make_persona(std::string name, std::string_view interest, std::span<const LabeledPage> labeled,
                          std::vector<std::string> control_pages, Identity identity, const Taxonomy* taxonomy,
                          std::size_t top_k)
{
    if (control_pages.size() != kControlPages)
        throw InputError("make_persona: exactly 5 control pages required, got " + std::to_string(control_pages.size()));
    PersonaBuild out;
    out.spec.name = std::move(name);
    out.spec.interest = std::string(interest);
    out.spec.identity = std::move(identity);
    out.spec.control_pages = std::move(control_pages);

    if (interest != kBlankInterest) {
        const bool labeled_somewhere = std::any_of(labeled.begin(), labeled.end(),
                                                   [&](const LabeledPage& p) { return p.category == interest; });
        const bool known = labeled_somewhere || (taxonomy && taxonomy->contains(interest));
        if (!known)
            throw InputError("make_persona: unknown interest '" + std::string(interest) + "'");
        std::set<std::string> controls(out.spec.control_pages.begin(), out.spec.control_pages.end());
        std::set<std::string> taken;
        for (const auto& page : labeled) {
            if (out.spec.training_pages.size() == top_k)
                break;
            if (page.category == interest && !controls.contains(page.url) && taken.insert(page.url).second)
                out.spec.training_pages.push_back(page.url);
        }
        if (out.spec.training_pages.empty())
            throw InputError("make_persona: no pages labeled '" + std::string(interest) + "'");
        if (out.spec.training_pages.size() < top_k)
            out.warnings.push_back("interest '" + std::string(interest) + "' has only "
                                   + std::to_string(out.spec.training_pages.size()) + " labeled pages");
    }
    out.spec.validate();
    return out;
}

double open_unit(std::mt19937_64& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n)
{
    if (n == 0)
        throw Error("uniform_index: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

std::vector<VisitEvent> schedule_visits(const PersonaSpec& spec, int horizon_days, double mean_gap_seconds,
                                        std::uint64_t seed, const ScheduleOptions& options)
{
    if (mean_gap_seconds <= 0)
        throw InputError("schedule: mean gap must be positive");
    if (horizon_days < 1)
        throw InputError("schedule: horizon must be at least one day");
    if (options.day_length <= 0)
        throw InputError("schedule: day length must be positive");
    const auto pool = spec.pool();
    if (pool.empty())
        throw InputError("schedule: persona " + spec.name + " has no pages");

    std::mt19937_64 rng(seed);
    const double end = options.start_at + horizon_days * options.day_length;
    std::vector<VisitEvent> events;
    double t = options.start_at;
    for (;;) {
        t += -mean_gap_seconds * std::log(open_unit(rng));
        if (t >= end)
            break;
        const auto idx = uniform_index(rng, pool.size());
        events.push_back({t, pool[idx], idx < spec.training_pages.size() ? VisitKind::Training : VisitKind::Control});
    }
    return events;
}

int day_index(double at, double day_length) { return static_cast<int>(std::floor(at / day_length)) + 1; }

} // namespace adxprobe
