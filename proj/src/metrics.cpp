#include "adxprobe/metrics.hpp"

#include "adxprobe/error.hpp"
#include "adxprobe/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace adxprobe {

using nlohmann::json;

namespace {

std::size_t count_common(const KeywordSet& a, const KeywordSet& b)
{
    std::size_t n = 0;
    for (const auto& x : a)
        n += b.contains(x);
    return n;
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

double ttk(const KeywordSets& sets)
{
    if (sets.training.empty())
        throw InputError("ttk: training keyword set is empty");
    std::size_t n = 0;
    for (const auto& t : sets.training)
        n += sets.landing.contains(t) && !sets.blank.contains(t);
    return static_cast<double>(n) / static_cast<double>(sets.training.size());
}

std::string_view to_string(BailpBranch branch)
{
    return branch == BailpBranch::ExcludeBlank ? "exclude_blank" : "intersect";
}

BailpResult bailp(const KeywordSets& sets)
{
    BailpResult r;
    r.branch = count_common(sets.training, sets.blank) >= 1 ? BailpBranch::ExcludeBlank : BailpBranch::Intersect;
    if (sets.landing.empty()) {
        r.no_ads = true;
        return r;
    }
    std::size_t f = 0;
    for (const auto& l : sets.landing) {
        if (!sets.training.contains(l))
            continue;
        if (r.branch == BailpBranch::ExcludeBlank && sets.blank.contains(l))
            continue;
        ++f;
    }
    r.value = static_cast<double>(f) / static_cast<double>(sets.landing.size());
    return r;
}

std::vector<LabeledAd> join_labels(std::span<const AdObservation> observations, std::span<const AdLabel> labels)
{
    std::unordered_map<std::size_t, const AdObservation*> by_id;
    for (const auto& o : observations)
        by_id[o.id] = &o;
    std::vector<LabeledAd> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = by_id.find(l.observation_id);
        if (it == by_id.end())
            throw InputError("label refers to unknown observation " + std::to_string(l.observation_id));
        out.push_back({it->second->link.persona, it->second->link.platform, it->second->day_index, l});
    }
    return out;
}

KeywordSet keyword_set(std::span<const std::vector<std::string>> keyword_lists)
{
    KeywordSet out;
    for (const auto& list : keyword_lists)
        for (const auto& k : list)
            if (auto n = normalize_term(k); !n.empty())
                out.insert(std::move(n));
    return out;
}

KeywordSet landing_keywords(std::span<const LabeledAd> ads, std::string_view persona, const KeywordFilter& filter)
{
    KeywordSet out;
    for (const auto& ad : ads) {
        if (ad.persona != persona || ad.platform != filter.platform)
            continue;
        if (filter.day > 0 && (filter.cumulative ? ad.day > filter.day : ad.day != filter.day))
            continue;
        for (const auto& k : ad.label.keywords)
            if (auto n = normalize_term(k); !n.empty())
                out.insert(std::move(n));
    }
    return out;
}

KeywordSets collect_keyword_sets(std::span<const LabeledAd> ads, std::string_view persona,
                                 std::string_view blank_persona, const KeywordSet& training,
                                 const KeywordFilter& filter)
{
    if (std::none_of(ads.begin(), ads.end(), [&](const LabeledAd& a) { return a.persona == blank_persona; }))
        throw InputError("no ads recorded for blank persona '" + std::string(blank_persona) + "'");
    KeywordSets sets;
    sets.training = training;
    sets.landing = landing_keywords(ads, persona, filter);
    sets.blank = landing_keywords(ads, blank_persona, {filter.platform, 0, false});
    return sets;
}

std::map<std::string, std::map<int, ShareMap>> category_share_timeline(std::span<const LabeledAd> ads,
                                                                      std::string_view persona,
                                                                      std::span<const std::string> platforms,
                                                                      int horizon_days)
{
    std::map<std::string, std::map<int, std::map<std::string, std::size_t>>> counts;
    for (const auto& p : platforms)
        for (int d = 1; d <= horizon_days; ++d)
            counts[p][d];
    for (const auto& ad : ads) {
        if (ad.persona != persona)
            continue;
        const std::string bucket =
            ad.label.method == IdentifyMethod::Unresolved ? std::string(kUnresolvedBucket) : ad.label.category;
        ++counts[ad.platform][ad.day][bucket];
    }
    std::map<std::string, std::map<int, ShareMap>> out;
    for (const auto& [platform, days] : counts) {
        for (const auto& [day, buckets] : days) {
            std::size_t total = 0;
            for (const auto& [_, n] : buckets)
                total += n;
            ShareMap& shares = out[platform][day];
            for (const auto& [cat, n] : buckets)
                shares[cat] = static_cast<double>(n) / static_cast<double>(total);
        }
    }
    return out;
}

std::vector<ScoreRow> score_series(std::span<const LabeledAd> ads, std::span<const ScoreSubject> subjects,
                                   std::string_view blank_persona, std::span<const std::string> platforms,
                                   const ScoreOptions& options)
{
    if (options.horizon_days < 1)
        throw InputError("score: horizon must be at least one day");
    std::vector<ScoreRow> rows;
    for (const auto& subject : subjects) {
        for (const auto& platform : platforms) {
            for (int day = 1; day <= options.horizon_days; ++day) {
                const KeywordFilter filter{platform, day, options.cumulative};
                const auto sets = collect_keyword_sets(ads, subject.persona, blank_persona, subject.training, filter);
                ScoreRow row;
                row.persona = subject.persona;
                row.interest = subject.interest;
                row.platform = platform;
                row.day = day;
                row.ttk = ttk(sets);
                const auto b = bailp(sets);
                row.bailp = b.value;
                row.branch = b.branch;
                row.no_ads = b.no_ads;
                row.ads = static_cast<std::size_t>(std::count_if(ads.begin(), ads.end(), [&](const LabeledAd& a) {
                    return a.persona == subject.persona && a.platform == platform &&
                           (options.cumulative ? a.day <= day : a.day == day);
                }));
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

void write_scores_csv(std::ostream& out, std::span<const ScoreRow> rows)
{
    out << "persona,platform,day,ttk,bailp\n";
    for (const auto& r : rows)
        out << r.persona << ':' << r.interest << ',' << r.platform << ',' << r.day << ',' << format_double(r.ttk)
            << ',' << format_double(r.bailp) << '\n';
}

void write_scores_jsonl(std::ostream& out, std::span<const ScoreRow> rows)
{
    for (const auto& r : rows) {
        json j = {{"persona", r.persona}, {"interest", r.interest}, {"platform", r.platform}, {"day", r.day},
                  {"ttk", r.ttk},         {"bailp", r.bailp},       {"branch", to_string(r.branch)},
                  {"no_ads", r.no_ads},   {"ads", r.ads}};
        out << j.dump() << '\n';
    }
}

std::vector<ScoreRow> read_scores_jsonl(std::istream& in)
{
    std::vector<ScoreRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        try {
            const auto j = json::parse(line);
            ScoreRow r;
            r.persona = j.at("persona");
            r.interest = j.at("interest");
            r.platform = j.at("platform");
            r.day = j.at("day");
            r.ttk = j.at("ttk");
            r.bailp = j.at("bailp");
            r.branch = j.at("branch").get<std::string>() == "exclude_blank" ? BailpBranch::ExcludeBlank
                                                                             : BailpBranch::Intersect;
            r.no_ads = j.value("no_ads", false);
            r.ads = j.value("ads", std::size_t{0});
            rows.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw InputError(std::string("score record: ") + e.what());
        }
    }
    return rows;
}

void write_shares_jsonl(std::ostream& out, std::span<const ShareRecord> records)
{
    for (const auto& r : records) {
        json j = {{"persona", r.persona}, {"platform", r.platform}, {"day", r.day}, {"shares", r.shares}};
        out << j.dump() << '\n';
    }
}

std::vector<ShareRecord> read_shares_jsonl(std::istream& in)
{
    std::vector<ShareRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        try {
            const auto j = json::parse(line);
            out.push_back({j.at("persona"), j.at("platform"), j.at("day"), j.at("shares").get<ShareMap>()});
        } catch (const json::exception& e) {
            throw InputError(std::string("share record: ") + e.what());
        }
    }
    return out;
}

} // namespace adxprobe
