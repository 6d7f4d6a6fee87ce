#pragma once

#include "adxprobe/crawl.hpp"
#include "adxprobe/identify.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe {

using KeywordSet = std::set<std::string>;

struct KeywordSets {
    KeywordSet training; // K_T
    KeywordSet landing;  // K_L
    KeywordSet blank;    // K_k
};

// |K_T ∩ (K_L − K_k)| / |K_T|. Throws when K_T is empty.
double ttk(const KeywordSets& sets);

enum class BailpBranch { ExcludeBlank, Intersect };

std::string_view to_string(BailpBranch branch);

struct BailpResult {
    double value = 0.0;
    BailpBranch branch = BailpBranch::Intersect;
    bool no_ads = false; // K_L was empty, value defined as 0
};

// f = (K_L − K_k) ∩ K_T when K_T and K_k share a term, else K_L ∩ K_T; |f| / |K_L|.
BailpResult bailp(const KeywordSets& sets);

/// A label joined with the observation it came from.
struct LabeledAd {
    std::string persona;
    std::string platform;
    int day = 1;
    AdLabel label;
};

// Throws when a label refers to an unknown observation.
std::vector<LabeledAd> join_labels(std::span<const AdObservation> observations, std::span<const AdLabel> labels);

KeywordSet keyword_set(std::span<const std::vector<std::string>> keyword_lists);

struct KeywordFilter {
    std::string platform;
    int day = 0;            // 0 = every day
    bool cumulative = false; // days 1..day instead of exactly `day`
};

// Union of normalized keywords of `persona`'s ads passing the filter.
KeywordSet landing_keywords(std::span<const LabeledAd> ads, std::string_view persona, const KeywordFilter& filter);

// K_T as given; K_L from `persona` under `filter`; K_k from `blank_persona` on the
// same platform over the whole run window. Throws when the blank persona has no ads at all.
KeywordSets collect_keyword_sets(std::span<const LabeledAd> ads, std::string_view persona,
                                 std::string_view blank_persona, const KeywordSet& training,
                                 const KeywordFilter& filter);

using ShareMap = std::map<std::string, double>;

inline constexpr std::string_view kUnresolvedBucket = "UNRESOLVED";

// platform -> day -> category share; days without ads map to an empty share map.
std::map<std::string, std::map<int, ShareMap>> category_share_timeline(std::span<const LabeledAd> ads,
                                                                      std::string_view persona,
                                                                      std::span<const std::string> platforms,
                                                                      int horizon_days);

/// One persona scored against one interest's training keywords.
struct ScoreSubject {
    std::string persona;
    std::string interest;
    KeywordSet training;
};

struct ScoreRow {
    std::string persona;
    std::string interest;
    std::string platform;
    int day = 1;
    double ttk = 0.0;
    double bailp = 0.0;
    BailpBranch branch = BailpBranch::Intersect;
    bool no_ads = false;
    std::size_t ads = 0;
};

struct ScoreOptions {
    int horizon_days = 1;
    bool cumulative = false;
};

std::vector<ScoreRow> score_series(std::span<const LabeledAd> ads, std::span<const ScoreSubject> subjects,
                                   std::string_view blank_persona, std::span<const std::string> platforms,
                                   const ScoreOptions& options);

// Header "persona,platform,day,ttk,bailp"; persona column is "name:interest".
void write_scores_csv(std::ostream& out, std::span<const ScoreRow> rows);
void write_scores_jsonl(std::ostream& out, std::span<const ScoreRow> rows);
std::vector<ScoreRow> read_scores_jsonl(std::istream& in);

struct ShareRecord {
    std::string persona;
    std::string platform;
    int day = 1;
    ShareMap shares;
};

void write_shares_jsonl(std::ostream& out, std::span<const ShareRecord> records);
std::vector<ShareRecord> read_shares_jsonl(std::istream& in);

} // namespace adxprobe
