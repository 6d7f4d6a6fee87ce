#pragma once

#include "adxprobe/detect.hpp"
#include "adxprobe/fetch.hpp"
#include "adxprobe/identify.hpp"
#include "adxprobe/taxonomy.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe {

enum class TargetingMode { Random, Contextual, Behavioral };

std::string_view to_string(TargetingMode mode);
TargetingMode targeting_mode_from_string(std::string_view s);

struct ExchangePolicy {
    std::string platform;
    TargetingMode mode = TargetingMode::Random;
    int reaction_delay_days = 0;
    double memory_decay_per_day = 0.0;
    double targeting_boost = 0.0;
    double profile_threshold = 3.0;
    int frame_depth = 1; // 1 or 2 nested frames before the creative

    void validate() const;
};

struct PublisherGroup {
    std::string category;
    int count = 0;
    std::vector<std::string> exchanges;
    std::string language = "zh"; // "zh" or "en"
    int slots = 1;               // ad frames per exchange
};

struct InventoryConfig {
    std::vector<std::string> categories;
    int general_per_category = 1;
    int behavioral_per_category = 2;
    int opaque_per_category = 0; // landings only the keyword service can label
    int broken_every = 0;        // every n-th creative answers 503; 0 = never
    int slow_every = 0;          // every n-th creative responds after `slow_latency`
    double slow_latency = 60.0;
};

struct PersonaSwitch {
    int day = 0;
    std::string interest;
};

struct ScenarioPersona {
    std::string name;
    std::string interest;
    std::string user_agent;
    std::uint64_t seed = 0;
    std::optional<PersonaSwitch> switch_to;
};

/// Everything needed to build a simulated world and run the pipeline against it.
struct Scenario {
    std::uint64_t seed = 0;
    double day_length = 86400.0;
    double mean_gap = 180.0;
    int days = 10;
    double freshness_bound = 30.0;
    std::string reader_jar = "reader-0";
    std::vector<ExchangePolicy> exchanges;
    std::vector<PublisherGroup> publishers;
    PublisherGroup controls;
    InventoryConfig inventory;
    std::vector<ScenarioPersona> personas;

    static Scenario parse(std::string_view json_text);
    static Scenario load(const std::filesystem::path& path);
    // Throws when an exchange or category is unknown or a parameter is out of range.
    void validate(const AdxRuleset& ruleset, const Taxonomy& taxonomy) const;
};

enum class LandingFlavor { Title, ProductDetail, ImageOnly, Opaque };

std::string_view to_string(LandingFlavor flavor);

enum class Audience { General, Behavioral };

struct Creative {
    std::size_t index = 0;
    std::string category;
    Audience audience = Audience::General;
    LandingFlavor flavor = LandingFlavor::Title;
    std::vector<std::string> words; // keywords the landing page advertises
    std::string landing_url;
    std::string image_url; // empty unless the landing shows an image
    double latency = 0.5;
    bool slow = false;
    bool broken = false;
};

inline constexpr std::string_view kHouseLanding = "https://house.landing.example/house";

struct SimPage {
    std::string url;
    std::string category;
    std::vector<std::string> exchanges;
    std::string language = "zh";
    int slots = 1;
    bool control = false;
};

struct CategoryProfile {
    double weight = 0.0;
    std::optional<double> qualified_since;
};

struct SimEvent {
    double time = 0.0;
    std::string actor;
    std::string action;
    std::string detail;
    bool operator==(const SimEvent&) const = default;
};

struct ServedAd {
    const Creative* creative = nullptr; // null for the house ad
    bool targeted = false;
    std::string landing_url;
};

/// A deterministic ad ecosystem answering fetches for publisher pages, exchange
/// frames and ad landing pages.
class SimWorld : public Fetcher {
public:
    SimWorld(Scenario scenario, const AdxRuleset& ruleset, const Taxonomy& taxonomy);

    FetchResponse fetch(const FetchRequest& request) override;

    // Publisher page with one frame per embedded exchange slot; records the visit.
    FetchResponse serve_page(const std::string& url, const Identity& identity, double at);
    // Picks a creative under the exchange's policy without recording a page visit.
    ServedAd serve_ad(const std::string& platform, const Identity& identity, const std::string& page_category,
                      double at);
    void advance_day();
    // Called by the run loop with the new day index; applies every pending day boundary.
    void advance_to_day(int day);

    const Scenario& scenario() const { return scenario_; }
    const std::vector<SimPage>& pages() const { return pages_; }
    const SimPage* page(std::string_view url) const;
    std::vector<std::string> control_pages() const;
    const std::vector<Creative>& inventory() const { return inventory_; }
    const Creative* creative_for_landing(std::string_view url) const;
    CategoryProfile profile(const std::string& platform, const std::string& jar, const std::string& category) const;
    std::map<std::string, CategoryProfile> profiles(const std::string& platform, const std::string& jar) const;
    int day() const { return day_; }

    // Request records of one crawl over every publisher page, in the crawler's log format.
    std::vector<HttpRequestRecord> crawl_log() const;
    // Recorded responses for the image labeler and the keyword service.
    std::map<std::string, std::vector<std::string>> image_fixtures() const;
    std::map<std::string, std::vector<std::string>> keyword_fixtures() const;

    // Sorted by (time, actor, action, detail).
    std::vector<SimEvent> transcript() const;

private:
    struct Exchange {
        ExchangePolicy policy;
        std::string frame_base;
        std::map<std::string, std::map<std::string, CategoryProfile>> profiles; // jar -> category -> profile
    };

    void build_pages();
    void build_inventory();
    std::string page_html(const SimPage& page) const;
    std::string frame_url(const Exchange& ex, const SimPage& page, int slot, int depth) const;
    FetchResponse serve_frame(Exchange& ex, const std::string& url, const Identity& identity, double at);
    FetchResponse serve_landing(const std::string& url, const Identity& identity, double at);
    ServedAd choose_ad(Exchange& ex, const std::string& jar, const std::string& page_category, double at);
    void record_visit(Exchange& ex, const std::string& jar, const std::string& category, double at);
    std::mt19937_64& rng_for(const std::string& platform, const std::string& jar);
    void log(double at, std::string actor, std::string action, std::string detail);
    Exchange* exchange_for_frame(std::string_view url);

    Scenario scenario_;
    const AdxRuleset& ruleset_;
    const Taxonomy& taxonomy_;
    std::map<std::string, Exchange> exchanges_;
    std::vector<SimPage> pages_;
    std::map<std::string, std::size_t, std::less<>> page_index_;
    std::vector<Creative> inventory_;
    std::map<std::string, std::size_t, std::less<>> landing_index_;
    std::map<std::string, std::mt19937_64> rngs_;
    int day_ = 1;
    mutable std::mutex mu_;
    std::vector<SimEvent> events_;
};

std::uint64_t fnv1a64(std::string_view text);

} // namespace adxprobe
