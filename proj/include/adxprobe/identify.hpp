#pragma once

#include "adxprobe/crawl.hpp"
#include "adxprobe/taxonomy.hpp"
#include "adxprobe/text.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe {

class AdxRuleset;

enum class IdentifyMethod { Title, ProductDetail, Image, KeywordService, Unresolved };

std::string_view to_string(IdentifyMethod method);
IdentifyMethod identify_method_from_string(std::string_view s);

struct AdLabel {
    std::size_t observation_id = 0;
    std::vector<std::string> keywords;
    std::string category;
    IdentifyMethod method = IdentifyMethod::Unresolved;
    std::vector<IdentifyMethod> attempts; // stages tried, in order
    std::string reason;                   // why earlier stages gave nothing
};

/// Product text sits between `begin` and the next `end` in the landing markup.
struct ProductDetailRule {
    std::string platform;
    std::string begin;
    std::string end;
};

class ProductRules {
public:
    ProductRules() = default;
    // Throws when a rule names a platform missing from `ruleset` (when given).
    explicit ProductRules(std::vector<ProductDetailRule> rules, const AdxRuleset* ruleset = nullptr);
    static ProductRules load(const std::filesystem::path& path, const AdxRuleset* ruleset = nullptr);

    const ProductDetailRule* find(std::string_view platform) const;
    const std::vector<ProductDetailRule>& rules() const { return rules_; }

private:
    std::vector<ProductDetailRule> rules_;
};

struct ServiceResult {
    std::vector<std::string> labels;
    std::string error; // non-empty when the service was unavailable
};

struct ImageRef {
    std::string url;
    std::string bytes; // optional downloaded content
};

// Hex FNV-1a of the image bytes, or of the URL when no bytes were fetched.
std::string image_key(const ImageRef& image);

class ImageLabeler {
public:
    virtual ~ImageLabeler() = default;
    virtual ServiceResult label(const ImageRef& image) = 0;
};

class KeywordService {
public:
    virtual ~KeywordService() = default;
    virtual ServiceResult keywords(std::string_view landing_url) = 0;
};

/// Recorded responses keyed by image hash. Every call is logged.
class FixtureImageLabeler : public ImageLabeler {
public:
    FixtureImageLabeler() = default;
    explicit FixtureImageLabeler(std::map<std::string, std::vector<std::string>> by_key) : by_key_(std::move(by_key)) {}
    // Lines of {"key": ..., "labels": [...]}.
    static FixtureImageLabeler load(const std::filesystem::path& path);

    ServiceResult label(const ImageRef& image) override;
    void set_unavailable(std::string reason) { unavailable_ = std::move(reason); }
    std::vector<std::string> calls() const;
    const std::map<std::string, std::vector<std::string>>& entries() const { return by_key_; }

private:
    std::map<std::string, std::vector<std::string>> by_key_;
    std::string unavailable_;
    mutable std::mutex mu_;
    std::vector<std::string> calls_;
};

/// Recorded keyword-planner responses keyed by landing URL. Every call is logged.
class FixtureKeywordService : public KeywordService {
public:
    FixtureKeywordService() = default;
    explicit FixtureKeywordService(std::map<std::string, std::vector<std::string>> by_url) : by_url_(std::move(by_url)) {}
    // Lines of {"url": ..., "keywords": [...]}.
    static FixtureKeywordService load(const std::filesystem::path& path);

    ServiceResult keywords(std::string_view landing_url) override;
    void set_unavailable(std::string reason) { unavailable_ = std::move(reason); }
    std::vector<std::string> calls() const;
    const std::map<std::string, std::vector<std::string>>& entries() const { return by_url_; }

private:
    std::map<std::string, std::vector<std::string>> by_url_;
    std::string unavailable_;
    mutable std::mutex mu_;
    std::vector<std::string> calls_;
};

inline constexpr std::size_t kImageTextThreshold = 100;
inline constexpr std::size_t kKeywordServiceCap = 5;

/// Everything the cascade needs besides the observation itself.
struct IdentifyContext {
    const Dictionary* dictionary = nullptr;
    const Taxonomy* taxonomy = nullptr;
    const ProductRules* product_rules = nullptr;
    ImageLabeler* image_labeler = nullptr;
    KeywordService* keyword_service = nullptr;
    std::set<std::string> title_blocklist;
    std::set<std::string> stopwords;
    std::size_t image_text_threshold = kImageTextThreshold;
};

std::set<std::string> load_word_set(const std::filesystem::path& path);

bool is_image_dominant(const LandingSnapshot& snapshot, std::size_t threshold = kImageTextThreshold);

// Tokens worth keeping as ad keywords: no stop-terms, digits or stray single CJK characters.
std::vector<std::string> keyword_tokens(std::string_view text, const IdentifyContext& ctx);

std::optional<std::vector<std::string>> identify_by_title(const LandingSnapshot& snapshot, const IdentifyContext& ctx);

std::optional<std::vector<std::string>> identify_by_product_detail(const LandingSnapshot& snapshot,
                                                                    std::string_view platform,
                                                                    const IdentifyContext& ctx);

ServiceResult identify_via_image_service(const ImageRef& image, ImageLabeler* labeler);

// At most the first five keywords.
ServiceResult identify_via_keyword_service(std::string_view landing_url, KeywordService* service);

// Image-dominant pages go to the image labeler first; otherwise title, product
// detail, then keyword service. The first non-empty stage wins.
AdLabel identify(const AdObservation& observation, const IdentifyContext& ctx);

} // namespace adxprobe
