#include "adxprobe/identify.hpp"

#include "adxprobe/detect.hpp"
#include "adxprobe/error.hpp"
#include "adxprobe/utf8.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>

namespace adxprobe {

using nlohmann::json;

std::string_view to_string(IdentifyMethod method)
{
    switch (method) {
    case IdentifyMethod::Title: return "TITLE";
    case IdentifyMethod::ProductDetail: return "PRODUCT_DETAIL";
    case IdentifyMethod::Image: return "IMAGE";
    case IdentifyMethod::KeywordService: return "KEYWORD_SERVICE";
    case IdentifyMethod::Unresolved: return "UNRESOLVED";
    }
    return "UNRESOLVED";
}

IdentifyMethod identify_method_from_string(std::string_view s)
{
    for (auto m : {IdentifyMethod::Title, IdentifyMethod::ProductDetail, IdentifyMethod::Image,
                   IdentifyMethod::KeywordService, IdentifyMethod::Unresolved})
        if (to_string(m) == s)
            return m;
    throw InputError("unknown identify method " + std::string(s));
}

ProductRules::ProductRules(std::vector<ProductDetailRule> rules, const AdxRuleset* ruleset) : rules_(std::move(rules))
{
    for (const auto& r : rules_) {
        if (ruleset && !ruleset->contains(r.platform))
            throw InputError("product rule names unknown platform " + r.platform);
        if (r.begin.empty() || r.end.empty())
            throw InputError("product rule for " + r.platform + " needs begin and end markers");
    }
}

ProductRules ProductRules::load(const std::filesystem::path& path, const AdxRuleset* ruleset)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read product rules " + path.string());
    std::vector<ProductDetailRule> rules;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line.starts_with("#"))
            continue;
        try {
            const auto obj = json::parse(line);
            rules.push_back({obj.at("platform").get<std::string>(), obj.at("begin").get<std::string>(),
                             obj.at("end").get<std::string>()});
        } catch (const json::exception& e) {
            throw InputError("product rules: " + std::string(e.what()));
        }
    }
    return ProductRules(std::move(rules), ruleset);
}

const ProductDetailRule* ProductRules::find(std::string_view platform) const
{
    for (const auto& r : rules_)
        if (r.platform == platform)
            return &r;
    return nullptr;
}

std::string image_key(const ImageRef& image)
{
    const std::string& data = image.bytes.empty() ? image.url : image.bytes;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::map<std::string, std::vector<std::string>> load_fixture(const std::filesystem::path& path, const char* key,
                                                             const char* values)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read fixture store " + path.string());
    std::map<std::string, std::vector<std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const auto obj = json::parse(line);
            out[obj.at(key).get<std::string>()] = obj.at(values).get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw InputError("fixture store " + path.string() + ": " + e.what());
        }
    }
    return out;
}

} // namespace

FixtureImageLabeler FixtureImageLabeler::load(const std::filesystem::path& path)
{
    return FixtureImageLabeler(load_fixture(path, "key", "labels"));
}

ServiceResult FixtureImageLabeler::label(const ImageRef& image)
{
    const auto key = image_key(image);
    std::lock_guard lock(mu_);
    calls_.push_back(key);
    if (!unavailable_.empty())
        return {{}, unavailable_};
    auto it = by_key_.find(key);
    return {it == by_key_.end() ? std::vector<std::string>{} : it->second, {}};
}

std::vector<std::string> FixtureImageLabeler::calls() const
{
    std::lock_guard lock(mu_);
    return calls_;
}

FixtureKeywordService FixtureKeywordService::load(const std::filesystem::path& path)
{
    return FixtureKeywordService(load_fixture(path, "url", "keywords"));
}

ServiceResult FixtureKeywordService::keywords(std::string_view landing_url)
{
    std::lock_guard lock(mu_);
    calls_.emplace_back(landing_url);
    if (!unavailable_.empty())
        return {{}, unavailable_};
    auto it = by_url_.find(std::string(landing_url));
    return {it == by_url_.end() ? std::vector<std::string>{} : it->second, {}};
}

std::vector<std::string> FixtureKeywordService::calls() const
{
    std::lock_guard lock(mu_);
    return calls_;
}

std::set<std::string> load_word_set(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read word list " + path.string());
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("#"))
            continue;
        if (auto w = normalize_term(line); !w.empty())
            out.insert(std::move(w));
    }
    return out;
}

bool is_image_dominant(const LandingSnapshot& snapshot, std::size_t threshold)
{
    return utf8::decode(snapshot.body_text).size() < threshold && !snapshot.images.empty();
}

std::vector<std::string> keyword_tokens(std::string_view text, const IdentifyContext& ctx)
{
    static const Dictionary empty;
    const Dictionary& dict = ctx.dictionary ? *ctx.dictionary : empty;
    std::vector<std::string> out;
    for (auto& token : tokenize(text, dict)) {
        if (ctx.stopwords.contains(token))
            continue;
        const auto cps = utf8::decode(token);
        if (std::all_of(cps.begin(), cps.end(), utf8::is_digit))
            continue;
        if (cps.size() == 1 && (utf8::is_cjk(cps[0]) || cps[0] < 0x80))
            continue;
        if (std::find(out.begin(), out.end(), token) == out.end())
            out.push_back(std::move(token));
    }
    return out;
}

std::optional<std::vector<std::string>> identify_by_title(const LandingSnapshot& snapshot, const IdentifyContext& ctx)
{
    const std::string title = normalize_term(snapshot.title);
    if (title.empty() || ctx.title_blocklist.contains(title))
        return std::nullopt;
    auto keywords = keyword_tokens(title, ctx);
    if (keywords.empty())
        return std::nullopt;
    return keywords;
}

std::optional<std::vector<std::string>> identify_by_product_detail(const LandingSnapshot& snapshot,
                                                                    std::string_view platform,
                                                                    const IdentifyContext& ctx)
{
    if (!ctx.product_rules)
        return std::nullopt;
    const auto* rule = ctx.product_rules->find(platform);
    if (!rule)
        return std::nullopt;
    const auto begin = snapshot.html.find(rule->begin);
    if (begin == std::string::npos)
        return std::nullopt;
    const auto from = begin + rule->begin.size();
    const auto end = snapshot.html.find(rule->end, from);
    if (end == std::string::npos)
        return std::nullopt;
    auto keywords = keyword_tokens(strip_markup(std::string_view(snapshot.html).substr(from, end - from)), ctx);
    if (keywords.empty())
        return std::nullopt;
    return keywords;
}

ServiceResult identify_via_image_service(const ImageRef& image, ImageLabeler* labeler)
{
    if (!labeler)
        return {{}, "no image labeler configured"};
    try {
        return labeler->label(image);
    } catch (const std::exception& e) {
        return {{}, e.what()};
    }
}

ServiceResult identify_via_keyword_service(std::string_view landing_url, KeywordService* service)
{
    if (!service)
        return {{}, "no keyword service configured"};
    ServiceResult result;
    try {
        result = service->keywords(landing_url);
    } catch (const std::exception& e) {
        return {{}, e.what()};
    }
    if (result.labels.size() > kKeywordServiceCap)
        result.labels.resize(kKeywordServiceCap);
    return result;
}

AdLabel identify(const AdObservation& observation, const IdentifyContext& ctx)
{
    AdLabel label;
    label.observation_id = observation.id;
    const auto& snap = observation.snapshot;
    std::vector<std::string> reasons;

    auto accept = [&](IdentifyMethod method, std::vector<std::string> keywords) {
        std::vector<std::string> norm;
        for (const auto& k : keywords)
            if (auto n = normalize_term(k); !n.empty() && std::find(norm.begin(), norm.end(), n) == norm.end())
                norm.push_back(std::move(n));
        if (norm.empty())
            return false;
        label.method = method;
        label.keywords = std::move(norm);
        return true;
    };
    auto try_service = [&](IdentifyMethod method, const ServiceResult& result) {
        if (!result.error.empty())
            reasons.push_back(std::string(to_string(method)) + ": " + result.error);
        return accept(method, result.labels);
    };

    bool done = false;
    if (observation.status == FetchStatus::Ok || observation.status == FetchStatus::Stale) {
        if (is_image_dominant(snap, ctx.image_text_threshold)) {
            label.attempts.push_back(IdentifyMethod::Image);
            for (const auto& img : snap.images) {
                if (try_service(IdentifyMethod::Image, identify_via_image_service({img, {}}, ctx.image_labeler))) {
                    done = true;
                    break;
                }
            }
        }
        if (!done) {
            label.attempts.push_back(IdentifyMethod::Title);
            if (auto kw = identify_by_title(snap, ctx))
                done = accept(IdentifyMethod::Title, std::move(*kw));
        }
        if (!done) {
            label.attempts.push_back(IdentifyMethod::ProductDetail);
            if (auto kw = identify_by_product_detail(snap, observation.link.platform, ctx))
                done = accept(IdentifyMethod::ProductDetail, std::move(*kw));
        }
        if (!done) {
            label.attempts.push_back(IdentifyMethod::KeywordService);
            const auto& url = snap.final_url.empty() ? observation.link.href : snap.final_url;
            done = try_service(IdentifyMethod::KeywordService, identify_via_keyword_service(url, ctx.keyword_service));
        }
    } else {
        reasons.push_back("landing not captured: " + observation.reason);
    }

    if (!done) {
        label.method = IdentifyMethod::Unresolved;
        label.keywords.clear();
        label.category = std::string(kUncategorized);
    } else if (ctx.taxonomy) {
        label.category = ctx.taxonomy->best_match({label.keywords.begin(), label.keywords.end()}).category;
    } else {
        label.category = std::string(kUncategorized);
    }
    for (const auto& r : reasons) {
        if (!label.reason.empty())
            label.reason += "; ";
        label.reason += r;
    }
    return label;
}

} // namespace adxprobe
