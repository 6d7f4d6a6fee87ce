#include "adxprobe/sim.hpp"

#include "adxprobe/error.hpp"
#include "adxprobe/persona.hpp"
#include "adxprobe/url.hpp"
#include "adxprobe/utf8.hpp"

#include <algorithm>
#include <cmath>

namespace adxprobe {

namespace {

const std::vector<std::string> kProductWords = {"专享", "优惠", "热销", "新品", "特价"};
const std::vector<std::string> kFillerWords = {"首页", "登录", "注册", "关于", "我们", "联系",
                                               "网站", "版权", "所有", "更多", "推荐"};
const std::vector<std::string> kEnglishWords = {"market", "weather", "city",   "report", "football", "travel",
                                                "music",  "review",  "update", "daily",  "local",    "guide"};

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

std::string html_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Filler prose long enough to keep a landing page text-dominant.
std::string filler_paragraph(std::size_t min_codepoints)
{
    std::string out;
    std::size_t i = 0;
    while (utf8::decode(out).size() < min_codepoints) {
        out += kFillerWords[i % kFillerWords.size()];
        out += "，";
        ++i;
    }
    return out;
}

std::string product_title(const Creative& c)
{
    return join(c.words, "") + kProductWords[c.index % kProductWords.size()];
}

} // namespace

std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string_view to_string(TargetingMode mode)
{
    switch (mode) {
    case TargetingMode::Random: return "RANDOM";
    case TargetingMode::Contextual: return "CONTEXTUAL";
    case TargetingMode::Behavioral: return "BEHAVIORAL";
    }
    return "RANDOM";
}

TargetingMode targeting_mode_from_string(std::string_view s)
{
    if (s == "RANDOM") return TargetingMode::Random;
    if (s == "CONTEXTUAL") return TargetingMode::Contextual;
    if (s == "BEHAVIORAL") return TargetingMode::Behavioral;
    throw InputError("unknown targeting mode " + std::string(s));
}

std::string_view to_string(LandingFlavor flavor)
{
    switch (flavor) {
    case LandingFlavor::Title: return "title";
    case LandingFlavor::ProductDetail: return "product_detail";
    case LandingFlavor::ImageOnly: return "image_only";
    case LandingFlavor::Opaque: return "opaque";
    }
    return "title";
}

void ExchangePolicy::validate() const
{
    const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (reaction_delay_days < 0)
        throw InputError("exchange " + platform + ": reaction delay must be >= 0");
    if (!prob(memory_decay_per_day) || !prob(targeting_boost))
        throw InputError("exchange " + platform + ": decay and boost must lie in [0,1]");
    if (profile_threshold < 0)
        throw InputError("exchange " + platform + ": profile threshold must be >= 0");
    if (frame_depth < 1 || frame_depth > 2)
        throw InputError("exchange " + platform + ": frame depth must be 1 or 2");
}

SimWorld::SimWorld(Scenario scenario, const AdxRuleset& ruleset, const Taxonomy& taxonomy)
    : scenario_(std::move(scenario)), ruleset_(ruleset), taxonomy_(taxonomy)
{
    scenario_.validate(ruleset_, taxonomy_);
    for (const auto& policy : scenario_.exchanges) {
        Exchange ex;
        ex.policy = policy;
        std::string base = ruleset_.find(policy.platform)->prefixes.front();
        ex.frame_base = base + (base.ends_with('/') ? "sim/frame" : "/sim/frame");
        exchanges_.emplace(policy.platform, std::move(ex));
    }
    build_pages();
    build_inventory();
}

void SimWorld::build_pages()
{
    int group_index = 0;
    for (const auto& group : scenario_.publishers) {
        for (int i = 0; i < group.count; ++i) {
            SimPage p;
            p.url = "https://pub" + std::to_string(group_index) + "-" + std::to_string(i) + ".sim.example/index.html";
            p.category = group.category;
            p.exchanges = group.exchanges;
            p.language = group.language;
            p.slots = group.slots;
            pages_.push_back(std::move(p));
        }
        ++group_index;
    }
    for (int i = 0; i < scenario_.controls.count; ++i) {
        SimPage p;
        p.url = "https://portal" + std::to_string(i) + ".sim.example/";
        p.category = scenario_.controls.category;
        p.exchanges = scenario_.controls.exchanges;
        p.language = scenario_.controls.language;
        p.slots = scenario_.controls.slots;
        p.control = true;
        pages_.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < pages_.size(); ++i)
        page_index_[pages_[i].url] = i;
}

void SimWorld::build_inventory()
{
    const auto& cfg = scenario_.inventory;
    for (const auto& category : cfg.categories) {
        const auto& keywords = taxonomy_.find(category)->keywords;
        const std::size_t n_general = std::max<std::size_t>(1, keywords.size() / 3);
        std::vector<std::string> general(keywords.begin(), keywords.begin() + std::min(n_general, keywords.size()));
        std::vector<std::string> behavioral(keywords.begin() + general.size(), keywords.end());
        if (behavioral.empty())
            behavioral = general;

        auto add = [&](Audience audience, const std::vector<std::string>& pool, int j, bool opaque) {
            Creative c;
            c.index = inventory_.size();
            c.category = category;
            c.audience = audience;
            c.flavor = opaque ? LandingFlavor::Opaque : static_cast<LandingFlavor>(c.index % 3);
            c.words.push_back(pool[(2 * j) % pool.size()]);
            if (const auto& second = pool[(2 * j + 1) % pool.size()]; second != c.words.front())
                c.words.push_back(second);
            const std::string host = "https://adv" + std::to_string(c.index) + ".landing.example";
            c.landing_url = host + "/item/" + std::to_string(c.index);
            if (c.flavor == LandingFlavor::ImageOnly)
                c.image_url = host + "/img/" + std::to_string(c.index) + ".jpg";
            c.latency = 0.2 + static_cast<double>(fnv1a64(c.landing_url) % 2800) / 1000.0;
            const int ordinal = static_cast<int>(c.index) + 1;
            if (cfg.slow_every > 0 && ordinal % cfg.slow_every == 0) {
                c.latency = cfg.slow_latency;
                c.slow = true;
            }
            c.broken = cfg.broken_every > 0 && ordinal % cfg.broken_every == 0;
            inventory_.push_back(std::move(c));
        };
        for (int j = 0; j < cfg.general_per_category; ++j)
            add(Audience::General, general, j, false);
        for (int j = 0; j < cfg.behavioral_per_category; ++j)
            add(Audience::Behavioral, behavioral, j, false);
        for (int j = 0; j < cfg.opaque_per_category; ++j)
            add(Audience::General, general, cfg.general_per_category + j, true);
    }
    for (const auto& c : inventory_)
        landing_index_[c.landing_url] = c.index;
}

const SimPage* SimWorld::page(std::string_view url) const
{
    auto it = page_index_.find(normalize_page_url(url));
    return it == page_index_.end() ? nullptr : &pages_[it->second];
}

std::vector<std::string> SimWorld::control_pages() const
{
    std::vector<std::string> out;
    for (const auto& p : pages_)
        if (p.control)
            out.push_back(p.url);
    return out;
}

const Creative* SimWorld::creative_for_landing(std::string_view url) const
{
    auto it = landing_index_.find(url);
    return it == landing_index_.end() ? nullptr : &inventory_[it->second];
}

CategoryProfile SimWorld::profile(const std::string& platform, const std::string& jar,
                                  const std::string& category) const
{
    std::lock_guard lock(mu_);
    auto ex = exchanges_.find(platform);
    if (ex == exchanges_.end())
        return {};
    auto j = ex->second.profiles.find(jar);
    if (j == ex->second.profiles.end())
        return {};
    auto c = j->second.find(category);
    return c == j->second.end() ? CategoryProfile{} : c->second;
}

std::map<std::string, CategoryProfile> SimWorld::profiles(const std::string& platform, const std::string& jar) const
{
    std::lock_guard lock(mu_);
    auto ex = exchanges_.find(platform);
    if (ex == exchanges_.end())
        return {};
    auto j = ex->second.profiles.find(jar);
    return j == ex->second.profiles.end() ? std::map<std::string, CategoryProfile>{} : j->second;
}

std::string SimWorld::frame_url(const Exchange& ex, const SimPage& page, int slot, int depth) const
{
    return ex.frame_base + "?pub=" + percent_encode(page.url) + "&slot=" + std::to_string(slot) +
           "&depth=" + std::to_string(depth);
}

std::string SimWorld::page_html(const SimPage& page) const
{
    std::mt19937_64 rng(scenario_.seed ^ fnv1a64(page.url));
    std::vector<std::string> words;
    std::string title;
    if (page.language == "en") {
        words = kEnglishWords;
        title = "Daily " + page.category;
    } else {
        const auto* cat = taxonomy_.find(page.category);
        words = cat->keywords;
        const std::size_t offset = uniform_index(rng, words.size());
        title = words[offset] + words[(offset + 1) % words.size()] + " - " + kFillerWords[0];
        // A few repeated keywords so pages in one category differ in weight.
        for (int i = 0; i < 4; ++i)
            words.push_back(words[uniform_index(rng, cat->keywords.size())]);
        for (const auto& f : kFillerWords)
            words.push_back(f);
    }
    std::shuffle(words.begin(), words.end(), rng);

    std::string html = "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><title>" + html_escape(title) +
                       "</title><script>var slots = 1;</script></head><body>";
    html += "<h1>" + html_escape(title) + "</h1><p>" + html_escape(join(words, page.language == "en" ? " " : "，")) +
            "</p>";
    for (const auto& platform : page.exchanges) {
        const auto& ex = exchanges_.at(platform);
        for (int slot = 0; slot < page.slots; ++slot)
            html += "<iframe width=\"300\" height=\"250\" src=\"" + html_escape(frame_url(ex, page, slot, 1)) +
                    "\"></iframe>";
    }
    html += "<a href=\"/about.html\">" + kFillerWords[3] + "</a></body></html>";
    return html;
}

void SimWorld::log(double at, std::string actor, std::string action, std::string detail)
{
    events_.push_back({at, std::move(actor), std::move(action), std::move(detail)});
}

void SimWorld::record_visit(Exchange& ex, const std::string& jar, const std::string& category, double at)
{
    auto& prof = ex.profiles[jar][category];
    prof.weight += 1.0;
    if (!prof.qualified_since && prof.weight >= ex.policy.profile_threshold)
        prof.qualified_since = at;
}

std::mt19937_64& SimWorld::rng_for(const std::string& platform, const std::string& jar)
{
    const std::string key = platform + "\n" + jar;
    auto it = rngs_.find(key);
    if (it == rngs_.end())
        it = rngs_.emplace(key, std::mt19937_64(scenario_.seed ^ fnv1a64(platform) ^ (fnv1a64(jar) * 31))).first;
    return it->second;
}

FetchResponse SimWorld::fetch(const FetchRequest& request)
{
    std::lock_guard lock(mu_);
    const std::string url = normalize_page_url(request.url);
    if (page_index_.contains(url)) {
        const auto& p = pages_[page_index_.find(url)->second];
        log(request.at, request.identity.cookie_jar, "visit", p.url);
        for (const auto& platform : p.exchanges)
            record_visit(exchanges_.at(platform), request.identity.cookie_jar, p.category, request.at);
        return {200, p.url, page_html(p), {}, 0.05};
    }
    if (auto* ex = exchange_for_frame(request.url))
        return serve_frame(*ex, request.url, request.identity, request.at);
    if (landing_index_.contains(request.url) || request.url == kHouseLanding)
        return serve_landing(request.url, request.identity, request.at);
    log(request.at, request.identity.cookie_jar, "not_found", request.url);
    return {404, request.url, "<html><head><title>404</title></head><body>not found</body></html>", {}, 0.05};
}

FetchResponse SimWorld::serve_page(const std::string& url, const Identity& identity, double at)
{
    if (!page(url))
        return {404, url, {}, {}, 0.05};
    return fetch({url, identity, at});
}

SimWorld::Exchange* SimWorld::exchange_for_frame(std::string_view url)
{
    for (auto& [_, ex] : exchanges_)
        if (url.starts_with(ex.frame_base + "?"))
            return &ex;
    return nullptr;
}

FetchResponse SimWorld::serve_frame(Exchange& ex, const std::string& url, const Identity& identity, double at)
{
    const auto pub = query_param(url, "pub");
    const auto* page_ptr = pub ? page(*pub) : nullptr;
    int depth = 1;
    int slot = 0;
    try {
        depth = std::stoi(query_param(url, "depth").value_or("1"));
        slot = std::stoi(query_param(url, "slot").value_or("0"));
    } catch (const std::exception&) {
        page_ptr = nullptr;
    }
    if (!page_ptr) {
        log(at, identity.cookie_jar, "not_found", url);
        return {404, url, {}, {}, 0.05};
    }
    if (depth < ex.policy.frame_depth) {
        const std::string inner = frame_url(ex, *page_ptr, slot, depth + 1);
        return {200, url, "<html><body><iframe src=\"" + html_escape(inner) + "\"></iframe></body></html>", {}, 0.05};
    }

    const ServedAd ad = choose_ad(ex, identity.cookie_jar, page_ptr->category, at);
    std::string html = "<html><body><div class=\"ad\">";
    html += "<a href=\"" + html_escape(ad.landing_url) + "\" target=\"_blank\">";
    if (ad.creative && !ad.creative->image_url.empty())
        html += "<img src=\"" + html_escape(ad.creative->image_url) + "\">";
    html += ad.creative ? html_escape(product_title(*ad.creative)) : std::string("ad");
    html += "</a></div></body></html>";
    return {200, url, html, {}, 0.05};
}

ServedAd SimWorld::serve_ad(const std::string& platform, const Identity& identity, const std::string& page_category,
                            double at)
{
    std::lock_guard lock(mu_);
    auto it = exchanges_.find(platform);
    if (it == exchanges_.end())
        throw InputError("unknown exchange " + platform);
    return choose_ad(it->second, identity.cookie_jar, page_category, at);
}

ServedAd SimWorld::choose_ad(Exchange& ex, const std::string& jar, const std::string& page_category, double at)
{
    const auto& policy = ex.policy;
    auto& rng = rng_for(policy.platform, jar);
    auto pick = [&](auto pred) -> const Creative* {
        std::vector<const Creative*> pool;
        for (const auto& c : inventory_)
            if (pred(c))
                pool.push_back(&c);
        if (pool.empty())
            return nullptr;
        return pool[uniform_index(rng, pool.size())];
    };

    ServedAd ad;
    bool random = true;
    if (policy.mode == TargetingMode::Contextual) {
        random = false;
        ad.creative = pick([&](const Creative& c) {
            return c.audience == Audience::General && c.category == page_category;
        });
    } else if (policy.mode == TargetingMode::Behavioral) {
        const auto& prof = ex.profiles[jar];
        const std::pair<const std::string, CategoryProfile>* top = nullptr;
        for (const auto& entry : prof)
            if (entry.second.weight > 0 && (!top || entry.second.weight > top->second.weight))
                top = &entry;
        if (top && top->second.weight >= policy.profile_threshold && top->second.qualified_since &&
            at - *top->second.qualified_since >= policy.reaction_delay_days * scenario_.day_length &&
            open_unit(rng) < policy.targeting_boost) {
            ad.creative = pick([&](const Creative& c) { return c.category == top->first; });
            ad.targeted = ad.creative != nullptr;
        }
    }
    if (random && !ad.creative)
        ad.creative = pick([](const Creative& c) { return c.audience == Audience::General; });
    ad.landing_url = ad.creative ? ad.creative->landing_url : std::string(kHouseLanding);
    log(at, jar, "ad",
        policy.platform + " " + (ad.creative ? std::to_string(ad.creative->index) : std::string("house")) +
            (ad.targeted ? " targeted" : ""));
    return ad;
}

FetchResponse SimWorld::serve_landing(const std::string& url, const Identity& identity, double at)
{
    log(at, identity.cookie_jar, "landing", url);
    const Creative* c = creative_for_landing(url);
    if (!c)
        return {200, url, "<html><head><title></title></head><body></body></html>", {}, 0.1};
    const double latency = c->slow
        ? c->latency
        : 0.2 + static_cast<double>(fnv1a64(url + "@" + std::to_string(at)) % 2800) / 1000.0;
    if (c->broken)
        return {503, url, {}, {}, latency};

    const std::string product = html_escape(product_title(*c));
    std::string html = "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><title>";
    switch (c->flavor) {
    case LandingFlavor::Title:
        html += product + "</title></head><body><h1>" + product + "</h1><p>" + filler_paragraph(120) + "</p>";
        break;
    case LandingFlavor::ProductDetail:
        html += "淘宝热卖</title></head><body><p>" + filler_paragraph(120) +
                "</p><div class=\"details\"><div class=\"basic\"><h2><a href=\"#\">" + product +
                "</a></h2></div></div>";
        break;
    case LandingFlavor::ImageOnly:
        html += "淘宝热卖</title></head><body><img src=\"" + html_escape(c->image_url) + "\"><p>" +
                kProductWords[c->index % kProductWords.size()] + "</p>";
        break;
    case LandingFlavor::Opaque:
        html += "淘宝热卖</title></head><body><p>" + filler_paragraph(120) + "</p>";
        break;
    }
    html += "</body></html>";
    return {200, url, html, {}, latency};
}

void SimWorld::advance_day()
{
    std::lock_guard lock(mu_);
    for (auto& [platform, ex] : exchanges_) {
        const double keep = 1.0 - ex.policy.memory_decay_per_day;
        for (auto& [jar, cats] : ex.profiles)
            for (auto& [cat, prof] : cats) {
                prof.weight *= keep;
                if (prof.weight < ex.policy.profile_threshold)
                    prof.qualified_since.reset();
            }
    }
    log(day_ * scenario_.day_length, "world", "advance_day", std::to_string(day_ + 1));
    ++day_;
}

void SimWorld::advance_to_day(int day)
{
    while (day_ < day)
        advance_day();
}

std::vector<HttpRequestRecord> SimWorld::crawl_log() const
{
    std::vector<HttpRequestRecord> out;
    std::int64_t id = 0;
    const std::vector<std::pair<std::string, std::string>> headers = {{"User-Agent", "adxprobe-crawler/1.0"},
                                                                      {"Accept", "text/html"}};
    auto add = [&](std::int64_t visit, std::string url, const std::string& top, std::string referrer) {
        HttpRequestRecord r;
        r.id = ++id;
        r.crawl_id = 1;
        r.visit_id = visit;
        r.url = std::move(url);
        r.top_level_url = top;
        r.referrer = std::move(referrer);
        r.headers = headers;
        out.push_back(std::move(r));
    };
    for (std::size_t i = 0; i < pages_.size(); ++i) {
        const auto& p = pages_[i];
        const auto visit = static_cast<std::int64_t>(i + 1);
        add(visit, p.url, p.url, "");
        add(visit, "https://static.sim.example/js/app.js?v=" + std::to_string(i % 3), p.url, p.url);
        if (i % 4 == 0)
            add(visit, "http://pos.baidu.com.evil.example/track?p=" + std::to_string(i), p.url, p.url);
        if (i % 5 == 1)
            add(visit, "https://googleads.g.doubleclick.net.cdn.example/pixel.gif", p.url, p.url);
        for (const auto& platform : p.exchanges) {
            const auto& ex = exchanges_.at(platform);
            for (int slot = 0; slot < p.slots; ++slot) {
                std::string parent = p.url;
                for (int depth = 1; depth <= ex.policy.frame_depth; ++depth) {
                    std::string frame = frame_url(ex, p, slot, depth);
                    add(visit, frame, p.url, parent);
                    parent = std::move(frame);
                }
            }
        }
    }
    return out;
}

std::map<std::string, std::vector<std::string>> SimWorld::image_fixtures() const
{
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& c : inventory_)
        if (!c.image_url.empty())
            out[image_key({c.image_url, {}})] = c.words;
    return out;
}

std::map<std::string, std::vector<std::string>> SimWorld::keyword_fixtures() const
{
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& c : inventory_) {
        auto words = c.words;
        words.push_back(kProductWords[c.index % kProductWords.size()]);
        for (std::size_t i = 0; i < 3; ++i)
            words.push_back(kFillerWords[(c.index + i) % kFillerWords.size()]);
        out[c.landing_url] = std::move(words);
    }
    return out;
}

std::vector<SimEvent> SimWorld::transcript() const
{
    std::lock_guard lock(mu_);
    auto out = events_;
    std::sort(out.begin(), out.end(), [](const SimEvent& a, const SimEvent& b) {
        return std::tie(a.time, a.actor, a.action, a.detail) < std::tie(b.time, b.actor, b.action, b.detail);
    });
    return out;
}

} // namespace adxprobe
