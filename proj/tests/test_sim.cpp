#include "adxprobe/detect.hpp"
#include "adxprobe/error.hpp"
#include "adxprobe/sim.hpp"
#include "adxprobe/text.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace adxprobe;

namespace {

const std::filesystem::path kData = ADXPROBE_DATA_DIR;

struct Env {
    AdxRuleset ruleset = AdxRuleset::load(kData / "ruleset.jsonl");
    Taxonomy taxonomy = Taxonomy::load(kData / "taxonomy.jsonl");
};

const Env& env()
{
    static const Env e;
    return e;
}

Scenario base_scenario(ExchangePolicy google)
{
    Scenario s;
    s.seed = 3;
    s.day_length = 1000;
    google.platform = "google";
    s.exchanges = {google, {"baidu", TargetingMode::Contextual}};
    s.publishers = {{"金融", 4, {"google"}}, {"教育", 2, {"baidu"}}, {"体育", 2, {}}};
    s.controls = {"新闻", 5, {"google", "baidu"}, "zh", 2};
    s.inventory.categories = {"金融", "教育", "新闻", "体育"};
    return s;
}

ExchangePolicy behavioral(double boost, int delay = 0, double decay = 0.0)
{
    ExchangePolicy p;
    p.mode = TargetingMode::Behavioral;
    p.targeting_boost = boost;
    p.reaction_delay_days = delay;
    p.memory_decay_per_day = decay;
    return p;
}

const Identity kUser{"ua", "jar-1"};

std::string first_page(const SimWorld& w, const std::string& category)
{
    for (const auto& p : w.pages())
        if (p.category == category && !p.control)
            return p.url;
    throw std::runtime_error("no page");
}

} // namespace

TEST(Sim, FramesMatchExchangePrefixes)
{
    SimWorld w(base_scenario(behavioral(0.8)), env().ruleset, env().taxonomy);
    const auto page = first_page(w, "金融");
    const auto r = w.fetch({page, kUser, 0});
    ASSERT_EQ(r.status, 200);
    int frames = 0;
    for (const auto& tag : scan_tags(r.body))
        if (tag.name == "iframe") {
            ++frames;
            EXPECT_EQ(env().ruleset.match(*tag.attr("src")), "google");
        }
    EXPECT_EQ(frames, 1);
    const auto none = w.fetch({first_page(w, "体育"), kUser, 0});
    int none_frames = 0;
    for (const auto& tag : scan_tags(none.body))
        none_frames += tag.name == "iframe";
    EXPECT_EQ(none_frames, 0);
}

TEST(Sim, VisitsBuildProfilesOnlyForEmbeddedExchanges)
{
    SimWorld w(base_scenario(behavioral(0.8)), env().ruleset, env().taxonomy);
    const auto page = first_page(w, "金融");
    w.fetch({page, kUser, 0});
    w.fetch({page, kUser, 1});
    EXPECT_DOUBLE_EQ(w.profile("google", "jar-1", "金融").weight, 2.0);
    EXPECT_TRUE(w.profiles("baidu", "jar-1").empty());
    EXPECT_TRUE(w.profiles("google", "jar-2").empty());
}

TEST(Sim, UnknownUrlIs404)
{
    SimWorld w(base_scenario(behavioral(0.8)), env().ruleset, env().taxonomy);
    EXPECT_EQ(w.fetch({"https://nowhere.example/x", kUser, 0}).status, 404);
}

TEST(Sim, FullBoostAlwaysTargets)
{
    SimWorld w(base_scenario(behavioral(1.0)), env().ruleset, env().taxonomy);
    const auto page = first_page(w, "金融");
    for (int i = 0; i < 3; ++i)
        w.fetch({page, kUser, static_cast<double>(i)});
    for (int i = 0; i < 200; ++i) {
        const auto ad = w.serve_ad("google", kUser, "新闻", 10.0 + i);
        ASSERT_NE(ad.creative, nullptr);
        EXPECT_TRUE(ad.targeted);
        EXPECT_EQ(ad.creative->category, "金融");
    }
}

TEST(Sim, EmptyProfileIsUniformOverGeneralCreatives)
{
    SimWorld w(base_scenario(behavioral(1.0)), env().ruleset, env().taxonomy);
    std::map<std::string, int> counts;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const auto ad = w.serve_ad("google", kUser, "新闻", i);
        ASSERT_NE(ad.creative, nullptr);
        EXPECT_FALSE(ad.targeted);
        EXPECT_EQ(ad.creative->audience, Audience::General);
        ++counts[ad.creative->category];
    }
    ASSERT_EQ(counts.size(), 4u);
    double chi2 = 0;
    for (const auto& [c, k] : counts)
        chi2 += std::pow(k - n / 4.0, 2) / (n / 4.0);
    EXPECT_LT(chi2, 16.27); // 3 dof, p = 0.001
}

TEST(Sim, PartialBoostMatchesExpectedShare)
{
    auto s = base_scenario(behavioral(0.8));
    s.inventory.categories = {"金融", "教育", "新闻", "体育", "旅游", "汽车", "购物", "住宅"};
    SimWorld w(s, env().ruleset, env().taxonomy);
    const auto page = first_page(w, "金融");
    for (int i = 0; i < 3; ++i)
        w.fetch({page, kUser, static_cast<double>(i)});
    const int n = 20000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
        hits += w.serve_ad("google", kUser, "新闻", 10.0 + i).creative->category == "金融";
    const double expected = 0.8 + 0.2 / 8.0;
    const double sd = std::sqrt(expected * (1 - expected) / n);
    EXPECT_NEAR(static_cast<double>(hits) / n, expected, 4 * sd);
}

TEST(Sim, ReactionDelayHoldsBackTargeting)
{
    SimWorld w(base_scenario(behavioral(1.0, 2)), env().ruleset, env().taxonomy);
    const auto page = first_page(w, "金融");
    for (int i = 0; i < 3; ++i)
        w.fetch({page, kUser, static_cast<double>(i)});
    EXPECT_FALSE(w.serve_ad("google", kUser, "新闻", 1000).targeted);
    EXPECT_TRUE(w.serve_ad("google", kUser, "新闻", 2002).targeted);
}

TEST(Sim, DecayHalvesWeights)
{
    SimWorld w(base_scenario(behavioral(1.0, 0, 0.5)), env().ruleset, env().taxonomy);
    const auto page = first_page(w, "金融");
    for (int i = 0; i < 8; ++i)
        w.fetch({page, kUser, static_cast<double>(i)});
    w.advance_day();
    EXPECT_DOUBLE_EQ(w.profile("google", "jar-1", "金融").weight, 4.0);
    EXPECT_TRUE(w.profile("google", "jar-1", "金融").qualified_since.has_value());
    w.advance_day();
    EXPECT_DOUBLE_EQ(w.profile("google", "jar-1", "金融").weight, 2.0);
    EXPECT_FALSE(w.profile("google", "jar-1", "金融").qualified_since.has_value());
    EXPECT_EQ(w.day(), 3);
}

TEST(Sim, DecayExtremes)
{
    for (const double decay : {0.0, 1.0}) {
        SimWorld w(base_scenario(behavioral(1.0, 0, decay)), env().ruleset, env().taxonomy);
        const auto page = first_page(w, "金融");
        for (int i = 0; i < 4; ++i)
            w.fetch({page, kUser, static_cast<double>(i)});
        w.advance_to_day(3);
        EXPECT_DOUBLE_EQ(w.profile("google", "jar-1", "金融").weight, decay == 0.0 ? 4.0 : 0.0);
    }
}

TEST(Sim, ContextualFollowsPageCategory)
{
    SimWorld w(base_scenario(behavioral(0.8)), env().ruleset, env().taxonomy);
    for (int i = 0; i < 50; ++i)
        EXPECT_EQ(w.serve_ad("baidu", kUser, "教育", i).creative->category, "教育");
    EXPECT_EQ(w.serve_ad("baidu", kUser, "汽车", 0).landing_url, kHouseLanding);
}

TEST(Sim, LandingFlavorsRenderAsDesigned)
{
    SimWorld w(base_scenario(behavioral(0.8)), env().ruleset, env().taxonomy);
    for (const auto& c : w.inventory()) {
        ASSERT_EQ(w.creative_for_landing(c.landing_url), &c);
        const auto r = w.fetch({c.landing_url, {"ua", "reader"}, 0});
        ASSERT_EQ(r.status, 200);
        const auto title = extract_title(r.body).value_or("");
        if (c.flavor == LandingFlavor::Title)
            EXPECT_NE(title, "淘宝热卖");
        else
            EXPECT_EQ(title, "淘宝热卖");
        EXPECT_EQ(r.body.find("class=\"basic\"") != std::string::npos, c.flavor == LandingFlavor::ProductDetail);
        EXPECT_EQ(!c.image_url.empty(), c.flavor == LandingFlavor::ImageOnly);
    }
}

TEST(Sim, DeterministicTranscript)
{
    auto run = [] {
        SimWorld w(base_scenario(behavioral(0.8)), env().ruleset, env().taxonomy);
        for (const auto& url : w.control_pages())
            w.fetch({url, kUser, 1});
        for (int i = 0; i < 30; ++i)
            w.serve_ad("google", kUser, "新闻", i);
        w.advance_day();
        return w.transcript();
    };
    EXPECT_EQ(run(), run());
}

TEST(Sim, CrawlLogFeedsTheDetector)
{
    SimWorld w(base_scenario(behavioral(0.8)), env().ruleset, env().taxonomy);
    const auto log = w.crawl_log();
    const auto matrix = build_monitor_matrix(log, env().ruleset);
    for (const auto& p : w.pages()) {
        EXPECT_EQ(matrix.at(p.url, "google"), std::find(p.exchanges.begin(), p.exchanges.end(), "google") != p.exchanges.end()) << p.url;
        EXPECT_EQ(matrix.at(p.url, "baidu"), std::find(p.exchanges.begin(), p.exchanges.end(), "baidu") != p.exchanges.end()) << p.url;
    }
}

TEST(Scenario, ValidationErrors)
{
    auto s = base_scenario(behavioral(0.8));
    s.controls.count = 4;
    EXPECT_THROW(s.validate(env().ruleset, env().taxonomy), InputError);
    s = base_scenario(behavioral(0.8));
    s.exchanges[1].platform = "nosuch";
    EXPECT_THROW(s.validate(env().ruleset, env().taxonomy), InputError);
    s = base_scenario(behavioral(1.5));
    EXPECT_THROW(s.validate(env().ruleset, env().taxonomy), InputError);
    EXPECT_NO_THROW(Scenario::load(kData / "scenarios" / "demo.json").validate(env().ruleset, env().taxonomy));
}
