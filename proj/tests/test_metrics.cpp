#include "adxprobe/error.hpp"
#include "adxprobe/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace adxprobe;

namespace {

KeywordSets sets(KeywordSet t, KeywordSet l, KeywordSet k)
{
    return {std::move(t), std::move(l), std::move(k)};
}

// Brute-force evaluator over explicit membership loops.
double oracle_ttk(const KeywordSets& s)
{
    std::size_t n = 0;
    for (const auto& t : s.training)
        if (s.landing.count(t) && !s.blank.count(t))
            ++n;
    return static_cast<double>(n) / static_cast<double>(s.training.size());
}

double oracle_bailp(const KeywordSets& s)
{
    if (s.landing.empty())
        return 0.0;
    bool shared = false;
    for (const auto& t : s.training)
        shared = shared || s.blank.count(t) > 0;
    std::size_t n = 0;
    for (const auto& l : s.landing) {
        const bool in_t = s.training.count(l) > 0;
        if (shared ? (in_t && !s.blank.count(l)) : in_t)
            ++n;
    }
    return static_cast<double>(n) / static_cast<double>(s.landing.size());
}

KeywordSet random_set(std::mt19937_64& rng, int universe, double p)
{
    std::bernoulli_distribution in(p);
    KeywordSet out;
    for (int i = 0; i < universe; ++i)
        if (in(rng))
            out.insert("w" + std::to_string(i));
    return out;
}

LabeledAd ad(std::string persona, std::string platform, int day, std::vector<std::string> kw, std::string category = "c")
{
    LabeledAd a;
    a.persona = std::move(persona);
    a.platform = std::move(platform);
    a.day = day;
    a.label.keywords = std::move(kw);
    a.label.category = std::move(category);
    a.label.method = a.label.keywords.empty() ? IdentifyMethod::Unresolved : IdentifyMethod::Title;
    return a;
}

} // namespace

TEST(Ttk, Examples)
{
    EXPECT_DOUBLE_EQ(ttk(sets({"a", "b"}, {"a", "c"}, {})), 0.5);
    EXPECT_DOUBLE_EQ(ttk(sets({"a", "b"}, {}, {})), 0.0);
    EXPECT_DOUBLE_EQ(ttk(sets({"a", "b"}, {"a", "b"}, {"a", "b"})), 0.0);
    EXPECT_THROW(ttk(sets({}, {"a"}, {})), Error);
}

TEST(Bailp, Examples)
{
    const auto b1 = bailp(sets({"a", "b"}, {"a", "b", "c", "d"}, {"a"}));
    EXPECT_DOUBLE_EQ(b1.value, 0.25);
    EXPECT_EQ(b1.branch, BailpBranch::ExcludeBlank);
    const auto b2 = bailp(sets({"a"}, {"a", "x"}, {"y"}));
    EXPECT_DOUBLE_EQ(b2.value, 0.5);
    EXPECT_EQ(b2.branch, BailpBranch::Intersect);
    EXPECT_DOUBLE_EQ(bailp(sets({"a"}, {"x"}, {"y"})).value, 0.0);
    const auto empty = bailp(sets({"a"}, {}, {}));
    EXPECT_DOUBLE_EQ(empty.value, 0.0);
    EXPECT_TRUE(empty.no_ads);
}

TEST(Metrics, MatchBruteForceOnRandomTriples)
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 2000; ++trial) {
        auto s = sets(random_set(rng, 12, 0.4), random_set(rng, 12, 0.4), random_set(rng, 12, 0.3));
        if (s.training.empty())
            continue;
        const double t = ttk(s);
        const double b = bailp(s).value;
        EXPECT_EQ(t, oracle_ttk(s));
        EXPECT_EQ(b, oracle_bailp(s));
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, 1.0);
        EXPECT_GE(b, 0.0);
        EXPECT_LE(b, 1.0);
    }
}

TEST(Metrics, MonotoneInTargetedAdditions)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        auto s = sets(random_set(rng, 10, 0.5), random_set(rng, 10, 0.3), random_set(rng, 10, 0.3));
        if (s.training.empty())
            continue;
        for (const auto& t : s.training) {
            if (s.blank.count(t) || s.landing.count(t))
                continue;
            auto grown = s;
            grown.landing.insert(t);
            EXPECT_GE(ttk(grown), ttk(s));
            EXPECT_GE(bailp(grown).value, bailp(s).value);
        }
    }
}

TEST(Metrics, DisjointBlankNoiseChangesNothing)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        auto s = sets(random_set(rng, 10, 0.5), random_set(rng, 10, 0.4), random_set(rng, 10, 0.3));
        if (s.training.empty())
            continue;
        auto noisy = s;
        noisy.blank.insert({"noise1", "noise2", "noise3"});
        EXPECT_EQ(ttk(noisy), ttk(s));
        EXPECT_EQ(bailp(noisy).value, bailp(s).value);
        EXPECT_EQ(bailp(noisy).branch, bailp(s).branch);
    }
}

TEST(Collect, KeywordSetsFromAds)
{
    const std::vector<LabeledAd> ads = {
        ad("fin", "google", 1, {"股票", "手机"}),
        ad("fin", "google", 2, {"贷款"}),
        ad("fin", "baidu", 1, {"旅游"}),
        ad("blank", "google", 3, {"手机"}),
        ad("blank", "baidu", 1, {"汽车"}),
    };
    const KeywordSet training{"金融", "股票", "贷款"};
    const auto all = collect_keyword_sets(ads, "fin", "blank", training, {"google", 0, false});
    EXPECT_EQ(all.landing, (KeywordSet{"股票", "手机", "贷款"}));
    EXPECT_EQ(all.blank, KeywordSet{"手机"});
    EXPECT_DOUBLE_EQ(ttk(all), 2.0 / 3.0);

    const auto day1 = collect_keyword_sets(ads, "fin", "blank", training, {"google", 1, false});
    EXPECT_EQ(day1.landing, (KeywordSet{"股票", "手机"}));
    EXPECT_EQ(day1.blank, KeywordSet{"手机"}); // whole window for the baseline
    const auto cum2 = collect_keyword_sets(ads, "fin", "blank", training, {"google", 2, true});
    EXPECT_EQ(cum2.landing.size(), 3u);

    EXPECT_TRUE(collect_keyword_sets(ads, "nobody", "blank", training, {"google", 0, false}).landing.empty());
    EXPECT_THROW(collect_keyword_sets(ads, "fin", "ghost", training, {"google", 0, false}), Error);
}

TEST(Join, UnknownObservationThrows)
{
    AdObservation o;
    o.id = 1;
    o.link.persona = "p";
    o.link.platform = "google";
    o.day_index = 3;
    AdLabel good;
    good.observation_id = 1;
    const auto joined = join_labels(std::vector{o}, std::vector{good});
    ASSERT_EQ(joined.size(), 1u);
    EXPECT_EQ(joined[0].day, 3);
    EXPECT_EQ(joined[0].platform, "google");
    AdLabel bad;
    bad.observation_id = 99;
    EXPECT_THROW(join_labels(std::vector{o}, std::vector{bad}), Error);
}

TEST(Shares, TimelineSumsToOne)
{
    const std::vector<LabeledAd> ads = {
        ad("fin", "google", 1, {"股票"}, "金融"), ad("fin", "google", 1, {"学校"}, "教育"),
        ad("fin", "google", 1, {}, "uncategorized"), ad("fin", "google", 1, {"股票"}, "金融"),
        ad("fin", "google", 3, {"学校"}, "教育"),
    };
    const std::vector<std::string> platforms{"google", "baidu"};
    const auto tl = category_share_timeline(ads, "fin", platforms, 3);
    const auto& g = tl.at("google");
    EXPECT_DOUBLE_EQ(g.at(1).at("金融"), 0.5);
    EXPECT_DOUBLE_EQ(g.at(1).at(std::string(kUnresolvedBucket)), 0.25);
    EXPECT_TRUE(g.at(2).empty());
    EXPECT_DOUBLE_EQ(g.at(3).at("教育"), 1.0);
    for (const auto& [day, shares] : g) {
        double sum = 0;
        for (const auto& [c, v] : shares)
            sum += v;
        if (!shares.empty()) {
            EXPECT_NEAR(sum, 1.0, 1e-12) << day;
        }
    }
    EXPECT_EQ(tl.at("baidu").size(), 3u);
}

TEST(Scores, SeriesAndCsv)
{
    const std::vector<LabeledAd> ads = {
        ad("fin", "google", 1, {"手机"}), ad("fin", "google", 2, {"股票", "手机"}),
        ad("blank", "google", 1, {"手机"}),
    };
    const std::vector<ScoreSubject> subjects{{"fin", "金融", {"股票", "贷款"}}};
    const std::vector<std::string> platforms{"google"};
    const auto rows = score_series(ads, subjects, "blank", platforms, {2, false});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_DOUBLE_EQ(rows[0].ttk, 0.0);
    EXPECT_DOUBLE_EQ(rows[1].ttk, 0.5);
    EXPECT_DOUBLE_EQ(rows[1].bailp, 0.5);

    std::ostringstream csv;
    write_scores_csv(csv, rows);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "persona,platform,day,ttk,bailp");
    EXPECT_NE(csv.str().find("fin:金融,google,2,0.500000,0.500000"), std::string::npos);

    std::stringstream js;
    write_scores_jsonl(js, rows);
    const auto back = read_scores_jsonl(js);
    ASSERT_EQ(back.size(), rows.size());
    EXPECT_EQ(back[1].ttk, rows[1].ttk);
    EXPECT_EQ(back[1].branch, rows[1].branch);
}
