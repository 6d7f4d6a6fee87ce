#include "adxprobe/detect.hpp"
#include "adxprobe/error.hpp"
#include "adxprobe/identify.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace adxprobe;

namespace {

const std::filesystem::path kData = ADXPROBE_DATA_DIR;
using Store = std::map<std::string, std::vector<std::string>>;

struct Fixture {
    Dictionary dict = Dictionary::load(kData / "dict.txt");
    Taxonomy taxonomy = Taxonomy::load(kData / "taxonomy.jsonl");
    AdxRuleset ruleset = AdxRuleset::load(kData / "ruleset.jsonl");
    ProductRules rules = ProductRules::load(kData / "product_rules.jsonl", &ruleset);
    FixtureImageLabeler images;
    FixtureKeywordService keywords;
    IdentifyContext ctx;

    explicit Fixture(Store image_store = {}, Store keyword_store = {})
        : images(std::move(image_store)), keywords(std::move(keyword_store))
    {
        taxonomy.extend(dict);
        ctx.dictionary = &dict;
        ctx.taxonomy = &taxonomy;
        ctx.product_rules = &rules;
        ctx.image_labeler = &images;
        ctx.keyword_service = &keywords;
        ctx.title_blocklist = load_word_set(kData / "title_blocklist.txt");
        ctx.stopwords = load_word_set(kData / "stopwords.txt");
    }
};

AdObservation observation(std::string html, std::string platform = "ali", std::string url = "https://shop.example/1")
{
    FetchResponse r{200, url, std::move(html), {}, 0.1};
    AdObservation o;
    o.id = 7;
    o.link.platform = std::move(platform);
    o.link.href = url;
    o.snapshot = make_snapshot(r);
    return o;
}

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

const std::string kLongText(300, 'x');

std::string qipao_page()
{
    return "<html><head><title>淘宝热卖</title></head><body><p>" + kLongText +
           "</p><div class=\"details\"><div class=\"basic\"><h2><a href=\"#\">金丝绒旗袍连衣裙</a></h2></div></div></body></html>";
}

} // namespace

TEST(ImageDominant, Threshold)
{
    LandingSnapshot s;
    s.images = {"a.jpg"};
    EXPECT_TRUE(is_image_dominant(s));
    s.body_text = std::string(40, 'a');
    EXPECT_TRUE(is_image_dominant(s, 100));
    s.body_text = std::string(2000, 'a');
    EXPECT_FALSE(is_image_dominant(s));
    s.body_text.clear();
    s.images.clear();
    EXPECT_FALSE(is_image_dominant(s));
}

TEST(Title, SmartWatchExample)
{
    Fixture f;
    const auto o = observation("<title>智能触屏手表手机支持微信 qq</title><p>" + kLongText + "</p>");
    const auto kw = identify_by_title(o.snapshot, f.ctx);
    ASSERT_TRUE(kw);
    EXPECT_TRUE(contains(*kw, "手表"));
    EXPECT_TRUE(contains(*kw, "qq"));
}

TEST(Title, GenericAndMissing)
{
    Fixture f;
    EXPECT_FALSE(identify_by_title(observation("<title>淘宝热卖</title>").snapshot, f.ctx));
    EXPECT_FALSE(identify_by_title(observation("<p>no title</p>").snapshot, f.ctx));
    EXPECT_FALSE(identify_by_title(observation("<title>的 2024</title>").snapshot, f.ctx));
}

TEST(ProductDetail, QipaoExample)
{
    Fixture f;
    const auto kw = identify_by_product_detail(observation(qipao_page()).snapshot, "ali", f.ctx);
    ASSERT_TRUE(kw);
    EXPECT_TRUE(contains(*kw, "旗袍"));
    EXPECT_TRUE(contains(*kw, "连衣裙"));
}

TEST(ProductDetail, NoRuleOrNoMatch)
{
    Fixture f;
    EXPECT_FALSE(identify_by_product_detail(observation(qipao_page()).snapshot, "unknown", f.ctx));
    std::string altered = qipao_page();
    altered.replace(altered.find("basic"), 5, "other");
    EXPECT_FALSE(identify_by_product_detail(observation(altered).snapshot, "ali", f.ctx));
}

TEST(ProductRules, MustNameKnownPlatform)
{
    const auto rs = AdxRuleset::load(kData / "ruleset.jsonl");
    EXPECT_THROW(ProductRules({{"nosuch", "<a>", "</a>"}}, &rs), InputError);
    EXPECT_THROW(ProductRules({{"ali", "", "</a>"}}, &rs), InputError);
}

TEST(ImageService, FixtureLookupByHash)
{
    const ImageRef beads{"https://img.example/beads.jpg", {}};
    FixtureImageLabeler labeler(std::map<std::string, std::vector<std::string>>{{image_key(beads), {"佛珠"}}});
    EXPECT_EQ(identify_via_image_service(beads, &labeler).labels, std::vector<std::string>{"佛珠"});
    EXPECT_TRUE(identify_via_image_service({"https://img.example/other.jpg", {}}, &labeler).labels.empty());
    EXPECT_EQ(labeler.calls().size(), 2u);
    // bytes take precedence over the URL
    const ImageRef with_bytes{"https://img.example/beads.jpg", "\x89PNG"};
    EXPECT_NE(image_key(with_bytes), image_key(beads));
    EXPECT_FALSE(identify_via_image_service(beads, nullptr).error.empty());
}

TEST(KeywordService, CapsAtFive)
{
    FixtureKeywordService svc(Store{{"https://reno.example/", {"装修", "家居", "建材", "家具", "设计", "施工", "工程"}},
                               {"https://three.example/", {"a", "b", "c"}},
                               {"https://empty.example/", {}}});
    const auto r = identify_via_keyword_service("https://reno.example/", &svc);
    EXPECT_EQ(r.labels.size(), 5u);
    EXPECT_TRUE(contains(r.labels, "装修"));
    EXPECT_EQ(identify_via_keyword_service("https://three.example/", &svc).labels.size(), 3u);
    EXPECT_TRUE(identify_via_keyword_service("https://empty.example/", &svc).labels.empty());
}

TEST(Cascade, GoodTitleStopsEarly)
{
    Fixture f;
    const auto label = identify(observation("<title>股票投资专享</title><img src=\"a.jpg\"><p>" + kLongText + "</p>"), f.ctx);
    EXPECT_EQ(label.method, IdentifyMethod::Title);
    EXPECT_EQ(label.category, "金融");
    EXPECT_EQ(label.observation_id, 7u);
    EXPECT_EQ(label.attempts, std::vector<IdentifyMethod>{IdentifyMethod::Title});
    EXPECT_TRUE(f.images.calls().empty());
    EXPECT_TRUE(f.keywords.calls().empty());
}

TEST(Cascade, GenericTitleFallsToProductDetail)
{
    Fixture f;
    const auto label = identify(observation(qipao_page()), f.ctx);
    EXPECT_EQ(label.method, IdentifyMethod::ProductDetail);
    EXPECT_EQ(label.category, "时尚");
    EXPECT_TRUE(f.keywords.calls().empty());
}

TEST(Cascade, ImageOnlyPage)
{
    const std::string img = "https://shop.example/beads.jpg";
    Fixture f(Store{{image_key({img, {}}), {"佛珠"}}});
    const auto label = identify(observation("<title>淘宝热卖</title><img src=\"" + img + "\">"), f.ctx);
    EXPECT_EQ(label.method, IdentifyMethod::Image);
    EXPECT_EQ(label.keywords, std::vector<std::string>{"佛珠"});
    EXPECT_EQ(label.category, "宗教");
    EXPECT_EQ(f.images.calls().size(), 1u);
    EXPECT_TRUE(f.keywords.calls().empty());
}

TEST(Cascade, ImageServiceDownDegradesToKeywordService)
{
    const std::string img = "https://shop.example/beads.jpg";
    Fixture f(Store{{image_key({img, {}}), {"佛珠"}}}, Store{{"https://shop.example/1", {"佛珠", "宗教"}}});
    f.images.set_unavailable("timeout");
    const auto label = identify(observation("<title>淘宝热卖</title><img src=\"" + img + "\">"), f.ctx);
    EXPECT_EQ(label.method, IdentifyMethod::KeywordService);
    EXPECT_NE(label.reason.find("timeout"), std::string::npos);
    EXPECT_EQ(label.attempts.front(), IdentifyMethod::Image);
    EXPECT_EQ(label.attempts.back(), IdentifyMethod::KeywordService);
}

TEST(Cascade, AllEmptyIsUnresolved)
{
    Fixture f;
    f.keywords.set_unavailable("service down");
    const auto label = identify(observation("<title>淘宝热卖</title><p>" + kLongText + "</p>"), f.ctx);
    EXPECT_EQ(label.method, IdentifyMethod::Unresolved);
    EXPECT_TRUE(label.keywords.empty());
    EXPECT_EQ(label.category, kUncategorized);
    EXPECT_NE(label.reason.find("service down"), std::string::npos);
}

TEST(Cascade, FailedFetchIsUnresolvedWithoutCalls)
{
    Fixture f;
    auto o = observation("");
    o.status = FetchStatus::Failed;
    o.reason = "HTTP 503";
    const auto label = identify(o, f.ctx);
    EXPECT_EQ(label.method, IdentifyMethod::Unresolved);
    EXPECT_TRUE(f.keywords.calls().empty());
}

TEST(Cascade, CategoryMatchesBruteForce)
{
    Fixture f;
    for (const std::string title : {"股票投资专享", "篮球足球特价", "旗袍", "装修家具新品", "无关内容"}) {
        const auto label = identify(observation("<title>" + title + "</title><p>" + kLongText + "</p>"), f.ctx);
        std::string best = std::string(kUncategorized);
        int best_n = 0;
        for (const auto& c : f.taxonomy.categories()) {
            int n = 0;
            for (const auto& k : label.keywords)
                n += contains(c.keywords, k);
            if (n > best_n || (n == best_n && n > 0 && c.name < best)) {
                best = c.name;
                best_n = n;
            }
        }
        EXPECT_EQ(label.category, best) << title;
    }
}

TEST(Cascade, MethodUnresolvedIffKeywordsEmpty)
{
    Fixture f;
    for (const std::string html : {"<title>股票</title>", "<title>淘宝热卖</title>", "", "<title>的</title>"}) {
        const auto l = identify(observation(html + "<p>" + kLongText + "</p>"), f.ctx);
        EXPECT_EQ(l.method == IdentifyMethod::Unresolved, l.keywords.empty());
    }
}
