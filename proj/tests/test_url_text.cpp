#include "adxprobe/text.hpp"
#include "adxprobe/url.hpp"
#include "adxprobe/utf8.hpp"

#include <gtest/gtest.h>

using namespace adxprobe;

TEST(Url, ParsesAndLowercasesSchemeAndHost)
{
    auto u = parse_url("HTTPS://Pos.Baidu.COM:8080/a/B?x=1#frag");
    ASSERT_TRUE(u);
    EXPECT_EQ(u->scheme, "https");
    EXPECT_EQ(u->host, "pos.baidu.com");
    EXPECT_EQ(u->port, "8080");
    EXPECT_EQ(u->target, "/a/B?x=1");
    EXPECT_EQ(u->fragment, "frag");
}

TEST(Url, RejectsRelativeAndWhitespace)
{
    EXPECT_FALSE(is_absolute_url("/path"));
    EXPECT_FALSE(is_absolute_url("http://a b.com/"));
    EXPECT_FALSE(is_absolute_url("mailto:x@y"));
    EXPECT_TRUE(is_absolute_url("http://a.com"));
}

TEST(Url, NormalizeStripsFragment)
{
    EXPECT_EQ(normalize_page_url("HTTP://Example.COM/Path?q=1#top"), "http://example.com/Path?q=1");
}

TEST(Url, Resolve)
{
    EXPECT_EQ(resolve_url("https://a.com/x/y.html", "z.html"), "https://a.com/x/z.html");
    EXPECT_EQ(resolve_url("https://a.com/x/y.html", "/r"), "https://a.com/r");
    EXPECT_EQ(resolve_url("https://a.com/x/y.html", "//b.com/q"), "https://b.com/q");
    EXPECT_EQ(resolve_url("https://a.com/x/y.html", "http://c.com/"), "http://c.com/");
}

TEST(Url, PercentRoundTrip)
{
    const std::string s = "https://pub.example/a?b=c&d=金融";
    EXPECT_EQ(percent_decode(percent_encode(s)), s);
    EXPECT_EQ(query_param("http://x.com/f?pub=" + percent_encode(s) + "&slot=2", "pub"), s);
    EXPECT_EQ(query_param("http://x.com/f?slot=2", "slot"), "2");
    EXPECT_FALSE(query_param("http://x.com/f?slot=2", "depth"));
}

TEST(Utf8, DecodeEncodeAndClasses)
{
    const auto cps = utf8::decode("a金😀");
    ASSERT_EQ(cps.size(), 3u);
    EXPECT_EQ(utf8::encode(std::u32string(cps.begin(), cps.end())), "a金😀");
    EXPECT_TRUE(utf8::is_cjk(U'金'));
    EXPECT_FALSE(utf8::is_cjk(U'a'));
    EXPECT_EQ(utf8::decode("\xff").front(), 0xFFFDu);
}

TEST(Text, TokenizeGreedyLongestMatch)
{
    Dictionary dict({"金融", "金融投资", "投资", "手表", "手机"});
    const auto t = tokenize("金融投资和股票 Hello WORLD 2024", dict);
    const std::vector<std::string> want = {"金融投资", "和", "股", "票", "hello", "world", "2024"};
    EXPECT_EQ(t, want);
}

TEST(Text, TokenizeSeparatesOnPunctuation)
{
    Dictionary dict({"手表", "手机"});
    EXPECT_EQ(tokenize("手表，手机!", dict), (std::vector<std::string>{"手表", "手机"}));
}

TEST(Text, StripMarkupDropsScriptStyleComments)
{
    const std::string html = "<html><head><title>T</title><style>.a{}</style><script>var x='<p>';</script></head>"
                             "<body><!-- hidden --><p>Hello&nbsp;&amp;   <b>world</b></p></body></html>";
    EXPECT_EQ(strip_markup(html), "T Hello & world");
    EXPECT_EQ(strip_markup(html, true), "Hello & world");
}

TEST(Text, ExtractTitle)
{
    EXPECT_EQ(extract_title("<TITLE> 智能手表 &amp; 手机 </TITLE>"), "智能手表 & 手机");
    EXPECT_FALSE(extract_title("<p>no title</p>"));
}

TEST(Text, ExtractTextCountsTerms)
{
    Dictionary dict({"金融", "股票"});
    const auto doc = extract_text("<title>金融</title><p>金融股票</p>", dict, "u");
    EXPECT_EQ(doc.url, "u");
    EXPECT_EQ(doc.length(), 3u);
    EXPECT_EQ(doc.term_counts.at("金融"), 2);
}

TEST(Text, ScanTagsAttributes)
{
    const auto tags = scan_tags("<iframe SRC='a.html' width=3></iframe><a href=\"x\">y</a>");
    ASSERT_EQ(tags.size(), 2u);
    EXPECT_EQ(tags[0].name, "iframe");
    EXPECT_EQ(tags[0].attr("src"), "a.html");
    EXPECT_EQ(tags[1].attr("href"), "x");
}
