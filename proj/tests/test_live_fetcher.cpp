#include "adxprobe/live_fetcher.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

using namespace adxprobe;

namespace {

class LocalServer {
public:
    LocalServer()
    {
        server_.Get("/set", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Set-Cookie", "uid=42; Path=/");
            res.set_content("ok", "text/plain");
        });
        server_.Get("/echo", [](const httplib::Request& req, httplib::Response& res) {
            res.set_content("ua=" + req.get_header_value("User-Agent") + "|cookie=" + req.get_header_value("Cookie"),
                            "text/plain");
        });
        server_.Get("/hop", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/echo"); });
        server_.Get("/loop", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/loop"); });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer()
    {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST(LiveFetcher, SendsUserAgentAndKeepsJarsApart)
{
    LocalServer srv;
    LiveFetcher f({5.0, 5});
    const Identity alice{"agent-a", "jar-a"};
    const Identity bob{"agent-b", "jar-b"};
    ASSERT_TRUE(f.fetch({srv.url("/set"), alice, 0}).ok());
    const auto a = f.fetch({srv.url("/echo"), alice, 0});
    EXPECT_EQ(a.body, "ua=agent-a|cookie=uid=42");
    const auto b = f.fetch({srv.url("/echo"), bob, 0});
    EXPECT_EQ(b.body, "ua=agent-b|cookie=");
    EXPECT_EQ(f.cookie_header("jar-a", "127.0.0.1"), "uid=42");
    EXPECT_TRUE(f.cookie_header("jar-b", "127.0.0.1").empty());
}

TEST(LiveFetcher, FollowsRedirects)
{
    LocalServer srv;
    LiveFetcher f({5.0, 3});
    const auto r = f.fetch({srv.url("/hop"), {"ua", "j"}, 0});
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.final_url, srv.url("/echo"));
    const auto loop = f.fetch({srv.url("/loop"), {"ua", "j"}, 0});
    EXPECT_FALSE(loop.ok());
    EXPECT_FALSE(f.fetch({"ftp://127.0.0.1/x", {"ua", "j"}, 0}).ok());
}
