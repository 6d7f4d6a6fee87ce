#include "adxprobe/cli.hpp"
#include "adxprobe/workspace.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace adxprobe;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "adxprobe");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name)
{
    const auto dir = fs::path(ADXPROBE_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_log(const fs::path& dir)
{
    const auto path = dir / "log.jsonl";
    std::ofstream f(path);
    f << R"({"url":"https://googleads.g.doubleclick.net/x","top_level_url":"https://a.example/","referrer":""})" "\n"
      << R"({"url":"http://pos.baidu.com/y","top_level_url":"https://a.example/","referrer":""})" "\n"
      << R"({"url":"https://googleads.g.doubleclick.net/x","top_level_url":"https://b.example/","referrer":""})" "\n";
    return path;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

bool has_scratch(const fs::path& ws)
{
    for (const auto& e : fs::directory_iterator(ws))
        if (e.path().filename().string().starts_with(".tmp-"))
            return true;
    return false;
}

} // namespace

TEST(Cli, Sha256KnownVector)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
    EXPECT_EQ(cli({"--no-such-flag", "parse"}).code, kExitUsage);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, MissingInputIsExitTwo)
{
    const auto ws = fresh_dir("cli_missing");
    const auto r = cli({"--workspace", ws.string(), "parse", "--log", (ws / "absent.jsonl").string()});
    EXPECT_EQ(r.code, kExitInput);
    const auto r2 = cli({"--workspace", ws.string(), "intersect", "--platforms", "google"});
    EXPECT_EQ(r2.code, kExitInput);
    EXPECT_NE(r2.err.find("parse"), std::string::npos);
}

TEST(Cli, ParseIntersectAndIdempotence)
{
    const auto dir = fresh_dir("cli_parse");
    const auto ws = dir / "ws";
    const auto log = write_log(dir);
    ASSERT_EQ(cli({"--workspace", ws.string(), "parse", "--log", log.string()}).code, kExitOk);
    const auto matrix = slurp(ws / "parse" / "matrix.csv");
    const auto again = cli({"--workspace", ws.string(), "parse", "--log", log.string()});
    EXPECT_EQ(again.code, kExitOk);
    EXPECT_NE(again.out.find("up to date"), std::string::npos);
    EXPECT_EQ(cli({"--workspace", ws.string(), "--force", "parse", "--log", log.string()}).code, kExitOk);
    EXPECT_EQ(slurp(ws / "parse" / "matrix.csv"), matrix);

    ASSERT_EQ(cli({"--workspace", ws.string(), "intersect", "--platforms", "google,baidu"}).code, kExitOk);
    EXPECT_EQ(slurp(ws / "intersect" / "pages.txt"), "https://a.example/\n");

    const auto bad = cli({"--workspace", ws.string(), "--force", "intersect", "--platforms", "google,yahoo"});
    EXPECT_EQ(bad.code, kExitInput);
    EXPECT_NE(bad.err.find("yahoo"), std::string::npos);
    EXPECT_FALSE(has_scratch(ws));
    EXPECT_EQ(slurp(ws / "intersect" / "pages.txt"), "https://a.example/\n");
}

TEST(Cli, SimModeNeedsScenario)
{
    const auto ws = fresh_dir("cli_sim_mode");
    EXPECT_EQ(cli({"--workspace", ws.string(), "--mode", "sim", "run"}).code, kExitUsage);
}

TEST(Cli, SimulateEndToEnd)
{
    const auto ws = fresh_dir("cli_simulate") / "ws";
    const auto r = cli({"--workspace", ws.string(), "simulate"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto csv = slurp(ws / "score" / "scores.csv");
    EXPECT_TRUE(csv.starts_with("persona,platform,day,ttk,bailp\n"));
    EXPECT_TRUE(fs::exists(ws / "report" / "index.html"));
    EXPECT_FALSE(has_scratch(ws));
    const auto second = cli({"--workspace", ws.string(), "simulate"});
    EXPECT_EQ(second.code, kExitOk);
    EXPECT_EQ(slurp(ws / "score" / "scores.csv"), csv);
}
