#include "adxprobe/error.hpp"
#include "adxprobe/persona.hpp"
#include "adxprobe/sim.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace adxprobe {

using nlohmann::json;

namespace {

PublisherGroup parse_group(const json& j)
{
    PublisherGroup g;
    g.category = j.at("category").get<std::string>();
    g.count = j.at("count").get<int>();
    g.exchanges = j.at("exchanges").get<std::vector<std::string>>();
    g.language = j.value("language", std::string("zh"));
    g.slots = j.value("slots", 1);
    return g;
}

} // namespace

Scenario Scenario::parse(std::string_view json_text)
{
    Scenario s;
    try {
        const auto j = json::parse(json_text);
        s.seed = j.at("seed").get<std::uint64_t>();
        s.day_length = j.value("day_length", 86400.0);
        s.mean_gap = j.value("mean_gap", 180.0);
        s.days = j.value("days", 10);
        s.freshness_bound = j.value("freshness_bound", 30.0);
        s.reader_jar = j.value("reader", std::string("reader-0"));
        for (const auto& e : j.at("exchanges")) {
            ExchangePolicy p;
            p.platform = e.at("platform").get<std::string>();
            p.mode = targeting_mode_from_string(e.at("mode").get<std::string>());
            p.reaction_delay_days = e.value("reaction_delay_days", 0);
            p.memory_decay_per_day = e.value("memory_decay_per_day", 0.0);
            p.targeting_boost = e.value("targeting_boost", 0.0);
            p.profile_threshold = e.value("profile_threshold", 3.0);
            p.frame_depth = e.value("frame_depth", 1);
            s.exchanges.push_back(std::move(p));
        }
        for (const auto& g : j.at("publishers"))
            s.publishers.push_back(parse_group(g));
        s.controls = parse_group(j.at("controls"));
        const auto& inv = j.at("inventory");
        s.inventory.categories = inv.at("categories").get<std::vector<std::string>>();
        s.inventory.general_per_category = inv.value("general_per_category", 1);
        s.inventory.behavioral_per_category = inv.value("behavioral_per_category", 2);
        s.inventory.opaque_per_category = inv.value("opaque_per_category", 0);
        s.inventory.broken_every = inv.value("broken_every", 0);
        s.inventory.slow_every = inv.value("slow_every", 0);
        s.inventory.slow_latency = inv.value("slow_latency", 60.0);
        for (const auto& p : j.at("personas")) {
            ScenarioPersona sp;
            sp.name = p.at("name").get<std::string>();
            sp.interest = p.at("interest").get<std::string>();
            sp.user_agent = p.at("user_agent").get<std::string>();
            sp.seed = p.at("seed").get<std::uint64_t>();
            if (p.contains("switch"))
                sp.switch_to = PersonaSwitch{p["switch"].at("day").get<int>(),
                                             p["switch"].at("interest").get<std::string>()};
            s.personas.push_back(std::move(sp));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario: ") + e.what());
    }
    return s;
}

Scenario Scenario::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read scenario " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void Scenario::validate(const AdxRuleset& ruleset, const Taxonomy& taxonomy) const
{
    if (day_length <= 0 || mean_gap <= 0 || days < 1 || freshness_bound <= 0)
        throw InputError("scenario: day length, mean gap, days and freshness bound must be positive");
    std::set<std::string> platforms;
    for (const auto& e : exchanges) {
        if (!ruleset.contains(e.platform))
            throw InputError("scenario: exchange '" + e.platform + "' is not in the ruleset");
        if (!platforms.insert(e.platform).second)
            throw InputError("scenario: exchange '" + e.platform + "' listed twice");
        e.validate();
    }
    auto check_group = [&](const PublisherGroup& g) {
        if (g.language == "zh" && !taxonomy.contains(g.category))
            throw InputError("scenario: page category '" + g.category + "' is not in the taxonomy");
        if (g.language != "zh" && g.language != "en")
            throw InputError("scenario: unsupported page language '" + g.language + "'");
        if (g.count < 0 || g.slots < 0)
            throw InputError("scenario: negative page or slot count");
        for (const auto& x : g.exchanges)
            if (!platforms.contains(x))
                throw InputError("scenario: page embeds unknown exchange '" + x + "'");
    };
    for (const auto& g : publishers)
        check_group(g);
    check_group(controls);
    if (controls.count != static_cast<int>(kControlPages))
        throw InputError("scenario: exactly 5 control pages are required");
    for (const auto& c : inventory.categories)
        if (!taxonomy.contains(c))
            throw InputError("scenario: inventory category '" + c + "' is not in the taxonomy");
    if (inventory.general_per_category < 1 || inventory.behavioral_per_category < 0 ||
        inventory.opaque_per_category < 0)
        throw InputError("scenario: invalid inventory counts");
    std::set<std::string> names;
    for (const auto& p : personas) {
        if (!names.insert(p.name).second)
            throw InputError("scenario: persona '" + p.name + "' listed twice");
        if (p.name == reader_jar)
            throw InputError("scenario: persona '" + p.name + "' reuses the reader cookie jar");
        if (p.interest != kBlankInterest && !taxonomy.contains(p.interest))
            throw InputError("scenario: persona interest '" + p.interest + "' is not in the taxonomy");
        if (p.switch_to && (p.switch_to->day < 2 || p.switch_to->day > days || !taxonomy.contains(p.switch_to->interest)))
            throw InputError("scenario: persona '" + p.name + "' has an invalid interest switch");
    }
}

} // namespace adxprobe
