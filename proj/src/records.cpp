#include "adxprobe/records.hpp"

#include "adxprobe/error.hpp"

namespace adxprobe {

using nlohmann::json;

void to_json(json& j, const Identity& v) { j = {{"user_agent", v.user_agent}, {"cookie_jar", v.cookie_jar}}; }

void from_json(const json& j, Identity& v)
{
    j.at("user_agent").get_to(v.user_agent);
    j.at("cookie_jar").get_to(v.cookie_jar);
}

void to_json(json& j, const PersonaSpec& v)
{
    j = {{"name", v.name},
         {"interest", v.interest},
         {"identity", v.identity},
         {"training_pages", v.training_pages},
         {"control_pages", v.control_pages}};
}

void from_json(const json& j, PersonaSpec& v)
{
    j.at("name").get_to(v.name);
    j.at("interest").get_to(v.interest);
    j.at("identity").get_to(v.identity);
    j.at("training_pages").get_to(v.training_pages);
    j.at("control_pages").get_to(v.control_pages);
}

void to_json(json& j, const PersonaPlan& v)
{
    json phases = json::array();
    for (const auto& p : v.phases)
        phases.push_back({{"start_day", p.start_day}, {"spec", p.spec}});
    j = {{"name", v.name}, {"seed", v.seed}, {"phases", phases}};
}

void from_json(const json& j, PersonaPlan& v)
{
    j.at("name").get_to(v.name);
    j.at("seed").get_to(v.seed);
    v.phases.clear();
    for (const auto& p : j.at("phases"))
        v.phases.push_back({p.at("start_day").get<int>(), p.at("spec").get<PersonaSpec>()});
}

void to_json(json& j, const VisitEvent& v)
{
    j = {{"at", v.at}, {"page", v.page}, {"kind", to_string(v.kind)}};
}

void from_json(const json& j, VisitEvent& v)
{
    j.at("at").get_to(v.at);
    j.at("page").get_to(v.page);
    v.kind = visit_kind_from_string(j.at("kind").get<std::string>());
}

void to_json(json& j, const VisitRecord& v)
{
    j = {{"persona", v.persona}, {"page", v.page}, {"kind", to_string(v.kind)}, {"at", v.at},
         {"day", v.day},         {"ok", v.ok},     {"error", v.error},          {"links", v.links}};
}

void from_json(const json& j, VisitRecord& v)
{
    j.at("persona").get_to(v.persona);
    j.at("page").get_to(v.page);
    v.kind = visit_kind_from_string(j.at("kind").get<std::string>());
    j.at("at").get_to(v.at);
    j.at("day").get_to(v.day);
    j.at("ok").get_to(v.ok);
    j.at("error").get_to(v.error);
    j.at("links").get_to(v.links);
}

void to_json(json& j, const AdLink& v)
{
    j = {{"discovered_at", v.discovered_at}, {"persona", v.persona}, {"control_page", v.control_page},
         {"platform", v.platform},           {"href", v.href},       {"frame_path", v.frame_path}};
}

void from_json(const json& j, AdLink& v)
{
    j.at("discovered_at").get_to(v.discovered_at);
    j.at("persona").get_to(v.persona);
    j.at("control_page").get_to(v.control_page);
    j.at("platform").get_to(v.platform);
    j.at("href").get_to(v.href);
    j.at("frame_path").get_to(v.frame_path);
}

void to_json(json& j, const LandingSnapshot& v)
{
    j = {{"final_url", v.final_url}, {"title", v.title}, {"body_text", v.body_text},
         {"images", v.images},       {"html", v.html}};
}

void from_json(const json& j, LandingSnapshot& v)
{
    j.at("final_url").get_to(v.final_url);
    j.at("title").get_to(v.title);
    j.at("body_text").get_to(v.body_text);
    j.at("images").get_to(v.images);
    j.at("html").get_to(v.html);
}

void to_json(json& j, const AdObservation& v)
{
    j = {{"id", v.id},
         {"link", v.link},
         {"snapshot", v.snapshot},
         {"fetched_at", v.fetched_at},
         {"fetch_identity", v.fetch_identity},
         {"day_index", v.day_index},
         {"status", to_string(v.status)},
         {"reason", v.reason}};
}

void from_json(const json& j, AdObservation& v)
{
    j.at("id").get_to(v.id);
    j.at("link").get_to(v.link);
    j.at("snapshot").get_to(v.snapshot);
    j.at("fetched_at").get_to(v.fetched_at);
    j.at("fetch_identity").get_to(v.fetch_identity);
    j.at("day_index").get_to(v.day_index);
    v.status = fetch_status_from_string(j.at("status").get<std::string>());
    j.at("reason").get_to(v.reason);
}

void to_json(json& j, const AdLabel& v)
{
    std::vector<std::string> attempts;
    for (auto m : v.attempts)
        attempts.emplace_back(to_string(m));
    j = {{"observation_id", v.observation_id},
         {"keywords", v.keywords},
         {"category", v.category},
         {"method", to_string(v.method)},
         {"attempts", attempts},
         {"reason", v.reason}};
}

void from_json(const json& j, AdLabel& v)
{
    j.at("observation_id").get_to(v.observation_id);
    j.at("keywords").get_to(v.keywords);
    j.at("category").get_to(v.category);
    v.method = identify_method_from_string(j.at("method").get<std::string>());
    v.attempts.clear();
    for (const auto& a : j.value("attempts", std::vector<std::string>{}))
        v.attempts.push_back(identify_method_from_string(a));
    v.reason = j.value("reason", std::string());
}

void to_json(json& j, const TranscriptEntry& v)
{
    j = {{"at", v.at}, {"cookie_jar", v.cookie_jar}, {"user_agent", v.user_agent}, {"target", v.target},
         {"status", v.status}};
}

void from_json(const json& j, TranscriptEntry& v)
{
    j.at("at").get_to(v.at);
    j.at("cookie_jar").get_to(v.cookie_jar);
    j.at("user_agent").get_to(v.user_agent);
    j.at("target").get_to(v.target);
    j.at("status").get_to(v.status);
}

void to_json(json& j, const SimEvent& v)
{
    j = {{"time", v.time}, {"actor", v.actor}, {"action", v.action}, {"detail", v.detail}};
}

void from_json(const json& j, SimEvent& v)
{
    j.at("time").get_to(v.time);
    j.at("actor").get_to(v.actor);
    j.at("action").get_to(v.action);
    j.at("detail").get_to(v.detail);
}

void to_json(json& j, const PageText& v) { j = {{"url", v.url}, {"text", v.text}}; }

void from_json(const json& j, PageText& v)
{
    j.at("url").get_to(v.url);
    j.at("text").get_to(v.text);
}

void to_json(json& j, const PageLabel& v) { j = {{"url", v.url}, {"cluster", v.cluster}, {"category", v.category}}; }

void from_json(const json& j, PageLabel& v)
{
    j.at("url").get_to(v.url);
    j.at("cluster").get_to(v.cluster);
    j.at("category").get_to(v.category);
}

void to_json(json& j, const PageFeatures& v) { j = {{"url", v.url}, {"terms", v.terms}}; }

void from_json(const json& j, PageFeatures& v)
{
    j.at("url").get_to(v.url);
    j.at("terms").get_to(v.terms);
}

void to_json(json& j, const IsolationReport& v)
{
    j = {{"landing_requests", v.landing_requests},
         {"persona_landing_requests", v.persona_landing_requests},
         {"violations", v.violations},
         {"fresh", v.fresh},
         {"stale", v.stale},
         {"failed", v.failed},
         {"dropped", v.dropped},
         {"unflagged_late", v.unflagged_late},
         {"ok", v.ok()}};
}

void write_fixture_store(std::ostream& out, const std::map<std::string, std::vector<std::string>>& store,
                         const std::string& key_name, const std::string& values_name)
{
    for (const auto& [key, values] : store)
        out << json{{key_name, key}, {values_name, values}}.dump() << '\n';
}

} // namespace adxprobe
