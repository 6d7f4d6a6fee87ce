#pragma once

#include "adxprobe/crawl.hpp"
#include "adxprobe/detect.hpp"
#include "adxprobe/error.hpp"
#include "adxprobe/fetch.hpp"
#include "adxprobe/identify.hpp"
#include "adxprobe/run.hpp"
#include "adxprobe/sim.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace adxprobe {

/// Classification result for one page.
struct PageLabel {
    std::string url;
    int cluster = 0;
    std::string category;
};

/// Selected feature terms for one page.
struct PageFeatures {
    std::string url;
    std::vector<std::string> terms;
};

void to_json(nlohmann::json& j, const Identity& v);
void from_json(const nlohmann::json& j, Identity& v);
void to_json(nlohmann::json& j, const PersonaSpec& v);
void from_json(const nlohmann::json& j, PersonaSpec& v);
void to_json(nlohmann::json& j, const PersonaPlan& v);
void from_json(const nlohmann::json& j, PersonaPlan& v);
void to_json(nlohmann::json& j, const VisitEvent& v);
void from_json(const nlohmann::json& j, VisitEvent& v);
void to_json(nlohmann::json& j, const VisitRecord& v);
void from_json(const nlohmann::json& j, VisitRecord& v);
void to_json(nlohmann::json& j, const AdLink& v);
void from_json(const nlohmann::json& j, AdLink& v);
void to_json(nlohmann::json& j, const LandingSnapshot& v);
void from_json(const nlohmann::json& j, LandingSnapshot& v);
void to_json(nlohmann::json& j, const AdObservation& v);
void from_json(const nlohmann::json& j, AdObservation& v);
void to_json(nlohmann::json& j, const AdLabel& v);
void from_json(const nlohmann::json& j, AdLabel& v);
void to_json(nlohmann::json& j, const TranscriptEntry& v);
void from_json(const nlohmann::json& j, TranscriptEntry& v);
void to_json(nlohmann::json& j, const SimEvent& v);
void from_json(const nlohmann::json& j, SimEvent& v);
void to_json(nlohmann::json& j, const PageText& v);
void from_json(const nlohmann::json& j, PageText& v);
void to_json(nlohmann::json& j, const PageLabel& v);
void from_json(const nlohmann::json& j, PageLabel& v);
void to_json(nlohmann::json& j, const PageFeatures& v);
void from_json(const nlohmann::json& j, PageFeatures& v);
void to_json(nlohmann::json& j, const IsolationReport& v);

template <class T>
void write_jsonl(std::ostream& out, std::span<const T> items)
{
    for (const auto& item : items)
        out << nlohmann::json(item).dump() << '\n';
}

template <class T>
std::vector<T> read_jsonl(std::istream& in, const std::string& what = "record")
{
    std::vector<T> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<T>());
        } catch (const nlohmann::json::exception& e) {
            throw InputError(what + " line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

template <class T>
std::vector<T> read_jsonl_file(const std::filesystem::path& path, const std::string& what = "record")
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read " + path.string());
    return read_jsonl<T>(in, what);
}

// Records of a key -> list store, one {key_name: ..., values_name: [...]} per line.
void write_fixture_store(std::ostream& out, const std::map<std::string, std::vector<std::string>>& store,
                         const std::string& key_name, const std::string& values_name);

} // namespace adxprobe
