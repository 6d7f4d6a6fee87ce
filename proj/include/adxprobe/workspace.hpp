#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe {

std::string sha256_hex(std::string_view data);
// Throws when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// What a stage consumed and produced; stored as manifest.json inside the stage directory.
struct StageManifest {
    std::string stage;
    std::map<std::string, std::string> inputs; // logical name -> sha256
    nlohmann::json params = nlohmann::json::object();
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
    static StageManifest from_json(const nlohmann::json& j);
    bool same_inputs(const StageManifest& other) const { return stage == other.stage && inputs == other.inputs && params == other.params; }
};

/// A workspace directory holding one sub-directory per pipeline stage.
class Workspace {
public:
    explicit Workspace(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path stage_dir(std::string_view stage) const { return root_ / std::string(stage); }
    std::filesystem::path file(std::string_view stage, std::string_view name) const { return stage_dir(stage) / std::string(name); }
    // Throws InputError naming the stage when the file is missing.
    std::filesystem::path require(std::string_view stage, std::string_view name) const;
    std::optional<StageManifest> manifest(std::string_view stage) const;
    // True when the stored manifest matches `wanted` and every listed output is present.
    bool up_to_date(const StageManifest& wanted) const;

private:
    std::filesystem::path root_;
};

/// Writes a stage into a scratch directory; commit() swaps it into place.
/// Destruction without commit removes the scratch directory.
class StageWriter {
public:
    StageWriter(const Workspace& ws, std::string stage);
    ~StageWriter();
    StageWriter(const StageWriter&) = delete;
    StageWriter& operator=(const StageWriter&) = delete;

    const std::filesystem::path& dir() const { return tmp_; }
    std::filesystem::path path(std::string_view name) const { return tmp_ / std::string(name); }
    void write(std::string_view name, std::string_view content);
    // Records outputs (every regular file written, sorted) and renames into place.
    void commit(StageManifest manifest);

private:
    const Workspace& ws_;
    std::string stage_;
    std::filesystem::path tmp_;
    bool committed_ = false;
};

} // namespace adxprobe
