#include "adxprobe/workspace.hpp"

#include "adxprobe/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include <unistd.h>

namespace adxprobe {

namespace fs = std::filesystem;

namespace {

struct DigestDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new())
    {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw Error("sha256 init failed");
    }
    void update(const void* data, std::size_t n)
    {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1)
            throw Error("sha256 update failed");
    }
    std::string hex()
    {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1)
            throw Error("sha256 final failed");
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (unsigned i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx_;
};

} // namespace

std::string sha256_hex(std::string_view data)
{
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read " + path.string());
    Sha256 h;
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

nlohmann::json StageManifest::to_json() const
{
    return {{"stage", stage}, {"inputs", inputs}, {"params", params}, {"outputs", outputs}};
}

StageManifest StageManifest::from_json(const nlohmann::json& j)
{
    StageManifest m;
    j.at("stage").get_to(m.stage);
    j.at("inputs").get_to(m.inputs);
    m.params = j.at("params");
    j.at("outputs").get_to(m.outputs);
    return m;
}

Workspace::Workspace(fs::path root) : root_(std::move(root))
{
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec)
        throw InputError("cannot create workspace " + root_.string() + ": " + ec.message());
}

fs::path Workspace::require(std::string_view stage, std::string_view name) const
{
    auto p = file(stage, name);
    if (!fs::exists(p))
        throw InputError(std::string(stage) + ": missing " + p.string() + " (run the '" + std::string(stage) +
                         "' stage first)");
    return p;
}

std::optional<StageManifest> Workspace::manifest(std::string_view stage) const
{
    std::ifstream in(file(stage, "manifest.json"));
    if (!in)
        return std::nullopt;
    try {
        return StageManifest::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

bool Workspace::up_to_date(const StageManifest& wanted) const
{
    auto have = manifest(wanted.stage);
    if (!have || !have->same_inputs(wanted))
        return false;
    return std::all_of(have->outputs.begin(), have->outputs.end(),
                       [&](const std::string& f) { return fs::exists(file(wanted.stage, f)); });
}

StageWriter::StageWriter(const Workspace& ws, std::string stage) : ws_(ws), stage_(std::move(stage))
{
    tmp_ = ws_.root() / (".tmp-" + stage_ + "-" + std::to_string(::getpid()));
    fs::remove_all(tmp_);
    fs::create_directories(tmp_);
}

StageWriter::~StageWriter()
{
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(tmp_, ec);
    }
}

void StageWriter::write(std::string_view name, std::string_view content)
{
    const auto p = path(name);
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw Error("cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw Error("write failed for " + p.string());
}

void StageWriter::commit(StageManifest manifest)
{
    manifest.stage = stage_;
    manifest.outputs.clear();
    for (const auto& entry : fs::recursive_directory_iterator(tmp_))
        if (entry.is_regular_file())
            manifest.outputs.push_back(fs::relative(entry.path(), tmp_).generic_string());
    std::sort(manifest.outputs.begin(), manifest.outputs.end());
    write("manifest.json", manifest.to_json().dump(2) + "\n");

    const auto target = ws_.stage_dir(stage_);
    const auto old = ws_.root() / (".old-" + stage_ + "-" + std::to_string(::getpid()));
    fs::remove_all(old);
    if (fs::exists(target))
        fs::rename(target, old);
    fs::rename(tmp_, target);
    fs::remove_all(old);
    committed_ = true;
}

} // namespace adxprobe
