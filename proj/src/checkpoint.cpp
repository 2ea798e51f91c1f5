#include "gafvit/checkpoint.hpp"

#include "gafvit/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gafvit {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_f64(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<double>(bits);
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const GafVitModel& model) {
    const ParamStore& store = model.params();
    nlohmann::json manifest;
    manifest["format"] = "gvt";
    manifest["version"] = kCheckpointVersion;
    manifest["config"] = to_json(model.config());
    manifest["seed"] = store.seed;
    manifest["step"] = store.step;
    auto entries = nlohmann::json::array();
    std::size_t offset = 0;
    std::string payload;
    payload.reserve(store.total_size() * 8);
    for (const auto& p : store.all()) {
        entries.push_back({{"name", p.name}, {"shape", {p.value.rows, p.value.cols}}, {"offset", offset}});
        for (double v : p.value.data) put_f64(payload, v);
        offset += p.value.data.size() * 8;
    }
    manifest["params"] = std::move(entries);

    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::IoError, "cannot open " + path.string() + " for writing");
    out << manifest.dump() << '\n';
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) raise(Errc::IoError, "failed writing " + path.string());
}

GafVitModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) raise(Errc::CheckpointFormat, path.string() + ": missing manifest");
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::CheckpointFormat, path.string() + ": bad manifest: " + e.what());
    }
    try {
        if (manifest.at("format") != "gvt") raise(Errc::CheckpointFormat, path.string() + ": not a gvt file");
        if (manifest.at("version").get<int>() != kCheckpointVersion)
            raise(Errc::CheckpointFormat, path.string() + ": unsupported version");
        ModelConfig config = model_config_from_json(manifest.at("config"));
        // Build the layout from the config, then fill it from the payload.
        GafVitModel model(config, manifest.at("seed").get<std::uint64_t>());
        ParamStore& store = model.params();
        const auto& entries = manifest.at("params");
        if (entries.size() != store.all().size())
            raise(Errc::CheckpointFormat, path.string() + ": parameter count differs from the config");
        for (const auto& e : entries) {
            const auto name = e.at("name").get<std::string>();
            if (!store.contains(name)) raise(Errc::CheckpointFormat, path.string() + ": unknown parameter " + name);
            Parameter& p = store.at(name);
            const auto rows = e.at("shape").at(0).get<std::size_t>();
            const auto cols = e.at("shape").at(1).get<std::size_t>();
            if (rows != p.value.rows || cols != p.value.cols)
                raise(Errc::CheckpointFormat, path.string() + ": shape mismatch for " + name);
            const auto offset = e.at("offset").get<std::size_t>();
            if (offset + p.value.data.size() * 8 > payload.size())
                raise(Errc::CheckpointFormat, path.string() + ": payload truncated at " + name);
            for (std::size_t i = 0; i < p.value.data.size(); ++i) p.value.data[i] = get_f64(payload.data() + offset + 8 * i);
        }
        store.seed = manifest.at("seed").get<std::uint64_t>();
        store.step = manifest.at("step").get<std::uint64_t>();
        return model;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::CheckpointFormat, path.string() + ": bad manifest: " + e.what());
    }
}

} // namespace gafvit
