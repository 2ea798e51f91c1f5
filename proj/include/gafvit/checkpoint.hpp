#pragma once

// .gvt checkpoints: one line of JSON manifest, a newline, then every parameter
// as little-endian float64 in manifest order.

#include "gafvit/model.hpp"

#include <filesystem>

namespace gafvit {

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const GafVitModel& model);
GafVitModel load_checkpoint(const std::filesystem::path& path);

} // namespace gafvit
