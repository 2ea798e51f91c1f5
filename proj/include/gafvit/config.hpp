#pragma once

// Flat `key = value` run configuration files.
//
//   # comment
//   epochs = 20
//   patch-mode = "strip"
//   no-attention = true

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gafvit::config {

using Entries = std::vector<std::pair<std::string, std::string>>;

Entries parse(std::istream& in, const std::string& source = "<stream>");
Entries load(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Entries& entries);

} // namespace gafvit::config
