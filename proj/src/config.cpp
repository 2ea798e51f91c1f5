#include "gafvit/config.hpp"

#include "gafvit/error.hpp"

#include <fstream>
#include <istream>
#include <set>

namespace gafvit::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Entries parse(std::istream& in, const std::string& source) {
    Entries out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) raise(Errc::SchemaError, where + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) raise(Errc::SchemaError, where + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (!seen.insert(key).second) raise(Errc::SchemaError, where + ": duplicate key '" + key + "'");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

Entries load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoError, "cannot open config " + path.string());
    return parse(in, path.string());
}

void write(const std::filesystem::path& path, const Entries& entries) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    for (const auto& [k, v] : entries) {
        const bool quote = v.empty() || v.find_first_of(" \t#") != std::string::npos;
        out << k << " = " << (quote ? "\"" + v + "\"" : v) << '\n';
    }
}

} // namespace gafvit::config
