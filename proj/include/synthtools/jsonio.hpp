#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace synthtools {

using Json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Json read_json_file(const std::filesystem::path& path) {
    return Json::parse(read_text_file(path));
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out << text;
}

// Artifact serialization: sorted keys (nlohmann object order), 2-space
// indent, trailing newline. Byte-stable across runs for equal inputs.
inline void write_json_file(const std::filesystem::path& path, const Json& value) {
    write_text_file(path, value.dump(2) + "\n");
}

}  // namespace synthtools
