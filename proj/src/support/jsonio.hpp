#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace ca::jsonio {

nlohmann::json parse(const std::string& content, const std::string& what);

nlohmann::json load_file(const std::filesystem::path& path);

std::string load_text_file(const std::filesystem::path& path);

void save_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ca::jsonio
