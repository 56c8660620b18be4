#include "support/jsonio.hpp"

#include <fstream>
#include <sstream>

#include "support/errors.hpp"

namespace ca::jsonio {

nlohmann::json parse(const std::string& content, const std::string& what) {
  nlohmann::json j = nlohmann::json::parse(content, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::parse, what + ": invalid JSON");
  }
  return j;
}

nlohmann::json load_file(const std::filesystem::path& path) {
  return parse(load_text_file(path), path.string());
}

std::string load_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void save_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io, "cannot write file: " + path.string());
  }
  out << content;
  if (!out) {
    throw Error(ErrorCode::io, "write failed: " + path.string());
  }
}

}  // namespace ca::jsonio
