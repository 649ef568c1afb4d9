#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "agentosi/canonical_json.hpp"

namespace agentosi::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(AGENTOSI_FIXTURE_DIR) / name;
}

inline Json load_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::ostringstream os;
  os << in.rdbuf();
  return Json::parse(os.str());
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("agentosi-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace agentosi::testing
