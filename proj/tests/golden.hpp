#pragma once

#include <fstream>
#include <sstream>
#include <string>

#ifndef EAE_GOLDEN_DIR
#error "EAE_GOLDEN_DIR must be defined"
#endif

namespace eae::test {

inline std::string golden(const std::string& name) {
  std::ifstream in(std::string(EAE_GOLDEN_DIR) + "/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace eae::test
