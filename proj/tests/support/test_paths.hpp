#pragma once

#include <string>

inline std::string test_data_path(const std::string& name) {
  return std::string(LP_TEST_DATA_DIR) + "/" + name;
}
