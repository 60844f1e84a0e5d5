#pragma once

#include <doctest.h>

#include <cstdlib>
#include <string>

#include "vtc/dumps.hpp"

#ifndef VTC_GOLDEN_DIR
#error "VTC_GOLDEN_DIR must be defined"
#endif

// Byte comparison against tests/golden/<name>; VTC_UPDATE_GOLDEN=1 rewrites the file.
inline void check_golden(const std::string& name, const std::string& actual) {
  const std::filesystem::path path = std::filesystem::path(VTC_GOLDEN_DIR) / name;
  if (const char* update = std::getenv("VTC_UPDATE_GOLDEN"); update != nullptr && std::string(update) == "1") {
    vtc::write_file_atomic(path, actual);
    MESSAGE("rewrote " << path.string());
    return;
  }
  REQUIRE_MESSAGE(std::filesystem::exists(path), "missing golden file " << path.string());
  const std::string expected = vtc::read_file_text(path);
  INFO("golden " << name);
  CHECK(actual == expected);
}
