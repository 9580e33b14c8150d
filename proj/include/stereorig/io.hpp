#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "stereorig/errors.hpp"

namespace stereorig::io {

inline void write_file(const std::string &path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw ValidationError("cannot write '" + path + "'");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f)
    throw ValidationError("failed writing '" + path + "'");
}

inline std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace stereorig::io
