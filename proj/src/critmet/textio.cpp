#include "critmet/textio.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "critmet/errors.hpp"

namespace critmet {

std::string format_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io_error, "cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::io_error, "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorCode::io_error, "rename " + tmp + " -> " + path + " failed");
}

}  // namespace critmet
