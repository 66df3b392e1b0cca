#ifndef CRITMET_TEXTIO_HPP
#define CRITMET_TEXTIO_HPP

#include <string>

namespace critmet {

/// Shortest decimal representation that round-trips to the same double.
std::string format_shortest(double v);

/// Fixed 17-significant-digit representation (full double precision).
std::string format_g17(double v);

/// Write `content` to `path` via a temp file and atomic rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace critmet

#endif
