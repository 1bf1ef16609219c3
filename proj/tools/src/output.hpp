#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bbo::cli {

/// Writes `contents` to a temporary file beside `path`, then renames it into
/// place, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest form that still round-trips a double (%.17g).
std::string format_real(double v);

} // namespace bbo::cli
