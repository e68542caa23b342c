#pragma once

#include <filesystem>
#include <string>

namespace nsfide::io {

/// Fixed 17-significant-digit decimal formatting; bit-stable text for
/// reproducibility audits.
std::string format_number(double x);

/// Write via temp file + rename so readers never see partial output.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace nsfide::io
