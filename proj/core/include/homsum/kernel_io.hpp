#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "homsum/kernel.hpp"

namespace homsum {

/// Kernel text format: a JSON object with "format", "d", "N" and "entries",
/// one canonical record [i1, ..., id, value] per line. Values are written in
/// the shortest decimal form that round-trips to the same double.
std::string write_kernel_text(const SymmetricKernel& f);
SymmetricKernel read_kernel_text(std::string_view text);

void save_kernel(const SymmetricKernel& f, const std::filesystem::path& path);
SymmetricKernel load_kernel(const std::filesystem::path& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace homsum
