#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace nusavocab {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace nusavocab
