#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vtoldock::io {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file. Throws std::runtime_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace vtoldock::io
