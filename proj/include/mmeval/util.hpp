#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mm {

std::string sha256Hex(std::string_view data);
std::string sha256HexOfFile(const std::filesystem::path& path);

/// Current wall-clock time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utcNowIso8601();

std::string readFile(const std::filesystem::path& path);

/// Reads a text file as lines, dropping the trailing newline of each.
std::vector<std::string> readLines(const std::filesystem::path& path);

void writeFile(const std::filesystem::path& path, std::string_view content);

}  // namespace mm
