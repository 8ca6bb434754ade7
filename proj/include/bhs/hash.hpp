#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace bhs {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view bytes);

std::string to_hex(const Digest& digest);
std::string sha256_hex(std::string_view bytes);

/// Hex SHA-256 of a file's contents. Throws Error(kFileNotFound) if absent.
std::string sha256_file_hex(const std::filesystem::path& path);

/// Reads a whole file into a string. Throws Error(kFileNotFound) if absent.
std::string read_file(const std::filesystem::path& path);

/// Writes bytes verbatim (binary mode), creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace bhs
