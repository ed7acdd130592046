#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace latsteer {

// Whole-file helpers. Failures throw IoError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Little-endian encoding into / out of a byte string.
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f64(std::string& out, double v);
std::uint32_t get_u32(std::string_view in, std::size_t offset);
std::uint64_t get_u64(std::string_view in, std::size_t offset);
double get_f64(std::string_view in, std::size_t offset);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace latsteer
